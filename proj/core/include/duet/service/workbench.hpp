#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/corpus/corpus.hpp"
#include "duet/experiment/experiment.hpp"
#include "duet/provider/provider.hpp"
#include "duet/provider/scheduler.hpp"
#include "duet/service/config.hpp"
#include "duet/service/session_host.hpp"

namespace duet::service {

/// Result of a corpus (re)load as reported to the user.
struct CorpusStatus {
  bool ok = false;
  std::string message;
  std::size_t chapters = 0;
  std::string root;
};

/// Process-wide state behind the HTTP API: the corpus, the session registry
/// (backed by one JSONL log per session under data_dir) and the timing
/// store. Transport-agnostic; the HTTP layer only translates.
class Workbench {
 public:
  /// `factory` builds one provider per model slot; when empty, mock slots
  /// get a MockProvider on `scheduler` and the rest an HttpProvider.
  Workbench(ServiceConfig config, provider::Scheduler& scheduler,
            provider::ProviderFactory factory = {});
  ~Workbench();

  const ServiceConfig& config() const noexcept { return config_; }
  provider::Scheduler& scheduler() noexcept { return scheduler_; }
  /// Outbound request bodies from the default provider factory.
  std::shared_ptr<provider::RequestRecorder> recorder() const noexcept {
    return recorder_;
  }

  /// On failure the previous corpus stays in place.
  CorpusStatus load_corpus(const std::filesystem::path& root);
  CorpusStatus corpus_status() const;
  std::shared_ptr<const corpus::CorpusIndex> corpus() const;

  /// Restores every <id>.jsonl in data_dir. Returns the number restored;
  /// unreadable logs are reported in `errors`.
  std::size_t restore_sessions(std::vector<std::string>* errors = nullptr);

  std::shared_ptr<SessionHost> create_session(
      std::optional<std::vector<provider::ModelConfig>> models = std::nullopt);
  /// Throws UnknownSession.
  std::shared_ptr<SessionHost> find_session(const std::string& id) const;
  std::vector<std::string> session_ids() const;

  // Experiment store; every mutation is persisted to data_dir/experiment.csv.
  void record_timing(experiment::TimingRecord record);
  experiment::TimingSummary timing_summary() const;
  std::string timing_table(experiment::TableFormat format) const;
  std::vector<experiment::TimingRecord> timing_records() const;

  void timer_start(const std::string& problem, experiment::Condition condition);
  void timer_pause();
  void timer_resume();
  experiment::TimingRecord timer_stop();
  nlohmann::json timer_state() const;

 private:
  SessionHost::Providers make_providers(
      const std::vector<provider::ModelConfig>& models);
  std::string new_session_id();
  std::filesystem::path log_path(const std::string& id) const;
  HostOptions host_options() const;
  void persist_timings() const;

  ServiceConfig config_;
  provider::Scheduler& scheduler_;
  provider::ProviderFactory factory_;
  std::shared_ptr<provider::RequestRecorder> recorder_;

  mutable std::mutex corpus_mu_;
  std::shared_ptr<const corpus::CorpusIndex> corpus_;
  CorpusStatus corpus_status_;

  mutable std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<SessionHost>> sessions_;

  mutable std::mutex timing_mu_;
  experiment::TimingStore timings_;
  experiment::ImplementationTimer timer_;
};

}  // namespace duet::service
