#include "duet/service/workbench.hpp"

#include <algorithm>
#include <random>

#include "duet/error.hpp"
#include "duet/provider/http_provider.hpp"
#include "duet/provider/mock_provider.hpp"

namespace duet::service {

namespace fs = std::filesystem;
using provider::ProviderKind;

Workbench::Workbench(ServiceConfig config, provider::Scheduler& scheduler,
                     provider::ProviderFactory factory)
    : config_(std::move(config)),
      scheduler_(scheduler),
      factory_(std::move(factory)),
      recorder_(std::make_shared<provider::RequestRecorder>()),
      corpus_(std::make_shared<corpus::CorpusIndex>()),
      timer_(scheduler) {
  validate(config_);
  fs::create_directories(config_.data_dir);
  corpus_status_ = {true, "No corpus loaded", 0, ""};
  if (!config_.corpus_root.empty()) {
    const auto status = load_corpus(config_.corpus_root);
    if (!status.ok) throw Error(ErrorCode::BadConfig, status.message);
  }
  timings_ = experiment::TimingStore::load(config_.data_dir / "experiment.csv");
}

Workbench::~Workbench() {
  // hosts own providers whose workers call back into the hosts
  std::lock_guard lock(sessions_mu_);
  sessions_.clear();
}

CorpusStatus Workbench::load_corpus(const fs::path& root) {
  auto result = corpus::load_corpus(root);
  std::lock_guard lock(corpus_mu_);
  if (!result.status.ok) {
    return {false, result.status.message, corpus_ ? corpus_->size() : 0,
            root.string()};
  }
  corpus_ = std::make_shared<const corpus::CorpusIndex>(std::move(*result.index));
  corpus_status_ = {true, result.status.message, corpus_->size(), root.string()};
  return corpus_status_;
}

CorpusStatus Workbench::corpus_status() const {
  std::lock_guard lock(corpus_mu_);
  return corpus_status_;
}

std::shared_ptr<const corpus::CorpusIndex> Workbench::corpus() const {
  std::lock_guard lock(corpus_mu_);
  return corpus_;
}

SessionHost::Providers Workbench::make_providers(
    const std::vector<provider::ModelConfig>& models) {
  SessionHost::Providers out;
  for (const auto& m : models) {
    if (factory_) {
      out[m.model_id] = factory_(m);
      continue;
    }
    const auto& descriptor = config_.descriptor(m.provider);
    if (m.provider == ProviderKind::Mock) {
      std::vector<provider::MockScript> scripts;
      if (const auto it = config_.mock_scripts.find(m.model_id);
          it != config_.mock_scripts.end()) {
        scripts = it->second;
      }
      out[m.model_id] = std::make_shared<provider::MockProvider>(
          scheduler_, std::move(scripts), recorder_, descriptor.context_tokens);
    } else {
      out[m.model_id] = std::make_shared<provider::HttpProvider>(descriptor, recorder_);
    }
  }
  return out;
}

std::string Workbench::new_session_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  static constexpr char kHex[] = "0123456789abcdef";
  for (;;) {
    std::string id(16, '0');
    auto bits = rng();
    for (auto& c : id) {
      c = kHex[bits & 0xF];
      bits >>= 4;
    }
    std::lock_guard lock(sessions_mu_);
    if (sessions_.count(id) == 0 && !fs::exists(log_path(id))) return id;
  }
}

fs::path Workbench::log_path(const std::string& id) const {
  return config_.data_dir / (id + ".jsonl");
}

HostOptions Workbench::host_options() const {
  return {config_.prompt, config_.model_prompts, config_.subscriber_capacity};
}

std::size_t Workbench::restore_sessions(std::vector<std::string>* errors) {
  std::size_t restored = 0;
  std::vector<fs::path> logs;
  for (const auto& entry : fs::directory_iterator(config_.data_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      logs.push_back(entry.path());
    }
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& path : logs) {
    try {
      const auto records = session::read_log(path);
      const auto session = session::replay_log(records);
      auto host = SessionHost::restore(records, make_providers(session.models()),
                                       scheduler_, path, host_options());
      std::lock_guard lock(sessions_mu_);
      sessions_[host->id()] = std::move(host);
      ++restored;
    } catch (const Error& e) {
      if (errors) errors->push_back(path.filename().string() + ": " + e.what());
    }
  }
  return restored;
}

std::shared_ptr<SessionHost> Workbench::create_session(
    std::optional<std::vector<provider::ModelConfig>> models) {
  auto chosen = models ? std::move(*models) : config_.models;
  auto session = session::Session::create(new_session_id(), chosen);
  const auto id = session.id();
  auto host = SessionHost::create(std::move(session), make_providers(chosen),
                                  scheduler_, log_path(id), host_options());
  std::lock_guard lock(sessions_mu_);
  sessions_[id] = host;
  return host;
}

std::shared_ptr<SessionHost> Workbench::find_session(const std::string& id) const {
  std::lock_guard lock(sessions_mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::UnknownSession, "unknown session '" + id + "'");
  }
  return it->second;
}

std::vector<std::string> Workbench::session_ids() const {
  std::lock_guard lock(sessions_mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

void Workbench::persist_timings() const {
  timings_.save(config_.data_dir / "experiment.csv");
}

void Workbench::record_timing(experiment::TimingRecord record) {
  std::lock_guard lock(timing_mu_);
  timings_.record(std::move(record));
  persist_timings();
}

experiment::TimingSummary Workbench::timing_summary() const {
  std::lock_guard lock(timing_mu_);
  return timings_.summarize();
}

std::string Workbench::timing_table(experiment::TableFormat format) const {
  std::lock_guard lock(timing_mu_);
  return timings_.export_table(format);
}

std::vector<experiment::TimingRecord> Workbench::timing_records() const {
  std::lock_guard lock(timing_mu_);
  return timings_.records();
}

void Workbench::timer_start(const std::string& problem,
                            experiment::Condition condition) {
  std::lock_guard lock(timing_mu_);
  if (timings_.minutes(problem, condition)) {
    throw Error(ErrorCode::DuplicateRecord,
                "a " + std::string(experiment::to_string(condition)) +
                    " time is already recorded for " + problem);
  }
  timer_.start(problem, condition);
}

void Workbench::timer_pause() {
  std::lock_guard lock(timing_mu_);
  timer_.pause();
}

void Workbench::timer_resume() {
  std::lock_guard lock(timing_mu_);
  timer_.resume();
}

experiment::TimingRecord Workbench::timer_stop() {
  std::lock_guard lock(timing_mu_);
  auto record = timer_.stop();
  timings_.record(record);
  persist_timings();
  return record;
}

nlohmann::json Workbench::timer_state() const {
  std::lock_guard lock(timing_mu_);
  nlohmann::json j{{"running", timer_.running()},
                   {"paused", timer_.paused()},
                   {"elapsed_minutes", timer_.elapsed_minutes()}};
  if (const auto cur = timer_.current()) {
    j["problem"] = cur->first;
    j["condition"] = experiment::to_string(cur->second);
  }
  return j;
}

}  // namespace duet::service
