#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "duet/corpus/corpus.hpp"
#include "duet/provider/provider.hpp"
#include "duet/provider/scheduler.hpp"
#include "duet/service/event_hub.hpp"
#include "duet/session/log.hpp"
#include "duet/session/session.hpp"

namespace duet::service {

struct HostOptions {
  session::PromptTemplate prompt;
  std::map<std::string, session::PromptTemplate> model_prompts;
  std::size_t subscriber_capacity = 10000;
};

/// A live session: the single writer for its Session, its JSONL log and its
/// event hub. Every mutation (API calls and provider events alike) takes the
/// same lock, appends to the log, then publishes. Provider requests are
/// issued after the lock is released.
class SessionHost : public std::enable_shared_from_this<SessionHost> {
 public:
  using Providers = std::map<std::string, std::shared_ptr<provider::ChatProvider>>;

  /// New session; writes the creation record. `log_path` empty disables
  /// persistence.
  static std::shared_ptr<SessionHost> create(
      session::Session session, Providers providers,
      provider::Scheduler& scheduler, std::filesystem::path log_path,
      HostOptions options = {});

  /// Rebuilds from a log. Requests that were in flight when the log ends get
  /// a terminal error event, since their streams are gone.
  static std::shared_ptr<SessionHost> restore(
      const std::vector<session::SessionLogRecord>& records, Providers providers,
      provider::Scheduler& scheduler, std::filesystem::path log_path,
      HostOptions options = {});

  ~SessionHost();

  const std::string& id() const noexcept { return id_; }
  session::Session snapshot() const;

  /// Throws SessionActive, InvalidArgument, MissingChapter (reference aliases
  /// are checked against `index` before anything is stored).
  bool set_input(session::InputField field, const std::string& value,
                 const corpus::CorpusIndex& index);

  /// Assembles the prompt and fans it out to every model.
  void start(const corpus::CorpusIndex& index);

  void send_message(const session::Target& target, const std::string& text);

  std::shared_ptr<Subscription> subscribe(Cursors since = {},
                                          bool close_when_idle = false);
  EventHub& hub() noexcept { return hub_; }

 private:
  SessionHost(session::Session session, Providers providers,
              provider::Scheduler& scheduler, std::filesystem::path log_path,
              HostOptions options);

  /// Caller holds mu_.
  void commit(session::SessionLogRecord record);
  void fan_out(const std::vector<session::OutboundRequest>& requests);
  void on_event(const std::string& model_id, std::uint32_t turn,
                const provider::StreamEvent& event);

  std::string id_;
  mutable std::mutex mu_;
  session::Session session_;
  Providers providers_;
  provider::Scheduler& scheduler_;
  std::unique_ptr<session::SessionLogWriter> log_;
  HostOptions options_;
  EventHub hub_;
};

/// Hub item a log record produces on the wire, if any.
std::optional<HubItem> hub_item_for(const std::string& session_id,
                                    const session::SessionLogRecord& record);

}  // namespace duet::service
