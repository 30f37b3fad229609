#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/provider/provider.hpp"
#include "duet/provider/scheduler.hpp"

namespace duet::provider {

/// One scripted emission. `at_ms` is measured from the moment the request
/// was issued, so a script [(10,"a"), (20,"b")] emits "b" at t=20.
struct ScriptStep {
  Millis at_ms = 0;
  std::string chunk;
  bool fail = false;
  std::string fail_message = "injected";

  friend bool operator==(const ScriptStep&, const ScriptStep&) = default;
};

using MockScript = std::vector<ScriptStep>;

/// Parses `[{"latency_ms": 10, "chunk": "a"}, {"fail": true}, ...]`.
/// `fail` may also be a string, used as the error message. Steps without a
/// latency inherit the previous step's time.
MockScript parse_mock_script(const nlohmann::json& doc);
MockScript load_mock_script(const std::filesystem::path& path);

/// Concatenation of the chunks emitted before any fail-point.
std::string script_reply(const MockScript& script);
/// Virtual time of the terminal event relative to request start.
Millis script_completion_time(const MockScript& script);
bool script_fails(const MockScript& script);

/// Splits `reply` into `pieces` roughly equal chunks spaced `step_ms` apart.
MockScript chunked_script(std::string_view reply, std::size_t pieces,
                          Millis step_ms);

/// Schedules `script` on `scheduler` starting now. Chunks become deltas at
/// their scripted times; the terminal event follows the last step.
void mock_respond(Scheduler& scheduler, const MockScript& script,
                  std::shared_ptr<EventEmitter> emitter);

/// Offline provider replaying scripts under a Scheduler. The n-th request
/// uses the n-th script; once the list runs out the last script repeats.
class MockProvider final : public ChatProvider {
 public:
  MockProvider(Scheduler& scheduler, std::vector<MockScript> scripts,
               std::shared_ptr<RequestRecorder> recorder = nullptr,
               std::int64_t context_tokens = default_descriptor(ProviderKind::Mock).context_tokens);

  std::size_t requests_seen() const;

 private:
  void do_send_chat(ChatRequest request, EventSink sink) override;

  Scheduler& scheduler_;
  std::vector<MockScript> scripts_;
  std::shared_ptr<RequestRecorder> recorder_;
  std::int64_t context_tokens_;
  mutable std::mutex mu_;
  std::size_t requests_ = 0;
};

}  // namespace duet::provider
