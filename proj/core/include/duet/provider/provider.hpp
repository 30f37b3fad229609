#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/provider/types.hpp"

namespace duet::provider {

struct ChatRequest {
  std::string session_id;
  ModelConfig config;
  Transcript transcript;
};

using EventSink = std::function<void(const StreamEvent&)>;

/// Body of one outbound request as it would be sent on the wire.
struct CapturedRequest {
  std::string model_id;
  std::string path;
  nlohmann::json body;
};

/// Thread-safe log of outbound request bodies, shared by providers that are
/// asked to record what they send.
class RequestRecorder {
 public:
  void record(CapturedRequest request);
  std::vector<CapturedRequest> all() const;
  std::vector<CapturedRequest> for_model(const std::string& model_id) const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<CapturedRequest> requests_;
};

/// Stamps events with session/model ids and consecutive seq numbers, and
/// drops anything emitted after the terminal event.
class EventEmitter {
 public:
  EventEmitter(std::string session_id, std::string model_id, EventSink sink);

  void delta(std::string text);
  void done();
  void error(std::string message);

  bool finished() const noexcept { return finished_; }

 private:
  void emit(EventKind kind, std::string text);

  std::string session_id_;
  std::string model_id_;
  EventSink sink_;
  std::uint64_t next_seq_ = 0;
  bool finished_ = false;
};

/// Uniform entry point for every chat backend. One instance serves one model
/// slot.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;

  /// Starts one request and returns immediately. Events reach `sink` in seq
  /// order from another call stack (never from inside send_chat), ending in
  /// exactly one Done or Error. Credential and transport failures arrive as
  /// Error events.
  ///
  /// Throws InvalidArgument when the transcript is empty or does not end
  /// with a user message.
  void send_chat(ChatRequest request, EventSink sink);

 private:
  virtual void do_send_chat(ChatRequest request, EventSink sink) = 0;
};

using ProviderFactory =
    std::function<std::shared_ptr<ChatProvider>(const ModelConfig&)>;

}  // namespace duet::provider
