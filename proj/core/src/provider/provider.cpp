#include "duet/provider/provider.hpp"

#include "duet/error.hpp"

namespace duet::provider {

void RequestRecorder::record(CapturedRequest request) {
  std::lock_guard lock(mu_);
  requests_.push_back(std::move(request));
}

std::vector<CapturedRequest> RequestRecorder::all() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::vector<CapturedRequest> RequestRecorder::for_model(
    const std::string& model_id) const {
  std::lock_guard lock(mu_);
  std::vector<CapturedRequest> out;
  for (const auto& r : requests_) {
    if (r.model_id == model_id) out.push_back(r);
  }
  return out;
}

std::size_t RequestRecorder::size() const {
  std::lock_guard lock(mu_);
  return requests_.size();
}

EventEmitter::EventEmitter(std::string session_id, std::string model_id,
                           EventSink sink)
    : session_id_(std::move(session_id)),
      model_id_(std::move(model_id)),
      sink_(std::move(sink)) {}

void EventEmitter::delta(std::string text) {
  if (text.empty()) return;
  emit(EventKind::Delta, std::move(text));
}

void EventEmitter::done() { emit(EventKind::Done, {}); }

void EventEmitter::error(std::string message) {
  emit(EventKind::Error, std::move(message));
}

void EventEmitter::emit(EventKind kind, std::string text) {
  if (finished_) return;
  finished_ = kind != EventKind::Delta;
  sink_(StreamEvent{session_id_, model_id_, next_seq_++, kind, std::move(text)});
}

void ChatProvider::send_chat(ChatRequest request, EventSink sink) {
  if (request.transcript.empty()) {
    throw Error(ErrorCode::InvalidArgument, "transcript must not be empty");
  }
  if (request.transcript.back().role != Role::User) {
    throw Error(ErrorCode::InvalidArgument,
                "transcript must end with a user message");
  }
  validate(request.config);
  do_send_chat(std::move(request), std::move(sink));
}

}  // namespace duet::provider
