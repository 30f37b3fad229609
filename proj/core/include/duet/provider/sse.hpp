#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace duet::provider {

/// One dispatched server-sent event.
struct SseEvent {
  std::string event;  // "message" when no event field was sent
  std::string data;   // data lines joined with '\n'
  std::string id;

  friend bool operator==(const SseEvent&, const SseEvent&) = default;
};

/// Incremental text/event-stream decoder. Feed arbitrary byte slices; a
/// complete event is returned once its terminating blank line arrives.
class SseParser {
 public:
  std::vector<SseEvent> feed(std::string_view bytes);
  /// Dispatches a trailing event that was not terminated by a blank line.
  std::vector<SseEvent> finish();

 private:
  void process_line(std::string_view line, std::vector<SseEvent>& out);
  void dispatch(std::vector<SseEvent>& out);

  std::string buffer_;
  std::string event_;
  std::string data_;
  std::string id_;
  bool has_data_ = false;
};

/// Encodes one event. Multi-line data becomes several data fields.
std::string format_sse(std::string_view event, std::string_view data,
                       std::string_view id = {});

}  // namespace duet::provider
