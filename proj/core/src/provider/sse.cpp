#include "duet/provider/sse.hpp"

namespace duet::provider {

std::vector<SseEvent> SseParser::feed(std::string_view bytes) {
  std::vector<SseEvent> out;
  buffer_.append(bytes);
  std::size_t start = 0;
  for (;;) {
    const auto nl = buffer_.find_first_of("\r\n", start);
    if (nl == std::string::npos) break;
    // A lone CR at the very end may be the first half of CRLF.
    if (buffer_[nl] == '\r' && nl + 1 == buffer_.size()) break;
    process_line(std::string_view(buffer_).substr(start, nl - start), out);
    start = nl + 1;
    if (buffer_[nl] == '\r' && buffer_[start] == '\n') ++start;
  }
  buffer_.erase(0, start);
  return out;
}

std::vector<SseEvent> SseParser::finish() {
  std::vector<SseEvent> out;
  if (!buffer_.empty()) {
    process_line(buffer_, out);
    buffer_.clear();
  }
  dispatch(out);
  return out;
}

void SseParser::process_line(std::string_view line, std::vector<SseEvent>& out) {
  if (line.empty()) {
    dispatch(out);
    return;
  }
  if (line.front() == ':') return;  // comment / keepalive
  std::string_view field = line;
  std::string_view value;
  if (const auto colon = line.find(':'); colon != std::string_view::npos) {
    field = line.substr(0, colon);
    value = line.substr(colon + 1);
    if (!value.empty() && value.front() == ' ') value.remove_prefix(1);
  }
  if (field == "data") {
    if (has_data_) data_.push_back('\n');
    data_.append(value);
    has_data_ = true;
  } else if (field == "event") {
    event_.assign(value);
  } else if (field == "id") {
    id_.assign(value);
  }
}

void SseParser::dispatch(std::vector<SseEvent>& out) {
  if (has_data_) {
    out.push_back({event_.empty() ? "message" : event_, data_, id_});
  }
  event_.clear();
  data_.clear();
  has_data_ = false;
  // The last event id persists across events, as in the browser API.
}

std::string format_sse(std::string_view event, std::string_view data,
                       std::string_view id) {
  std::string out;
  if (!id.empty()) {
    out.append("id: ").append(id).push_back('\n');
  }
  if (!event.empty()) {
    out.append("event: ").append(event).push_back('\n');
  }
  std::size_t start = 0;
  for (;;) {
    const auto nl = data.find('\n', start);
    out.append("data: ").append(data.substr(start, nl - start)).push_back('\n');
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  out.push_back('\n');
  return out;
}

}  // namespace duet::provider
