#include "duet/service/event_hub.hpp"

#include <algorithm>
#include <charconv>
#include <list>

#include "duet/error.hpp"
#include "duet/text.hpp"

namespace duet::service {

using nlohmann::json;

json to_json(const EventEnvelope& e) {
  json j{{"session_id", e.session_id}, {"model_id", e.model_id},
         {"seq", e.seq},               {"turn", e.turn},
         {"kind", provider::to_string(e.kind)}, {"ts", e.ts}};
  if (e.kind == provider::EventKind::Delta) j["text"] = e.text;
  if (e.kind == provider::EventKind::Error) j["message"] = e.text;
  return j;
}

EventEnvelope envelope_from_json(const json& j) {
  EventEnvelope e;
  e.session_id = j.at("session_id").get<std::string>();
  e.model_id = j.at("model_id").get<std::string>();
  e.seq = j.at("seq").get<std::uint64_t>();
  e.turn = j.at("turn").get<std::uint32_t>();
  e.kind = provider::parse_event_kind(j.at("kind").get<std::string>());
  e.ts = j.value("ts", std::int64_t{0});
  if (e.kind == provider::EventKind::Delta) e.text = j.at("text").get<std::string>();
  if (e.kind == provider::EventKind::Error) e.text = j.at("message").get<std::string>();
  return e;
}

json to_json(const HubItem& item) {
  if (const auto* e = std::get_if<EventEnvelope>(&item)) return to_json(*e);
  if (const auto* s = std::get_if<StateNotice>(&item)) {
    return {{"state", session::to_string(s->state)}, {"ts", s->ts}};
  }
  const auto& m = std::get<MessageNotice>(item);
  return {{"target", m.target.str()}, {"text", m.text}, {"ts", m.ts}};
}

std::string_view sse_event_name(const HubItem& item) {
  if (const auto* e = std::get_if<EventEnvelope>(&item)) {
    return provider::to_string(e->kind);
  }
  if (std::holds_alternative<StateNotice>(item)) return "state";
  return "message";
}

Cursors parse_cursors(std::string_view text) {
  Cursors out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const auto entry = text::trim(text.substr(start, end - start));
    start = end + 1;
    if (entry.empty()) continue;
    const auto colon = entry.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "bad cursor '" + std::string(entry) + "' (expected model:seq)");
    }
    const auto num = entry.substr(colon + 1);
    std::uint64_t seq = 0;
    const auto res = std::from_chars(num.data(), num.data() + num.size(), seq);
    if (res.ec != std::errc() || res.ptr != num.data() + num.size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "bad cursor '" + std::string(entry) + "' (expected model:seq)");
    }
    out[std::string(entry.substr(0, colon))] = seq;
  }
  return out;
}

std::string format_cursors(const Cursors& cursors) {
  std::string out;
  for (const auto& [model, seq] : cursors) {
    if (!out.empty()) out.push_back(',');
    out += model + ":" + std::to_string(seq);
  }
  return out;
}

struct Subscription::State {
  Cursors since;
  bool close_when_idle = false;
  std::size_t position = 0;
  std::size_t live_from = 0;
  bool overflowed = false;
  bool cancelled = false;
  std::weak_ptr<EventHub::Core> core;
};

struct EventHub::Core {
  explicit Core(std::size_t cap) : capacity(cap) {}

  mutable std::mutex mu;
  std::condition_variable cv;
  std::size_t capacity;
  std::vector<HubItem> history;
  std::list<std::weak_ptr<Subscription::State>> subscribers;
  bool idle = true;
  bool closed = false;
};

EventHub::EventHub(std::size_t subscriber_capacity)
    : core_(std::make_shared<Core>(std::max<std::size_t>(1, subscriber_capacity))) {}

EventHub::~EventHub() { close(); }

void EventHub::publish(HubItem item) {
  {
    std::lock_guard lock(core_->mu);
    core_->history.push_back(std::move(item));
    const std::size_t size = core_->history.size();
    for (auto it = core_->subscribers.begin(); it != core_->subscribers.end();) {
      auto sub = it->lock();
      if (!sub || sub->cancelled) {
        it = core_->subscribers.erase(it);
        continue;
      }
      const std::size_t lag = size - std::max(sub->position, sub->live_from);
      if (lag > core_->capacity) sub->overflowed = true;
      ++it;
    }
  }
  core_->cv.notify_all();
}

void EventHub::set_idle(bool idle) {
  {
    std::lock_guard lock(core_->mu);
    core_->idle = idle;
  }
  core_->cv.notify_all();
}

void EventHub::close() {
  {
    std::lock_guard lock(core_->mu);
    core_->closed = true;
  }
  core_->cv.notify_all();
}

std::shared_ptr<Subscription> EventHub::subscribe(Cursors since,
                                                  bool close_when_idle) {
  auto state = std::make_shared<Subscription::State>();
  state->since = std::move(since);
  state->close_when_idle = close_when_idle;
  state->core = core_;
  {
    std::lock_guard lock(core_->mu);
    state->live_from = core_->history.size();
    core_->subscribers.push_back(state);
  }
  return std::shared_ptr<Subscription>(new Subscription(std::move(state)));
}

std::vector<HubItem> EventHub::history() const {
  std::lock_guard lock(core_->mu);
  return core_->history;
}

std::size_t EventHub::subscriber_count() const {
  std::lock_guard lock(core_->mu);
  return static_cast<std::size_t>(std::count_if(
      core_->subscribers.begin(), core_->subscribers.end(),
      [](const auto& w) {
        auto s = w.lock();
        return s && !s->cancelled && !s->overflowed;
      }));
}

Subscription::Next Subscription::next(std::chrono::milliseconds timeout) {
  auto core = state_->core.lock();
  if (!core) return {Status::Closed, {}};
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::unique_lock lock(core->mu);
  for (;;) {
    if (state_->overflowed) return {Status::Overflow, {}};
    if (state_->cancelled) return {Status::Closed, {}};
    while (state_->position < core->history.size()) {
      const auto& item = core->history[state_->position++];
      if (const auto* e = std::get_if<EventEnvelope>(&item)) {
        const auto c = state_->since.find(e->model_id);
        if (c != state_->since.end() && e->seq <= c->second) continue;
      }
      return {Status::Item, item};
    }
    if (core->closed || (state_->close_when_idle && core->idle)) {
      return {Status::Closed, {}};
    }
    if (core->cv.wait_until(lock, deadline) == std::cv_status::timeout) {
      if (state_->position >= core->history.size() && !state_->overflowed) {
        return {Status::Timeout, {}};
      }
    }
  }
}

void Subscription::cancel() {
  if (auto core = state_->core.lock()) {
    {
      std::lock_guard lock(core->mu);
      state_->cancelled = true;
    }
    core->cv.notify_all();
  }
}

}  // namespace duet::service
