#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/provider/types.hpp"
#include "duet/session/session.hpp"

namespace duet::service {

/// A model event as delivered to subscribers. `seq` is per (session, model)
/// across all turns, so it doubles as the resume cursor.
struct EventEnvelope {
  std::string session_id;
  std::string model_id;
  std::uint64_t seq = 0;
  std::uint32_t turn = 0;
  provider::EventKind kind = provider::EventKind::Delta;
  std::string text;
  std::int64_t ts = 0;

  friend bool operator==(const EventEnvelope&, const EventEnvelope&) = default;
};

struct StateNotice {
  session::SessionState state = session::SessionState::Draft;
  std::int64_t ts = 0;

  friend bool operator==(const StateNotice&, const StateNotice&) = default;
};

struct MessageNotice {
  session::Target target;
  std::string text;
  std::int64_t ts = 0;

  friend bool operator==(const MessageNotice&, const MessageNotice&) = default;
};

using HubItem = std::variant<EventEnvelope, StateNotice, MessageNotice>;

nlohmann::json to_json(const EventEnvelope& e);
EventEnvelope envelope_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HubItem& item);
/// SSE event name: delta/done/error, state, message.
std::string_view sse_event_name(const HubItem& item);

/// Last seq already seen per model.
using Cursors = std::map<std::string, std::uint64_t>;

/// Parses "m1:5,m2:3". Throws InvalidArgument.
Cursors parse_cursors(std::string_view text);
std::string format_cursors(const Cursors& cursors);

class EventHub;

/// One reader of a hub. Delivers the retained history (minus envelopes at or
/// below the cursors) and then live items, in publish order.
class Subscription {
 public:
  enum class Status { Item, Timeout, Closed, Overflow };

  struct Next {
    Status status = Status::Timeout;
    HubItem item;
  };

  /// Blocks up to `timeout` for the next item. Closed and Overflow are
  /// final.
  Next next(std::chrono::milliseconds timeout);
  void cancel();

 private:
  friend class EventHub;
  struct State;
  explicit Subscription(std::shared_ptr<State> state) : state_(std::move(state)) {}
  std::shared_ptr<State> state_;
};

/// Append-only broadcast of one session's items. Publishing never blocks:
/// a subscriber that falls more than `capacity` live items behind is cut off
/// with Overflow.
class EventHub {
 public:
  explicit EventHub(std::size_t subscriber_capacity = 10000);
  ~EventHub();

  EventHub(const EventHub&) = delete;
  EventHub& operator=(const EventHub&) = delete;

  void publish(HubItem item);
  /// Subscriptions opened with close_when_idle end once they have drained
  /// the history while the hub is idle.
  void set_idle(bool idle);
  /// Ends every subscription after it drains.
  void close();

  std::shared_ptr<Subscription> subscribe(Cursors since = {},
                                          bool close_when_idle = false);

  std::vector<HubItem> history() const;
  std::size_t subscriber_count() const;

 private:
  friend class Subscription;
  struct Core;
  std::shared_ptr<Core> core_;
};

}  // namespace duet::service
