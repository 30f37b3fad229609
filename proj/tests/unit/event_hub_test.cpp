#include <gtest/gtest.h>

#include <thread>

#include "duet/error.hpp"
#include "duet/service/event_hub.hpp"

namespace duet::service {
namespace {

using namespace std::chrono_literals;
using provider::EventKind;

EventEnvelope env(const std::string& model, std::uint64_t seq,
                  EventKind kind = EventKind::Delta) {
  return {"s", model, seq, 0, kind, "t" + std::to_string(seq), 0};
}

std::vector<EventEnvelope> drain(Subscription& sub) {
  std::vector<EventEnvelope> out;
  for (;;) {
    auto n = sub.next(0ms);
    if (n.status != Subscription::Status::Item) break;
    if (auto* e = std::get_if<EventEnvelope>(&n.item)) out.push_back(*e);
  }
  return out;
}

TEST(Cursors, ParseAndFormat) {
  const auto c = parse_cursors("m1:5,gpt-4o:12");
  EXPECT_EQ(c.at("m1"), 5u);
  EXPECT_EQ(c.at("gpt-4o"), 12u);
  EXPECT_EQ(parse_cursors(format_cursors(c)), c);
  EXPECT_TRUE(parse_cursors("").empty());
  EXPECT_THROW(parse_cursors("m1"), Error);
  EXPECT_THROW(parse_cursors("m1:x"), Error);
  EXPECT_THROW(parse_cursors(":3"), Error);
}

TEST(EventHub, FreshSubscriberSeesEverythingFromSeqZero) {
  EventHub hub;
  for (std::uint64_t i = 0; i < 3; ++i) {
    hub.publish(env("m1", i));
    hub.publish(env("m2", i));
  }
  auto sub = hub.subscribe();
  const auto got = drain(*sub);
  ASSERT_EQ(got.size(), 6u);
  EXPECT_EQ(got[0].seq, 0u);
  EXPECT_EQ(got[1].seq, 0u);
}

TEST(EventHub, CursorSkipsOnlyThatModel) {
  EventHub hub;
  for (std::uint64_t i = 0; i < 10; ++i) {
    hub.publish(env("m1", i));
    hub.publish(env("m2", i));
  }
  auto sub = hub.subscribe({{"m1", 5}});
  const auto got = drain(*sub);
  std::vector<std::uint64_t> m1, m2;
  for (const auto& e : got) (e.model_id == "m1" ? m1 : m2).push_back(e.seq);
  ASSERT_FALSE(m1.empty());
  EXPECT_EQ(m1.front(), 6u);
  EXPECT_EQ(m1.size(), 4u);
  EXPECT_EQ(m2.front(), 0u);
  EXPECT_EQ(m2.size(), 10u);
}

TEST(EventHub, NonEnvelopeItemsAreAlwaysReplayed) {
  EventHub hub;
  hub.publish(StateNotice{session::SessionState::Active, 1});
  hub.publish(env("m1", 0));
  auto sub = hub.subscribe({{"m1", 0}});
  auto n = sub->next(0ms);
  ASSERT_EQ(n.status, Subscription::Status::Item);
  EXPECT_TRUE(std::holds_alternative<StateNotice>(n.item));
  EXPECT_EQ(sub->next(0ms).status, Subscription::Status::Timeout);
}

TEST(EventHub, LiveItemsWakeABlockedReader) {
  EventHub hub;
  auto sub = hub.subscribe();
  std::thread producer([&] {
    std::this_thread::sleep_for(20ms);
    hub.publish(env("m1", 0));
  });
  const auto n = sub->next(5s);
  producer.join();
  ASSERT_EQ(n.status, Subscription::Status::Item);
  EXPECT_EQ(std::get<EventEnvelope>(n.item).seq, 0u);
}

TEST(EventHub, CloseWhenIdleEndsAfterTheBacklog) {
  EventHub hub;
  hub.set_idle(false);
  hub.publish(env("m1", 0));
  hub.publish(env("m1", 1, EventKind::Done));
  hub.set_idle(true);
  auto sub = hub.subscribe({}, true);
  EXPECT_EQ(drain(*sub).size(), 2u);
  EXPECT_EQ(sub->next(0ms).status, Subscription::Status::Closed);

  auto follower = hub.subscribe();
  drain(*follower);
  EXPECT_EQ(follower->next(0ms).status, Subscription::Status::Timeout);
}

TEST(EventHub, SlowSubscriberOverflowsWithoutBlockingPublish) {
  EventHub hub(4);
  hub.publish(env("m1", 0));
  auto slow = hub.subscribe();
  auto fast = hub.subscribe();
  for (std::uint64_t i = 1; i <= 3; ++i) hub.publish(env("m1", i));
  EXPECT_EQ(drain(*fast).size(), 4u);
  for (std::uint64_t i = 4; i <= 8; ++i) {
    hub.publish(env("m1", i));
    drain(*fast);
  }
  EXPECT_EQ(slow->next(0ms).status, Subscription::Status::Overflow);
  EXPECT_EQ(slow->next(0ms).status, Subscription::Status::Overflow);
  EXPECT_EQ(hub.subscriber_count(), 1u);
  hub.publish(env("m1", 9));
  EXPECT_EQ(drain(*fast).size(), 1u);
}

TEST(EventHub, CancelEndsTheSubscription) {
  EventHub hub;
  auto sub = hub.subscribe();
  std::thread t([&] {
    std::this_thread::sleep_for(20ms);
    sub->cancel();
  });
  EXPECT_EQ(sub->next(5s).status, Subscription::Status::Closed);
  t.join();
  hub.publish(env("m1", 0));
  EXPECT_EQ(hub.subscriber_count(), 0u);
}

TEST(EventHub, ClosedHubDrainsThenCloses) {
  auto hub = std::make_unique<EventHub>();
  hub->publish(env("m1", 0));
  auto sub = hub->subscribe();
  hub->close();
  EXPECT_EQ(sub->next(0ms).status, Subscription::Status::Item);
  EXPECT_EQ(sub->next(0ms).status, Subscription::Status::Closed);
  hub.reset();
  EXPECT_EQ(sub->next(0ms).status, Subscription::Status::Closed);
}

TEST(EnvelopeJson, RoundTrip) {
  EventEnvelope e{"s", "m", 4, 1, EventKind::Error, "boom", 17};
  const auto j = to_json(e);
  EXPECT_EQ(j["message"], "boom");
  EXPECT_EQ(envelope_from_json(j), e);
  EventEnvelope d{"s", "m", 0, 0, EventKind::Delta, "x", 1};
  EXPECT_EQ(to_json(d)["text"], "x");
  EXPECT_EQ(envelope_from_json(to_json(d)), d);
  EXPECT_EQ(sse_event_name(HubItem{d}), "delta");
  EXPECT_EQ(sse_event_name(HubItem{StateNotice{}}), "state");
  EXPECT_EQ(sse_event_name(HubItem{MessageNotice{}}), "message");
}

}  // namespace
}  // namespace duet::service
