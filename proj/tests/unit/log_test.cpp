#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "duet/error.hpp"
#include "duet/provider/mock_provider.hpp"
#include "duet/service/session_host.hpp"
#include "duet/session/log.hpp"
#include "test_support.hpp"

namespace duet::session {
namespace {

using duet::testing::mock_model;
using duet::testing::TempDir;
using provider::EventKind;
using provider::MockScript;
using provider::VirtualScheduler;

const corpus::CorpusIndex& fixture_index() {
  static const auto index =
      *corpus::load_corpus(duet::testing::fixture_dir() / "corpus").index;
  return index;
}

std::vector<ModelConfig> three_models() {
  return {mock_model("m1", 100), mock_model("m2", 200), mock_model("m3", 300)};
}

std::map<std::string, std::vector<MockScript>> interleaved_scripts() {
  return {
      {"m1", {provider::chunked_script("alpha reply from one", 4, 7)}},
      {"m2", {provider::chunked_script("beta \xE2\x9C\x93 two", 3, 5)}},
      {"m3", {{{3, "gam"}, {9, "ma"}, {12, "", true, "injected"}}, {{4, "ok"}}}},
  };
}

service::SessionHost::Providers mocks(VirtualScheduler& clock,
                                      const std::map<std::string, std::vector<MockScript>>& s) {
  service::SessionHost::Providers out;
  for (const auto& [id, scripts] : s) {
    out[id] = std::make_shared<provider::MockProvider>(clock, scripts);
  }
  return out;
}

TEST(LogRecord, JsonRoundTrip) {
  const std::vector<SessionLogRecord> records{
      {1, CreatedRecord{"s", three_models()}},
      {2, InputSetRecord{InputField::Problem, "P\n\"quoted\"", {}}},
      {3, InputSetRecord{InputField::Reference, "graph/dijkstra", {"graph/dijkstra"}}},
      {4, StartedRecord{{{"m1", "x"}, {"m2", "y"}, {"m3", "z"}}}},
      {5, ModelEventRecord{"m1", 0, 0, EventKind::Delta, "d"}},
      {6, HumanMessageRecord{Target::all(), "more"}},
  };
  for (const auto& r : records) {
    const auto back = record_from_json(to_json(r));
    EXPECT_EQ(back.ts, r.ts);
    EXPECT_EQ(to_json(back), to_json(r));
  }
}

TEST(LogReplay, CorruptTailNamesTheLine) {
  std::stringstream in;
  in << to_json(SessionLogRecord{1, CreatedRecord{"s", three_models()}}).dump() << "\n";
  in << to_json(SessionLogRecord{2, InputSetRecord{InputField::Problem, "P", {}}}).dump()
     << "\n";
  in << R"({"ts":3,"kind":"input_set","fie)";
  try {
    parse_log(in);
    FAIL() << "expected CorruptRecord";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptRecord);
    ASSERT_EQ(e.details().size(), 1u);
    EXPECT_EQ(e.details()[0], "3");
  }
}

TEST(LogReplay, RejectsLogsThatBreakTheStateMachine) {
  const auto created = SessionLogRecord{1, CreatedRecord{"s", three_models()}};
  const auto started = SessionLogRecord{2, StartedRecord{{{"m1", "x"}, {"m2", "y"}, {"m3", "z"}}}};
  try {
    replay_log({created, started});
    FAIL() << "start without problem text must not replay";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptRecord);
    EXPECT_EQ(e.details()[0], "2");
  }
  EXPECT_THROW(replay_log({}), Error);
  EXPECT_THROW(replay_log({started}), Error);

  const auto problem = SessionLogRecord{2, InputSetRecord{InputField::Problem, "P", {}}};
  const auto skipped_seq = SessionLogRecord{4, ModelEventRecord{"m1", 1, 0, EventKind::Delta, "x"}};
  EXPECT_THROW(replay_log({created, problem, started, skipped_seq}), Error);
}

TEST(LogReplay, PersistedSessionRoundTrips) {
  TempDir dir;
  VirtualScheduler clock;
  const auto path = dir.path() / "s.jsonl";
  auto host = service::SessionHost::create(Session::create("s", three_models()),
                                           mocks(clock, interleaved_scripts()), clock, path);
  host->set_input(InputField::Problem, "Find the shortest path", fixture_index());
  host->set_input(InputField::Reference, "graph/dijkstra", fixture_index());
  host->start(fixture_index());
  clock.run_until_idle();
  host->send_message(Target::all(), "Add comments");
  clock.run_until_idle();
  host->send_message(Target::model("m2"), "Use long long");
  clock.run_until_idle();

  const auto live = host->snapshot();
  const auto replayed = replay_log(read_log(path));
  EXPECT_EQ(replayed, live);
  EXPECT_EQ(replayed.transcript("m3").size(), 4u);  // first reply failed with partial text
}

// The log of a host-driven run replays to the same state as a plain Session
// fed directly by identical mock scripts on its own clock.
TEST(LogReplay, InterleavedReplayMatchesDirectExecution) {
  TempDir dir;
  const auto path = dir.path() / "s.jsonl";
  const auto scripts = interleaved_scripts();

  VirtualScheduler host_clock;
  auto host = service::SessionHost::create(Session::create("s", three_models()),
                                           mocks(host_clock, scripts), host_clock, path);
  host->set_input(InputField::Problem, "P", fixture_index());
  host->start(fixture_index());
  host_clock.run_until_idle();
  host->send_message(Target::all(), "again");
  host_clock.run_until_idle();

  VirtualScheduler clock;
  auto direct = Session::create("s", three_models());
  direct.set_input(InputField::Problem, "P");
  auto providers = mocks(clock, scripts);
  const auto dispatch = [&](const std::vector<OutboundRequest>& requests) {
    for (const auto& r : requests) {
      providers.at(r.model_id)->send_chat(
          {"s", direct.model(r.model_id), r.transcript},
          [&, id = r.model_id](const provider::StreamEvent& e) {
            direct.apply_event(id, e.kind, e.text);
          });
    }
  };
  dispatch(start_chats(direct, fixture_index()));
  clock.run_until_idle();
  dispatch(direct.send_message(Target::all(), "again"));
  clock.run_until_idle();

  const auto records = read_log(path);
  std::size_t switches = 0;
  std::string last;
  for (const auto& r : records) {
    if (const auto* e = std::get_if<ModelEventRecord>(&r.body)) {
      if (!last.empty() && e->model_id != last) ++switches;
      last = e->model_id;
    }
  }
  EXPECT_GT(switches, 3u) << "the three streams should interleave in the log";
  EXPECT_EQ(replay_log(records), direct);
}

}  // namespace
}  // namespace duet::session
