#include <gtest/gtest.h>

#include <random>

#include "duet/error.hpp"
#include "duet/session/prompt.hpp"
#include "duet/session/session.hpp"
#include "test_support.hpp"

namespace duet::session {
namespace {

using duet::testing::mock_model;
using provider::EventKind;
using provider::Role;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

Session three_mocks() {
  return Session::create("s", {mock_model("m1"), mock_model("m2"), mock_model("m3")});
}

corpus::CorpusIndex fixture_index() {
  return *corpus::load_corpus(duet::testing::fixture_dir() / "corpus").index;
}

std::map<std::string, std::string> prompts_for(const Session& s, const std::string& text) {
  std::map<std::string, std::string> out;
  for (const auto& m : s.models()) out[m.model_id] = text;
  return out;
}

TEST(SessionCreate, DefaultAndMinimalConfigs) {
  EXPECT_EQ(Session::create("s", provider::default_models()).models().size(), 3u);
  const auto one = Session::create("s", {mock_model("m")});
  EXPECT_EQ(one.models().size(), 1u);
  EXPECT_EQ(one.state(), SessionState::Draft);
  EXPECT_TRUE(one.transcript("m").empty());
}

TEST(SessionCreate, RejectsBadModelLists) {
  EXPECT_EQ(code_of([] { Session::create("s", {}); }), ErrorCode::EmptyModelList);
  EXPECT_EQ(code_of([] { Session::create("s", {mock_model("a"), mock_model("a")}); }),
            ErrorCode::DuplicateModelId);
  EXPECT_EQ(code_of([] { Session::create("s", {mock_model("all")}); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { Session::create("", {mock_model("a")}); }),
            ErrorCode::InvalidArgument);
}

TEST(SessionGating, ProblemIsTheOnlyRequiredInput) {
  auto s = three_mocks();
  EXPECT_FALSE(s.can_start());
  EXPECT_FALSE(s.set_input(InputField::Problem, "   \n"));
  EXPECT_FALSE(s.set_input(InputField::Algorithm, "use a heap"));
  EXPECT_TRUE(s.set_input(InputField::Problem, "Sum two numbers"));
  EXPECT_TRUE(s.inputs().reference_aliases.empty());
  EXPECT_TRUE(s.can_start());
}

TEST(SessionGating, ReferenceInputSplitsIntoAliases) {
  auto s = three_mocks();
  s.set_input(InputField::Reference, "graph/dijkstra, string/kmp.md");
  EXPECT_EQ(s.inputs().reference_aliases,
            (std::vector<std::string>{"graph/dijkstra", "string/kmp"}));
}

TEST(SessionStart, ActivatesAndIssuesOneRequestPerModel) {
  auto s = three_mocks();
  s.set_input(InputField::Problem, "P");
  const auto requests = start_chats(s, fixture_index());
  EXPECT_EQ(s.state(), SessionState::Active);
  ASSERT_EQ(requests.size(), 3u);
  for (const auto& r : requests) {
    EXPECT_EQ(r.turn, 0u);
    ASSERT_EQ(r.transcript.size(), 1u);
    EXPECT_EQ(r.transcript.back().role, Role::User);
    EXPECT_TRUE(s.progress(r.model_id).in_flight);
  }
  EXPECT_FALSE(s.idle());
}

TEST(SessionStart, RequiresProblemAndRunsOnce) {
  auto s = three_mocks();
  const auto index = fixture_index();
  EXPECT_EQ(code_of([&] { start_chats(s, index); }), ErrorCode::PreconditionFailed);
  EXPECT_EQ(s.state(), SessionState::Draft);
  s.set_input(InputField::Problem, "P");
  start_chats(s, index);
  const auto before = s;
  EXPECT_EQ(code_of([&] { start_chats(s, index); }), ErrorCode::AlreadyActive);
  EXPECT_EQ(s, before);
}

TEST(SessionStart, InputsFreezeOnceActive) {
  auto s = three_mocks();
  s.set_input(InputField::Problem, "P");
  s.activate(prompts_for(s, "go"));
  EXPECT_EQ(code_of([&] { s.set_input(InputField::Algorithm, "x"); }),
            ErrorCode::SessionActive);
}

TEST(SessionStart, MissingReferenceChapterBlocksStart) {
  auto s = three_mocks();
  s.set_input(InputField::Problem, "P");
  s.set_input(InputField::Reference, "graph/dikstra");
  EXPECT_EQ(code_of([&] { start_chats(s, fixture_index()); }), ErrorCode::MissingChapter);
  EXPECT_EQ(s.state(), SessionState::Draft);
}

void finish_all(Session& s) {
  for (const auto& m : s.models()) {
    if (s.progress(m.model_id).in_flight) {
      s.apply_event(m.model_id, EventKind::Delta, "reply-" + m.model_id);
      s.apply_event(m.model_id, EventKind::Done, "");
    }
  }
}

TEST(SessionMessages, BroadcastReachesEveryModel) {
  auto s = three_mocks();
  s.set_input(InputField::Problem, "P");
  s.activate(prompts_for(s, "go"));
  finish_all(s);
  const auto requests = s.send_message(Target::all(), "now in C++");
  EXPECT_EQ(requests.size(), 3u);
  for (const auto& m : s.models()) {
    const auto& t = s.transcript(m.model_id);
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t.messages()[1].content, "reply-" + m.model_id);
    EXPECT_EQ(t.back().content, "now in C++");
  }
}

TEST(SessionMessages, SingleTargetOnlyGrowsThatTranscript) {
  auto s = three_mocks();
  s.set_input(InputField::Problem, "P");
  s.activate(prompts_for(s, "go"));
  finish_all(s);
  const auto requests = s.send_message(Target::model("m2"), "fix the bug");
  ASSERT_EQ(requests.size(), 1u);
  EXPECT_EQ(requests[0].model_id, "m2");
  EXPECT_EQ(requests[0].turn, 1u);
  EXPECT_EQ(s.transcript("m1").size(), 2u);
  EXPECT_EQ(s.transcript("m2").size(), 3u);
  EXPECT_EQ(s.transcript("m3").size(), 2u);
}

TEST(SessionMessages, Gating) {
  auto s = three_mocks();
  EXPECT_EQ(code_of([&] { s.send_message(Target::all(), "x"); }), ErrorCode::NotActive);
  s.set_input(InputField::Problem, "P");
  s.activate(prompts_for(s, "go"));
  EXPECT_EQ(code_of([&] { s.send_message(Target::model("m1"), "x"); }), ErrorCode::ModelBusy);
  finish_all(s);
  EXPECT_EQ(code_of([&] { s.send_message(Target::model("m9"), "x"); }), ErrorCode::UnknownModel);
  EXPECT_EQ(code_of([&] { s.send_message(Target::all(), ""); }), ErrorCode::InvalidArgument);
  s.send_message(Target::model("m1"), "more");
  const auto before = s;
  EXPECT_EQ(code_of([&] { s.send_message(Target::all(), "x"); }), ErrorCode::ModelBusy);
  EXPECT_EQ(s, before);
}

TEST(SessionEvents, SeqRunsAcrossTurnsAndErrorsKeepPartialText) {
  auto s = Session::create("s", {mock_model("m")});
  s.set_input(InputField::Problem, "P");
  s.activate(prompts_for(s, "go"));
  EXPECT_EQ(s.apply_event("m", EventKind::Delta, "ab").seq, 0u);
  EXPECT_EQ(s.apply_event("m", EventKind::Error, "boom").seq, 1u);
  EXPECT_EQ(s.transcript("m").back().content, "ab");
  EXPECT_TRUE(s.idle());

  s.send_message(Target::all(), "again");
  const auto applied = s.apply_event("m", EventKind::Error, "down");
  EXPECT_EQ(applied.seq, 2u);
  EXPECT_EQ(applied.turn, 1u);
  EXPECT_EQ(s.transcript("m").back().content, "again");
  EXPECT_THROW(s.apply_event("m", EventKind::Delta, "stray"), Error);
}

TEST(Target, Parsing) {
  EXPECT_TRUE(Target::parse("all").is_all());
  EXPECT_EQ(Target::parse("m1").model_id, "m1");
  EXPECT_EQ(Target::parse("m1").str(), "m1");
  EXPECT_THROW(Target::parse(""), Error);
}

TEST(Prompt, SectionsInOrder) {
  const auto index = fixture_index();
  auto s = three_mocks();
  s.set_input(InputField::Problem, "PROBLEM-P");
  s.set_input(InputField::Algorithm, "ALGO-A");
  s.set_input(InputField::Reference, "graph/dijkstra");
  const auto prompt = assemble_prompt(s, index);
  const auto body = index.chapters().at("graph/dijkstra").body;
  const auto i_cpp = prompt.find("C++");
  const auto i_p = prompt.find("PROBLEM-P");
  const auto i_a = prompt.find("ALGO-A");
  const auto i_ref = prompt.find(body);
  ASSERT_NE(i_cpp, std::string::npos);
  ASSERT_NE(i_ref, std::string::npos);
  EXPECT_LT(i_cpp, i_p);
  EXPECT_LT(i_p, i_a);
  EXPECT_LT(i_a, i_ref);
}

TEST(Prompt, OmitsEmptyOptionalSections) {
  const auto index = fixture_index();
  auto s = three_mocks();
  s.set_input(InputField::Problem, "P");
  const auto prompt = assemble_prompt(s, index);
  EXPECT_EQ(prompt.find("## Your algorithm"), std::string::npos);
  EXPECT_EQ(prompt.find("## Reference material"), std::string::npos);
  EXPECT_EQ(assemble_prompt(s, index), prompt);
}

TEST(Prompt, PerModelTemplatesOverride) {
  auto s = Session::create("s", {mock_model("a"), mock_model("b")});
  s.set_input(InputField::Problem, "P");
  PromptTemplate special{"Answer in C++ only, no prose."};
  const auto requests = start_chats(s, fixture_index(), {}, {{"b", special}});
  ASSERT_EQ(requests.size(), 2u);
  EXPECT_EQ(requests[0].transcript.back().content.find("no prose"), std::string::npos);
  EXPECT_NE(requests[1].transcript.back().content.find("no prose"), std::string::npos);
}

std::string random_text(std::mt19937& rng, bool allow_empty) {
  static const std::vector<std::string> pieces{
      "n", "sum", " ", "\n", "## fake heading", "\xE2\x88\x91", "a+b", "\t", "C", "{}"};
  const int len = static_cast<int>(rng() % 12) + (allow_empty ? 0 : 1);
  std::string out;
  for (int i = 0; i < len; ++i) out += pieces[rng() % pieces.size()];
  return out;
}

// Rendering is a pure function of the bundle, and empty optional inputs
// leave no trace.
TEST(Prompt, RenderIsPureProperty) {
  const auto index = fixture_index();
  const auto aliases = index.aliases();
  std::mt19937 rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    PromptBundle b;
    b.instructions = std::string(kDefaultInstructions);
    b.problem = "p" + random_text(rng, false);
    b.algorithm = rng() % 2 ? random_text(rng, true) : "";
    std::vector<std::string> chosen;
    for (const auto& a : aliases) {
      if (rng() % 3 == 0) chosen.push_back(a);
    }
    b.references = resolve_references(index, chosen);
    const auto first = render_prompt(b);
    const auto copy = b;
    EXPECT_EQ(render_prompt(copy), first);
    EXPECT_NE(first.find("C++"), std::string::npos);
    const bool has_algo = first.find("## Your algorithm") != std::string::npos;
    EXPECT_EQ(has_algo, b.algorithm.find_first_not_of(" \t\n") != std::string::npos);
    EXPECT_EQ(first.find("## Reference material") != std::string::npos, !chosen.empty());
  }
}

}  // namespace
}  // namespace duet::session
