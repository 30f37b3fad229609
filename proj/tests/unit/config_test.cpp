#include <gtest/gtest.h>

#include <fstream>

#include "duet/error.hpp"
#include "duet/provider/scheduler.hpp"
#include "duet/service/config.hpp"
#include "duet/service/workbench.hpp"
#include "test_support.hpp"

namespace duet::service {
namespace {

using nlohmann::json;
using duet::testing::TempDir;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

TEST(ServiceConfig, DefaultsAreValid) {
  ServiceConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  EXPECT_EQ(cfg.models.size(), 3u);
  EXPECT_EQ(cfg.descriptor(provider::ProviderKind::OpenAI).credential_env, "OPENAI_API_KEY");
}

TEST(ServiceConfig, ReadsModelsScriptsAndProviders) {
  TempDir dir;
  std::ofstream(dir.path() / "m2.json") << R"([{"latency_ms": 3, "chunk": "hi"}])";
  const auto doc = json::parse(R"({
    "port": 9000,
    "corpus_root": "corpus",
    "data_dir": "state",
    "subscriber_buffer": 64,
    "prompt": {"instructions": "Solve it in C++."},
    "models": [
      {"model_id": "m1", "provider": "mock", "token_budget": 100,
       "mock_script": [{"latency_ms": 10, "chunk": "a"}, {"fail": true}]},
      {"model_id": "m2", "provider": "mock", "instructions": "Only C++ code.",
       "mock_script": "m2.json"}
    ],
    "providers": {"openai": {"base_url": "http://localhost:1234"}}
  })");
  const auto cfg = config_from_json(doc, dir.path());
  EXPECT_EQ(cfg.port, 9000);
  EXPECT_EQ(cfg.corpus_root, dir.path() / "corpus");
  EXPECT_EQ(cfg.data_dir, dir.path() / "state");
  EXPECT_EQ(cfg.subscriber_capacity, 64u);
  ASSERT_EQ(cfg.models.size(), 2u);
  EXPECT_EQ(cfg.models[0].token_budget, 100);
  EXPECT_EQ(cfg.models[1].token_budget, provider::kDefaultTokenBudget);
  EXPECT_EQ(cfg.mock_scripts.at("m1").at(0).size(), 2u);
  EXPECT_EQ(provider::script_reply(cfg.mock_scripts.at("m2").at(0)), "hi");
  EXPECT_EQ(cfg.model_prompts.at("m2").instructions, "Only C++ code.");
  EXPECT_EQ(cfg.descriptor(provider::ProviderKind::OpenAI).base_url, "http://localhost:1234");
  EXPECT_EQ(cfg.descriptor(provider::ProviderKind::OpenAI).credential_env, "OPENAI_API_KEY");
}

TEST(ServiceConfig, RejectsBadConfigs) {
  const auto bad = [](const char* text) {
    return code_of([&] { config_from_json(json::parse(text)); });
  };
  EXPECT_EQ(bad(R"({"port": 70000})"), ErrorCode::BadConfig);
  EXPECT_EQ(bad(R"({"models": []})"), ErrorCode::BadConfig);
  EXPECT_EQ(bad(R"({"models": [{"model_id": "a", "provider": "mock"},
                               {"model_id": "a", "provider": "mock"}]})"),
            ErrorCode::BadConfig);
  EXPECT_EQ(bad(R"({"models": [{"model_id": "a", "provider": "mock", "token_budget": 0}]})"),
            ErrorCode::BadConfig);
  EXPECT_EQ(bad(R"({"models": [{"model_id": "a", "provider": "cohere"}]})"),
            ErrorCode::BadConfig);
  EXPECT_EQ(bad(R"({"prompt": {"instructions": "Write Python."}})"), ErrorCode::BadConfig);
  EXPECT_EQ(bad(R"([1, 2])"), ErrorCode::BadConfig);
  EXPECT_EQ(code_of([] { load_service_config("/nonexistent/duet.json"); }),
            ErrorCode::BadConfig);
}

TEST(Workbench, BadCorpusRootAbortsStartup) {
  TempDir dir;
  provider::VirtualScheduler clock;
  ServiceConfig cfg;
  cfg.data_dir = dir.path();
  cfg.corpus_root = dir.path() / "missing";
  EXPECT_EQ(code_of([&] { Workbench wb(cfg, clock); }), ErrorCode::BadConfig);
}

TEST(Workbench, FailedReloadKeepsThePreviousCorpus) {
  TempDir dir;
  provider::VirtualScheduler clock;
  ServiceConfig cfg;
  cfg.data_dir = dir.path();
  cfg.corpus_root = duet::testing::fixture_dir() / "corpus";
  Workbench wb(cfg, clock);
  EXPECT_EQ(wb.corpus()->size(), 6u);
  const auto status = wb.load_corpus(dir.path() / "nope");
  EXPECT_FALSE(status.ok);
  EXPECT_EQ(wb.corpus()->size(), 6u);
  EXPECT_TRUE(wb.corpus_status().ok);
}

TEST(Workbench, DefaultFactoryUsesMockScriptsAndRecordsBudgets) {
  TempDir dir;
  provider::VirtualScheduler clock;
  ServiceConfig cfg;
  cfg.data_dir = dir.path();
  cfg.models = {duet::testing::mock_model("a", 111), duet::testing::mock_model("b", 222)};
  cfg.mock_scripts["a"] = {{{5, "from script"}}};
  Workbench wb(cfg, clock);
  auto host = wb.create_session();
  host->set_input(session::InputField::Problem, "P", *wb.corpus());
  host->start(*wb.corpus());
  clock.run_until_idle();
  const auto snap = host->snapshot();
  EXPECT_EQ(snap.transcript("a").back().content, "from script");
  EXPECT_NE(snap.transcript("b").back().content.find("```cpp"), std::string::npos);
  EXPECT_EQ(wb.recorder()->for_model("a").at(0).body["max_output_tokens"], 111);
  EXPECT_EQ(wb.recorder()->for_model("b").at(0).body["max_output_tokens"], 222);
}

TEST(Workbench, SessionsSurviveARestart) {
  TempDir dir;
  provider::VirtualScheduler clock;
  ServiceConfig cfg;
  cfg.data_dir = dir.path();
  cfg.models = {duet::testing::mock_model("a")};
  std::string id;
  session::Session before = session::Session::create("x", cfg.models);
  {
    Workbench wb(cfg, clock);
    auto host = wb.create_session();
    id = host->id();
    EXPECT_EQ(id.size(), 16u);
    host->set_input(session::InputField::Problem, "P", *wb.corpus());
    host->start(*wb.corpus());
    clock.run_until_idle();
    before = host->snapshot();
    wb.record_timing({"Problem 1", experiment::Condition::Solo, 23});
  }
  Workbench wb(cfg, clock);
  std::vector<std::string> errors;
  EXPECT_EQ(wb.restore_sessions(&errors), 1u);
  EXPECT_TRUE(errors.empty());
  EXPECT_EQ(wb.find_session(id)->snapshot(), before);
  EXPECT_EQ(wb.timing_records().size(), 1u);
  EXPECT_EQ(code_of([&] { wb.find_session("nope"); }), ErrorCode::UnknownSession);
}

TEST(Workbench, CorruptLogIsReportedNotFatal) {
  TempDir dir;
  std::ofstream(dir.path() / "bad.jsonl") << "{not json\n";
  provider::VirtualScheduler clock;
  ServiceConfig cfg;
  cfg.data_dir = dir.path();
  Workbench wb(cfg, clock);
  std::vector<std::string> errors;
  EXPECT_EQ(wb.restore_sessions(&errors), 0u);
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_NE(errors[0].find("bad.jsonl"), std::string::npos);
}

}  // namespace
}  // namespace duet::service
