// duet: serve the workbench, search a corpus, summarize timings, replay logs.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "duet/corpus/corpus.hpp"
#include "duet/error.hpp"
#include "duet/experiment/experiment.hpp"
#include "duet/provider/scheduler.hpp"
#include "duet/service/config.hpp"
#include "duet/service/http_server.hpp"
#include "duet/service/workbench.hpp"
#include "duet/session/log.hpp"

namespace fs = std::filesystem;
using namespace duet;

namespace {

struct ServeOptions {
  std::string config;
  std::string host;
  int port = -1;
  std::string corpus_root;
  std::string data_dir;
  std::string ui_dir;
};

int serve(const ServeOptions& opt) {
  auto cfg = opt.config.empty() ? service::ServiceConfig{}
                                : service::load_service_config(opt.config);
  if (!opt.host.empty()) cfg.host = opt.host;
  if (opt.port >= 0) cfg.port = opt.port;
  if (!opt.corpus_root.empty()) cfg.corpus_root = opt.corpus_root;
  if (!opt.data_dir.empty()) cfg.data_dir = opt.data_dir;
  service::validate(cfg);

  // Block the shutdown signals before any thread starts so only sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  provider::RealtimeScheduler scheduler;
  service::Workbench bench(cfg, scheduler);
  std::vector<std::string> errors;
  const auto restored = bench.restore_sessions(&errors);
  for (const auto& e : errors) std::cerr << "warning: " << e << "\n";
  const auto corpus = bench.corpus_status();
  std::cerr << "corpus: " << corpus.message << "\n";
  std::cerr << "restored " << restored << " session(s) from " << cfg.data_dir << "\n";

  service::HttpServer server(bench, opt.ui_dir);
  const int port = server.start(cfg.host, cfg.port);
  std::cout << "listening on http://" << cfg.host << ":" << port << std::endl;

  int sig = 0;
  sigwait(&signals, &sig);
  std::cerr << "shutting down\n";
  server.stop();
  return 0;
}

int corpus_search(const std::string& root, std::size_t k, const std::string& query) {
  auto loaded = corpus::load_corpus(root);
  if (!loaded.status.ok) {
    std::cerr << loaded.status.message << "\n";
    return 1;
  }
  for (const auto& s : loaded.skipped) std::cerr << "skipped empty file " << s << "\n";
  const auto& index = *loaded.index;
  for (const auto& r : corpus::rank_chapters(index, query, k)) {
    std::cout << std::fixed << std::setprecision(4) << r.score << "  " << r.alias << "  "
              << index.chapters().at(r.alias).title << "\n";
  }
  return 0;
}

int corpus_list(const std::string& root) {
  auto loaded = corpus::load_corpus(root);
  if (!loaded.status.ok) {
    std::cerr << loaded.status.message << "\n";
    return 1;
  }
  for (const auto& [alias, ch] : loaded.index->chapters()) {
    std::cout << alias << "  " << ch.title << "\n";
  }
  return 0;
}

/// Reads either a table CSV (--csv) or the records kept in a data dir.
experiment::TimingStore timing_source(const std::string& csv, const std::string& data_dir) {
  if (!csv.empty()) {
    std::ifstream in(csv, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + csv);
    std::stringstream buf;
    buf << in.rdbuf();
    return experiment::TimingStore::from_table_csv(buf.str());
  }
  return experiment::TimingStore::load(fs::path(data_dir) / "experiment.csv");
}

int replay(const std::string& log, bool json_out) {
  const auto session = session::replay_log(session::read_log(log));
  if (json_out) {
    std::cout << service::session_to_json(session).dump(2) << "\n";
    return 0;
  }
  std::cout << "session " << session.id() << " (" << session::to_string(session.state())
            << ")\n";
  for (const auto& m : session.models()) {
    std::cout << "\n== " << m.model_id << " [" << provider::to_string(m.provider) << " "
              << m.model_name << ", budget " << m.token_budget << "]\n";
    for (const auto& msg : session.transcript(m.model_id).messages()) {
      std::cout << "-- " << provider::to_string(msg.role) << "\n" << msg.content << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Competitive programming workbench: several chat models side by side"};
  app.require_subcommand(1);

  ServeOptions serve_opt;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP/SSE service");
  serve_cmd->add_option("--config", serve_opt.config, "JSON config file")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--host", serve_opt.host, "Bind address (default 127.0.0.1)");
  serve_cmd->add_option("--port", serve_opt.port, "Port, 0 picks a free one (default 8080)");
  serve_cmd->add_option("--corpus-root", serve_opt.corpus_root, "Reference corpus directory");
  serve_cmd->add_option("--data-dir", serve_opt.data_dir, "Session logs and timings");
  serve_cmd->add_option("--ui-dir", serve_opt.ui_dir, "Static files served at /")
      ->check(CLI::ExistingDirectory);

  auto* corpus_cmd = app.add_subcommand("corpus", "Inspect a reference corpus");
  corpus_cmd->require_subcommand(1);
  std::string root;
  std::size_t k = 5;
  std::vector<std::string> words;
  auto* search_cmd = corpus_cmd->add_subcommand("search", "Rank chapters by BM25");
  search_cmd->add_option("--root", root, "Corpus directory")->required();
  search_cmd->add_option("-k", k, "Number of results")->check(CLI::PositiveNumber);
  search_cmd->add_option("query", words, "Query terms")->required();
  auto* list_cmd = corpus_cmd->add_subcommand("list", "List chapter aliases and titles");
  list_cmd->add_option("--root", root, "Corpus directory")->required();

  auto* exp_cmd = app.add_subcommand("experiment", "Implementation-time bookkeeping");
  exp_cmd->require_subcommand(1);
  std::string data_dir = "data";
  std::string table_csv;
  std::string format = "markdown";
  bool as_json = false;
  auto* summary_cmd = exp_cmd->add_subcommand("summary", "Headline and totals");
  auto* table_cmd = exp_cmd->add_subcommand("table", "Solo vs assisted table");
  for (auto* c : {summary_cmd, table_cmd}) {
    c->add_option("--data-dir", data_dir, "Directory holding experiment.csv");
    c->add_option("--csv", table_csv, "Read an exported table CSV instead")
        ->check(CLI::ExistingFile);
  }
  summary_cmd->add_flag("--json", as_json, "Print JSON");
  table_cmd->add_option("--format", format, "markdown or csv");
  std::string problem, condition;
  double minutes = 0;
  auto* record_cmd = exp_cmd->add_subcommand("record", "Append one timing");
  record_cmd->add_option("--data-dir", data_dir, "Directory holding experiment.csv");
  record_cmd->add_option("--problem", problem, "Problem label")->required();
  record_cmd->add_option("--condition", condition, "solo or assisted")->required();
  record_cmd->add_option("--minutes", minutes, "Implementation minutes")->required();

  std::string log;
  bool replay_json = false;
  auto* replay_cmd = app.add_subcommand("replay", "Rebuild a session from its JSONL log");
  replay_cmd->add_option("log", log, "Session log file")->required()->check(CLI::ExistingFile);
  replay_cmd->add_flag("--json", replay_json, "Print the session as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return serve(serve_opt);
    if (*search_cmd) {
      std::string query;
      for (const auto& w : words) query += (query.empty() ? "" : " ") + w;
      return corpus_search(root, k, query);
    }
    if (*list_cmd) return corpus_list(root);
    if (*summary_cmd) {
      const auto s = timing_source(table_csv, data_dir).summarize();
      if (as_json) {
        std::cout << nlohmann::json{{"total_solo", s.total_solo},
                                    {"total_assisted", s.total_assisted},
                                    {"total_change_pct", s.total_change_pct},
                                    {"per_problem_mean_change_pct", s.per_problem_mean_change_pct},
                                    {"problems", s.problems},
                                    {"headline", s.headline()}}
                         .dump(2)
                  << "\n";
      } else {
        std::cout << s.headline() << "\n"
                  << std::fixed << std::setprecision(2) << "problems: " << s.problems
                  << "\ntotal solo: " << s.total_solo << " min\ntotal assisted: "
                  << s.total_assisted << " min\ntotal change: " << s.total_change_pct
                  << "%\nper-problem mean change: " << s.per_problem_mean_change_pct << "%\n";
      }
      return 0;
    }
    if (*table_cmd) {
      std::cout << timing_source(table_csv, data_dir)
                       .export_table(experiment::parse_table_format(format));
      return 0;
    }
    if (*record_cmd) {
      const auto path = fs::path(data_dir) / "experiment.csv";
      auto store = experiment::TimingStore::load(path);
      store.record({problem, experiment::parse_condition(condition), minutes});
      fs::create_directories(data_dir);
      store.save(path);
      return 0;
    }
    if (*replay_cmd) return replay(log, replay_json);
  } catch (const Error& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    for (const auto& d : e.details()) std::cerr << "  " << d << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
