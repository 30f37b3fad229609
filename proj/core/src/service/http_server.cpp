#include "duet/service/http_server.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "duet/provider/sse.hpp"
#include "duet/session/log.hpp"

namespace duet::service {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr auto kPollInterval = std::chrono::milliseconds(1000);
constexpr auto kKeepalive = std::chrono::seconds(15);
constexpr std::size_t kDefaultSearchK = 5;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace),
                  "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.find_first_not_of(" \t\r\n") == std::string::npos) {
    return json::object();
  }
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
  }
  return j;
}

std::string require_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::InvalidArgument,
                std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::string path_param(const httplib::Request& req, const char* name) {
  const auto it = req.path_params.find(name);
  return it == req.path_params.end() ? std::string() : it->second;
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

httplib::Server::Handler guarded(Handler fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_json(res, http_status_for(e.code()), error_body(e));
    } catch (const json::exception& e) {
      send_json(res, 400, error_body(Error(ErrorCode::InvalidArgument, e.what())));
    } catch (const std::exception& e) {
      send_json(res, 500,
                {{"ok", false}, {"code", "internal"}, {"status", e.what()}, {"details", json::array()}});
    }
  };
}

json model_to_json(const session::Session& s, const provider::ModelConfig& m) {
  const auto& progress = s.progress(m.model_id);
  json transcript = json::array();
  for (const auto& msg : s.transcript(m.model_id).messages()) {
    transcript.push_back({{"role", provider::to_string(msg.role)}, {"content", msg.content}});
  }
  auto j = session::to_json(m);
  j["in_flight"] = progress.in_flight;
  j["partial"] = progress.partial;
  j["next_seq"] = progress.next_seq;
  j["turns"] = progress.turns;
  j["transcript"] = std::move(transcript);
  return j;
}

std::string input_status(session::InputField field, const session::Session& s) {
  switch (field) {
    case session::InputField::Problem:
      return "Problem text loaded";
    case session::InputField::Algorithm:
      return "Algorithm description saved";
    case session::InputField::Reference:
      break;
  }
  return "Reference material loaded (" +
         std::to_string(s.inputs().reference_aliases.size()) + " chapters)";
}

std::string input_value(const json& body) {
  const auto it = body.find("value");
  if (it == body.end()) {
    throw Error(ErrorCode::InvalidArgument, "field 'value' is required");
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_array()) {
    std::string joined;
    for (const auto& v : *it) {
      if (!v.is_string()) {
        throw Error(ErrorCode::InvalidArgument, "field 'value' must hold strings");
      }
      if (!joined.empty()) joined += ", ";
      joined += v.get<std::string>();
    }
    return joined;
  }
  throw Error(ErrorCode::InvalidArgument, "field 'value' must be a string or array");
}

json corpus_json(const CorpusStatus& status) {
  return {{"ok", status.ok},
          {"status", status.message},
          {"root", status.root},
          {"chapter_count", status.chapters}};
}

std::string sse_frame(const HubItem& item) {
  std::string id;
  if (const auto* e = std::get_if<EventEnvelope>(&item)) {
    id = e->model_id + ":" + std::to_string(e->seq);
  }
  return provider::format_sse(sse_event_name(item), to_json(item).dump(-1, ' ', false, json::error_handler_t::replace), id);
}

}  // namespace

int http_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownModel:
      return 404;
    case ErrorCode::PreconditionFailed:
    case ErrorCode::AlreadyActive:
    case ErrorCode::NotActive:
    case ErrorCode::SessionActive:
    case ErrorCode::ModelBusy:
    case ErrorCode::DuplicateRecord:
    case ErrorCode::IncompletePairs:
    case ErrorCode::EmptyStore:
      return 409;
    case ErrorCode::AuthMissing:
    case ErrorCode::ProviderError:
      return 502;
    default:
      return 400;
  }
}

json error_body(const Error& error) {
  return {{"ok", false},
          {"code", error_code_name(error.code())},
          {"status", error.what()},
          {"details", error.details()}};
}

json session_to_json(const session::Session& s) {
  json models = json::array();
  for (const auto& m : s.models()) models.push_back(model_to_json(s, m));
  return {{"session_id", s.id()},
          {"state", session::to_string(s.state())},
          {"can_start", s.can_start()},
          {"idle", s.idle()},
          {"inputs",
           {{"problem", s.inputs().problem},
            {"algorithm", s.inputs().algorithm},
            {"reference", s.inputs().reference_aliases}}},
          {"models", std::move(models)}};
}

struct HttpServer::Impl {
  Workbench& bench;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};

  explicit Impl(Workbench& wb) : bench(wb) {}

  void routes();
  void events(const httplib::Request& req, httplib::Response& res);
};

void HttpServer::Impl::routes() {
  auto& s = server;

  s.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"ok", true}});
  });

  s.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    std::optional<std::vector<provider::ModelConfig>> models;
    if (const auto it = body.find("models"); it != body.end()) {
      models.emplace();
      for (const auto& m : *it) models->push_back(session::model_config_from_json(m));
    }
    const auto host = bench.create_session(std::move(models));
    auto j = session_to_json(host->snapshot());
    j["ok"] = true;
    send_json(res, 201, j);
  }));

  s.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"ok", true}, {"sessions", bench.session_ids()}});
  }));

  s.Get("/sessions/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto j = session_to_json(bench.find_session(path_param(req, "id"))->snapshot());
    j["ok"] = true;
    send_json(res, 200, j);
  }));

  s.Post("/sessions/:id/inputs",
         guarded([this](const httplib::Request& req, httplib::Response& res) {
           const auto host = bench.find_session(path_param(req, "id"));
           const auto body = parse_body(req);
           const auto field = session::parse_input_field(require_string(body, "field"));
           const auto corpus = bench.corpus();
           host->set_input(field, input_value(body), *corpus);
           const auto snap = host->snapshot();
           send_json(res, 200,
                     {{"ok", true},
                      {"can_start", snap.can_start()},
                      {"status", input_status(field, snap)},
                      {"session", session_to_json(snap)}});
         }));

  s.Post("/sessions/:id/start",
         guarded([this](const httplib::Request& req, httplib::Response& res) {
           const auto host = bench.find_session(path_param(req, "id"));
           const auto corpus = bench.corpus();
           host->start(*corpus);
           send_json(res, 200,
                     {{"ok", true},
                      {"status", "Prompt sent to every model"},
                      {"session", session_to_json(host->snapshot())}});
         }));

  s.Post("/sessions/:id/messages",
         guarded([this](const httplib::Request& req, httplib::Response& res) {
           const auto host = bench.find_session(path_param(req, "id"));
           const auto body = parse_body(req);
           const auto target = session::Target::parse(require_string(body, "target"));
           host->send_message(target, require_string(body, "text"));
           send_json(res, 202,
                     {{"ok", true}, {"target", target.str()}, {"status", "Message sent"}});
         }));

  s.Get("/sessions/:id/events", guarded([this](const httplib::Request& req,
                                               httplib::Response& res) { events(req, res); }));

  s.Get("/corpus", guarded([this](const httplib::Request&, httplib::Response& res) {
    auto j = corpus_json(bench.corpus_status());
    json chapters = json::array();
    for (const auto& [alias, ch] : bench.corpus()->chapters()) {
      chapters.push_back({{"alias", alias}, {"title", ch.title}});
    }
    j["chapters"] = std::move(chapters);
    send_json(res, 200, j);
  }));

  s.Post("/corpus/load", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto status = bench.load_corpus(require_string(body, "root"));
    auto j = corpus_json(status);
    if (!status.ok) j["code"] = error_code_name(ErrorCode::InvalidArgument);
    send_json(res, status.ok ? 200 : 400, j);
  }));

  s.Get("/corpus/search", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto query = req.get_param_value("q");
    std::size_t k = kDefaultSearchK;
    if (req.has_param("k")) {
      try {
        const long long parsed = std::stoll(req.get_param_value("k"));
        if (parsed < 0) throw std::invalid_argument("negative");
        k = static_cast<std::size_t>(parsed);
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::InvalidArgument, "k must be a non-negative integer");
      }
    }
    const auto corpus = bench.corpus();
    json results = json::array();
    for (const auto& r : corpus::rank_chapters(*corpus, query, k)) {
      results.push_back({{"alias", r.alias},
                         {"title", corpus->chapters().at(r.alias).title},
                         {"score", r.score}});
    }
    send_json(res, 200, {{"ok", true}, {"query", query}, {"results", std::move(results)}});
  }));

  s.Post("/experiment/records",
         guarded([this](const httplib::Request& req, httplib::Response& res) {
           const auto body = parse_body(req);
           experiment::TimingRecord rec;
           rec.problem_label = require_string(body, "problem");
           rec.condition = experiment::parse_condition(require_string(body, "condition"));
           if (!body.contains("minutes") || !body["minutes"].is_number()) {
             throw Error(ErrorCode::InvalidArgument, "field 'minutes' must be a number");
           }
           rec.minutes = body["minutes"].get<double>();
           bench.record_timing(rec);
           send_json(res, 201, {{"ok", true}, {"status", "Time recorded"}});
         }));

  s.Get("/experiment/records", guarded([this](const httplib::Request&, httplib::Response& res) {
    json records = json::array();
    for (const auto& r : bench.timing_records()) {
      records.push_back({{"problem", r.problem_label},
                         {"condition", experiment::to_string(r.condition)},
                         {"minutes", r.minutes}});
    }
    send_json(res, 200, {{"ok", true}, {"records", std::move(records)}});
  }));

  s.Get("/experiment/summary", guarded([this](const httplib::Request&, httplib::Response& res) {
    const auto sum = bench.timing_summary();
    send_json(res, 200,
              {{"ok", true},
               {"problems", sum.problems},
               {"total_solo", sum.total_solo},
               {"total_assisted", sum.total_assisted},
               {"total_change_pct", sum.total_change_pct},
               {"per_problem_mean_change_pct", sum.per_problem_mean_change_pct},
               {"headline", sum.headline()}});
  }));

  s.Get("/experiment/table", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto format = experiment::parse_table_format(
        req.has_param("format") ? req.get_param_value("format") : "markdown");
    res.set_content(bench.timing_table(format),
                    format == experiment::TableFormat::Csv ? "text/csv" : "text/markdown");
  }));

  s.Get("/experiment/timer", guarded([this](const httplib::Request&, httplib::Response& res) {
    auto j = bench.timer_state();
    j["ok"] = true;
    send_json(res, 200, j);
  }));

  s.Post("/experiment/timer/start",
         guarded([this](const httplib::Request& req, httplib::Response& res) {
           const auto body = parse_body(req);
           bench.timer_start(require_string(body, "problem"),
                             experiment::parse_condition(require_string(body, "condition")));
           auto j = bench.timer_state();
           j["ok"] = true;
           send_json(res, 200, j);
         }));

  s.Post("/experiment/timer/pause", guarded([this](const httplib::Request&, httplib::Response& res) {
    bench.timer_pause();
    auto j = bench.timer_state();
    j["ok"] = true;
    send_json(res, 200, j);
  }));

  s.Post("/experiment/timer/resume",
         guarded([this](const httplib::Request&, httplib::Response& res) {
           bench.timer_resume();
           auto j = bench.timer_state();
           j["ok"] = true;
           send_json(res, 200, j);
         }));

  s.Post("/experiment/timer/stop", guarded([this](const httplib::Request&, httplib::Response& res) {
    const auto rec = bench.timer_stop();
    send_json(res, 200,
              {{"ok", true},
               {"problem", rec.problem_label},
               {"condition", experiment::to_string(rec.condition)},
               {"minutes", rec.minutes}});
  }));
}

void HttpServer::Impl::events(const httplib::Request& req, httplib::Response& res) {
  const auto host = bench.find_session(path_param(req, "id"));
  const Cursors since =
      req.has_param("since") ? parse_cursors(req.get_param_value("since")) : Cursors{};
  const std::string follow = req.has_param("follow") ? req.get_param_value("follow") : "true";
  if (follow != "true" && follow != "false") {
    throw Error(ErrorCode::InvalidArgument, "follow must be true or false");
  }
  const auto sub = host->subscribe(since, follow == "false");
  const StateNotice opening{host->snapshot().state(), bench.scheduler().now()};

  struct Stream {
    bool opened = false;
    Clock::time_point last_write = Clock::now();
  };
  auto stream = std::make_shared<Stream>();

  res.set_header("Cache-Control", "no-cache");
  res.set_header("X-Accel-Buffering", "no");
  res.set_chunked_content_provider(
      "text/event-stream",
      [this, sub, stream, opening](std::size_t, httplib::DataSink& sink) {
        const auto write = [&](const std::string& frame) {
          stream->last_write = Clock::now();
          return sink.write(frame.data(), frame.size());
        };
        if (!stream->opened) {
          stream->opened = true;
          return write(sse_frame(HubItem{opening}));
        }
        if (stopping) return false;
        const auto next = sub->next(kPollInterval);
        switch (next.status) {
          case Subscription::Status::Item:
            return write(sse_frame(next.item));
          case Subscription::Status::Overflow:
            write(provider::format_sse(
                "overflow", json{{"status", "subscriber fell too far behind; reconnect with since"}}.dump()));
            sink.done();
            return true;
          case Subscription::Status::Closed:
            sink.done();
            return true;
          case Subscription::Status::Timeout:
            break;
        }
        if (!sink.is_writable()) return false;
        if (Clock::now() - stream->last_write >= kKeepalive) return write(": keepalive\n\n");
        return true;
      },
      [sub](bool) { sub->cancel(); });
}

HttpServer::HttpServer(Workbench& workbench, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(workbench)) {
  impl_->server.new_task_queue = [] { return new httplib::ThreadPool(32); };
  impl_->routes();
  if (!static_dir.empty()) {
    if (!impl_->server.set_mount_point("/", static_dir.string())) {
      throw Error(ErrorCode::InvalidArgument, "ui directory not found: " + static_dir.string());
    }
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) bound = 0;
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = 0;
  }
  if (bound <= 0) {
    throw Error(ErrorCode::InvalidArgument,
                "cannot listen on " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  impl_->thread = std::thread([this] { serve(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace duet::service
