#include "duet/provider/mock_provider.hpp"

#include <algorithm>
#include <fstream>

#include "duet/error.hpp"
#include "duet/provider/dialect.hpp"
#include "duet/provider/normalize.hpp"

namespace duet::provider {

using nlohmann::json;

MockScript parse_mock_script(const json& doc) {
  if (!doc.is_array()) {
    throw Error(ErrorCode::InvalidArgument, "mock script must be a JSON array");
  }
  MockScript script;
  Millis last = 0;
  for (const auto& item : doc) {
    if (!item.is_object()) {
      throw Error(ErrorCode::InvalidArgument,
                  "mock script entries must be objects");
    }
    ScriptStep step;
    step.at_ms = std::max<Millis>(last, item.value("latency_ms", last));
    last = step.at_ms;
    if (auto f = item.find("fail"); f != item.end()) {
      if (f->is_string()) {
        step.fail = true;
        step.fail_message = f->get<std::string>();
      } else {
        step.fail = f->get<bool>();
      }
    }
    if (!step.fail) {
      step.chunk = item.value("chunk", "");
    }
    script.push_back(std::move(step));
  }
  return script;
}

MockScript load_mock_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::UnreadableFile,
                "cannot open mock script " + path.string());
  }
  const json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::InvalidArgument,
                "mock script " + path.string() + " is not valid JSON");
  }
  return parse_mock_script(doc);
}

std::string script_reply(const MockScript& script) {
  std::string out;
  for (const auto& step : script) {
    if (step.fail) break;
    out += step.chunk;
  }
  return out;
}

Millis script_completion_time(const MockScript& script) {
  Millis t = 0;
  for (const auto& step : script) {
    t = std::max(t, step.at_ms);
    if (step.fail) break;
  }
  return t;
}

bool script_fails(const MockScript& script) {
  return std::any_of(script.begin(), script.end(),
                     [](const ScriptStep& s) { return s.fail; });
}

MockScript chunked_script(std::string_view reply, std::size_t pieces,
                          Millis step_ms) {
  MockScript script;
  if (reply.empty()) return script;
  pieces = std::clamp<std::size_t>(pieces, 1, reply.size());
  const std::size_t size = (reply.size() + pieces - 1) / pieces;
  Millis t = 0;
  std::size_t pos = 0;
  while (pos < reply.size()) {
    std::size_t end = std::min(reply.size(), pos + size);
    // keep multi-byte UTF-8 sequences inside one chunk
    while (end < reply.size() &&
           (static_cast<unsigned char>(reply[end]) & 0xC0) == 0x80) {
      ++end;
    }
    t += step_ms;
    script.push_back({t, std::string(reply.substr(pos, end - pos))});
    pos = end;
  }
  return script;
}

void mock_respond(Scheduler& scheduler, const MockScript& script,
                  std::shared_ptr<EventEmitter> emitter) {
  const Millis start = scheduler.now();
  if (script.empty()) {
    scheduler.post_at(start, [emitter] { emitter->done(); });
    return;
  }
  Millis last = start;
  for (std::size_t i = 0; i < script.size(); ++i) {
    const auto& step = script[i];
    last = std::max(last, start + step.at_ms);
    const bool final_step = step.fail || i + 1 == script.size();
    scheduler.post_at(last, [emitter, step, final_step] {
      if (step.fail) {
        emitter->error(step.fail_message);
        return;
      }
      emitter->delta(step.chunk);
      if (final_step) emitter->done();
    });
    if (step.fail) break;
  }
}

namespace {

const MockScript& canned_script() {
  static const MockScript script = chunked_script(
      "Here is a C++ solution.\n\n```cpp\n#include <bits/stdc++.h>\n"
      "using namespace std;\n\nint main() {\n  ios::sync_with_stdio(false);\n"
      "  cin.tie(nullptr);\n  return 0;\n}\n```\n",
      8, 40);
  return script;
}

}  // namespace

MockProvider::MockProvider(Scheduler& scheduler, std::vector<MockScript> scripts,
                           std::shared_ptr<RequestRecorder> recorder,
                           std::int64_t context_tokens)
    : scheduler_(scheduler),
      scripts_(std::move(scripts)),
      recorder_(std::move(recorder)),
      context_tokens_(context_tokens) {}

std::size_t MockProvider::requests_seen() const {
  std::lock_guard lock(mu_);
  return requests_;
}

void MockProvider::do_send_chat(ChatRequest request, EventSink sink) {
  const auto& config = request.config;
  const auto fitted =
      fit_to_context(request.transcript, context_tokens_, config.token_budget);
  if (recorder_) {
    recorder_->record({config.model_id, "mock://chat",
                       build_request_body(config, normalize_transcript(
                                                      fitted, ProviderKind::Mock))});
  }

  MockScript script;
  {
    std::lock_guard lock(mu_);
    if (scripts_.empty()) {
      script = canned_script();
    } else {
      script = scripts_[std::min(requests_, scripts_.size() - 1)];
    }
    ++requests_;
  }
  mock_respond(scheduler_, script,
               std::make_shared<EventEmitter>(request.session_id,
                                              config.model_id, std::move(sink)));
}

}  // namespace duet::provider
