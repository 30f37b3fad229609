#include "duet/provider/http_provider.hpp"

#include <cstdlib>

#include <httplib.h>

#include "duet/error.hpp"
#include "duet/provider/dialect.hpp"
#include "duet/provider/normalize.hpp"
#include "duet/provider/sse.hpp"

namespace duet::provider {

struct HttpProvider::Worker {
  std::thread thread;
  std::atomic<bool> finished{false};
  std::mutex client_mu;
  httplib::Client* client = nullptr;
};

HttpProvider::HttpProvider(ProviderDescriptor descriptor,
                           std::shared_ptr<RequestRecorder> recorder)
    : descriptor_(std::move(descriptor)), recorder_(std::move(recorder)) {}

HttpProvider::~HttpProvider() {
  stopping_ = true;
  std::lock_guard lock(mu_);
  for (auto& w : workers_) {
    {
      std::lock_guard client_lock(w->client_mu);
      if (w->client != nullptr) w->client->stop();
    }
    if (!w->thread.joinable()) continue;
    // the last owner of a session can drop it from inside a reply callback
    if (w->thread.get_id() == std::this_thread::get_id()) {
      w->thread.detach();
    } else {
      w->thread.join();
    }
  }
}

void HttpProvider::reap_finished() {
  for (auto it = workers_.begin(); it != workers_.end();) {
    if ((*it)->finished) {
      (*it)->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

void HttpProvider::do_send_chat(ChatRequest request, EventSink sink) {
  std::lock_guard lock(mu_);
  reap_finished();
  auto worker = std::make_shared<Worker>();
  workers_.push_back(worker);
  worker->thread = std::thread(
      [this, worker, request = std::move(request), sink = std::move(sink)]() mutable {
        run(*worker, std::move(request), std::move(sink));
        worker->finished = true;
      });
}

void HttpProvider::run(Worker& worker, ChatRequest request, EventSink sink) {
  const auto& config = request.config;
  EventEmitter emitter(request.session_id, config.model_id, std::move(sink));

  const char* key = descriptor_.credential_env.empty()
                        ? nullptr
                        : std::getenv(descriptor_.credential_env.c_str());
  if (key == nullptr || *key == '\0') {
    emitter.error(std::string(error_code_name(ErrorCode::AuthMissing)) + ": " +
                  descriptor_.credential_env + " is not set");
    return;
  }

  HttpCall call;
  try {
    const auto fitted = fit_to_context(request.transcript,
                                       descriptor_.context_tokens,
                                       config.token_budget);
    call = build_http_call(config, fitted, key);
  } catch (const Error& e) {
    emitter.error(std::string(error_code_name(e.code())) + ": " + e.what());
    return;
  }
  if (recorder_) recorder_->record({config.model_id, call.path, call.body});

  httplib::Client client(descriptor_.base_url);
  client.set_connection_timeout(std::chrono::seconds(15));
  client.set_read_timeout(std::chrono::minutes(5));
  {
    std::lock_guard lock(worker.client_mu);
    worker.client = &client;
  }
  if (stopping_) client.stop();

  httplib::Request req;
  req.method = "POST";
  req.path = call.path;
  for (const auto& [name, value] : call.headers) req.headers.emplace(name, value);
  req.headers.emplace("Content-Type", "application/json");
  req.body = call.body.dump();

  int status = 0;
  std::string error_body;
  SseParser parser;
  const auto consume = [&](const std::vector<SseEvent>& events) {
    for (const auto& ev : events) {
      auto decoded = decode_stream_event(config.provider, ev);
      if (!decoded.error.empty()) {
        emitter.error(std::string(error_code_name(ErrorCode::ProviderError)) +
                      ": " + decoded.error);
      } else {
        emitter.delta(std::move(decoded.text));
        if (decoded.done) emitter.done();
      }
      if (emitter.finished()) return;
    }
  };

  req.response_handler = [&](const httplib::Response& res) {
    status = res.status;
    return true;
  };
  req.content_receiver = [&](const char* data, std::size_t len, std::uint64_t,
                             std::uint64_t) {
    if (status != 200) {
      if (error_body.size() < 2000) error_body.append(data, len);
      return true;
    }
    consume(parser.feed(std::string_view(data, len)));
    // no member access once the reply is final
    return !emitter.finished() && !stopping_;
  };

  httplib::Response res;
  httplib::Error err = httplib::Error::Success;
  client.send(req, res, err);
  {
    std::lock_guard lock(worker.client_mu);
    worker.client = nullptr;
  }

  if (emitter.finished()) return;
  const std::string provider_error(error_code_name(ErrorCode::ProviderError));
  if (status != 0 && status != 200) {
    if (error_body.empty()) error_body = res.body;
    emitter.error(provider_error + ": HTTP " + std::to_string(status) + ": " +
                  error_body.substr(0, 500));
    return;
  }
  if (err != httplib::Error::Success) {
    emitter.error(provider_error + ": " + httplib::to_string(err));
    return;
  }
  consume(parser.finish());
  if (emitter.finished()) return;
  if (body_end_means_done(config.provider)) {
    emitter.done();
  } else {
    emitter.error(provider_error + ": stream ended before completion");
  }
}

}  // namespace duet::provider
