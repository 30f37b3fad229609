#include "duet/service/session_host.hpp"

#include "duet/error.hpp"

namespace duet::service {

using provider::EventKind;
using session::SessionLogRecord;

namespace {
constexpr const char* kInterrupted =
    "interrupted: the service stopped before the reply finished";
}  // namespace

std::optional<HubItem> hub_item_for(const std::string& session_id,
                                    const SessionLogRecord& record) {
  if (std::holds_alternative<session::StartedRecord>(record.body)) {
    return StateNotice{session::SessionState::Active, record.ts};
  }
  if (const auto* m = std::get_if<session::HumanMessageRecord>(&record.body)) {
    return MessageNotice{m->target, m->text, record.ts};
  }
  if (const auto* e = std::get_if<session::ModelEventRecord>(&record.body)) {
    return EventEnvelope{session_id, e->model_id, e->seq, e->turn,
                         e->kind,    e->text,     record.ts};
  }
  return std::nullopt;
}

SessionHost::SessionHost(session::Session session, Providers providers,
                         provider::Scheduler& scheduler,
                         std::filesystem::path log_path, HostOptions options)
    : id_(session.id()),
      session_(std::move(session)),
      providers_(std::move(providers)),
      scheduler_(scheduler),
      options_(std::move(options)),
      hub_(options_.subscriber_capacity) {
  if (!log_path.empty()) {
    log_ = std::make_unique<session::SessionLogWriter>(log_path);
  }
  for (const auto& m : session_.models()) {
    if (!providers_.count(m.model_id) || !providers_.at(m.model_id)) {
      throw Error(ErrorCode::InvalidArgument,
                  "no provider for model '" + m.model_id + "'");
    }
  }
}

SessionHost::~SessionHost() { hub_.close(); }

std::shared_ptr<SessionHost> SessionHost::create(
    session::Session session, Providers providers, provider::Scheduler& scheduler,
    std::filesystem::path log_path, HostOptions options) {
  if (session.state() != session::SessionState::Draft) {
    throw Error(ErrorCode::InvalidArgument, "a new session must be in Draft");
  }
  session::CreatedRecord created{session.id(), session.models()};
  std::shared_ptr<SessionHost> host(new SessionHost(
      std::move(session), std::move(providers), scheduler, std::move(log_path),
      std::move(options)));
  std::lock_guard lock(host->mu_);
  host->commit({scheduler.now(), std::move(created)});
  return host;
}

std::shared_ptr<SessionHost> SessionHost::restore(
    const std::vector<SessionLogRecord>& records, Providers providers,
    provider::Scheduler& scheduler, std::filesystem::path log_path,
    HostOptions options) {
  auto session = session::replay_log(records);
  std::shared_ptr<SessionHost> host(
      new SessionHost(std::move(session), std::move(providers), scheduler,
                      std::move(log_path), std::move(options)));
  for (const auto& r : records) {
    if (auto item = hub_item_for(host->id_, r)) host->hub_.publish(std::move(*item));
  }

  std::lock_guard lock(host->mu_);
  for (const auto& m : host->session_.models()) {
    const auto& p = host->session_.progress(m.model_id);
    if (!p.in_flight) continue;
    const auto applied =
        host->session_.apply_event(m.model_id, EventKind::Error, kInterrupted);
    host->commit({scheduler.now(),
                  session::ModelEventRecord{m.model_id, applied.seq, applied.turn,
                                            EventKind::Error, kInterrupted}});
  }
  host->hub_.set_idle(host->session_.idle());
  return host;
}

session::Session SessionHost::snapshot() const {
  std::lock_guard lock(mu_);
  return session_;
}

void SessionHost::commit(SessionLogRecord record) {
  if (log_) log_->append(record);
  if (auto item = hub_item_for(id_, record)) hub_.publish(std::move(*item));
}

bool SessionHost::set_input(session::InputField field, const std::string& value,
                            const corpus::CorpusIndex& index) {
  std::lock_guard lock(mu_);
  if (field == session::InputField::Reference) {
    auto aliases = corpus::split_alias_list(value);
    if (session_.state() == session::SessionState::Draft) {
      // canonical aliases; throws MissingChapter before anything changes
      for (auto& a : aliases) a = corpus::resolve_alias(index, a).alias;
    }
    const bool can_start = session_.set_reference_aliases(aliases);
    commit({scheduler_.now(),
            session::InputSetRecord{field, value, std::move(aliases)}});
    return can_start;
  }
  const bool can_start = session_.set_input(field, value);
  commit({scheduler_.now(), session::InputSetRecord{field, value, {}}});
  return can_start;
}

void SessionHost::start(const corpus::CorpusIndex& index) {
  std::vector<session::OutboundRequest> requests;
  {
    std::lock_guard lock(mu_);
    requests = session::start_chats(session_, index, options_.prompt,
                                    options_.model_prompts);
    session::StartedRecord started;
    for (const auto& r : requests) {
      started.prompts[r.model_id] = r.transcript.back().content;
    }
    hub_.set_idle(false);
    commit({scheduler_.now(), std::move(started)});
  }
  fan_out(requests);
}

void SessionHost::send_message(const session::Target& target,
                               const std::string& text) {
  std::vector<session::OutboundRequest> requests;
  {
    std::lock_guard lock(mu_);
    requests = session_.send_message(target, text);
    hub_.set_idle(false);
    commit({scheduler_.now(), session::HumanMessageRecord{target, text}});
  }
  fan_out(requests);
}

void SessionHost::fan_out(const std::vector<session::OutboundRequest>& requests) {
  std::weak_ptr<SessionHost> weak = weak_from_this();
  for (const auto& r : requests) {
    const auto& config = session_.model(r.model_id);  // models are immutable
    const auto turn = r.turn;
    const auto model_id = r.model_id;
    auto sink = [weak, model_id, turn](const provider::StreamEvent& ev) {
      if (auto self = weak.lock()) self->on_event(model_id, turn, ev);
    };
    try {
      providers_.at(r.model_id)->send_chat({id_, config, r.transcript}, sink);
    } catch (const Error& e) {
      // the request never left; close it so the model is not stuck in flight
      on_event(model_id, turn,
               {id_, model_id, 0, EventKind::Error,
                std::string(error_code_name(e.code())) + ": " + e.what()});
    }
  }
}

void SessionHost::on_event(const std::string& model_id, std::uint32_t turn,
                           const provider::StreamEvent& event) {
  std::lock_guard lock(mu_);
  const auto& p = session_.progress(model_id);
  if (!p.in_flight || p.turns != turn + 1) return;  // stale request
  const auto applied = session_.apply_event(model_id, event.kind, event.text);
  commit({scheduler_.now(),
          session::ModelEventRecord{model_id, applied.seq, applied.turn,
                                    event.kind, event.text}});
  if (event.terminal()) hub_.set_idle(session_.idle());
}

std::shared_ptr<Subscription> SessionHost::subscribe(Cursors since,
                                                     bool close_when_idle) {
  return hub_.subscribe(std::move(since), close_when_idle);
}

}  // namespace duet::service
