#include "duet/session/session.hpp"

#include <set>

#include "duet/error.hpp"
#include "duet/text.hpp"

namespace duet::session {

using provider::EventKind;
using provider::Role;

std::string_view to_string(SessionState state) noexcept {
  return state == SessionState::Draft ? "Draft" : "Active";
}

SessionState parse_session_state(std::string_view name) {
  if (name == "Draft") return SessionState::Draft;
  if (name == "Active") return SessionState::Active;
  throw Error(ErrorCode::InvalidArgument,
              "unknown session state '" + std::string(name) + "'");
}

std::string_view to_string(InputField field) noexcept {
  switch (field) {
    case InputField::Problem: return "problem";
    case InputField::Algorithm: return "algorithm";
    case InputField::Reference: return "reference";
  }
  return "problem";
}

InputField parse_input_field(std::string_view name) {
  if (name == "problem") return InputField::Problem;
  if (name == "algorithm") return InputField::Algorithm;
  if (name == "reference") return InputField::Reference;
  throw Error(ErrorCode::InvalidArgument,
              "unknown input field '" + std::string(name) +
                  "' (expected problem, algorithm or reference)");
}

Target Target::parse(std::string_view text) {
  if (text == "all") return all();
  if (text.empty()) {
    throw Error(ErrorCode::InvalidArgument, "message target must not be empty");
  }
  return model(std::string(text));
}

Session Session::create(std::string session_id, std::vector<ModelConfig> models) {
  if (session_id.empty()) {
    throw Error(ErrorCode::InvalidArgument, "session id must not be empty");
  }
  if (models.empty()) {
    throw Error(ErrorCode::EmptyModelList, "at least one model is required");
  }
  std::set<std::string> seen;
  for (const auto& m : models) {
    provider::validate(m);
    if (m.model_id == "all") {
      throw Error(ErrorCode::InvalidArgument,
                  "'all' is reserved and cannot be a model id");
    }
    if (!seen.insert(m.model_id).second) {
      throw Error(ErrorCode::DuplicateModelId,
                  "duplicate model id '" + m.model_id + "'");
    }
  }
  Session s;
  s.id_ = std::move(session_id);
  for (const auto& m : models) {
    s.transcripts_[m.model_id];
    s.progress_[m.model_id];
  }
  s.models_ = std::move(models);
  return s;
}

const ModelConfig& Session::model(const std::string& model_id) const {
  for (const auto& m : models_) {
    if (m.model_id == model_id) return m;
  }
  throw Error(ErrorCode::UnknownModel, "unknown model '" + model_id + "'");
}

const Transcript& Session::transcript(const std::string& model_id) const {
  const auto it = transcripts_.find(model_id);
  if (it == transcripts_.end()) {
    throw Error(ErrorCode::UnknownModel, "unknown model '" + model_id + "'");
  }
  return it->second;
}

const ModelProgress& Session::progress(const std::string& model_id) const {
  const auto it = progress_.find(model_id);
  if (it == progress_.end()) {
    throw Error(ErrorCode::UnknownModel, "unknown model '" + model_id + "'");
  }
  return it->second;
}

bool Session::can_start() const noexcept {
  return !text::trim(inputs_.problem).empty();
}

bool Session::idle() const noexcept {
  for (const auto& [_, p] : progress_) {
    if (p.in_flight) return false;
  }
  return true;
}

void Session::require_draft() const {
  if (state_ != SessionState::Draft) {
    throw Error(ErrorCode::SessionActive,
                "inputs are frozen once the chats have started");
  }
}

bool Session::set_input(InputField field, std::string value) {
  require_draft();
  if (!text::is_valid_utf8(value)) {
    throw Error(ErrorCode::InvalidArgument, "input is not valid UTF-8");
  }
  switch (field) {
    case InputField::Problem:
      inputs_.problem = std::move(value);
      break;
    case InputField::Algorithm:
      inputs_.algorithm = std::move(value);
      break;
    case InputField::Reference:
      inputs_.reference_aliases = corpus::split_alias_list(value);
      break;
  }
  return can_start();
}

bool Session::set_reference_aliases(std::vector<std::string> aliases) {
  require_draft();
  inputs_.reference_aliases = std::move(aliases);
  return can_start();
}

OutboundRequest Session::dispatch(const std::string& model_id) {
  auto& p = progress_.at(model_id);
  p.in_flight = true;
  p.partial.clear();
  return {model_id, p.turns++, transcripts_.at(model_id)};
}

std::vector<OutboundRequest> Session::activate(
    const std::map<std::string, std::string>& prompts) {
  if (state_ == SessionState::Active) {
    throw Error(ErrorCode::AlreadyActive, "the chats have already started");
  }
  if (!can_start()) {
    throw Error(ErrorCode::PreconditionFailed, "problem text required");
  }
  for (const auto& m : models_) {
    if (prompts.count(m.model_id) == 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "no opening prompt for model '" + m.model_id + "'");
    }
  }
  state_ = SessionState::Active;
  std::vector<OutboundRequest> out;
  for (const auto& m : models_) {
    transcripts_.at(m.model_id).append(Role::User, prompts.at(m.model_id));
    out.push_back(dispatch(m.model_id));
  }
  return out;
}

std::vector<OutboundRequest> Session::send_message(const Target& target,
                                                   std::string text) {
  if (state_ != SessionState::Active) {
    throw Error(ErrorCode::NotActive,
                "start the chats before sending messages");
  }
  if (text::trim(text).empty()) {
    throw Error(ErrorCode::InvalidArgument, "message text must not be empty");
  }
  if (!text::is_valid_utf8(text)) {
    throw Error(ErrorCode::InvalidArgument, "message is not valid UTF-8");
  }
  std::vector<std::string> targets;
  if (target.is_all()) {
    for (const auto& m : models_) targets.push_back(m.model_id);
  } else {
    model(target.model_id);  // throws UnknownModel
    targets.push_back(target.model_id);
  }
  for (const auto& id : targets) {
    if (progress_.at(id).in_flight) {
      throw Error(ErrorCode::ModelBusy,
                  "model '" + id + "' is still answering the previous message");
    }
  }
  std::vector<OutboundRequest> out;
  for (const auto& id : targets) {
    transcripts_.at(id).append(Role::User, text);
    out.push_back(dispatch(id));
  }
  return out;
}

AppliedEvent Session::apply_event(const std::string& model_id, EventKind kind,
                                  const std::string& text) {
  const auto it = progress_.find(model_id);
  if (it == progress_.end()) {
    throw Error(ErrorCode::UnknownModel, "unknown model '" + model_id + "'");
  }
  auto& p = it->second;
  if (!p.in_flight) {
    throw Error(ErrorCode::InvalidArgument,
                "no request in flight for model '" + model_id + "'");
  }
  const AppliedEvent applied{p.next_seq++, p.turns - 1};
  switch (kind) {
    case EventKind::Delta:
      p.partial += text;
      break;
    case EventKind::Done:
    case EventKind::Error:
      if (kind == EventKind::Done || !p.partial.empty()) {
        transcripts_.at(model_id).append(Role::Assistant, std::move(p.partial));
      }
      p.partial.clear();
      p.in_flight = false;
      break;
  }
  return applied;
}

std::string assemble_prompt(const Session& session,
                            const corpus::CorpusIndex& index,
                            const PromptTemplate& prompt_template) {
  if (!session.can_start()) {
    throw Error(ErrorCode::PreconditionFailed, "problem text required");
  }
  const auto& in = session.inputs();
  PromptBundle bundle{prompt_template.instructions, in.problem, in.algorithm,
                      resolve_references(index, in.reference_aliases)};
  return render_prompt(bundle);
}

std::vector<OutboundRequest> start_chats(
    Session& session, const corpus::CorpusIndex& index,
    const PromptTemplate& prompt_template,
    const std::map<std::string, PromptTemplate>& per_model) {
  if (session.state() == SessionState::Active) {
    throw Error(ErrorCode::AlreadyActive, "the chats have already started");
  }
  std::map<std::string, std::string> prompts;
  const std::string shared = assemble_prompt(session, index, prompt_template);
  for (const auto& m : session.models()) {
    const auto it = per_model.find(m.model_id);
    prompts[m.model_id] = it == per_model.end()
                              ? shared
                              : assemble_prompt(session, index, it->second);
  }
  return session.activate(prompts);
}

}  // namespace duet::session
