#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "duet/corpus/corpus.hpp"
#include "duet/provider/types.hpp"
#include "duet/session/prompt.hpp"

namespace duet::session {

using provider::ModelConfig;
using provider::Transcript;

enum class SessionState { Draft, Active };

std::string_view to_string(SessionState state) noexcept;
SessionState parse_session_state(std::string_view name);

enum class InputField { Problem, Algorithm, Reference };

std::string_view to_string(InputField field) noexcept;
InputField parse_input_field(std::string_view name);

struct SessionInputs {
  std::string problem;
  std::string algorithm;
  std::vector<std::string> reference_aliases;

  friend bool operator==(const SessionInputs&, const SessionInputs&) = default;
};

/// Who a follow-up message goes to.
struct Target {
  std::string model_id;  // empty means every model

  static Target all() { return {}; }
  static Target model(std::string id) { return {std::move(id)}; }
  bool is_all() const noexcept { return model_id.empty(); }

  /// "all" or a model id.
  static Target parse(std::string_view text);
  std::string str() const { return is_all() ? "all" : model_id; }

  friend bool operator==(const Target&, const Target&) = default;
};

/// Per-model streaming state. `next_seq` numbers events across the whole
/// session, so (model, seq) identifies an event uniquely.
struct ModelProgress {
  bool in_flight = false;
  std::string partial;
  std::uint64_t next_seq = 0;
  std::uint32_t turns = 0;

  friend bool operator==(const ModelProgress&, const ModelProgress&) = default;
};

/// One chat request the caller must hand to the model's provider.
struct OutboundRequest {
  std::string model_id;
  std::uint32_t turn = 0;
  Transcript transcript;
};

struct AppliedEvent {
  std::uint64_t seq = 0;
  std::uint32_t turn = 0;
};

/// The workflow state machine. Draft accepts inputs and start; Active accepts
/// follow-up messages and model events. Draft -> Active is the only
/// transition. Not thread-safe; callers serialize access.
class Session {
 public:
  /// Throws EmptyModelList, DuplicateModelId or InvalidArgument.
  static Session create(std::string session_id, std::vector<ModelConfig> models);

  const std::string& id() const noexcept { return id_; }
  SessionState state() const noexcept { return state_; }
  const SessionInputs& inputs() const noexcept { return inputs_; }
  const std::vector<ModelConfig>& models() const noexcept { return models_; }
  const ModelConfig& model(const std::string& model_id) const;
  const Transcript& transcript(const std::string& model_id) const;
  const ModelProgress& progress(const std::string& model_id) const;

  bool can_start() const noexcept;
  /// True when no model has a request in flight.
  bool idle() const noexcept;

  /// Stores one input and returns can_start(). Reference values are split
  /// into aliases with corpus::split_alias_list. Throws SessionActive.
  bool set_input(InputField field, std::string value);
  bool set_reference_aliases(std::vector<std::string> aliases);

  /// Moves to Active, appending `prompts[model_id]` as each model's first
  /// user message. Throws AlreadyActive, PreconditionFailed, or
  /// InvalidArgument when a model has no prompt.
  std::vector<OutboundRequest> activate(
      const std::map<std::string, std::string>& prompts);

  /// Throws NotActive, UnknownModel, ModelBusy, or InvalidArgument for an
  /// empty message. On error nothing changes.
  std::vector<OutboundRequest> send_message(const Target& target,
                                            std::string text);

  /// Applies one model event. Deltas accumulate; a terminal event appends
  /// the accumulated text as the assistant reply (skipped if an error
  /// arrives before any text) and clears the in-flight flag.
  /// Throws UnknownModel, or InvalidArgument if nothing is in flight.
  AppliedEvent apply_event(const std::string& model_id, provider::EventKind kind,
                           const std::string& text);

  friend bool operator==(const Session&, const Session&) = default;

 private:
  void require_draft() const;
  OutboundRequest dispatch(const std::string& model_id);

  std::string id_;
  SessionState state_ = SessionState::Draft;
  SessionInputs inputs_;
  std::vector<ModelConfig> models_;
  std::map<std::string, Transcript> transcripts_;
  std::map<std::string, ModelProgress> progress_;
};

/// Renders the opening prompt for the session's inputs. Throws
/// PreconditionFailed without problem text and MissingChapter for an alias
/// that does not resolve.
std::string assemble_prompt(const Session& session,
                            const corpus::CorpusIndex& index,
                            const PromptTemplate& prompt_template = {});

/// Assembles prompts (per-model overrides win over `prompt_template`) and
/// activates the session.
std::vector<OutboundRequest> start_chats(
    Session& session, const corpus::CorpusIndex& index,
    const PromptTemplate& prompt_template = {},
    const std::map<std::string, PromptTemplate>& per_model = {});

}  // namespace duet::session
