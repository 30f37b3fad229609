#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace duet::provider {

enum class ProviderKind { OpenAI, Anthropic, Gemini, Mock };

std::string_view to_string(ProviderKind kind) noexcept;
/// Accepts "openai", "anthropic", "gemini", "mock". Throws InvalidArgument.
ProviderKind parse_provider_kind(std::string_view name);

inline constexpr std::int64_t kDefaultTokenBudget = 4096;

/// One model slot. Immutable once a session starts.
struct ModelConfig {
  std::string model_id;
  ProviderKind provider = ProviderKind::Mock;
  std::string model_name;
  std::int64_t token_budget = kDefaultTokenBudget;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Throws InvalidArgument on an empty id/name or a budget below 1.
void validate(const ModelConfig& config);

/// The three model slots used when nothing else is configured.
std::vector<ModelConfig> default_models();

enum class Role { System, User, Assistant };

std::string_view to_string(Role role) noexcept;
Role parse_role(std::string_view name);

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// Append-only message history for one model.
class Transcript {
 public:
  Transcript() = default;
  Transcript(std::initializer_list<ChatMessage> messages)
      : messages_(messages) {}

  /// Throws InvalidArgument when content is not well-formed UTF-8.
  void append(ChatMessage message);
  void append(Role role, std::string content) {
    append(ChatMessage{role, std::move(content)});
  }

  const std::vector<ChatMessage>& messages() const noexcept { return messages_; }
  bool empty() const noexcept { return messages_.empty(); }
  std::size_t size() const noexcept { return messages_.size(); }
  const ChatMessage& back() const { return messages_.back(); }

  friend bool operator==(const Transcript&, const Transcript&) = default;

 private:
  std::vector<ChatMessage> messages_;
};

enum class EventKind { Delta, Done, Error };

std::string_view to_string(EventKind kind) noexcept;
EventKind parse_event_kind(std::string_view name);

/// One unit of model output. `seq` counts from 0 within a request and the
/// terminal event (Done or Error) is always the last one. `text` holds the
/// delta payload or the error message.
struct StreamEvent {
  std::string session_id;
  std::string model_id;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Delta;
  std::string text;

  bool terminal() const noexcept { return kind != EventKind::Delta; }

  friend bool operator==(const StreamEvent&, const StreamEvent&) = default;
};

/// Where a provider lives and how it authenticates.
struct ProviderDescriptor {
  ProviderKind provider = ProviderKind::Mock;
  std::string credential_env;  // empty for the mock
  std::string base_url;
  /// Context window used to trim oldest history before sending.
  std::int64_t context_tokens = 0;
};

ProviderDescriptor default_descriptor(ProviderKind kind);

}  // namespace duet::provider
