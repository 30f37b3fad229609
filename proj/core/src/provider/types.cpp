#include "duet/provider/types.hpp"

#include "duet/error.hpp"
#include "duet/text.hpp"

namespace duet::provider {

std::string_view to_string(ProviderKind kind) noexcept {
  switch (kind) {
    case ProviderKind::OpenAI: return "openai";
    case ProviderKind::Anthropic: return "anthropic";
    case ProviderKind::Gemini: return "gemini";
    case ProviderKind::Mock: return "mock";
  }
  return "mock";
}

ProviderKind parse_provider_kind(std::string_view name) {
  if (name == "openai") return ProviderKind::OpenAI;
  if (name == "anthropic") return ProviderKind::Anthropic;
  if (name == "gemini") return ProviderKind::Gemini;
  if (name == "mock") return ProviderKind::Mock;
  throw Error(ErrorCode::InvalidArgument,
              "unknown provider '" + std::string(name) + "'");
}

void validate(const ModelConfig& config) {
  if (config.model_id.empty()) {
    throw Error(ErrorCode::InvalidArgument, "model_id must not be empty");
  }
  if (config.model_name.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "model_name must not be empty for " + config.model_id);
  }
  if (config.token_budget < 1) {
    throw Error(ErrorCode::InvalidArgument,
                "token_budget must be >= 1 for " + config.model_id);
  }
}

std::vector<ModelConfig> default_models() {
  return {
      {"gpt-4o", ProviderKind::OpenAI, "gpt-4o", kDefaultTokenBudget},
      {"claude-3.5-sonnet", ProviderKind::Anthropic,
       "claude-3-5-sonnet-20241022", kDefaultTokenBudget},
      {"gemini-1.5-flash", ProviderKind::Gemini, "gemini-1.5-flash",
       kDefaultTokenBudget},
  };
}

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view name) {
  if (name == "system") return Role::System;
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  throw Error(ErrorCode::InvalidArgument,
              "unknown role '" + std::string(name) + "'");
}

void Transcript::append(ChatMessage message) {
  if (!text::is_valid_utf8(message.content)) {
    throw Error(ErrorCode::InvalidArgument,
                "message content is not valid UTF-8");
  }
  messages_.push_back(std::move(message));
}

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::Delta: return "delta";
    case EventKind::Done: return "done";
    case EventKind::Error: return "error";
  }
  return "delta";
}

EventKind parse_event_kind(std::string_view name) {
  if (name == "delta") return EventKind::Delta;
  if (name == "done") return EventKind::Done;
  if (name == "error") return EventKind::Error;
  throw Error(ErrorCode::InvalidArgument,
              "unknown event kind '" + std::string(name) + "'");
}

ProviderDescriptor default_descriptor(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::OpenAI:
      return {kind, "OPENAI_API_KEY", "https://api.openai.com", 128000};
    case ProviderKind::Anthropic:
      return {kind, "ANTHROPIC_API_KEY", "https://api.anthropic.com", 200000};
    case ProviderKind::Gemini:
      return {kind, "GEMINI_API_KEY",
              "https://generativelanguage.googleapis.com", 1048576};
    case ProviderKind::Mock:
      return {kind, "", "mock://local", 1 << 20};
  }
  return {};
}

}  // namespace duet::provider
