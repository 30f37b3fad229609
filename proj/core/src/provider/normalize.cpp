#include "duet/provider/normalize.hpp"

#include <algorithm>

#include "duet/error.hpp"

namespace duet::provider {

namespace {

std::string role_name(Role role, ProviderKind provider) {
  switch (provider) {
    case ProviderKind::OpenAI:
    case ProviderKind::Mock:
      return std::string(to_string(role));
    case ProviderKind::Anthropic:
      if (role == Role::User) return "user";
      if (role == Role::Assistant) return "assistant";
      break;
    case ProviderKind::Gemini:
      if (role == Role::User) return "user";
      if (role == Role::Assistant) return "model";
      break;
  }
  throw Error(ErrorCode::UnsupportedRole,
              "role '" + std::string(to_string(role)) +
                  "' has no mapping for provider " +
                  std::string(to_string(provider)));
}

}  // namespace

std::vector<WireMessage> normalize_transcript(const Transcript& transcript,
                                              ProviderKind provider) {
  std::vector<WireMessage> out;
  out.reserve(transcript.size());
  for (const auto& m : transcript.messages()) {
    out.push_back({role_name(m.role, provider), m.content});
  }
  return out;
}

std::int64_t estimate_tokens(std::string_view text) noexcept {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

Transcript fit_to_context(const Transcript& transcript,
                          std::int64_t context_tokens,
                          std::int64_t reserved_output_tokens) {
  const auto& msgs = transcript.messages();
  std::int64_t total = reserved_output_tokens;
  for (const auto& m : msgs) total += estimate_tokens(m.content);

  std::vector<bool> keep(msgs.size(), true);
  for (std::size_t i = 0; i + 1 < msgs.size() && total > context_tokens; ++i) {
    if (msgs[i].role == Role::System) continue;
    keep[i] = false;
    total -= estimate_tokens(msgs[i].content);
  }
  // Once trimming started, the surviving history must open on a user turn.
  if (std::find(keep.begin(), keep.end(), false) != keep.end()) {
    for (std::size_t i = 0; i + 1 < msgs.size(); ++i) {
      if (!keep[i] || msgs[i].role == Role::System) continue;
      if (msgs[i].role == Role::User) break;
      keep[i] = false;
    }
  }

  Transcript out;
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    if (keep[i]) out.append(msgs[i]);
  }
  return out;
}

}  // namespace duet::provider
