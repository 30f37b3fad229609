#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "duet/provider/types.hpp"

namespace duet::provider {

/// A message in the target provider's role vocabulary.
struct WireMessage {
  std::string role;
  std::string content;

  friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

/// Maps every message to the provider's role names, preserving order and
/// content. Anthropic and Gemini carry system text outside the message list,
/// so a system message raises UnsupportedRole for them.
std::vector<WireMessage> normalize_transcript(const Transcript& transcript,
                                              ProviderKind provider);

/// Rough token count (4 bytes per token, rounded up).
std::int64_t estimate_tokens(std::string_view text) noexcept;

/// Drops the oldest non-system messages until the estimated input plus the
/// reserved output budget fits `context_tokens`. The final message is never
/// dropped, so an oversized last message is sent as-is.
Transcript fit_to_context(const Transcript& transcript,
                          std::int64_t context_tokens,
                          std::int64_t reserved_output_tokens);

}  // namespace duet::provider
