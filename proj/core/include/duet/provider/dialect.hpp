#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/provider/normalize.hpp"
#include "duet/provider/sse.hpp"
#include "duet/provider/types.hpp"

namespace duet::provider {

/// Wire-level shape of one streaming chat request.
struct HttpCall {
  std::string path;
  std::vector<std::pair<std::string, std::string>> headers;
  nlohmann::json body;
};

/// Builds the provider-specific request body. The max-output-token field
/// always carries `config.token_budget`:
///   openai    -> max_tokens
///   anthropic -> max_tokens
///   gemini    -> generationConfig.maxOutputTokens
///   mock      -> max_output_tokens
nlohmann::json build_request_body(const ModelConfig& config,
                                  const std::vector<WireMessage>& messages);

/// Reads the max-output-token field back out of a body built above.
std::int64_t max_output_tokens(ProviderKind provider,
                               const nlohmann::json& body);

HttpCall build_http_call(const ModelConfig& config, const Transcript& transcript,
                         const std::string& api_key);

/// What one provider SSE event means for the reply stream.
struct DecodedEvent {
  std::string text;
  bool done = false;
  std::string error;  // non-empty on a provider-reported failure
};

DecodedEvent decode_stream_event(ProviderKind provider, const SseEvent& event);

/// Gemini signals completion by closing the body; the others send an
/// explicit terminator, so a bare close is a truncated stream.
bool body_end_means_done(ProviderKind provider) noexcept;

}  // namespace duet::provider
