#include "duet/provider/dialect.hpp"

#include "duet/error.hpp"

namespace duet::provider {

using nlohmann::json;

namespace {

json messages_array(const std::vector<WireMessage>& messages) {
  json out = json::array();
  for (const auto& m : messages) {
    out.push_back({{"role", m.role}, {"content", m.content}});
  }
  return out;
}

std::string error_message(const json& payload) {
  const auto& err = payload.at("error");
  if (err.is_object() && err.contains("message") && err["message"].is_string()) {
    return err["message"].get<std::string>();
  }
  return err.dump();
}

}  // namespace

json build_request_body(const ModelConfig& config,
                        const std::vector<WireMessage>& messages) {
  switch (config.provider) {
    case ProviderKind::OpenAI:
      return {{"model", config.model_name},
              {"max_tokens", config.token_budget},
              {"stream", true},
              {"messages", messages_array(messages)}};
    case ProviderKind::Anthropic:
      return {{"model", config.model_name},
              {"max_tokens", config.token_budget},
              {"stream", true},
              {"messages", messages_array(messages)}};
    case ProviderKind::Gemini: {
      json contents = json::array();
      for (const auto& m : messages) {
        contents.push_back(
            {{"role", m.role}, {"parts", json::array({{{"text", m.content}}})}});
      }
      return {{"contents", std::move(contents)},
              {"generationConfig", {{"maxOutputTokens", config.token_budget}}}};
    }
    case ProviderKind::Mock:
      return {{"model", config.model_name},
              {"max_output_tokens", config.token_budget},
              {"messages", messages_array(messages)}};
  }
  return {};
}

std::int64_t max_output_tokens(ProviderKind provider, const json& body) {
  switch (provider) {
    case ProviderKind::OpenAI:
    case ProviderKind::Anthropic:
      return body.at("max_tokens").get<std::int64_t>();
    case ProviderKind::Gemini:
      return body.at("generationConfig").at("maxOutputTokens").get<std::int64_t>();
    case ProviderKind::Mock:
      return body.at("max_output_tokens").get<std::int64_t>();
  }
  return 0;
}

HttpCall build_http_call(const ModelConfig& config, const Transcript& transcript,
                         const std::string& api_key) {
  HttpCall call;
  call.body = build_request_body(
      config, normalize_transcript(transcript, config.provider));
  switch (config.provider) {
    case ProviderKind::OpenAI:
      call.path = "/v1/chat/completions";
      call.headers = {{"Authorization", "Bearer " + api_key}};
      break;
    case ProviderKind::Anthropic:
      call.path = "/v1/messages";
      call.headers = {{"x-api-key", api_key},
                      {"anthropic-version", "2023-06-01"}};
      break;
    case ProviderKind::Gemini:
      call.path = "/v1beta/models/" + config.model_name +
                  ":streamGenerateContent?alt=sse";
      call.headers = {{"x-goog-api-key", api_key}};
      break;
    case ProviderKind::Mock:
      throw Error(ErrorCode::InvalidArgument,
                  "the mock provider has no HTTP dialect");
  }
  call.headers.emplace_back("Accept", "text/event-stream");
  return call;
}

DecodedEvent decode_stream_event(ProviderKind provider, const SseEvent& event) {
  DecodedEvent out;
  if (provider == ProviderKind::OpenAI && event.data == "[DONE]") {
    out.done = true;
    return out;
  }
  const json payload = json::parse(event.data, nullptr, false);
  if (payload.is_discarded() || !payload.is_object()) {
    if (provider == ProviderKind::Anthropic && event.event == "ping") return out;
    out.error = "malformed stream payload: " + event.data.substr(0, 200);
    return out;
  }
  if (payload.contains("error")) {
    out.error = error_message(payload);
    return out;
  }

  switch (provider) {
    case ProviderKind::OpenAI: {
      const auto choices = payload.value("choices", json::array());
      if (!choices.empty()) {
        const auto& delta = choices.front().value("delta", json::object());
        if (auto it = delta.find("content"); it != delta.end() && it->is_string()) {
          out.text = it->get<std::string>();
        }
      }
      break;
    }
    case ProviderKind::Anthropic: {
      const auto type = payload.value("type", event.event);
      if (type == "content_block_delta") {
        const auto& delta = payload.value("delta", json::object());
        out.text = delta.value("text", "");
      } else if (type == "message_stop") {
        out.done = true;
      }
      break;
    }
    case ProviderKind::Gemini: {
      const auto candidates = payload.value("candidates", json::array());
      if (!candidates.empty()) {
        const auto content = candidates.front().value("content", json::object());
        for (const auto& part : content.value("parts", json::array())) {
          out.text += part.value("text", "");
        }
      }
      break;
    }
    case ProviderKind::Mock:
      break;
  }
  return out;
}

bool body_end_means_done(ProviderKind provider) noexcept {
  return provider == ProviderKind::Gemini;
}

}  // namespace duet::provider
