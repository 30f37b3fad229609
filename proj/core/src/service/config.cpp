#include "duet/service/config.hpp"

#include <fstream>
#include <set>

#include "duet/error.hpp"
#include "duet/session/log.hpp"

namespace duet::service {

using nlohmann::json;
namespace fs = std::filesystem;

const provider::ProviderDescriptor& ServiceConfig::descriptor(
    provider::ProviderKind kind) const {
  static const std::map<provider::ProviderKind, provider::ProviderDescriptor>
      defaults = {
          {provider::ProviderKind::OpenAI,
           provider::default_descriptor(provider::ProviderKind::OpenAI)},
          {provider::ProviderKind::Anthropic,
           provider::default_descriptor(provider::ProviderKind::Anthropic)},
          {provider::ProviderKind::Gemini,
           provider::default_descriptor(provider::ProviderKind::Gemini)},
          {provider::ProviderKind::Mock,
           provider::default_descriptor(provider::ProviderKind::Mock)},
      };
  if (const auto it = providers.find(kind); it != providers.end()) return it->second;
  return defaults.at(kind);
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

std::vector<provider::MockScript> parse_scripts(const json& j,
                                                const fs::path& base) {
  // accepted: "file.json", [steps...], or [[steps...], [steps...]]
  std::vector<provider::MockScript> out;
  if (j.is_string()) {
    out.push_back(provider::load_mock_script(resolve(base, j.get<std::string>())));
  } else if (j.is_array() && !j.empty() && (j.front().is_array() || j.front().is_string())) {
    for (const auto& s : j) {
      auto more = parse_scripts(s, base);
      out.insert(out.end(), more.begin(), more.end());
    }
  } else {
    out.push_back(provider::parse_mock_script(j));
  }
  return out;
}

}  // namespace

ServiceConfig config_from_json(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::BadConfig, "config must be a JSON object");
  }
  ServiceConfig cfg;
  try {
    cfg.host = doc.value("host", cfg.host);
    cfg.port = doc.value("port", cfg.port);
    if (doc.contains("corpus_root")) {
      cfg.corpus_root = resolve(base_dir, doc["corpus_root"].get<std::string>());
    }
    if (doc.contains("data_dir")) {
      cfg.data_dir = resolve(base_dir, doc["data_dir"].get<std::string>());
    }
    cfg.subscriber_capacity =
        doc.value("subscriber_buffer", cfg.subscriber_capacity);

    if (doc.contains("models")) {
      cfg.models.clear();
      for (const auto& m : doc["models"]) {
        cfg.models.push_back(session::model_config_from_json(m));
        if (m.contains("instructions")) {
          cfg.model_prompts[m["model_id"].get<std::string>()] =
              session::PromptTemplate{m["instructions"].get<std::string>()};
        }
        if (m.contains("mock_script")) {
          cfg.mock_scripts[m["model_id"].get<std::string>()] =
              parse_scripts(m["mock_script"], base_dir);
        }
      }
    }
    if (doc.contains("prompt")) {
      cfg.prompt.instructions =
          doc["prompt"].value("instructions", cfg.prompt.instructions);
    }
    if (doc.contains("providers")) {
      for (const auto& [name, p] : doc["providers"].items()) {
        const auto kind = provider::parse_provider_kind(name);
        auto d = provider::default_descriptor(kind);
        d.base_url = p.value("base_url", d.base_url);
        d.credential_env = p.value("credential_env", d.credential_env);
        d.context_tokens = p.value("context_tokens", d.context_tokens);
        cfg.providers[kind] = d;
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("config: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::BadConfig, std::string("config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ServiceConfig load_service_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadConfig, "cannot open config " + path.string());
  const json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::BadConfig, "config " + path.string() + " is not valid JSON");
  }
  return config_from_json(doc, path.parent_path());
}

void validate(const ServiceConfig& config) {
  const auto bad = [](const std::string& msg) {
    return Error(ErrorCode::BadConfig, "config: " + msg);
  };
  if (config.port < 0 || config.port > 65535) {
    throw bad("port must be within 0..65535");
  }
  if (config.models.empty()) throw bad("at least one model is required");
  std::set<std::string> ids;
  for (const auto& m : config.models) {
    try {
      provider::validate(m);
    } catch (const Error& e) {
      throw bad(e.what());
    }
    if (!ids.insert(m.model_id).second) {
      throw bad("duplicate model id '" + m.model_id + "'");
    }
  }
  const auto check_prompt = [&](const session::PromptTemplate& t,
                                const std::string& where) {
    if (t.instructions.find("C++") == std::string::npos) {
      throw bad(where + " instructions must ask for C++");
    }
  };
  check_prompt(config.prompt, "prompt");
  for (const auto& [id, t] : config.model_prompts) {
    if (ids.count(id) == 0) throw bad("prompt override for unknown model '" + id + "'");
    check_prompt(t, "model '" + id + "'");
  }
  for (const auto& [id, _] : config.mock_scripts) {
    if (ids.count(id) == 0) throw bad("mock script for unknown model '" + id + "'");
  }
  if (config.subscriber_capacity == 0) throw bad("subscriber_buffer must be >= 1");
}

}  // namespace duet::service
