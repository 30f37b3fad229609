#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/provider/mock_provider.hpp"
#include "duet/provider/types.hpp"
#include "duet/session/prompt.hpp"

namespace duet::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path corpus_root;  // empty: start without a corpus
  std::filesystem::path data_dir = "data";
  std::vector<provider::ModelConfig> models = provider::default_models();
  session::PromptTemplate prompt;
  std::map<std::string, session::PromptTemplate> model_prompts;
  std::map<provider::ProviderKind, provider::ProviderDescriptor> providers;
  /// Scripts for mock model slots, keyed by model_id.
  std::map<std::string, std::vector<provider::MockScript>> mock_scripts;
  std::size_t subscriber_capacity = 10000;

  const provider::ProviderDescriptor& descriptor(provider::ProviderKind kind) const;
};

/// Reads the JSON config layout documented in docs/api.md. Relative paths
/// (corpus_root, data_dir, mock script files) resolve against `base_dir`.
/// Throws BadConfig with a diagnostic.
ServiceConfig config_from_json(const nlohmann::json& doc,
                               const std::filesystem::path& base_dir = {});
ServiceConfig load_service_config(const std::filesystem::path& path);

/// Throws BadConfig on an invalid port, an empty or duplicate model list,
/// bad budgets, or prompt instructions without a C++ directive.
void validate(const ServiceConfig& config);

}  // namespace duet::service
