#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/provider/types.hpp"
#include "duet/session/session.hpp"

namespace duet::session {

struct CreatedRecord {
  std::string session_id;
  std::vector<ModelConfig> models;
};

struct InputSetRecord {
  InputField field = InputField::Problem;
  std::string value;
  std::vector<std::string> aliases;  // reference field only
};

struct StartedRecord {
  std::map<std::string, std::string> prompts;  // model_id -> opening message
};

struct HumanMessageRecord {
  Target target;
  std::string text;
};

struct ModelEventRecord {
  std::string model_id;
  std::uint64_t seq = 0;
  std::uint32_t turn = 0;
  provider::EventKind kind = provider::EventKind::Delta;
  std::string text;
};

/// One line of a session's JSONL log.
struct SessionLogRecord {
  std::int64_t ts = 0;
  std::variant<CreatedRecord, InputSetRecord, StartedRecord, HumanMessageRecord,
               ModelEventRecord>
      body;
};

nlohmann::json to_json(const SessionLogRecord& record);
/// Throws InvalidArgument on a missing or mistyped field.
SessionLogRecord record_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// Parses a JSONL stream. Blank lines are skipped. Throws CorruptRecord
/// naming the 1-based line number of the first bad line.
std::vector<SessionLogRecord> parse_log(std::istream& in);
std::vector<SessionLogRecord> read_log(const std::filesystem::path& path);

/// Applies one record to `session` (which must already exist).
void apply_record(Session& session, const SessionLogRecord& record);

/// Rebuilds a session from its log. The first record must be a creation
/// record. Throws CorruptRecord with the 1-based index of the offending
/// record, including a model event whose seq does not continue its model's
/// sequence.
Session replay_log(const std::vector<SessionLogRecord>& records);

/// Append-only JSONL writer; every record is flushed before append returns.
class SessionLogWriter {
 public:
  explicit SessionLogWriter(const std::filesystem::path& path);

  void append(const SessionLogRecord& record);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace duet::session
