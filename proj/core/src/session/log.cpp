#include "duet/session/log.hpp"

#include <istream>

#include "duet/error.hpp"

namespace duet::session {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

json to_json(const ModelConfig& config) {
  return {{"model_id", config.model_id},
          {"provider", provider::to_string(config.provider)},
          {"model_name", config.model_name},
          {"token_budget", config.token_budget}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.model_id = j.at("model_id").get<std::string>();
  c.provider = provider::parse_provider_kind(j.at("provider").get<std::string>());
  c.model_name = j.value("model_name", c.model_id);
  c.token_budget = j.value("token_budget", provider::kDefaultTokenBudget);
  provider::validate(c);
  return c;
}

json to_json(const SessionLogRecord& record) {
  json j{{"ts", record.ts}};
  std::visit(
      overloaded{
          [&](const CreatedRecord& r) {
            j["kind"] = "created";
            j["session_id"] = r.session_id;
            j["models"] = json::array();
            for (const auto& m : r.models) j["models"].push_back(to_json(m));
          },
          [&](const InputSetRecord& r) {
            j["kind"] = "input_set";
            j["field"] = to_string(r.field);
            j["value"] = r.value;
            if (r.field == InputField::Reference) j["aliases"] = r.aliases;
          },
          [&](const StartedRecord& r) {
            j["kind"] = "started";
            j["prompts"] = r.prompts;
          },
          [&](const HumanMessageRecord& r) {
            j["kind"] = "human_message";
            j["target"] = r.target.str();
            j["text"] = r.text;
          },
          [&](const ModelEventRecord& r) {
            j["kind"] = "model_event";
            j["model_id"] = r.model_id;
            j["seq"] = r.seq;
            j["turn"] = r.turn;
            j["event"] = provider::to_string(r.kind);
            j["text"] = r.text;
          },
      },
      record.body);
  return j;
}

SessionLogRecord record_from_json(const json& j) {
  try {
    SessionLogRecord rec;
    rec.ts = j.at("ts").get<std::int64_t>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "created") {
      CreatedRecord r;
      r.session_id = j.at("session_id").get<std::string>();
      for (const auto& m : j.at("models")) {
        r.models.push_back(model_config_from_json(m));
      }
      rec.body = std::move(r);
    } else if (kind == "input_set") {
      InputSetRecord r;
      r.field = parse_input_field(j.at("field").get<std::string>());
      r.value = j.at("value").get<std::string>();
      if (r.field == InputField::Reference) {
        r.aliases = j.at("aliases").get<std::vector<std::string>>();
      }
      rec.body = std::move(r);
    } else if (kind == "started") {
      rec.body = StartedRecord{
          j.at("prompts").get<std::map<std::string, std::string>>()};
    } else if (kind == "human_message") {
      rec.body = HumanMessageRecord{
          Target::parse(j.at("target").get<std::string>()),
          j.at("text").get<std::string>()};
    } else if (kind == "model_event") {
      ModelEventRecord r;
      r.model_id = j.at("model_id").get<std::string>();
      r.seq = j.at("seq").get<std::uint64_t>();
      r.turn = j.at("turn").get<std::uint32_t>();
      r.kind = provider::parse_event_kind(j.at("event").get<std::string>());
      r.text = j.value("text", "");
      rec.body = std::move(r);
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown record kind '" + kind + "'");
    }
    return rec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, e.what());
  }
}

std::vector<SessionLogRecord> parse_log(std::istream& in) {
  std::vector<SessionLogRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::CorruptRecord,
                  "corrupt log record at line " + std::to_string(line_no),
                  {std::to_string(line_no)});
    }
    try {
      out.push_back(record_from_json(j));
    } catch (const Error& e) {
      throw Error(ErrorCode::CorruptRecord,
                  "corrupt log record at line " + std::to_string(line_no) +
                      ": " + e.what(),
                  {std::to_string(line_no)});
    }
  }
  return out;
}

std::vector<SessionLogRecord> read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::UnreadableFile, "cannot open log " + path.string());
  }
  return parse_log(in);
}

void apply_record(Session& session, const SessionLogRecord& record) {
  std::visit(
      overloaded{
          [&](const CreatedRecord&) {
            throw Error(ErrorCode::InvalidArgument,
                        "creation record after the session already exists");
          },
          [&](const InputSetRecord& r) {
            if (r.field == InputField::Reference) {
              session.set_reference_aliases(r.aliases);
            } else {
              session.set_input(r.field, r.value);
            }
          },
          [&](const StartedRecord& r) { session.activate(r.prompts); },
          [&](const HumanMessageRecord& r) {
            session.send_message(r.target, r.text);
          },
          [&](const ModelEventRecord& r) {
            const auto applied = session.apply_event(r.model_id, r.kind, r.text);
            if (applied.seq != r.seq || applied.turn != r.turn) {
              throw Error(ErrorCode::InvalidArgument,
                          "event seq " + std::to_string(r.seq) + " for '" +
                              r.model_id + "' does not follow seq " +
                              std::to_string(applied.seq));
            }
          },
      },
      record.body);
}

Session replay_log(const std::vector<SessionLogRecord>& records) {
  const auto corrupt = [](std::size_t index, const std::string& why) {
    return Error(ErrorCode::CorruptRecord,
                 "corrupt log record " + std::to_string(index) + ": " + why,
                 {std::to_string(index)});
  };
  if (records.empty()) throw corrupt(1, "log is empty");
  const auto* created = std::get_if<CreatedRecord>(&records.front().body);
  if (created == nullptr) throw corrupt(1, "log must start with a creation record");

  std::optional<Session> session;
  try {
    session = Session::create(created->session_id, created->models);
  } catch (const Error& e) {
    throw corrupt(1, e.what());
  }
  for (std::size_t i = 1; i < records.size(); ++i) {
    try {
      apply_record(*session, records[i]);
    } catch (const Error& e) {
      throw corrupt(i + 1, e.what());
    }
  }
  return std::move(*session);
}

SessionLogWriter::SessionLogWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::app) {
  if (!out_) {
    throw Error(ErrorCode::UnreadableFile, "cannot open log " + path.string());
  }
}

void SessionLogWriter::append(const SessionLogRecord& record) {
  const std::string line =
      to_json(record).dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
  std::lock_guard lock(mu_);
  out_ << line;
  out_.flush();
}

}  // namespace duet::session
