#include "duet/experiment/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "duet/error.hpp"
#include "duet/text.hpp"

namespace duet::experiment {

std::string_view to_string(Condition c) noexcept {
  return c == Condition::Solo ? "solo" : "assisted";
}

Condition parse_condition(std::string_view name) {
  if (name == "solo") return Condition::Solo;
  if (name == "assisted") return Condition::Assisted;
  throw Error(ErrorCode::InvalidArgument,
              "unknown condition '" + std::string(name) +
                  "' (expected solo or assisted)");
}

TableFormat parse_table_format(std::string_view name) {
  if (name == "markdown" || name == "md") return TableFormat::Markdown;
  if (name == "csv") return TableFormat::Csv;
  throw Error(ErrorCode::InvalidArgument,
              "unknown table format '" + std::string(name) + "'");
}

std::string TimingSummary::headline() const {
  const long rounded = std::lround(std::abs(total_change_pct));
  if (rounded == 0) return "no change in implementation time (total-time ratio)";
  return std::to_string(rounded) +
         (total_change_pct < 0 ? "% decrease" : "% increase") +
         " in implementation time (total-time ratio)";
}

namespace {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view s, std::size_t line) {
  s = text::trim(s);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "bad number '" + std::string(s) + "' on CSV line " +
                    std::to_string(line));
  }
  return v;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

/// RFC 4180 rows; quoted fields may span lines.
std::vector<std::vector<std::string>> parse_csv(std::string_view csv) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_has_content = false;
  for (std::size_t i = 0; i < csv.size(); ++i) {
    const char c = csv[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < csv.size() && csv[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      row_has_content = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      row_has_content = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < csv.size() && csv[i + 1] == '\n') ++i;
      if (row_has_content || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      row_has_content = false;
    } else {
      field.push_back(c);
      row_has_content = true;
    }
  }
  if (quoted) throw Error(ErrorCode::InvalidArgument, "unterminated quoted CSV field");
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

void expect_header(const std::vector<std::vector<std::string>>& rows,
                   const std::vector<std::string>& header) {
  if (rows.empty()) return;
  std::vector<std::string> got;
  for (const auto& f : rows[0]) got.emplace_back(text::trim(f));
  if (got != header) {
    std::string want;
    for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
    throw Error(ErrorCode::InvalidArgument, "expected CSV header " + want);
  }
}

}  // namespace

void TimingStore::record(TimingRecord r) {
  if (text::trim(r.problem_label).empty()) {
    throw Error(ErrorCode::InvalidArgument, "problem label must not be empty");
  }
  if (!(r.minutes > 0.0) || !std::isfinite(r.minutes)) {
    throw Error(ErrorCode::NonPositiveMinutes,
                "minutes must be a positive number (got " +
                    format_number(r.minutes) + ")");
  }
  if (minutes(r.problem_label, r.condition)) {
    throw Error(ErrorCode::DuplicateRecord,
                "a " + std::string(to_string(r.condition)) +
                    " time is already recorded for " + r.problem_label);
  }
  records_.push_back(std::move(r));
}

std::vector<std::string> TimingStore::problems() const {
  std::vector<std::string> out;
  for (const auto& r : records_) {
    if (std::find(out.begin(), out.end(), r.problem_label) == out.end()) {
      out.push_back(r.problem_label);
    }
  }
  return out;
}

std::optional<double> TimingStore::minutes(const std::string& problem,
                                           Condition c) const {
  for (const auto& r : records_) {
    if (r.problem_label == problem && r.condition == c) return r.minutes;
  }
  return std::nullopt;
}

TimingSummary TimingStore::summarize() const {
  if (records_.empty()) {
    throw Error(ErrorCode::EmptyStore, "no timings recorded");
  }
  std::vector<std::string> missing;
  for (const auto& p : problems()) {
    for (const auto c : {Condition::Solo, Condition::Assisted}) {
      if (!minutes(p, c)) missing.push_back(p + "/" + std::string(to_string(c)));
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing timings:";
    for (const auto& m : missing) msg += " " + m;
    throw Error(ErrorCode::IncompletePairs, msg, missing);
  }

  TimingSummary s;
  double ratio_sum = 0.0;
  for (const auto& p : problems()) {
    const double solo = *minutes(p, Condition::Solo);
    const double assisted = *minutes(p, Condition::Assisted);
    s.total_solo += solo;
    s.total_assisted += assisted;
    ratio_sum += (assisted - solo) / solo * 100.0;
    ++s.problems;
  }
  s.total_change_pct = (s.total_assisted - s.total_solo) / s.total_solo * 100.0;
  s.per_problem_mean_change_pct = ratio_sum / static_cast<double>(s.problems);
  return s;
}

std::string TimingStore::export_table(TableFormat format) const {
  if (records_.empty()) {
    throw Error(ErrorCode::EmptyStore, "no timings recorded");
  }
  const auto cell = [&](const std::string& p, Condition c) {
    const auto m = minutes(p, c);
    return m ? format_number(*m) : std::string();
  };
  std::ostringstream out;
  if (format == TableFormat::Csv) {
    out << "problem,solo_minutes,assisted_minutes\n";
    for (const auto& p : problems()) {
      out << csv_field(p) << ',' << cell(p, Condition::Solo) << ','
          << cell(p, Condition::Assisted) << '\n';
    }
  } else {
    out << "| Problem | Solo | AI assisted |\n";
    out << "|---|---:|---:|\n";
    for (const auto& p : problems()) {
      std::string label;
      for (const char c : p) {
        if (c == '|') label.push_back('\\');
        label.push_back(c == '\n' ? ' ' : c);
      }
      out << "| " << label << " | " << cell(p, Condition::Solo) << " | "
          << cell(p, Condition::Assisted) << " |\n";
    }
  }
  return out.str();
}

std::string TimingStore::to_records_csv() const {
  std::string out = "problem,condition,minutes\n";
  for (const auto& r : records_) {
    out += csv_field(r.problem_label) + "," + std::string(to_string(r.condition)) +
           "," + format_number(r.minutes) + "\n";
  }
  return out;
}

TimingStore TimingStore::from_records_csv(std::string_view csv) {
  const auto rows = parse_csv(csv);
  expect_header(rows, {"problem", "condition", "minutes"});
  TimingStore store;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 3) {
      throw Error(ErrorCode::InvalidArgument,
                  "expected 3 fields on CSV row " + std::to_string(i + 1));
    }
    store.record({row[0], parse_condition(text::trim(row[1])),
                  parse_number(row[2], i + 1)});
  }
  return store;
}

TimingStore TimingStore::from_table_csv(std::string_view csv) {
  const auto rows = parse_csv(csv);
  expect_header(rows, {"problem", "solo_minutes", "assisted_minutes"});
  TimingStore store;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 3) {
      throw Error(ErrorCode::InvalidArgument,
                  "expected 3 fields on CSV row " + std::to_string(i + 1));
    }
    if (!text::trim(row[1]).empty()) {
      store.record({row[0], Condition::Solo, parse_number(row[1], i + 1)});
    }
    if (!text::trim(row[2]).empty()) {
      store.record({row[0], Condition::Assisted, parse_number(row[2], i + 1)});
    }
  }
  return store;
}

void TimingStore::save(const std::filesystem::path& path) const {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << to_records_csv();
    if (!out) {
      throw Error(ErrorCode::UnreadableFile, "cannot write " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

TimingStore TimingStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_records_csv(buf.str());
}

void ImplementationTimer::start(std::string problem_label, Condition condition) {
  if (active_) {
    throw Error(ErrorCode::InvalidArgument, "a timing is already running for " +
                                                active_->problem);
  }
  if (text::trim(problem_label).empty()) {
    throw Error(ErrorCode::InvalidArgument, "problem label must not be empty");
  }
  active_ = Active{std::move(problem_label), condition, clock_.now(), 0, std::nullopt};
}

void ImplementationTimer::pause() {
  if (!active_) throw Error(ErrorCode::InvalidArgument, "no timing is running");
  if (!active_->paused_at) active_->paused_at = clock_.now();
}

void ImplementationTimer::resume() {
  if (!active_) throw Error(ErrorCode::InvalidArgument, "no timing is running");
  if (active_->paused_at) {
    active_->paused_total += clock_.now() - *active_->paused_at;
    active_->paused_at.reset();
  }
}

double ImplementationTimer::elapsed_minutes() const {
  if (!active_) return 0.0;
  const provider::Millis end = active_->paused_at.value_or(clock_.now());
  return static_cast<double>(end - active_->started_at - active_->paused_total) /
         60000.0;
}

TimingRecord ImplementationTimer::stop() {
  if (!active_) throw Error(ErrorCode::InvalidArgument, "no timing is running");
  TimingRecord r{active_->problem, active_->condition, elapsed_minutes()};
  active_.reset();
  return r;
}

void ImplementationTimer::cancel() noexcept { active_.reset(); }

std::optional<std::pair<std::string, Condition>> ImplementationTimer::current()
    const {
  if (!active_) return std::nullopt;
  return std::make_pair(active_->problem, active_->condition);
}

}  // namespace duet::experiment
