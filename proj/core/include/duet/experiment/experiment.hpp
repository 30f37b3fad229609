#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "duet/provider/scheduler.hpp"

namespace duet::experiment {

enum class Condition { Solo, Assisted };

std::string_view to_string(Condition c) noexcept;
Condition parse_condition(std::string_view name);

/// Implementation minutes for one problem under one condition. Thinking
/// time is excluded by the operator.
struct TimingRecord {
  std::string problem_label;
  Condition condition = Condition::Solo;
  double minutes = 0.0;

  friend bool operator==(const TimingRecord&, const TimingRecord&) = default;
};

/// Percent changes are negative for a decrease. total_change_pct is the
/// headline statistic: the change in summed minutes over all problems.
struct TimingSummary {
  double total_solo = 0.0;
  double total_assisted = 0.0;
  double total_change_pct = 0.0;
  double per_problem_mean_change_pct = 0.0;
  std::size_t problems = 0;

  /// e.g. "24% decrease in implementation time (total-time ratio)".
  std::string headline() const;

  friend bool operator==(const TimingSummary&, const TimingSummary&) = default;
};

enum class TableFormat { Markdown, Csv };

TableFormat parse_table_format(std::string_view name);

/// Records in insertion order; problems are listed in order of first
/// appearance. Not thread-safe.
class TimingStore {
 public:
  /// Throws NonPositiveMinutes, DuplicateRecord or InvalidArgument (empty
  /// label).
  void record(TimingRecord r);

  const std::vector<TimingRecord>& records() const noexcept { return records_; }
  std::vector<std::string> problems() const;
  std::optional<double> minutes(const std::string& problem, Condition c) const;
  bool empty() const noexcept { return records_.empty(); }

  /// Throws IncompletePairs (details list "problem/condition" cells) or
  /// EmptyStore.
  TimingSummary summarize() const;

  /// One row per problem. Throws EmptyStore. Missing cells render empty.
  std::string export_table(TableFormat format) const;

  /// Long-form persistence: header "problem,condition,minutes".
  std::string to_records_csv() const;
  static TimingStore from_records_csv(std::string_view csv);

  /// Reads the table written by export_table(Csv).
  static TimingStore from_table_csv(std::string_view csv);

  void save(const std::filesystem::path& path) const;
  /// A missing file yields an empty store.
  static TimingStore load(const std::filesystem::path& path);

 private:
  std::vector<TimingRecord> records_;
};

/// Manual stopwatch for one (problem, condition) cell. Paused spans (the
/// operator thinking) are excluded from the measured time.
class ImplementationTimer {
 public:
  explicit ImplementationTimer(const provider::Scheduler& clock) : clock_(clock) {}

  /// Throws InvalidArgument if a timing is already running.
  void start(std::string problem_label, Condition condition);
  void pause();
  void resume();
  /// Stops and returns the record (minutes of unpaused time). Throws
  /// InvalidArgument when not running.
  TimingRecord stop();
  void cancel() noexcept;

  bool running() const noexcept { return active_.has_value(); }
  bool paused() const noexcept { return active_ && active_->paused_at.has_value(); }
  double elapsed_minutes() const;
  std::optional<std::pair<std::string, Condition>> current() const;

 private:
  struct Active {
    std::string problem;
    Condition condition;
    provider::Millis started_at;
    provider::Millis paused_total = 0;
    std::optional<provider::Millis> paused_at;
  };

  const provider::Scheduler& clock_;
  std::optional<Active> active_;
};

}  // namespace duet::experiment
