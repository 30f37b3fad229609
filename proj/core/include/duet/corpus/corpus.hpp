#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace duet::corpus {

struct CorpusChapter {
  std::string alias;  // relative path without extension, '/' separated
  std::string title;
  std::string body;   // file contents with newlines normalized to '\n'
};

/// Per-chapter term statistics under `tokenize`.
struct ChapterStats {
  std::unordered_map<std::string, std::uint32_t> term_counts;
  std::uint32_t length = 0;
};

/// Immutable once built; safe for concurrent readers.
class CorpusIndex {
 public:
  CorpusIndex() = default;

  /// Throws InvalidArgument on a duplicate alias or an empty body.
  void add(CorpusChapter chapter);

  std::size_t size() const noexcept { return chapters_.size(); }
  bool empty() const noexcept { return chapters_.empty(); }

  /// Chapters ordered by alias.
  const std::map<std::string, CorpusChapter>& chapters() const noexcept {
    return chapters_;
  }
  std::vector<std::string> aliases() const;

  const ChapterStats& stats(const std::string& alias) const;
  /// Number of chapters containing `term` at least once.
  std::uint32_t document_frequency(const std::string& term) const;
  double average_length() const noexcept;

 private:
  std::map<std::string, CorpusChapter> chapters_;
  std::unordered_map<std::string, ChapterStats> stats_;
  std::unordered_map<std::string, std::uint32_t> doc_freq_;
  std::uint64_t total_length_ = 0;
};

/// Lowercase ASCII alphanumeric runs; every other byte separates tokens.
std::vector<std::string> tokenize(std::string_view text);

struct LoadStatus {
  bool ok = false;
  std::string message;  // "Corpus loaded" or the error description
};

struct LoadResult {
  std::optional<CorpusIndex> index;
  LoadStatus status;
  std::vector<std::string> skipped;  // empty files, not chapters
};

/// Walks `root` for *.md / *.txt files. Never throws: a missing root or an
/// unreadable/non-UTF-8 file yields ok=false and no index.
LoadResult load_corpus(const std::filesystem::path& root);

/// Trims whitespace, converts '\' to '/', collapses repeated separators and
/// drops a leading "./" or "/" and a trailing .md/.txt extension.
std::string normalize_alias(std::string_view alias);

/// Throws MissingChapter; its details list the closest aliases by shared
/// prefix.
const CorpusChapter& resolve_alias(const CorpusIndex& index,
                                   std::string_view alias);

/// Splits a free-form alias box (newlines, commas, whitespace) into aliases.
std::vector<std::string> split_alias_list(std::string_view text);

struct RetrievalScore {
  std::string alias;
  double score = 0.0;
};

inline constexpr double kBm25K1 = 1.2;
inline constexpr double kBm25B = 0.75;

/// Okapi BM25 over `tokenize`d text with idf = ln(1 + (N - df + 0.5) /
/// (df + 0.5)). Each distinct query term counts once. Results are sorted by
/// descending score, ties by alias, truncated to k. Throws InvalidArgument
/// for k < 1.
std::vector<RetrievalScore> rank_chapters(const CorpusIndex& index,
                                          std::string_view query,
                                          std::size_t k);

}  // namespace duet::corpus
