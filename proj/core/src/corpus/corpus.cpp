#include "duet/corpus/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "duet/error.hpp"
#include "duet/text.hpp"

namespace duet::corpus {

namespace fs = std::filesystem;

void CorpusIndex::add(CorpusChapter chapter) {
  if (chapter.body.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "chapter '" + chapter.alias + "' has an empty body");
  }
  if (chapters_.count(chapter.alias) != 0) {
    throw Error(ErrorCode::InvalidArgument,
                "duplicate chapter alias '" + chapter.alias + "'");
  }
  ChapterStats stats;
  for (auto& token : tokenize(chapter.body)) {
    ++stats.term_counts[std::move(token)];
    ++stats.length;
  }
  for (const auto& [term, count] : stats.term_counts) ++doc_freq_[term];
  total_length_ += stats.length;
  stats_.emplace(chapter.alias, std::move(stats));
  auto alias = chapter.alias;
  chapters_.emplace(std::move(alias), std::move(chapter));
}

std::vector<std::string> CorpusIndex::aliases() const {
  std::vector<std::string> out;
  out.reserve(chapters_.size());
  for (const auto& [alias, _] : chapters_) out.push_back(alias);
  return out;
}

const ChapterStats& CorpusIndex::stats(const std::string& alias) const {
  return stats_.at(alias);
}

std::uint32_t CorpusIndex::document_frequency(const std::string& term) const {
  const auto it = doc_freq_.find(term);
  return it == doc_freq_.end() ? 0 : it->second;
}

double CorpusIndex::average_length() const noexcept {
  if (chapters_.empty()) return 0.0;
  return static_cast<double>(total_length_) /
         static_cast<double>(chapters_.size());
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

bool is_chapter_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".md" || ext == ".txt";
}

std::string title_of(const std::string& body, const std::string& alias) {
  std::istringstream lines(body);
  std::string line;
  while (std::getline(lines, line)) {
    const auto t = text::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      auto heading = t;
      while (!heading.empty() && heading.front() == '#') heading.remove_prefix(1);
      heading = text::trim(heading);
      if (!heading.empty()) return std::string(heading);
    }
    break;
  }
  const auto slash = alias.rfind('/');
  return slash == std::string::npos ? alias : alias.substr(slash + 1);
}

LoadResult failure(std::string message) {
  LoadResult r;
  r.status = {false, std::move(message)};
  return r;
}

}  // namespace

LoadResult load_corpus(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    return failure("Corpus root not found: " + root.string());
  }

  std::vector<fs::path> files;
  fs::recursive_directory_iterator it(root, ec), end;
  if (ec) return failure("Cannot read corpus root " + root.string() + ": " + ec.message());
  for (; it != end; it.increment(ec)) {
    if (ec) return failure("Cannot read corpus root " + root.string() + ": " + ec.message());
    if (it->is_regular_file(ec) && is_chapter_file(it->path())) {
      files.push_back(it->path());
    }
  }
  std::sort(files.begin(), files.end());

  LoadResult result;
  CorpusIndex index;
  for (const auto& file : files) {
    auto rel = file.lexically_relative(root);
    rel.replace_extension();
    const std::string alias = rel.generic_string();

    std::ifstream in(file, std::ios::binary);
    std::ostringstream buf;
    if (!in || !(buf << in.rdbuf())) {
      // an empty file also fails the stream copy; tell them apart by size
      if (in && fs::file_size(file, ec) == 0 && !ec) {
        result.skipped.push_back(alias);
        continue;
      }
      return failure("Cannot read corpus file " + file.string());
    }
    std::string body = buf.str();
    if (!text::is_valid_utf8(body)) {
      return failure("Corpus file is not valid UTF-8: " + file.string());
    }
    body = text::normalize_newlines(body);
    const std::string title = title_of(body, alias);
    try {
      index.add({alias, title, std::move(body)});
    } catch (const Error& e) {
      return failure(std::string("Cannot index corpus file ") + file.string() +
                     ": " + e.what());
    }
  }

  result.status = {true, "Corpus loaded"};
  result.index = std::move(index);
  return result;
}

std::string normalize_alias(std::string_view alias) {
  std::string out;
  for (const char c : text::trim(alias)) {
    const char ch = c == '\\' ? '/' : c;
    if (ch == '/' && !out.empty() && out.back() == '/') continue;
    out.push_back(ch);
  }
  while (out.rfind("./", 0) == 0) out.erase(0, 2);
  while (!out.empty() && out.front() == '/') out.erase(0, 1);
  while (!out.empty() && out.back() == '/') out.pop_back();
  for (const std::string_view ext : {".md", ".txt"}) {
    if (out.size() > ext.size() &&
        out.compare(out.size() - ext.size(), ext.size(), ext) == 0) {
      out.resize(out.size() - ext.size());
      break;
    }
  }
  return out;
}

const CorpusChapter& resolve_alias(const CorpusIndex& index,
                                   std::string_view alias) {
  const std::string key = normalize_alias(alias);
  const auto& chapters = index.chapters();
  if (const auto it = chapters.find(key); it != chapters.end()) return it->second;

  const auto shared_prefix = [&](const std::string& other) {
    std::size_t n = 0;
    while (n < key.size() && n < other.size() && key[n] == other[n]) ++n;
    return n;
  };
  std::vector<std::pair<std::size_t, std::string>> ranked;
  for (const auto& [a, _] : chapters) {
    if (const auto n = shared_prefix(a); n > 0) ranked.emplace_back(n, a);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<std::string> nearest;
  for (std::size_t i = 0; i < ranked.size() && i < 3; ++i) {
    nearest.push_back(ranked[i].second);
  }
  std::string message = "Missing chapter: " + key;
  if (!nearest.empty()) {
    message += " (did you mean";
    for (std::size_t i = 0; i < nearest.size(); ++i) {
      message += (i == 0 ? " " : ", ") + nearest[i];
    }
    message += "?)";
  }
  throw Error(ErrorCode::MissingChapter, message, std::move(nearest));
}

std::vector<std::string> split_alias_list(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  const auto flush = [&] {
    auto a = normalize_alias(current);
    if (!a.empty()) out.push_back(std::move(a));
    current.clear();
  };
  for (const char c : text) {
    if (c == ',' || c == ';' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return out;
}

std::vector<RetrievalScore> rank_chapters(const CorpusIndex& index,
                                          std::string_view query,
                                          std::size_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");

  const auto tokens = tokenize(query);
  const std::set<std::string> terms(tokens.begin(), tokens.end());
  const double n_docs = static_cast<double>(index.size());
  const double avg_len = index.average_length();

  std::vector<std::pair<std::string, double>> idf;
  for (const auto& term : terms) {
    const double df = index.document_frequency(term);
    if (df == 0) continue;
    idf.emplace_back(term, std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5)));
  }

  std::vector<RetrievalScore> scores;
  scores.reserve(index.size());
  for (const auto& [alias, _] : index.chapters()) {
    const auto& st = index.stats(alias);
    const double norm =
        kBm25K1 * (1.0 - kBm25B +
                   kBm25B * (avg_len > 0 ? st.length / avg_len : 0.0));
    double score = 0.0;
    for (const auto& [term, w] : idf) {
      const auto it = st.term_counts.find(term);
      if (it == st.term_counts.end()) continue;
      const double tf = it->second;
      score += w * tf * (kBm25K1 + 1.0) / (tf + norm);
    }
    scores.push_back({alias, score});
  }

  // chapters() iterates in alias order, so a stable sort keeps ties sorted
  std::stable_sort(scores.begin(), scores.end(),
                   [](const RetrievalScore& a, const RetrievalScore& b) {
                     return a.score > b.score;
                   });
  if (scores.size() > k) scores.resize(k);
  return scores;
}

}  // namespace duet::corpus
