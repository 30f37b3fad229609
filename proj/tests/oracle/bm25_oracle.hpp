#pragma once

// Brute-force BM25 used only as a test oracle. It re-reads the raw chapter
// bodies for every query and shares no code with the library's index.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace duet::oracle {

struct Doc {
  std::string alias;
  std::string body;
};

struct Scored {
  std::string alias;
  double score;
};

inline std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    const bool digit = c >= '0' && c <= '9';
    const bool upper = c >= 'A' && c <= 'Z';
    const bool lower = c >= 'a' && c <= 'z';
    if (digit || lower) {
      cur += static_cast<char>(c);
    } else if (upper) {
      cur += static_cast<char>(c - 'A' + 'a');
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::vector<Scored> bm25(const std::vector<Doc>& docs, const std::string& query,
                                double k1 = 1.2, double b = 0.75) {
  std::vector<std::vector<std::string>> toks;
  double total = 0;
  for (const auto& d : docs) {
    toks.push_back(words(d.body));
    total += static_cast<double>(toks.back().size());
  }
  const double n = static_cast<double>(docs.size());
  const double avgdl = docs.empty() ? 0.0 : total / n;

  std::vector<std::string> q = words(query);
  std::sort(q.begin(), q.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());

  std::vector<Scored> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    double s = 0;
    for (const auto& term : q) {
      double df = 0;
      for (const auto& t : toks) {
        if (std::find(t.begin(), t.end(), term) != t.end()) df += 1;
      }
      const double tf = static_cast<double>(std::count(toks[i].begin(), toks[i].end(), term));
      if (tf == 0) continue;
      const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
      const double dl = static_cast<double>(toks[i].size());
      s += idf * (tf * (k1 + 1)) / (tf + k1 * (1 - b + b * dl / avgdl));
    }
    out.push_back({docs[i].alias, s});
  }
  std::sort(out.begin(), out.end(), [](const Scored& x, const Scored& y) {
    if (std::abs(x.score - y.score) > 1e-12) return x.score > y.score;
    return x.alias < y.alias;
  });
  return out;
}

}  // namespace duet::oracle
