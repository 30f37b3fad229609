#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "duet/corpus/corpus.hpp"

namespace duet::session {

inline constexpr std::string_view kDefaultInstructions =
    "Write a complete C++ solution to the competitive programming problem "
    "below. Use C++17, read from standard input, write to standard output, "
    "and put the whole program in a single ```cpp code block. If an algorithm "
    "is described, implement that algorithm. Use the reference material where "
    "it helps.";

/// Wording that can be overridden globally or per model.
struct PromptTemplate {
  std::string instructions{kDefaultInstructions};
};

struct ReferenceSection {
  std::string alias;
  std::string title;
  std::string body;
};

/// Everything that goes into the opening message, in section order.
struct PromptBundle {
  std::string instructions;
  std::string problem;
  std::string algorithm;  // empty: section omitted
  std::vector<ReferenceSection> references;  // empty: section omitted
};

/// Resolves each alias against `index` in the given order. Throws
/// MissingChapter for the first alias that does not resolve.
std::vector<ReferenceSection> resolve_references(
    const corpus::CorpusIndex& index, const std::vector<std::string>& aliases);

/// Renders labeled markdown sections: Instructions, Problem, Your algorithm,
/// Reference material. Empty optional inputs leave no trace in the output.
/// Pure: identical bundles render to identical bytes.
std::string render_prompt(const PromptBundle& bundle);

}  // namespace duet::session
