#include "duet/session/prompt.hpp"

#include "duet/text.hpp"

namespace duet::session {

std::vector<ReferenceSection> resolve_references(
    const corpus::CorpusIndex& index, const std::vector<std::string>& aliases) {
  std::vector<ReferenceSection> out;
  out.reserve(aliases.size());
  for (const auto& alias : aliases) {
    const auto& chapter = corpus::resolve_alias(index, alias);
    out.push_back({chapter.alias, chapter.title, chapter.body});
  }
  return out;
}

namespace {

void append_block(std::string& out, std::string_view content) {
  out.append(content);
  if (content.empty() || content.back() != '\n') out.push_back('\n');
}

void append_section(std::string& out, std::string_view heading,
                    std::string_view content) {
  if (!out.empty()) out.push_back('\n');
  out.append("## ").append(heading).push_back('\n');
  append_block(out, content);
}

}  // namespace

std::string render_prompt(const PromptBundle& bundle) {
  std::string out;
  append_section(out, "Instructions", bundle.instructions);
  append_section(out, "Problem", bundle.problem);
  if (!text::trim(bundle.algorithm).empty()) {
    append_section(out, "Your algorithm", bundle.algorithm);
  }
  if (!bundle.references.empty()) {
    out.append("\n## Reference material\n");
    for (const auto& ref : bundle.references) {
      out.append("\n### ").append(ref.title);
      out.append(" (").append(ref.alias).append(")\n");
      append_block(out, ref.body);
    }
  }
  return out;
}

}  // namespace duet::session
