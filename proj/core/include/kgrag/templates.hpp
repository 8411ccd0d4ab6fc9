#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgrag {

// Placeholder values. A nullopt value drops every template line that
// mentions the placeholder.
using TemplateVars = std::map<std::string, std::optional<std::string>>;

// Single-pass `{name}` substitution. Unknown placeholders are left verbatim
// and substituted values are never re-scanned.
std::string render_template(std::string_view text, const TemplateVars& vars);

// Named, versioned prompt assets. Ids are file stems such as
// "answer_cot.v1"; the built-in set is compiled from core/templates.
class TemplateStore {
 public:
  static TemplateStore builtin();
  // Built-ins overlaid with every *.txt file found in `dir`.
  static TemplateStore from_directory(const std::filesystem::path& dir);

  bool contains(std::string_view id) const;
  const std::string& text(std::string_view id) const;
  std::string render(std::string_view id, const TemplateVars& vars) const;
  std::vector<std::string> ids() const;

  void set(std::string id, std::string text);

 private:
  std::map<std::string, std::string, std::less<>> templates_;
};

namespace template_ids {
inline constexpr std::string_view kSystem = "system.v1";
inline constexpr std::string_view kAnswerDirect = "answer_direct.v1";
inline constexpr std::string_view kAnswerCot = "answer_cot.v1";
inline constexpr std::string_view kAnswerTot = "answer_tot.v1";
inline constexpr std::string_view kAnswerMindMap = "answer_mindmap.v1";
inline constexpr std::string_view kFormatMcQa = "format_mc_qa.v1";
inline constexpr std::string_view kFormatGeneration = "format_generation.v1";
inline constexpr std::string_view kUnderstand = "enhance_understand.v1";
inline constexpr std::string_view kExpandExtract = "enhance_expand_extract.v1";
inline constexpr std::string_view kExpandRelated = "enhance_expand_related.v1";
inline constexpr std::string_view kDecompose = "enhance_decompose.v1";
inline constexpr std::string_view kMetaJudge = "meta_judge.v1";
inline constexpr std::string_view kGEval = "geval.v1";
inline constexpr std::string_view kKgExtraction = "kg_extraction.v1";
}  // namespace template_ids

}  // namespace kgrag
