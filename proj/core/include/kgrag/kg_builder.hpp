#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgrag/kg_store.hpp"
#include "kgrag/llm_gateway.hpp"
#include "kgrag/templates.hpp"

namespace kgrag {

struct ExtractionRequest {
  std::string question;
  std::optional<std::string> question_concept;
  std::optional<std::string> correct_answer;
};

struct RejectedLine {
  std::string line;
  std::string reason;

  bool operator==(const RejectedLine&) const = default;
};

struct ExtractionReport {
  std::size_t accepted = 0;
  std::vector<RejectedLine> rejected_lines;
  std::vector<Triple> triples;
  // Corpus items skipped because their gateway call failed (lenient mode).
  std::size_t failed_items = 0;
  std::vector<std::string> errors;
};

// Fills the extraction template; lines naming an absent optional field are
// omitted. Throws ConfigError on an empty question.
std::string build_extraction_prompt(const ExtractionRequest& request,
                                    const TemplateStore& templates = TemplateStore::builtin());

// Total: never throws. Every non-blank line is either accepted or rejected.
ExtractionReport parse_triples(std::string_view llm_output);

struct BuildOptions {
  bool strict = false;
  std::size_t workers = 1;
  std::optional<std::filesystem::path> output_tsv;
};

// Prompt -> completion -> parse per request, then the deduplicated union of
// accepted triples. Items are merged in corpus order regardless of worker
// scheduling.
std::pair<KnowledgeGraph, ExtractionReport> build_kg(std::span<const ExtractionRequest> corpus,
                                                    LlmGateway& gateway,
                                                    const TemplateStore& templates,
                                                    const BuildOptions& options = {});

// JSON-lines corpus: {"question": ..., "question_concept": ..., "correct_answer": ...}.
std::vector<ExtractionRequest> load_corpus(const std::filesystem::path& path, bool strict = true);

}  // namespace kgrag
