#include "kgrag/kg_builder.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "kgrag/errors.hpp"
#include "kgrag/text.hpp"

namespace kgrag {

std::string build_extraction_prompt(const ExtractionRequest& request,
                                    const TemplateStore& templates) {
  if (trim(request.question).empty()) throw ConfigError("extraction request has an empty question");
  return templates.render(template_ids::kKgExtraction,
                          {{"question", request.question},
                           {"question_concept", request.question_concept},
                           {"correct_answer", request.correct_answer}});
}

ExtractionReport parse_triples(std::string_view llm_output) {
  ExtractionReport report;
  for (std::string_view line : split_lines(llm_output)) {
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) {
      report.rejected_lines.push_back({std::string(line), "field count"});
      continue;
    }
    if (auto reason = triple_violation(fields[0], fields[1], fields[2])) {
      report.rejected_lines.push_back({std::string(line), *reason});
      continue;
    }
    report.triples.push_back(make_triple(fields[0], fields[1], fields[2]));
  }
  report.accepted = report.triples.size();
  return report;
}

std::pair<KnowledgeGraph, ExtractionReport> build_kg(std::span<const ExtractionRequest> corpus,
                                                    LlmGateway& gateway,
                                                    const TemplateStore& templates,
                                                    const BuildOptions& options) {
  struct ItemResult {
    std::optional<ExtractionReport> report;
    std::string error;
    std::exception_ptr exception;
  };
  std::vector<ItemResult> results(corpus.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};

  auto worker = [&] {
    while (!abort) {
      const std::size_t i = next++;
      if (i >= corpus.size()) return;
      try {
        ChatRequest request;
        request.user = build_extraction_prompt(corpus[i], templates);
        results[i].report = parse_triples(gateway.chat(std::move(request)).text);
      } catch (const Error& e) {
        results[i].error = e.what();
        results[i].exception = std::current_exception();
        if (options.strict) abort = true;
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, corpus.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }

  ExtractionReport total;
  for (std::size_t i = 0; i < results.size(); ++i) {
    ItemResult& r = results[i];
    if (!r.report) {
      if (r.error.empty()) continue;
      if (options.strict) std::rethrow_exception(r.exception);
      ++total.failed_items;
      total.errors.push_back("item " + std::to_string(i + 1) + ": " + r.error);
      continue;
    }
    for (auto& rejected : r.report->rejected_lines) total.rejected_lines.push_back(std::move(rejected));
    for (auto& t : r.report->triples) total.triples.push_back(std::move(t));
  }
  KnowledgeGraph graph = KnowledgeGraph::from_triples(total.triples);
  total.triples = graph.triples();
  total.accepted = total.triples.size();
  if (options.output_tsv) graph.write_tsv(*options.output_tsv);
  return {std::move(graph), std::move(total)};
}

std::vector<ExtractionRequest> load_corpus(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<ExtractionRequest> out;
  std::string line;
  std::size_t line_number = 0;
  auto optional_string = [](const nlohmann::json& j, const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw std::invalid_argument(std::string(key) + " must be a string");
    return j[key].get<std::string>();
  };
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      if (!j.is_object() || !j.contains("question") || !j["question"].is_string())
        throw std::invalid_argument("missing string field 'question'");
      ExtractionRequest r;
      r.question = j["question"].get<std::string>();
      if (trim(r.question).empty()) throw std::invalid_argument("empty question");
      r.question_concept = optional_string(j, "question_concept");
      r.correct_answer = optional_string(j, "correct_answer");
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      if (strict) throw SchemaError(line_number, e.what());
    }
  }
  return out;
}

}  // namespace kgrag
