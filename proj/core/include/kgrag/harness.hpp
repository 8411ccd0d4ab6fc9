#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgrag/config.hpp"
#include "kgrag/evaluator.hpp"
#include "kgrag/kg_store.hpp"
#include "kgrag/llm_gateway.hpp"
#include "kgrag/pipeline.hpp"
#include "kgrag/prompter.hpp"
#include "kgrag/templates.hpp"

namespace kgrag {

struct Task {
  std::string id;
  TaskKind kind = TaskKind::mc_qa;
  std::string question;
  // Letter -> option text, in letter order.
  std::vector<std::pair<char, std::string>> options;
  LetterSet gold;
  // Required for generation; optional explanation for mc_qa.
  std::optional<std::string> reference;
  std::optional<std::string> question_concept;
  Tokenization lang = Tokenization::space_tokenized;

  LetterSet option_letters() const;
  // Question followed by "A. ..." option lines; what the pipeline sees.
  std::string prompt_text() const;
};

// Lines: {"id", "question", "options": {"A": ...} | [...], "answer": "B" |
// ["A","C"], "reference", "concept", "lang"}. A missing id becomes the line
// number. Throws SchemaError naming the line.
Task task_from_json(const nlohmann::json& j, TaskKind schema, std::size_t line_number);
nlohmann::ordered_json to_json(const Task& t);

struct TaskLoadStats {
  std::size_t lines = 0;
  std::size_t blank = 0;
  std::vector<std::size_t> rejected_lines;
};

std::vector<Task> parse_tasks(std::string_view jsonl, TaskKind schema,
                              const LoadOptions& options = {}, TaskLoadStats* stats = nullptr);
std::vector<Task> load_tasks(const std::filesystem::path& path, TaskKind schema,
                             const LoadOptions& options = {}, TaskLoadStats* stats = nullptr);

struct MetricToggles {
  bool mc = true;
  bool rouge = true;
  bool embed_sim = true;
  bool g_eval = true;

  bool operator==(const MetricToggles&) const = default;
};

struct BenchmarkOptions {
  int workers = 1;
  // Strict stops at the first failing item and rethrows its error.
  bool strict = false;
  // Skip (config, task) pairs already present in the output file.
  bool resume = true;
  MetricToggles metrics;
  PipelineSettings pipeline;
  // Meta self-evaluation and G-Eval; null falls back to the main gateway.
  LlmGateway* judge = nullptr;
  // Embedding similarity; null falls back to the main gateway.
  LlmGateway* embedder = nullptr;
  const TemplateStore* templates = nullptr;
  // Recorded verbatim in the summary.
  nlohmann::json run_info;
};

// Per-config means over a record file. Fractions for MC / BERT / ROUGE,
// 0-100 for G-Eval; empty optionals mean no record carried that metric.
struct ConfigAggregate {
  std::string config_key;
  nlohmann::ordered_json config;
  std::size_t records = 0;
  std::size_t errors = 0;

  std::size_t mc_total = 0;
  std::size_t mc_correct = 0;
  std::size_t mc_wrong = 0;
  std::size_t mc_fail = 0;

  std::optional<PrecisionRecallF1> embed_sim;
  // F1 of R-1, R-2, R-L.
  std::optional<std::array<double, 3>> rouge;
  std::optional<std::array<double, 4>> g_eval;
  std::size_t g_eval_parse_failures = 0;
};

struct BenchmarkSummary {
  std::size_t produced = 0;
  std::size_t skipped = 0;
  std::size_t errors = 0;
  std::vector<ConfigAggregate> configs;
  nlohmann::json run_info;
};

// Runs every (config, task) pair, appending one JSON line per pair to
// out_path in config-major order. Per-item failures become error records
// unless options.strict. The summary aggregates the complete file.
BenchmarkSummary run_benchmark(std::span<const Task> tasks, const KnowledgeGraph& graph,
                               std::span<const PipelineConfig> configs, LlmGateway& gateway,
                               const std::filesystem::path& out_path,
                               const BenchmarkOptions& options = {});

// One record, without touching any file. Exposed for tests and the CLI.
nlohmann::ordered_json run_one(const Task& task, const PipelineConfig& config,
                               const Pipeline& pipeline, LlmGateway& judge, LlmGateway& embedder,
                               const MetricToggles& metrics, EmbeddingCache* cache = nullptr,
                               bool rethrow = false);

// Parsed lines of a record file. A trailing partial line is ignored and,
// when `truncate_partial`, cut from the file.
std::vector<nlohmann::ordered_json> read_records(const std::filesystem::path& path,
                                                 bool truncate_partial = false);

// Record text with the "timing" object removed, for determinism diffs.
std::string strip_timing(std::string_view jsonl);

std::vector<ConfigAggregate> aggregate_records(std::span<const nlohmann::ordered_json> records);
nlohmann::ordered_json to_json(const ConfigAggregate& a);
nlohmann::ordered_json to_json(const BenchmarkSummary& s);

enum class ReportLayout { form_by_prompt, enhancement_rows, method_rows };
std::string_view to_string(ReportLayout layout);
std::optional<ReportLayout> parse_report_layout(std::string_view text);

struct ReportTable {
  ReportLayout layout = ReportLayout::method_rows;
  // Column groups in order, e.g. {"MC", 3}, {"BERT Score", 3}.
  std::vector<std::pair<std::string, std::size_t>> groups;
  // First column is the row label, the last is N.
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string markdown() const;
  std::string csv() const;
};

// Row label of a config under a layout, e.g. "Path+MindMap".
std::string row_label(const nlohmann::ordered_json& config, ReportLayout layout);

ReportTable build_report(std::span<const ConfigAggregate> aggregates, ReportLayout layout);
// Throws EmptyInput when the file holds no records.
ReportTable emit_report(const std::filesystem::path& records_path, ReportLayout layout);

struct SampleResult {
  std::vector<std::size_t> selected_lines;  // 0-based, ascending
  std::map<std::string, std::size_t> per_category;
  std::uint64_t seed = 0;
};

// Up to `per_category` lines from each category (JSON field
// `category_field`; missing means ""), chosen by a seeded shuffle and
// returned in original order.
SampleResult sample_lines(std::span<const std::string> jsonl_lines, std::size_t per_category,
                          std::uint64_t seed, std::string_view category_field = "category");

}  // namespace kgrag
