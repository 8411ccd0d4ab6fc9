// kgrag command line: build-kg, run, report, sample.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kgrag/config.hpp"
#include "kgrag/errors.hpp"
#include "kgrag/harness.hpp"
#include "kgrag/kg_builder.hpp"
#include "kgrag/kg_store.hpp"
#include "kgrag/run_config.hpp"

namespace {

using namespace kgrag;

struct CommonFlags {
  std::string config_path;
  std::string base_url;
  std::string model_id;
  int workers = 0;
  bool strict = false;
  bool lenient = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("-c,--config", f.config_path, "Run config JSON document");
  app->add_option("--base-url", f.base_url, "Override the generator endpoint base URL");
  app->add_option("--model", f.model_id, "Override the generator model id");
  app->add_option("-j,--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
  auto* s = app->add_flag("--strict", f.strict, "Abort on the first bad input or failed item");
  app->add_flag("--lenient", f.lenient, "Record failures and continue")->excludes(s);
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig c = f.config_path.empty() ? run_config_from_json(nlohmann::json::object())
                                      : load_run_config(f.config_path);
  auto apply = [&](EndpointConfig& e) {
    if (!f.base_url.empty()) {
      e.settings.base_url = f.base_url;
      e.backend = BackendKind::http;
    }
    if (!f.model_id.empty()) e.settings.model_id = f.model_id;
  };
  apply(c.generator);
  if (f.workers > 0) c.workers = f.workers;
  if (f.strict) c.strict = true;
  if (f.lenient) c.strict = false;
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

int build_kg_cmd(const CommonFlags& flags, const std::string& corpus_path,
                 const std::string& out_tsv, const std::string& report_path) {
  RunConfig rc = resolve(flags);
  const TemplateStore templates = rc.templates();
  auto gateway = make_gateway(rc.generator);
  const auto corpus = load_corpus(corpus_path, rc.strict);

  BuildOptions options;
  options.strict = rc.strict;
  options.workers = static_cast<std::size_t>(rc.workers);
  options.output_tsv = out_tsv;
  auto [graph, report] = build_kg(corpus, *gateway, templates, options);

  nlohmann::ordered_json j;
  j["corpus_items"] = corpus.size();
  j["triples"] = graph.triple_count();
  j["entities"] = graph.entity_count();
  j["accepted_lines"] = report.accepted;
  j["rejected_lines"] = report.rejected_lines.size();
  j["failed_items"] = report.failed_items;
  j["errors"] = report.errors;
  j["output"] = out_tsv;
  const std::string text = j.dump(2) + "\n";
  if (!report_path.empty()) write_file(report_path, text);
  std::cout << text;
  return report.failed_items == 0 ? 0 : 3;
}

struct RunFlags {
  std::string tasks_path;
  std::string schema = "mc_qa";
  std::string kg_path;
  std::string out_path = "records.jsonl";
  std::string summary_path;
  std::vector<std::string> presets;
  std::string form;
  std::string prompt;
  std::vector<std::string> grid_forms;
  std::vector<std::string> grid_prompts;
  std::vector<std::string> grid_enhancements;
  bool fresh = false;
};

template <typename T, typename Parse>
std::vector<T> parse_all(const std::vector<std::string>& names, Parse parse, const char* what) {
  std::vector<T> out;
  for (const auto& n : names) {
    auto v = parse(n);
    if (!v) throw ConfigError(std::string("unknown ") + what + " '" + n + "'");
    out.push_back(*v);
  }
  return out;
}

int run_cmd(const CommonFlags& flags, const RunFlags& rf) {
  RunConfig rc = resolve(flags);
  const auto schema = parse_task_kind(rf.schema);
  if (!schema) throw ConfigError("unknown schema '" + rf.schema + "'");

  std::vector<PipelineConfig> configs;
  const bool grid = !rf.grid_forms.empty() || !rf.grid_prompts.empty() ||
                    !rf.grid_enhancements.empty();
  if (grid) {
    auto forms = parse_all<RetrievalForm>(rf.grid_forms.empty() ? std::vector<std::string>{"fact"}
                                                                : rf.grid_forms,
                                          parse_retrieval_form, "form");
    auto prompts = parse_all<PromptKind>(
        rf.grid_prompts.empty() ? std::vector<std::string>{"direct"} : rf.grid_prompts,
        parse_prompt_kind, "prompt");
    auto enh = parse_all<EnhancementStrategy>(
        rf.grid_enhancements.empty() ? std::vector<std::string>{"none"} : rf.grid_enhancements,
        parse_enhancement, "enhancement");
    configs = expand_grid(forms, prompts, enh, rc.budget);
  }
  std::optional<RetrievalForm> form;
  std::optional<PromptKind> prompt;
  if (!rf.form.empty()) {
    form = parse_retrieval_form(rf.form);
    if (!form) throw ConfigError("unknown form '" + rf.form + "'");
  }
  if (!rf.prompt.empty()) {
    prompt = parse_prompt_kind(rf.prompt);
    if (!prompt) throw ConfigError("unknown prompt '" + rf.prompt + "'");
  }
  for (const auto& name : rf.presets) {
    PipelineConfig c = preset(name, form, prompt, rc.budget);
    if (c.meta && rc.meta) c.meta = rc.meta;
    configs.push_back(std::move(c));
  }
  if (configs.empty()) configs.push_back(preset("pilot", form, prompt, rc.budget));

  LoadOptions load;
  load.strict = rc.strict;
  TaskLoadStats task_stats;
  const auto tasks = load_tasks(rf.tasks_path, *schema, load, &task_stats);
  const KnowledgeGraph graph = KnowledgeGraph::load_tsv(rf.kg_path, load);
  const TemplateStore templates = rc.templates();

  auto gateway = make_gateway(rc.generator);
  auto judge = make_gateway(rc.judge);
  auto embedder = make_gateway(rc.embedder);

  BenchmarkOptions options;
  options.workers = rc.workers;
  options.strict = rc.strict;
  options.resume = !rf.fresh;
  options.metrics = rc.metrics;
  options.pipeline = rc.pipeline;
  options.judge = judge.get();
  options.embedder = embedder.get();
  options.templates = &templates;
  options.run_info = {{"tasks", rf.tasks_path},
                      {"schema", rf.schema},
                      {"kg", rf.kg_path},
                      {"rejected_task_lines", task_stats.rejected_lines}};

  BenchmarkSummary summary = run_benchmark(tasks, graph, configs, *gateway, rf.out_path, options);
  const std::string text = to_json(summary).dump(2) + "\n";
  if (!rf.summary_path.empty()) write_file(rf.summary_path, text);
  std::cout << text;
  return 0;
}

int report_cmd(const std::string& records, const std::string& layout_name,
               const std::string& format, const std::string& out_path) {
  const auto layout = parse_report_layout(layout_name);
  if (!layout) throw ConfigError("unknown layout '" + layout_name + "'");
  const ReportTable table = emit_report(records, *layout);
  std::string text;
  if (format == "markdown" || format == "both") text += table.markdown();
  if (format == "both") text += "\n";
  if (format == "csv" || format == "both") text += table.csv();
  if (out_path.empty())
    std::cout << text;
  else
    write_file(out_path, text);
  return 0;
}

int sample_cmd(const std::string& in_path, const std::string& out_path, std::size_t per_category,
               std::uint64_t seed, const std::string& category_field) {
  const std::string text = read_file(in_path);
  std::vector<std::string> lines;
  for (std::string_view l : split_lines(text)) lines.emplace_back(l);
  const SampleResult result = sample_lines(lines, per_category, seed, category_field);

  std::string out;
  for (std::size_t i : result.selected_lines) out += lines[i] + "\n";
  write_file(out_path, out);

  nlohmann::ordered_json summary;
  summary["input"] = in_path;
  summary["output"] = out_path;
  summary["seed"] = result.seed;
  summary["per_category_requested"] = per_category;
  summary["category_field"] = category_field;
  summary["selected"] = result.selected_lines.size();
  summary["per_category"] = result.per_category;
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph RAG engine and benchmark harness"};
  app.require_subcommand(1);

  CommonFlags build_flags;
  std::string corpus, out_tsv = "kg.tsv", build_report;
  auto* build = app.add_subcommand("build-kg", "Extract triples from a question corpus");
  add_common(build, build_flags);
  build->add_option("--corpus", corpus, "JSON-lines corpus")->required()->check(CLI::ExistingFile);
  build->add_option("-o,--out", out_tsv, "Output TSV path");
  build->add_option("--report", build_report, "Write the extraction summary here");

  CommonFlags run_flags;
  RunFlags rf;
  auto* run = app.add_subcommand("run", "Run presets or a config grid over a task file");
  add_common(run, run_flags);
  run->add_option("--tasks", rf.tasks_path, "JSON-lines task file")->required()->check(CLI::ExistingFile);
  run->add_option("--schema", rf.schema, "mc_qa or generation");
  run->add_option("--kg", rf.kg_path, "Knowledge graph TSV")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", rf.out_path, "Record file (JSON lines, appended)");
  run->add_option("--summary", rf.summary_path, "Write the run summary here");
  run->add_option("-p,--preset", rf.presets, "kgrag, tog, mindmap, rok, kggpt, pilot, meta");
  run->add_option("--form", rf.form, "Retrieval form for pilot/meta");
  run->add_option("--prompt", rf.prompt, "Prompt pattern for pilot/meta");
  run->add_option("--grid-forms", rf.grid_forms, "Grid forms")->delimiter(',');
  run->add_option("--grid-prompts", rf.grid_prompts, "Grid prompts")->delimiter(',');
  run->add_option("--grid-enhancements", rf.grid_enhancements, "Grid enhancements")->delimiter(',');
  run->add_flag("--fresh", rf.fresh, "Truncate the record file instead of resuming");

  std::string records, layout = "method_rows", format = "markdown", report_out;
  auto* rep = app.add_subcommand("report", "Aggregate a record file into a table");
  rep->add_option("--records", records, "Record file")->required()->check(CLI::ExistingFile);
  rep->add_option("--layout", layout, "form_by_prompt, enhancement_rows or method_rows");
  rep->add_option("--format", format, "markdown, csv or both")
      ->check(CLI::IsMember({"markdown", "csv", "both"}));
  rep->add_option("-o,--out", report_out, "Output path (default stdout)");

  std::string sample_in, sample_out;
  std::size_t per_category = 500;
  std::uint64_t seed = 0;
  std::string category_field = "category";
  auto* smp = app.add_subcommand("sample", "Seeded per-category sampling of a JSON-lines file");
  smp->add_option("--in", sample_in, "Input JSON lines")->required()->check(CLI::ExistingFile);
  smp->add_option("-o,--out", sample_out, "Output JSON lines")->required();
  smp->add_option("-n,--per-category", per_category, "Lines kept per category");
  smp->add_option("--seed", seed, "Sampler seed")->required();
  smp->add_option("--category-field", category_field, "Field naming the category");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) return build_kg_cmd(build_flags, corpus, out_tsv, build_report);
    if (*run) return run_cmd(run_flags, rf);
    if (*rep) return report_cmd(records, layout, format, report_out);
    if (*smp) return sample_cmd(sample_in, sample_out, per_category, seed, category_field);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "kgrag: %s\n", e.what());
    return 2;
  }
  return 0;
}
