#include "kgrag/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "kgrag/errors.hpp"
#include "kgrag/meta_controller.hpp"

namespace kgrag {

LetterSet Task::option_letters() const {
  LetterSet s;
  for (const auto& [letter, _] : options) s.insert(letter);
  return s;
}

std::string Task::prompt_text() const {
  std::string out = question;
  for (const auto& [letter, text] : options) {
    out += '\n';
    out += letter;
    out += ". ";
    out += text;
  }
  return out;
}

namespace {

char option_letter(std::string_view key, std::size_t line) {
  if (key.size() != 1 || key[0] < 'A' || key[0] > 'Z')
    throw SchemaError(line, "option key '" + std::string(key) + "' is not a letter A-Z");
  return key[0];
}

std::string required_string(const nlohmann::json& j, const char* field, std::size_t line) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string())
    throw SchemaError(line, std::string("missing string field '") + field + "'");
  std::string value(trim(it->get<std::string>()));
  if (value.empty()) throw SchemaError(line, std::string("empty field '") + field + "'");
  return value;
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* field,
                                           std::size_t line) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw SchemaError(line, std::string("field '") + field + "' is not a string");
  return it->get<std::string>();
}

LetterSet parse_gold(const nlohmann::json& answer, const LetterSet& allowed, std::size_t line) {
  LetterSet gold;
  auto add = [&](std::string_view letters) {
    for (char c : letters) {
      if (c == ',' || c == ' ') continue;
      const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (!allowed.contains(u))
        throw SchemaError(line, std::string("answer letter '") + c + "' is not an option");
      gold.insert(u);
    }
  };
  if (answer.is_string()) {
    add(answer.get<std::string>());
  } else if (answer.is_array()) {
    for (const auto& a : answer) {
      if (!a.is_string()) throw SchemaError(line, "answer list must hold strings");
      add(a.get<std::string>());
    }
  } else {
    throw SchemaError(line, "answer must be a letter string or a list of letters");
  }
  if (gold.empty()) throw SchemaError(line, "empty answer");
  return gold;
}

}  // namespace

Task task_from_json(const nlohmann::json& j, TaskKind schema, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "record is not a JSON object");
  Task t;
  t.kind = schema;
  if (auto it = j.find("id"); it != j.end() && !it->is_null()) {
    if (it->is_string())
      t.id = it->get<std::string>();
    else if (it->is_number_integer())
      t.id = std::to_string(it->get<long long>());
    else
      throw SchemaError(line, "id must be a string or integer");
  } else {
    t.id = std::to_string(line);
  }
  t.question = required_string(j, "question", line);
  t.question_concept = optional_string(j, "concept", line);
  t.reference = optional_string(j, "reference", line);
  if (auto lang = optional_string(j, "lang", line)) {
    auto parsed = parse_tokenization(*lang);
    if (!parsed) throw SchemaError(line, "unknown lang '" + *lang + "'");
    t.lang = *parsed;
  }

  if (schema == TaskKind::mc_qa) {
    auto opts = j.find("options");
    if (opts == j.end() || opts->is_null()) throw SchemaError(line, "missing options");
    if (opts->is_object()) {
      for (const auto& [key, value] : opts->items()) {
        if (!value.is_string()) throw SchemaError(line, "option text must be a string");
        t.options.emplace_back(option_letter(key, line), value.get<std::string>());
      }
      std::sort(t.options.begin(), t.options.end());
    } else if (opts->is_array()) {
      if (opts->size() > 26) throw SchemaError(line, "more than 26 options");
      char letter = 'A';
      for (const auto& value : *opts) {
        if (!value.is_string()) throw SchemaError(line, "option text must be a string");
        t.options.emplace_back(letter++, value.get<std::string>());
      }
    } else {
      throw SchemaError(line, "options must be an object or an array");
    }
    if (t.options.empty()) throw SchemaError(line, "empty options");
    auto answer = j.find("answer");
    if (answer == j.end()) throw SchemaError(line, "missing answer");
    t.gold = parse_gold(*answer, t.option_letters(), line);
  } else {
    if (!t.reference) {
      auto answer = j.find("answer");
      if (answer != j.end() && answer->is_string()) t.reference = answer->get<std::string>();
    }
    if (!t.reference || trim(*t.reference).empty())
      throw SchemaError(line, "generation task needs a reference");
  }
  return t;
}

nlohmann::ordered_json to_json(const Task& t) {
  nlohmann::ordered_json j;
  j["id"] = t.id;
  j["kind"] = std::string(to_string(t.kind));
  j["question"] = t.question;
  if (!t.options.empty()) {
    nlohmann::ordered_json opts = nlohmann::ordered_json::object();
    for (const auto& [letter, text] : t.options) opts[std::string(1, letter)] = text;
    j["options"] = std::move(opts);
    j["answer"] = std::string(t.gold.begin(), t.gold.end());
  }
  if (t.reference) j["reference"] = *t.reference;
  if (t.question_concept) j["concept"] = *t.question_concept;
  j["lang"] = std::string(to_string(t.lang));
  return j;
}

std::vector<Task> parse_tasks(std::string_view jsonl, TaskKind schema,
                              const LoadOptions& options, TaskLoadStats* stats) {
  TaskLoadStats local;
  TaskLoadStats& st = stats ? *stats : local;
  st = {};
  std::vector<Task> tasks;
  std::size_t line_number = 0;
  for (std::string_view line : split_lines(jsonl)) {
    ++line_number;
    ++st.lines;
    if (trim(line).empty()) {
      ++st.blank;
      continue;
    }
    try {
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) throw SchemaError(line_number, "invalid JSON");
      tasks.push_back(task_from_json(j, schema, line_number));
    } catch (const SchemaError&) {
      if (options.strict) throw;
      st.rejected_lines.push_back(line_number);
    }
  }
  return tasks;
}

std::vector<Task> load_tasks(const std::filesystem::path& path, TaskKind schema,
                             const LoadOptions& options, TaskLoadStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open task file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_tasks(buf.str(), schema, options, stats);
}

namespace {

nlohmann::ordered_json enhanced_json(const EnhancedQuery& q) {
  nlohmann::ordered_json j;
  j["strategy"] = std::string(to_string(q.strategy));
  j["seeds"] = q.seeds;
  j["sub_queries"] = q.sub_queries;
  j["clause_seeds"] = q.clause_seeds;
  j["fallback"] = q.fallback;
  j["template_ids"] = q.template_ids;
  j["trace"] = q.trace;
  return j;
}

nlohmann::ordered_json links_json(const KnowledgeGraph& g, const std::vector<LinkResult>& links) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const LinkResult& l : links) {
    nlohmann::ordered_json j;
    j["mention"] = l.mention;
    j["entity"] = l.entity ? nlohmann::ordered_json(g.display_name(*l.entity))
                           : nlohmann::ordered_json(nullptr);
    j["score"] = l.score;
    j["method"] = std::string(to_string(l.method));
    arr.push_back(std::move(j));
  }
  return arr;
}

std::string dump_line(const nlohmann::ordered_json& j) {
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

}  // namespace

nlohmann::ordered_json run_one(const Task& task, const PipelineConfig& config,
                               const Pipeline& pipeline, LlmGateway& judge, LlmGateway& embedder,
                               const MetricToggles& metrics, EmbeddingCache* cache, bool rethrow) {
  using nlohmann::ordered_json;
  const auto started = std::chrono::steady_clock::now();

  ordered_json rec;
  rec["task_id"] = task.id;
  rec["config_key"] = config.key();
  rec["config"] = to_json(config);
  rec["task_kind"] = std::string(to_string(task.kind));
  rec["lang"] = std::string(to_string(task.lang));
  rec["status"] = "ok";
  rec["error"] = nullptr;
  rec["enhanced"] = nullptr;
  rec["links"] = nullptr;
  rec["evidence"] = nullptr;
  rec["template_id"] = nullptr;
  rec["prompt_hash"] = nullptr;
  rec["prompt_truncated"] = nullptr;
  rec["response"] = nullptr;
  rec["attempts"] = nullptr;
  rec["meta_states"] = nullptr;
  ordered_json m;
  m["mc"] = nullptr;
  m["rouge"] = nullptr;
  m["embed_sim"] = nullptr;
  m["g_eval"] = nullptr;
  std::int64_t llm_ms = 0;

  const bool judge_mc_task = metrics.mc && task.kind == TaskKind::mc_qa;
  try {
    const std::string question = task.prompt_text();
    PipelineResult result;
    std::string answer;
    if (config.meta) {
      MetaController controller(pipeline, judge);
      MetaOutcome outcome = controller.run(question, task.kind, task.lang, config, *config.meta);
      ordered_json states = ordered_json::array();
      for (const MetaState& s : outcome.states) states.push_back(to_json(s));
      rec["meta_states"] = std::move(states);
      result = std::move(outcome.final_result);
      answer = std::move(outcome.final_answer);
    } else {
      result = pipeline.run(question, task.kind, task.lang, config);
      answer = result.response;
    }
    llm_ms = result.latency_ms;
    rec["enhanced"] = enhanced_json(result.enhanced);
    rec["links"] = links_json(pipeline.graph(), result.links);
    rec["evidence"] = to_json(result.evidence);
    rec["template_id"] = result.prompt.template_id;
    rec["prompt_hash"] = result.prompt_hash;
    rec["prompt_truncated"] = result.prompt.truncated;
    rec["response"] = answer;
    rec["attempts"] = result.attempts;

    if (judge_mc_task) m["mc"] = to_json(judge_mc(answer, task.gold, task.option_letters()));
    if (task.reference) {
      const std::string& ref = *task.reference;
      if (metrics.rouge) m["rouge"] = to_json(rouge(answer, ref, task.lang));
      if (metrics.embed_sim)
        m["embed_sim"] = to_json(embed_sim(answer, ref, task.lang, embedder, cache));
      if (metrics.g_eval)
        m["g_eval"] = to_json(g_eval(task.question, ref, answer, judge, pipeline.templates()));
    }
  } catch (const std::exception& e) {
    if (rethrow) throw;
    rec["status"] = "error";
    rec["error"] = e.what();
    m["mc"] = judge_mc_task ? to_json(judge_mc("", task.gold, task.option_letters()))
                            : ordered_json(nullptr);
    m["rouge"] = nullptr;
    m["embed_sim"] = nullptr;
    m["g_eval"] = nullptr;
  }
  rec["metrics"] = std::move(m);

  const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - started)
                        .count();
  rec["timing"] = {{"wall_ms", wall}, {"llm_latency_ms", llm_ms}};
  return rec;
}

std::vector<nlohmann::ordered_json> read_records(const std::filesystem::path& path,
                                                 bool truncate_partial) {
  std::vector<nlohmann::ordered_json> records;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open record file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  in.close();
  const std::string text = buf.str();

  std::size_t pos = 0;
  std::size_t line_number = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // partial trailing write
    ++line_number;
    std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    if (trim(line).empty()) continue;
    auto j = nlohmann::ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw SchemaError(line_number, "invalid record");
    records.push_back(std::move(j));
  }
  if (truncate_partial && pos < text.size()) std::filesystem::resize_file(path, pos);
  return records;
}

std::string strip_timing(std::string_view jsonl) {
  std::string out;
  for (std::string_view line : split_lines(jsonl)) {
    if (trim(line).empty()) continue;
    auto j = nlohmann::ordered_json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      out += line;
    } else {
      j.erase("timing");
      out += dump_line(j);
    }
    out += '\n';
  }
  return out;
}

BenchmarkSummary run_benchmark(std::span<const Task> tasks, const KnowledgeGraph& graph,
                               std::span<const PipelineConfig> configs, LlmGateway& gateway,
                               const std::filesystem::path& out_path,
                               const BenchmarkOptions& options) {
  {
    std::set<std::string> ids;
    for (const Task& t : tasks)
      if (!ids.insert(t.id).second) throw ConfigError("duplicate task id '" + t.id + "'");
  }
  BenchmarkSummary summary;
  summary.run_info = options.run_info;
  if (configs.empty()) return summary;

  const TemplateStore& templates = options.templates ? *options.templates : TemplateStore::builtin();
  Pipeline pipeline(graph, &gateway, templates, options.pipeline);
  LlmGateway& judge = options.judge ? *options.judge : gateway;
  LlmGateway& embedder = options.embedder ? *options.embedder : gateway;
  EmbeddingCache cache;

  if (!out_path.parent_path().empty()) std::filesystem::create_directories(out_path.parent_path());
  std::set<std::pair<std::string, std::string>> done;
  if (options.resume && std::filesystem::exists(out_path)) {
    for (const auto& r : read_records(out_path, true))
      done.emplace(r.value("config_key", ""), r.value("task_id", ""));
  } else {
    std::ofstream(out_path, std::ios::binary | std::ios::trunc);
  }

  struct Item {
    const PipelineConfig* config;
    const Task* task;
  };
  std::vector<Item> items;
  for (const PipelineConfig& c : configs) {
    const std::string key = c.key();
    for (const Task& t : tasks) {
      if (done.contains({key, t.id}))
        ++summary.skipped;
      else
        items.push_back({&c, &t});
    }
  }

  std::ofstream out(out_path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot open record file " + out_path.string());

  // Workers finish out of order; the appender writes strictly in item order.
  std::mutex append_mutex;
  std::vector<std::optional<std::string>> finished(items.size());
  std::size_t next_to_write = 0;
  std::atomic<std::size_t> next_item{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next_item.fetch_add(1);
      if (i >= items.size()) return;
      std::string line;
      try {
        line = dump_line(run_one(*items[i].task, *items[i].config, pipeline, judge, embedder,
                                 options.metrics, &cache, options.strict));
      } catch (...) {
        std::lock_guard lock(append_mutex);
        if (!failure) failure = std::current_exception();
        stop.store(true);
        return;
      }
      std::lock_guard lock(append_mutex);
      finished[i] = std::move(line);
      while (next_to_write < finished.size() && finished[next_to_write]) {
        out << *finished[next_to_write] << '\n';
        out.flush();
        finished[next_to_write].reset();
        ++next_to_write;
        ++summary.produced;
      }
    }
  };

  const std::size_t n_workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.workers, 1)), 1,
                              std::max<std::size_t>(items.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  out.close();
  if (failure) std::rethrow_exception(failure);

  const auto records = read_records(out_path);
  summary.configs = aggregate_records(records);
  for (const auto& a : summary.configs) summary.errors += a.errors;
  return summary;
}

SampleResult sample_lines(std::span<const std::string> jsonl_lines, std::size_t per_category,
                          std::uint64_t seed, std::string_view category_field) {
  std::map<std::string, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < jsonl_lines.size(); ++i) {
    if (trim(jsonl_lines[i]).empty()) continue;
    auto j = nlohmann::json::parse(jsonl_lines[i], nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw SchemaError(i + 1, "invalid JSON");
    std::string category;
    if (auto it = j.find(category_field); it != j.end() && !it->is_null())
      category = it->is_string() ? it->get<std::string>() : it->dump();
    by_category[category].push_back(i);
  }

  // Library distributions are implementation-defined; draw indices by
  // rejection sampling so a seed means the same sample everywhere.
  std::mt19937_64 rng(seed);
  auto below = [&rng](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do x = rng();
    while (x >= limit);
    return x % bound;
  };

  SampleResult result;
  result.seed = seed;
  for (auto& [category, lines] : by_category) {
    const std::size_t take = std::min(per_category, lines.size());
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(lines.size() - i));
      std::swap(lines[i], lines[j]);
    }
    result.selected_lines.insert(result.selected_lines.end(), lines.begin(),
                                 lines.begin() + static_cast<std::ptrdiff_t>(take));
    result.per_category[category] = take;
  }
  std::sort(result.selected_lines.begin(), result.selected_lines.end());
  return result;
}

}  // namespace kgrag
