#include <algorithm>
#include <cstdio>
#include <map>

#include "kgrag/errors.hpp"
#include "kgrag/harness.hpp"

namespace kgrag {

namespace {

struct Sums {
  std::size_t embed_n = 0;
  std::array<double, 3> embed{};
  std::size_t rouge_n = 0;
  std::array<double, 3> rouge{};
  std::size_t geval_n = 0;
  std::array<double, 4> geval{};
};

double number(const nlohmann::ordered_json& j, const char* key) {
  auto it = j.find(key);
  return it != j.end() && it->is_number() ? it->get<double>() : 0.0;
}

}  // namespace

std::vector<ConfigAggregate> aggregate_records(std::span<const nlohmann::ordered_json> records) {
  std::vector<ConfigAggregate> out;
  std::vector<Sums> sums;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    const std::string key = r.value("config_key", "");
    auto [it, inserted] = index.emplace(key, out.size());
    if (inserted) {
      ConfigAggregate a;
      a.config_key = key;
      a.config = r.contains("config") ? r["config"] : nlohmann::ordered_json(nullptr);
      out.push_back(std::move(a));
      sums.emplace_back();
    }
    ConfigAggregate& a = out[it->second];
    Sums& s = sums[it->second];
    ++a.records;
    if (r.value("status", "ok") != "ok") ++a.errors;
    if (!r.contains("metrics") || !r["metrics"].is_object()) continue;
    const auto& m = r["metrics"];

    if (m.contains("mc") && m["mc"].is_object()) {
      ++a.mc_total;
      const std::string v = m["mc"].value("verdict", "fail");
      if (v == "correct")
        ++a.mc_correct;
      else if (v == "wrong")
        ++a.mc_wrong;
      else
        ++a.mc_fail;
    }
    if (m.contains("embed_sim") && m["embed_sim"].is_object()) {
      ++s.embed_n;
      s.embed[0] += number(m["embed_sim"], "precision");
      s.embed[1] += number(m["embed_sim"], "recall");
      s.embed[2] += number(m["embed_sim"], "f1");
    }
    if (m.contains("rouge") && m["rouge"].is_object()) {
      ++s.rouge_n;
      const char* parts[] = {"r1", "r2", "rl"};
      for (int k = 0; k < 3; ++k) {
        const auto& rj = m["rouge"];
        if (rj.contains(parts[k])) s.rouge[k] += number(rj[parts[k]], "f1");
      }
    }
    if (m.contains("g_eval") && m["g_eval"].is_object()) {
      ++s.geval_n;
      const auto& gj = m["g_eval"];
      for (GEvalDimension d : kGEvalDimensions) {
        const std::string name(to_string(d));
        s.geval[static_cast<int>(d)] += number(gj, name.c_str());
        if (gj.contains("parse_failures") && gj["parse_failures"].value(name, false))
          ++a.g_eval_parse_failures;
      }
    }
  }

  for (std::size_t i = 0; i < out.size(); ++i) {
    const Sums& s = sums[i];
    if (s.embed_n) {
      const double n = static_cast<double>(s.embed_n);
      out[i].embed_sim = PrecisionRecallF1{s.embed[0] / n, s.embed[1] / n, s.embed[2] / n};
    }
    if (s.rouge_n) {
      const double n = static_cast<double>(s.rouge_n);
      out[i].rouge = std::array<double, 3>{s.rouge[0] / n, s.rouge[1] / n, s.rouge[2] / n};
    }
    if (s.geval_n) {
      const double n = static_cast<double>(s.geval_n);
      out[i].g_eval =
          std::array<double, 4>{s.geval[0] / n, s.geval[1] / n, s.geval[2] / n, s.geval[3] / n};
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const ConfigAggregate& a) {
  nlohmann::ordered_json j;
  j["config_key"] = a.config_key;
  j["config"] = a.config;
  j["records"] = a.records;
  j["errors"] = a.errors;
  if (a.mc_total) {
    const double n = static_cast<double>(a.mc_total);
    j["mc"] = {{"n", a.mc_total},
               {"correct", a.mc_correct / n},
               {"wrong", a.mc_wrong / n},
               {"fail", a.mc_fail / n}};
  } else {
    j["mc"] = nullptr;
  }
  j["embed_sim"] = a.embed_sim ? to_json(*a.embed_sim) : nlohmann::ordered_json(nullptr);
  j["rouge"] = a.rouge ? nlohmann::ordered_json{{"r1", (*a.rouge)[0]},
                                                {"r2", (*a.rouge)[1]},
                                                {"rl", (*a.rouge)[2]}}
                       : nlohmann::ordered_json(nullptr);
  if (a.g_eval) {
    nlohmann::ordered_json g;
    for (GEvalDimension d : kGEvalDimensions)
      g[std::string(to_string(d))] = (*a.g_eval)[static_cast<int>(d)];
    g["parse_failures"] = a.g_eval_parse_failures;
    j["g_eval"] = std::move(g);
  } else {
    j["g_eval"] = nullptr;
  }
  return j;
}

nlohmann::ordered_json to_json(const BenchmarkSummary& s) {
  nlohmann::ordered_json j;
  j["produced"] = s.produced;
  j["skipped"] = s.skipped;
  j["errors"] = s.errors;
  j["run_info"] = s.run_info.is_null() ? nlohmann::ordered_json(nullptr)
                                        : nlohmann::ordered_json::parse(s.run_info.dump());
  nlohmann::ordered_json configs = nlohmann::ordered_json::array();
  for (const auto& a : s.configs) configs.push_back(to_json(a));
  j["configs"] = std::move(configs);
  return j;
}

std::string_view to_string(ReportLayout layout) {
  switch (layout) {
    case ReportLayout::form_by_prompt:
      return "form_by_prompt";
    case ReportLayout::enhancement_rows:
      return "enhancement_rows";
    case ReportLayout::method_rows:
      return "method_rows";
  }
  return "method_rows";
}

std::optional<ReportLayout> parse_report_layout(std::string_view text) {
  for (ReportLayout l : {ReportLayout::form_by_prompt, ReportLayout::enhancement_rows,
                         ReportLayout::method_rows})
    if (text == to_string(l)) return l;
  return std::nullopt;
}

namespace {

constexpr std::array<std::string_view, 3> kForms = {"fact", "path", "subgraph"};
constexpr std::array<std::string_view, 3> kFormLabels = {"Facts", "Path", "Subgraph"};
constexpr std::array<std::string_view, 4> kPrompts = {"direct", "cot", "tot", "mindmap"};
constexpr std::array<std::string_view, 4> kPromptSuffix = {"_w/o Prompt", "+CoT", "+ToT",
                                                           "+MindMap"};
constexpr std::array<std::string_view, 4> kEnhancements = {"none", "understand", "expand",
                                                           "decompose"};
constexpr std::array<std::string_view, 4> kEnhancementLabels = {
    "w/o Enhancement", "Understand (Pilot)", "Expand (RoK)", "Decompose (KGGPT)"};
constexpr std::array<std::string_view, 7> kMethods = {"kgrag", "tog",  "mindmap", "rok",
                                                      "kggpt", "pilot", "meta"};
constexpr std::array<std::string_view, 7> kMethodLabels = {"KGRAG", "ToG",  "MindMap", "RoK",
                                                           "KGGPT", "Pilot", "Meta"};

template <std::size_t N>
std::size_t position(const std::array<std::string_view, N>& names, const std::string& value) {
  auto it = std::find(names.begin(), names.end(), value);
  return static_cast<std::size_t>(it - names.begin());
}

std::string field(const nlohmann::ordered_json& config, const char* key) {
  if (!config.is_object()) return "";
  auto it = config.find(key);
  return it != config.end() && it->is_string() ? it->get<std::string>() : "";
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
  return buf;
}

std::string fixed2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string row_label(const nlohmann::ordered_json& config, ReportLayout layout) {
  switch (layout) {
    case ReportLayout::form_by_prompt: {
      const std::size_t f = position(kForms, field(config, "form"));
      const std::size_t p = position(kPrompts, field(config, "prompt"));
      if (f < kForms.size() && p < kPrompts.size())
        return std::string(kFormLabels[f]) + std::string(kPromptSuffix[p]);
      break;
    }
    case ReportLayout::enhancement_rows: {
      const std::size_t e = position(kEnhancements, field(config, "enhancement"));
      if (e < kEnhancements.size()) return std::string(kEnhancementLabels[e]);
      break;
    }
    case ReportLayout::method_rows: {
      const std::size_t m = position(kMethods, field(config, "preset"));
      if (m < kMethods.size()) return std::string(kMethodLabels[m]);
      break;
    }
  }
  return field(config, "enhancement") + "/" + field(config, "form") + "/" +
         field(config, "prompt");
}

ReportTable build_report(std::span<const ConfigAggregate> aggregates, ReportLayout layout) {
  std::vector<const ConfigAggregate*> rows;
  for (const auto& a : aggregates) rows.push_back(&a);

  auto sort_key = [layout](const ConfigAggregate* a) {
    const std::size_t f = position(kForms, field(a->config, "form"));
    const std::size_t p = position(kPrompts, field(a->config, "prompt"));
    const std::size_t e = position(kEnhancements, field(a->config, "enhancement"));
    const std::size_t m = position(kMethods, field(a->config, "preset"));
    switch (layout) {
      case ReportLayout::form_by_prompt:
        return std::array<std::size_t, 4>{f, p, e, m};
      case ReportLayout::enhancement_rows:
        return std::array<std::size_t, 4>{e, f, p, m};
      case ReportLayout::method_rows:
        break;
    }
    return std::array<std::size_t, 4>{m, e, f, p};
  };
  std::sort(rows.begin(), rows.end(), [&](const ConfigAggregate* a, const ConfigAggregate* b) {
    const auto ka = sort_key(a), kb = sort_key(b);
    if (ka != kb) return ka < kb;
    return a->config_key < b->config_key;
  });

  const bool has_mc = std::any_of(rows.begin(), rows.end(), [](auto* a) { return a->mc_total > 0; });
  const bool has_embed = std::any_of(rows.begin(), rows.end(), [](auto* a) { return a->embed_sim.has_value(); });
  const bool has_rouge = std::any_of(rows.begin(), rows.end(), [](auto* a) { return a->rouge.has_value(); });
  const bool has_geval = std::any_of(rows.begin(), rows.end(), [](auto* a) { return a->g_eval.has_value(); });

  ReportTable t;
  t.layout = layout;
  t.header.push_back("Method");
  if (has_mc) {
    t.groups.emplace_back("MC", 3);
    for (const char* h : {"Correct", "Wrong", "Fail"}) t.header.push_back(h);
  }
  if (has_embed) {
    t.groups.emplace_back("BERT Score", 3);
    for (const char* h : {"Prec.", "Rec.", "F1"}) t.header.push_back(h);
  }
  if (has_rouge) {
    t.groups.emplace_back("ROUGE Score", 3);
    for (const char* h : {"R-1", "R-2", "R-L"}) t.header.push_back(h);
  }
  if (has_geval) {
    t.groups.emplace_back("G-Eval", 4);
    for (const char* h : {"CR", "Comp", "Corr", "Emp"}) t.header.push_back(h);
  }
  t.header.push_back("N");

  std::map<std::string, int> label_uses;
  for (const auto* a : rows) ++label_uses[row_label(a->config, layout)];

  for (const auto* a : rows) {
    std::vector<std::string> row;
    std::string label = row_label(a->config, layout);
    if (label_uses[label] > 1) label += " [" + a->config_key + "]";
    row.push_back(std::move(label));
    auto missing = [&row](int n) {
      for (int i = 0; i < n; ++i) row.push_back("-");
    };
    if (has_mc) {
      if (a->mc_total) {
        const double n = static_cast<double>(a->mc_total);
        row.push_back(percent(a->mc_correct / n));
        row.push_back(percent(a->mc_wrong / n));
        row.push_back(percent(a->mc_fail / n));
      } else {
        missing(3);
      }
    }
    if (has_embed) {
      if (a->embed_sim) {
        row.push_back(percent(a->embed_sim->precision));
        row.push_back(percent(a->embed_sim->recall));
        row.push_back(percent(a->embed_sim->f1));
      } else {
        missing(3);
      }
    }
    if (has_rouge) {
      if (a->rouge)
        for (double v : *a->rouge) row.push_back(percent(v));
      else
        missing(3);
    }
    if (has_geval) {
      if (a->g_eval)
        for (double v : *a->g_eval) row.push_back(fixed2(v));
      else
        missing(4);
    }
    row.push_back(std::to_string(a->records));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string ReportTable::markdown() const {
  std::string out = "| |";
  for (const auto& [name, span] : groups) {
    out += ' ' + name + " |";
    for (std::size_t i = 1; i < span; ++i) out += " |";
  }
  out += " |\n|";
  for (std::size_t i = 0; i < header.size(); ++i) out += " --- |";
  out += "\n|";
  for (const auto& h : header) out += " " + h + " |";
  out += '\n';
  for (const auto& row : rows) {
    out += '|';
    for (const auto& cell : row) out += " " + cell + " |";
    out += '\n';
  }
  return out;
}

std::string ReportTable::csv() const {
  std::string out;
  // Header cells carry their group, e.g. "ROUGE Score R-1".
  std::vector<std::string> names = header;
  std::size_t col = 1;
  for (const auto& [name, span] : groups)
    for (std::size_t i = 0; i < span; ++i, ++col) names[col] = name + " " + names[col];
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + csv_cell(names[i]);
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += '\n';
  }
  return out;
}

ReportTable emit_report(const std::filesystem::path& records_path, ReportLayout layout) {
  const auto records = read_records(records_path);
  if (records.empty()) throw EmptyInput("no records in " + records_path.string());
  const auto aggregates = aggregate_records(records);
  return build_report(aggregates, layout);
}

}  // namespace kgrag
