#include "kgrag/enhancer.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "kgrag/errors.hpp"

namespace kgrag {

std::string_view to_string(EnhancementStrategy s) {
  switch (s) {
    case EnhancementStrategy::none:
      return "none";
    case EnhancementStrategy::understand:
      return "understand";
    case EnhancementStrategy::expand:
      return "expand";
    case EnhancementStrategy::decompose:
      return "decompose";
  }
  return "none";
}

std::optional<EnhancementStrategy> parse_enhancement(std::string_view text) {
  if (text == "none") return EnhancementStrategy::none;
  if (text == "understand") return EnhancementStrategy::understand;
  if (text == "expand") return EnhancementStrategy::expand;
  if (text == "decompose") return EnhancementStrategy::decompose;
  return std::nullopt;
}

namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view strip_bullet(std::string_view line) {
  line = trim(line);
  if (line.starts_with("\xE2\x80\xA2")) return trim(line.substr(3));  // U+2022
  if (!line.empty() && (line[0] == '-' || line[0] == '*' || line[0] == '+'))
    return trim(line.substr(1));
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')'))
    return trim(line.substr(i + 1));
  return line;
}

void add_unique(std::vector<std::string>& seeds, std::unordered_set<std::string>& seen,
                std::string seed) {
  if (seed.empty()) return;
  if (seen.insert(canonicalize(seed)).second) seeds.push_back(std::move(seed));
}

std::vector<std::string> dedup(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const std::string& s : items) add_unique(out, seen, s);
  return out;
}

// A token sequence split into runs that n-grams may not cross.
struct Segments {
  std::vector<std::vector<std::string>> runs;
};

Segments segment(std::string_view text, Tokenization t) {
  Segments out;
  out.runs.emplace_back();
  auto boundary = [&out] {
    if (!out.runs.back().empty()) out.runs.emplace_back();
  };
  if (t == Tokenization::char_tokenized) {
    for (char32_t cp : to_code_points(text)) {
      if (is_whitespace(cp) || is_punctuation(cp)) {
        boundary();
      } else {
        out.runs.back().push_back(to_utf8(std::u32string(1, cp)));
      }
    }
  } else {
    for (const std::string& raw : whitespace_tokens(text)) {
      const std::u32string cps = to_code_points(raw);
      const bool leading = !cps.empty() && is_punctuation(cps.front());
      const bool trailing = !cps.empty() && is_punctuation(cps.back());
      std::string token = strip_punctuation(raw);
      const bool bare = token.empty();
      if (leading) boundary();
      if (!bare) out.runs.back().push_back(std::move(token));
      if (trailing || bare) boundary();
    }
  }
  if (out.runs.back().empty()) out.runs.pop_back();
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t begin,
                        std::size_t count, Tokenization t) {
  std::string out;
  for (std::size_t i = begin; i < begin + count; ++i) {
    if (i > begin && t == Tokenization::space_tokenized) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

std::vector<std::string> parse_list_reply(std::string_view reply, std::string_view after_marker) {
  std::vector<std::string_view> lines = split_lines(reply);
  std::size_t start = 0;
  std::vector<std::string> items;
  if (!after_marker.empty()) {
    const std::string marker = ascii_lower(after_marker);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      std::string_view line = strip_bullet(lines[i]);
      const std::string lower = ascii_lower(line);
      if (lower.starts_with(marker)) {
        start = i + 1;
        items.clear();
        for (std::string_view part : split(line.substr(after_marker.size()), ','))
          if (std::string item = strip_punctuation(trim(part)); !item.empty())
            items.push_back(std::move(item));
      }
    }
  }
  for (std::size_t i = start; i < lines.size(); ++i) {
    std::string_view line = strip_bullet(lines[i]);
    if (line.empty() || line.back() == ':') continue;
    std::string item = strip_punctuation(line);
    if (!item.empty()) items.push_back(std::move(item));
  }
  return items;
}

QueryEnhancer::QueryEnhancer(const EntityLinker& linker, const TemplateStore& templates,
                             LlmGateway* gateway, EnhancerSettings settings)
    : linker_(linker), templates_(templates), gateway_(gateway), settings_(settings) {
  if (settings_.max_ngram > 0) {
    max_ngram_ = settings_.max_ngram;
    return;
  }
  const std::size_t cap = settings_.tokenization == Tokenization::space_tokenized ? 8 : 16;
  for (const std::string& name : linker_.graph().canonical_names()) {
    std::size_t n = 0;
    for (const auto& run : segment(name, settings_.tokenization).runs) n += run.size();
    max_ngram_ = std::max(max_ngram_, std::min(n, cap));
  }
}

bool QueryEnhancer::linkable(std::string_view mention) const {
  return linker_.link(mention, settings_.link_threshold).method != LinkMethod::none;
}

std::vector<std::string> QueryEnhancer::scan_mentions(std::string_view text) const {
  // Exact matches claim tokens first; fuzzy matches only fill the gaps, so
  // a near miss cannot swallow a neighbouring exact mention.
  std::vector<std::pair<std::size_t, std::string>> found;  // (global token index, mention)
  std::size_t base = 0;
  for (const auto& run : segment(text, settings_.tokenization).runs) {
    std::vector<bool> taken(run.size(), false);
    auto longest_match = [&](std::size_t from, std::size_t to, bool exact) {
      std::size_t i = from;
      while (i < to) {
        std::size_t matched = 0;
        for (std::size_t n = std::min(max_ngram_, to - i); n >= 1; --n) {
          std::string gram = join_tokens(run, i, n, settings_.tokenization);
          const bool hit = exact ? linker_.graph().resolve(canonicalize(gram)).has_value()
                                 : linkable(gram);
          if (hit) {
            found.emplace_back(base + i, std::move(gram));
            for (std::size_t k = i; k < i + n; ++k) taken[k] = true;
            matched = n;
            break;
          }
        }
        i += matched ? matched : 1;
      }
    };
    longest_match(0, run.size(), true);
    for (std::size_t i = 0; i < run.size();) {
      if (taken[i]) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < run.size() && !taken[j]) ++j;
      longest_match(i, j, false);
      i = j;
    }
    base += run.size();
  }
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> seeds;
  std::unordered_set<std::string> seen;
  for (auto& [pos, mention] : found) add_unique(seeds, seen, std::move(mention));
  return seeds;
}

std::vector<std::string> QueryEnhancer::seeds_from_candidates(
    const std::vector<std::string>& candidates) const {
  std::vector<std::string> seeds;
  std::unordered_set<std::string> seen;
  for (const std::string& candidate : candidates) {
    if (linkable(candidate)) {
      add_unique(seeds, seen, candidate);
      continue;
    }
    for (std::string& s : scan_mentions(candidate)) add_unique(seeds, seen, std::move(s));
  }
  return seeds;
}

std::string QueryEnhancer::ask(std::string_view template_id, const TemplateVars& vars,
                               EnhancedQuery& record) const {
  if (!gateway_) throw ConfigError("query enhancement needs an LLM gateway");
  ChatRequest request;
  request.system = templates_.text(template_ids::kSystem);
  request.user = templates_.render(template_id, vars);
  std::string reply = gateway_->chat(std::move(request)).text;
  record.template_ids.emplace_back(template_id);
  record.trace.push_back(reply);
  return reply;
}

void QueryEnhancer::apply_fallback(EnhancedQuery& q) const {
  q.fallback = true;
  q.seeds = scan_mentions(q.original);
}

EnhancedQuery QueryEnhancer::enhance_none(std::string_view question) const {
  EnhancedQuery q;
  q.original = std::string(question);
  q.strategy = EnhancementStrategy::none;
  q.seeds = scan_mentions(question);
  return q;
}

EnhancedQuery QueryEnhancer::enhance_understand(std::string_view question) const {
  EnhancedQuery q;
  q.original = std::string(question);
  q.strategy = EnhancementStrategy::understand;
  const std::string reply = ask(template_ids::kUnderstand, {{"question", q.original}}, q);
  std::vector<std::string> candidates;
  for (std::string& item : parse_list_reply(reply, "Key concepts:")) {
    if (ascii_lower(item).starts_with("intent")) continue;
    candidates.push_back(std::move(item));
  }
  q.seeds = seeds_from_candidates(candidates);
  if (q.seeds.empty()) apply_fallback(q);
  return q;
}

EnhancedQuery QueryEnhancer::enhance_expand(std::string_view question) const {
  EnhancedQuery q;
  q.original = std::string(question);
  q.strategy = EnhancementStrategy::expand;
  const std::string extracted_reply =
      ask(template_ids::kExpandExtract, {{"question", q.original}}, q);
  std::vector<std::string> extracted = dedup(parse_list_reply(extracted_reply, "Entities:"));
  if (extracted.empty()) {
    apply_fallback(q);
    return q;
  }
  std::string listing;
  for (const std::string& e : extracted) listing += e + "\n";
  if (!listing.empty()) listing.pop_back();
  const std::string related_reply =
      ask(template_ids::kExpandRelated, {{"question", q.original}, {"entities", listing}}, q);
  std::vector<std::string> candidates = extracted;
  for (std::string& item : parse_list_reply(related_reply)) candidates.push_back(std::move(item));
  q.seeds = seeds_from_candidates(candidates);
  if (q.seeds.empty()) apply_fallback(q);
  return q;
}

EnhancedQuery QueryEnhancer::enhance_decompose(std::string_view question) const {
  EnhancedQuery q;
  q.original = std::string(question);
  q.strategy = EnhancementStrategy::decompose;
  const std::string reply = ask(template_ids::kDecompose, {{"question", q.original}}, q);
  q.sub_queries = parse_list_reply(reply);
  if (q.sub_queries.empty()) q.sub_queries.push_back(q.original);

  std::unordered_set<std::string> seen;
  for (const std::string& clause : q.sub_queries) {
    q.clause_seeds.push_back(scan_mentions(clause));
    for (const std::string& s : q.clause_seeds.back()) add_unique(q.seeds, seen, s);
  }
  if (q.seeds.empty()) {
    apply_fallback(q);
    q.sub_queries.assign(1, q.original);
    q.clause_seeds.assign(1, q.seeds);
  }
  return q;
}

EnhancedQuery QueryEnhancer::enhance(std::string_view question,
                                     EnhancementStrategy strategy) const {
  switch (strategy) {
    case EnhancementStrategy::none:
      return enhance_none(question);
    case EnhancementStrategy::understand:
      return enhance_understand(question);
    case EnhancementStrategy::expand:
      return enhance_expand(question);
    case EnhancementStrategy::decompose:
      return enhance_decompose(question);
  }
  return enhance_none(question);
}

}  // namespace kgrag
