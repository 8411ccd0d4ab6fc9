#include "kgrag/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <unordered_map>

#include "kgrag/errors.hpp"

namespace kgrag {

std::string_view to_string(McVerdict v) {
  switch (v) {
    case McVerdict::correct:
      return "correct";
    case McVerdict::wrong:
      return "wrong";
    case McVerdict::fail:
      return "fail";
  }
  return "fail";
}

namespace {

bool is_ascii_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
char upper(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Letters named right after a marker, e.g. "B", "A, C", "(B) aspirin".
LetterSet letters_after_marker(std::string_view rest, const LetterSet& options) {
  static const std::set<std::string> filler = {"and", "or", "option", "options", "is", "are"};
  LetterSet letters;
  std::size_t i = 0;
  while (i < rest.size()) {
    while (i < rest.size() && !std::isalnum(static_cast<unsigned char>(rest[i]))) ++i;
    std::size_t j = i;
    while (j < rest.size() && std::isalnum(static_cast<unsigned char>(rest[j]))) ++j;
    if (i == j) break;
    std::string_view token = rest.substr(i, j - i);
    i = j;
    if (filler.contains(ascii_lower(token))) continue;
    LetterSet token_letters;
    bool valid = token.size() <= options.size();
    for (char c : token) {
      if (!is_ascii_alpha(c) || !options.contains(upper(c)) || !token_letters.insert(upper(c)).second) {
        valid = false;
        break;
      }
    }
    if (!valid) break;
    letters.insert(token_letters.begin(), token_letters.end());
  }
  return letters;
}

}  // namespace

McJudgment judge_mc(std::string_view response, const LetterSet& gold,
                    const LetterSet& option_letters) {
  if (!std::includes(option_letters.begin(), option_letters.end(), gold.begin(), gold.end()))
    throw ConfigError("gold answers must be a subset of the option letters");
  McJudgment out;
  out.gold = gold;

  const std::string lower = ascii_lower(response);
  const std::string marker = ascii_lower(std::string(kFinalAnswerMarker));
  std::size_t pos = lower.rfind(marker);
  while (pos != std::string::npos) {
    std::string_view rest = response.substr(pos + marker.size());
    rest = rest.substr(0, rest.find('\n'));
    LetterSet letters = letters_after_marker(rest, option_letters);
    if (!letters.empty()) {
      out.extracted = std::move(letters);
      break;
    }
    if (pos == 0) break;
    pos = lower.rfind(marker, pos - 1);
  }

  if (!out.extracted) {
    for (std::size_t i = response.size(); i-- > 0;) {
      const char c = response[i];
      if (!option_letters.contains(c)) continue;
      const bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(response[i - 1]));
      const bool right_ok =
          i + 1 == response.size() || !std::isalnum(static_cast<unsigned char>(response[i + 1]));
      if (left_ok && right_ok) {
        out.extracted = LetterSet{c};
        break;
      }
    }
  }

  if (!out.extracted) {
    out.verdict = McVerdict::fail;
  } else {
    out.verdict = *out.extracted == gold ? McVerdict::correct : McVerdict::wrong;
  }
  return out;
}

double f1_score(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

PrecisionRecallF1 prf(double overlap, std::size_t candidate_units, std::size_t reference_units) {
  PrecisionRecallF1 s;
  if (candidate_units == 0 || reference_units == 0) return s;
  s.precision = overlap / static_cast<double>(candidate_units);
  s.recall = overlap / static_cast<double>(reference_units);
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

std::unordered_map<std::string, std::size_t> ngram_counts(std::span<const std::string> tokens,
                                                          std::size_t n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

PrecisionRecallF1 rouge_n(std::span<const std::string> cand, std::span<const std::string> ref,
                          std::size_t n) {
  auto c = ngram_counts(cand, n);
  auto r = ngram_counts(ref, n);
  std::size_t overlap = 0;
  for (const auto& [gram, count] : c) {
    auto it = r.find(gram);
    if (it != r.end()) overlap += std::min(count, it->second);
  }
  const std::size_t cand_units = cand.size() >= n ? cand.size() - n + 1 : 0;
  const std::size_t ref_units = ref.size() >= n ? ref.size() - n + 1 : 0;
  return prf(static_cast<double>(overlap), cand_units, ref_units);
}

}  // namespace

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), curr(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

RougeScores rouge_tokens(std::span<const std::string> candidate,
                         std::span<const std::string> reference) {
  RougeScores s;
  s.r1 = rouge_n(candidate, reference, 1);
  s.r2 = rouge_n(candidate, reference, 2);
  s.rl = prf(static_cast<double>(lcs_length(candidate, reference)), candidate.size(),
             reference.size());
  return s;
}

RougeScores rouge(std::string_view candidate, std::string_view reference, Tokenization t) {
  const auto cand = metric_tokens(candidate, t);
  const auto ref = metric_tokens(reference, t);
  return rouge_tokens(cand, ref);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim())
    throw GatewayError(GatewayError::Kind::protocol, "embedding dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += static_cast<double>(a.values[i]) * b.values[i];
    na += static_cast<double>(a.values[i]) * a.values[i];
    nb += static_cast<double>(b.values[i]) * b.values[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<EmbeddingVector> EmbeddingCache::get(std::span<const std::string> tokens,
                                                 LlmGateway& gateway) {
  std::vector<std::string> missing;
  {
    std::lock_guard lock(mutex_);
    for (const std::string& t : tokens)
      if (!vectors_.contains(t) && std::find(missing.begin(), missing.end(), t) == missing.end())
        missing.push_back(t);
  }
  if (!missing.empty()) {
    std::vector<EmbeddingVector> fetched = gateway.embed(missing);
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < missing.size(); ++i)
      vectors_.emplace(missing[i], std::move(fetched[i]));
  }
  std::lock_guard lock(mutex_);
  std::vector<EmbeddingVector> out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) out.push_back(vectors_.find(t)->second);
  return out;
}

EmbedSimScores greedy_match(std::span<const std::string> candidate_tokens,
                            std::span<const EmbeddingVector> candidate_vectors,
                            std::span<const std::string> reference_tokens,
                            std::span<const EmbeddingVector> reference_vectors) {
  EmbedSimScores s;
  const std::size_t nc = candidate_tokens.size();
  const std::size_t nr = reference_tokens.size();
  if (nc == 0 || nr == 0) return s;
  std::vector<double> best_c(nc, 0.0), best_r(nr, 0.0);
  for (std::size_t i = 0; i < nc; ++i) {
    for (std::size_t j = 0; j < nr; ++j) {
      const double sim = candidate_tokens[i] == reference_tokens[j]
                             ? 1.0
                             : std::clamp(cosine(candidate_vectors[i], reference_vectors[j]), 0.0, 1.0);
      best_c[i] = std::max(best_c[i], sim);
      best_r[j] = std::max(best_r[j], sim);
    }
  }
  double pc = 0, pr = 0;
  for (double v : best_c) pc += v;
  for (double v : best_r) pr += v;
  s.precision = pc / static_cast<double>(nc);
  s.recall = pr / static_cast<double>(nr);
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

EmbedSimScores embed_sim(std::string_view candidate, std::string_view reference, Tokenization t,
                         LlmGateway& gateway, EmbeddingCache* cache) {
  const auto cand = metric_tokens(candidate, t);
  const auto ref = metric_tokens(reference, t);
  if (cand.empty() || ref.empty()) return {};
  std::vector<EmbeddingVector> cv, rv;
  if (cache) {
    cv = cache->get(cand, gateway);
    rv = cache->get(ref, gateway);
  } else {
    cv = gateway.embed(cand);
    rv = gateway.embed(ref);
  }
  return greedy_match(cand, cv, ref, rv);
}

std::string_view to_string(GEvalDimension d) {
  switch (d) {
    case GEvalDimension::coherence:
      return "coherence";
    case GEvalDimension::completeness:
      return "completeness";
    case GEvalDimension::correctness:
      return "correctness";
    case GEvalDimension::empathy:
      return "empathy";
  }
  return "coherence";
}

namespace {

std::string_view criteria(GEvalDimension d) {
  switch (d) {
    case GEvalDimension::coherence:
      return "the answer is logically organized, internally consistent and easy to follow.";
    case GEvalDimension::completeness:
      return "the answer addresses every part of the question and covers the key points of the "
             "reference answer.";
    case GEvalDimension::correctness:
      return "the statements in the answer are factually accurate and agree with the reference "
             "answer.";
    case GEvalDimension::empathy:
      return "the answer is considerate and supportive toward the person asking.";
  }
  return "";
}

}  // namespace

std::optional<double> parse_score(std::string_view reply, bool* clamped) {
  static const std::regex pattern(R"(SCORE:\s*(-?\d+(?:\.\d+)?))");
  std::match_results<std::string_view::const_iterator> m;
  if (clamped) *clamped = false;
  if (!std::regex_search(reply.begin(), reply.end(), m, pattern)) return std::nullopt;
  const double raw = std::stod(m[1].str());
  const double value = std::clamp(raw, 0.0, 100.0);
  if (clamped) *clamped = value != raw;
  return value;
}

GEvalScores g_eval(std::string_view question, std::string_view reference,
                   std::string_view candidate, LlmGateway& judge, const TemplateStore& templates) {
  GEvalScores out;
  for (GEvalDimension d : kGEvalDimensions) {
    ChatRequest request;
    request.user = templates.render(template_ids::kGEval,
                                    {{"dimension", std::string(to_string(d))},
                                     {"criteria", std::string(criteria(d))},
                                     {"question", std::string(question)},
                                     {"reference", std::string(reference)},
                                     {"candidate", std::string(candidate)}});
    const std::string reply = judge.chat(std::move(request)).text;
    bool clamped = false;
    const auto score = parse_score(reply, &clamped);
    const auto i = static_cast<std::size_t>(d);
    out.scores[i] = score.value_or(0.0);
    out.parse_flags[i] = !score || clamped;
  }
  return out;
}

nlohmann::ordered_json to_json(const McJudgment& j) {
  nlohmann::ordered_json out;
  out["verdict"] = std::string(to_string(j.verdict));
  auto letters = [](const LetterSet& s) {
    std::string str(s.begin(), s.end());
    return str;
  };
  out["extracted"] = j.extracted ? nlohmann::ordered_json(letters(*j.extracted))
                                 : nlohmann::ordered_json(nullptr);
  out["gold"] = letters(j.gold);
  return out;
}

nlohmann::ordered_json to_json(const PrecisionRecallF1& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

nlohmann::ordered_json to_json(const RougeScores& r) {
  return {{"r1", to_json(r.r1)}, {"r2", to_json(r.r2)}, {"rl", to_json(r.rl)}};
}

nlohmann::ordered_json to_json(const GEvalScores& g) {
  nlohmann::ordered_json out;
  nlohmann::ordered_json flags;
  for (GEvalDimension d : kGEvalDimensions) {
    const auto i = static_cast<std::size_t>(d);
    out[std::string(to_string(d))] = g.scores[i];
    flags[std::string(to_string(d))] = g.parse_flags[i];
  }
  out["parse_failures"] = std::move(flags);
  return out;
}

}  // namespace kgrag
