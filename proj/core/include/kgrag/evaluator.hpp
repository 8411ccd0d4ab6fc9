#pragma once

#include <array>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgrag/llm_gateway.hpp"
#include "kgrag/prompter.hpp"
#include "kgrag/templates.hpp"
#include "kgrag/text.hpp"

namespace kgrag {

using LetterSet = std::set<char>;

enum class McVerdict { correct, wrong, fail };
std::string_view to_string(McVerdict v);

struct McJudgment {
  McVerdict verdict = McVerdict::fail;
  std::optional<LetterSet> extracted;
  LetterSet gold;
};

// Extraction order: the last "Final answer:" line (case-insensitive) that
// names valid option letters; else the last standalone upper-case option
// letter anywhere in the text; else fail. Throws ConfigError unless
// gold is a subset of option_letters.
McJudgment judge_mc(std::string_view response, const LetterSet& gold,
                    const LetterSet& option_letters);

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Harmonic mean; 0 when both inputs are 0.
double f1_score(double precision, double recall);

struct RougeScores {
  PrecisionRecallF1 r1;
  PrecisionRecallF1 r2;
  PrecisionRecallF1 rl;
};

// ROUGE-1/2 with clipped n-gram overlap and ROUGE-L from the LCS.
RougeScores rouge(std::string_view candidate, std::string_view reference, Tokenization t);
RougeScores rouge_tokens(std::span<const std::string> candidate,
                         std::span<const std::string> reference);
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

using EmbedSimScores = PrecisionRecallF1;

// Token embeddings memoized per text; thread-safe.
class EmbeddingCache {
 public:
  std::vector<EmbeddingVector> get(std::span<const std::string> tokens, LlmGateway& gateway);

 private:
  std::mutex mutex_;
  std::map<std::string, EmbeddingVector, std::less<>> vectors_;
};

// Greedy-matching similarity over precomputed token vectors. Identical
// tokens score exactly 1; other pairs score the cosine clamped to [0, 1].
EmbedSimScores greedy_match(std::span<const std::string> candidate_tokens,
                            std::span<const EmbeddingVector> candidate_vectors,
                            std::span<const std::string> reference_tokens,
                            std::span<const EmbeddingVector> reference_vectors);

EmbedSimScores embed_sim(std::string_view candidate, std::string_view reference,
                         Tokenization t, LlmGateway& gateway, EmbeddingCache* cache = nullptr);

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

enum class GEvalDimension { coherence, completeness, correctness, empathy };
inline constexpr std::array<GEvalDimension, 4> kGEvalDimensions = {
    GEvalDimension::coherence, GEvalDimension::completeness, GEvalDimension::correctness,
    GEvalDimension::empathy};
std::string_view to_string(GEvalDimension d);

struct GEvalScores {
  // Indexed by GEvalDimension, each in [0, 100].
  std::array<double, 4> scores{};
  // Reply had no score, or the score was outside [0, 100] and clamped.
  std::array<bool, 4> parse_flags{};

  double operator[](GEvalDimension d) const { return scores[static_cast<int>(d)]; }
};

// First "SCORE: <number>". Sets *clamped when the value was out of range.
std::optional<double> parse_score(std::string_view reply, bool* clamped = nullptr);

GEvalScores g_eval(std::string_view question, std::string_view reference,
                   std::string_view candidate, LlmGateway& judge,
                   const TemplateStore& templates = TemplateStore::builtin());

nlohmann::ordered_json to_json(const McJudgment& j);
nlohmann::ordered_json to_json(const RougeScores& r);
nlohmann::ordered_json to_json(const PrecisionRecallF1& s);
nlohmann::ordered_json to_json(const GEvalScores& g);

}  // namespace kgrag
