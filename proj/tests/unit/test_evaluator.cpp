#include <gtest/gtest.h>

#include <cmath>

#include "kgrag/errors.hpp"
#include "kgrag/evaluator.hpp"
#include "oracles/generators.hpp"
#include "oracles/text_oracles.hpp"

using namespace kgrag;

namespace {

const LetterSet kABCD = {'A', 'B', 'C', 'D'};

McVerdict verdict(std::string_view response, LetterSet gold) {
  return judge_mc(response, gold, kABCD).verdict;
}

std::unique_ptr<LlmGateway> mock(const nlohmann::json& script) {
  GatewaySettings s;
  s.backoff_initial_ms = 0;
  return std::make_unique<LlmGateway>(std::make_unique<MockBackend>(MockScript::from_json(script)), s);
}

const std::vector<std::string> kVocab = {"fever", "cough", "the", "a", "flu", "rash", "pain", "drug"};

}  // namespace

TEST(JudgeMc, Examples) {
  EXPECT_EQ(verdict("...reasoning... Final answer: B", {'B'}), McVerdict::correct);
  EXPECT_EQ(verdict("The answer is C.", {'B'}), McVerdict::wrong);
  EXPECT_EQ(verdict("I cannot decide.", {'B'}), McVerdict::fail);
}

TEST(JudgeMc, MarkerVariants) {
  EXPECT_EQ(verdict("final answer: b", {'B'}), McVerdict::correct);
  EXPECT_EQ(verdict("Final answer: A, C", {'A', 'C'}), McVerdict::correct);
  EXPECT_EQ(verdict("Final answer: A and C", {'A', 'C'}), McVerdict::correct);
  EXPECT_EQ(verdict("Final answer: AC", {'A', 'C'}), McVerdict::correct);
  EXPECT_EQ(verdict("Final answer: A", {'A', 'C'}), McVerdict::wrong);
  EXPECT_EQ(verdict("Final answer: Option D", {'D'}), McVerdict::correct);
  // Last valid marker wins.
  EXPECT_EQ(verdict("Final answer: A\nOn reflection. Final answer: B", {'B'}), McVerdict::correct);
  // A marker naming no valid letter falls through to an earlier one.
  EXPECT_EQ(verdict("Final answer: B\nFinal answer: unsure", {'B'}), McVerdict::correct);
  auto j = judge_mc("Final answer: D", {'A'}, kABCD);
  ASSERT_TRUE(j.extracted.has_value());
  EXPECT_EQ(*j.extracted, (LetterSet{'D'}));
}

TEST(JudgeMc, FallbackIgnoresLowercaseAndOutOfRange) {
  EXPECT_EQ(verdict("I think a is right", {'A'}), McVerdict::fail);
  EXPECT_EQ(verdict("Pick E", {'A'}), McVerdict::fail);
  EXPECT_EQ(verdict("Between A and B, B fits", {'B'}), McVerdict::correct);
}

TEST(JudgeMc, GoldOutsideOptionsThrows) {
  EXPECT_THROW(judge_mc("Final answer: A", {'Z'}, kABCD), ConfigError);
}

TEST(JudgeMc, MarkerNeverFailsProperty) {
  gen::Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    const char letter = static_cast<char>('A' + rng.between(0, 3));
    std::string prefix = gen::join(gen::random_words(rng, 0, 12, kVocab));
    std::string response = prefix + "\nFinal answer: " + std::string(1, letter);
    const LetterSet gold = {static_cast<char>('A' + rng.between(0, 3))};
    auto v = verdict(response, gold);
    EXPECT_NE(v, McVerdict::fail);
    EXPECT_EQ(v == McVerdict::correct, gold.contains(letter));
  }
}

TEST(Rouge, WorkedExamples) {
  auto a = rouge("the cat sat", "the cat sat on the mat", Tokenization::space_tokenized);
  EXPECT_NEAR(a.rl.precision, 1.0, 1e-6);
  EXPECT_NEAR(a.rl.recall, 0.5, 1e-6);
  EXPECT_NEAR(a.rl.f1, 2.0 / 3.0, 1e-6);
  auto b = rouge("fever cough", "fever", Tokenization::space_tokenized);
  EXPECT_NEAR(b.r1.precision, 0.5, 1e-6);
  EXPECT_NEAR(b.r1.recall, 1.0, 1e-6);
  EXPECT_NEAR(b.r1.f1, 2.0 / 3.0, 1e-6);
  auto c = rouge("flu causes fever", "flu causes fever", Tokenization::space_tokenized);
  EXPECT_DOUBLE_EQ(c.r1.f1, 1.0);
  EXPECT_DOUBLE_EQ(c.r2.f1, 1.0);
  EXPECT_DOUBLE_EQ(c.rl.f1, 1.0);
}

TEST(Rouge, EmptyIsZero) {
  auto r = rouge("", "fever", Tokenization::space_tokenized);
  EXPECT_EQ(r.r1.f1, 0.0);
  EXPECT_EQ(r.rl.precision, 0.0);
  EXPECT_EQ(rouge("fever", "   ", Tokenization::space_tokenized).r2.recall, 0.0);
}

TEST(Rouge, ClippedCounts) {
  auto r = rouge("the the the", "the cat", Tokenization::space_tokenized);
  EXPECT_NEAR(r.r1.precision, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.r1.recall, 0.5, 1e-12);
}

TEST(Rouge, CharacterMode) {
  auto r = rouge("发热咳嗽", "发热", Tokenization::char_tokenized);
  EXPECT_NEAR(r.r1.precision, 0.5, 1e-12);
  EXPECT_NEAR(r.r2.precision, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.rl.recall, 1.0, 1e-12);
}

TEST(Rouge, MatchesBruteForceAndIsSymmetric) {
  gen::Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    auto cand = gen::random_words(rng, 0, 10, kVocab);
    auto ref = gen::random_words(rng, 0, 10, kVocab);
    auto s = rouge_tokens(cand, ref);
    EXPECT_EQ(lcs_length(cand, ref), oracle::brute_lcs(cand, ref));
    auto expect = [&](const PrecisionRecallF1& got, std::size_t hits) {
      if (cand.empty() || ref.empty()) {
        EXPECT_EQ(got.f1, 0.0);
        return;
      }
      const double p = static_cast<double>(hits) / static_cast<double>(cand.size());
      const double r = static_cast<double>(hits) / static_cast<double>(ref.size());
      EXPECT_NEAR(got.precision, p, 1e-12);
      EXPECT_NEAR(got.recall, r, 1e-12);
      EXPECT_NEAR(got.f1, p + r == 0 ? 0.0 : 2 * p * r / (p + r), 1e-12);
    };
    expect(s.r1, oracle::brute_overlap(cand, ref, 1));
    expect(s.rl, oracle::brute_lcs(cand, ref));
    if (cand.size() >= 2 && ref.size() >= 2) {
      const double hits = static_cast<double>(oracle::brute_overlap(cand, ref, 2));
      EXPECT_NEAR(s.r2.precision, hits / static_cast<double>(cand.size() - 1), 1e-12);
      EXPECT_NEAR(s.r2.recall, hits / static_cast<double>(ref.size() - 1), 1e-12);
    }
    auto back = rouge_tokens(ref, cand);
    EXPECT_NEAR(s.r1.f1, back.r1.f1, 1e-12);
    EXPECT_NEAR(s.r2.f1, back.r2.f1, 1e-12);
    EXPECT_NEAR(s.rl.f1, back.rl.f1, 1e-12);
  }
}

TEST(EmbedSim, IdentityAndBounds) {
  auto gw = mock(nlohmann::json::object());
  gen::Rng rng(8);
  EmbeddingCache cache;
  for (int i = 0; i < 60; ++i) {
    auto x = gen::join(gen::random_words(rng, 1, 8, kVocab));
    auto y = gen::join(gen::random_words(rng, 0, 8, kVocab));
    auto same = embed_sim(x, x, Tokenization::space_tokenized, *gw, &cache);
    EXPECT_DOUBLE_EQ(same.f1, 1.0);
    auto other = embed_sim(x, y, Tokenization::space_tokenized, *gw, &cache);
    for (double v : {other.precision, other.recall, other.f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(EmbedSim, OrthogonalFixtureVectors) {
  auto gw = mock({{"embedding_dim", 3},
                  {"embeddings", {{"fever", {1, 0, 0}}, {"cough", {0, 1, 0}}, {"rash", {0, 0, 1}}}}});
  auto s = embed_sim("fever cough", "rash", Tokenization::space_tokenized, *gw);
  EXPECT_NEAR(s.f1, 0.0, 1e-9);
}

TEST(EmbedSim, SharedTokenHandMatrix) {
  // cand {fever, cough}, ref {fever}; sim(cough, fever) = 0.6.
  auto gw = mock({{"embedding_dim", 2}, {"embeddings", {{"fever", {1, 0}}, {"cough", {0.6, 0.8}}}}});
  auto s = embed_sim("fever cough", "fever", Tokenization::space_tokenized, *gw);
  EXPECT_NEAR(s.precision, 0.5 * (1 + 0.6), 1e-6);
  EXPECT_NEAR(s.recall, 1.0, 1e-6);
  EXPECT_NEAR(s.f1, f1_score(0.8, 1.0), 1e-6);
}

TEST(EmbedSim, EmptySideIsZero) {
  auto gw = mock(nlohmann::json::object());
  auto s = embed_sim("", "fever", Tokenization::space_tokenized, *gw);
  EXPECT_EQ(s.f1, 0.0);
}

TEST(GEval, ScriptedScores) {
  auto gw = mock({{"rules", {{{"pattern", "single dimension"}, {"response", "SCORE: 80"}}}}});
  auto g = g_eval("q", "ref", "cand", *gw);
  for (auto d : kGEvalDimensions) EXPECT_DOUBLE_EQ(g[d], 80.0);
  for (bool f : g.parse_flags) EXPECT_FALSE(f);
}

TEST(GEval, ClampAndProse) {
  auto over = mock({{"rules", {{{"pattern", "single dimension"}, {"response", "SCORE: 120"}}}}});
  auto g = g_eval("q", "ref", "cand", *over);
  EXPECT_DOUBLE_EQ(g[GEvalDimension::empathy], 100.0);
  EXPECT_TRUE(g.parse_flags[3]);
  auto prose = mock({{"rules", {{{"pattern", "single dimension"}, {"response", "Quite good."}}}}});
  auto h = g_eval("q", "ref", "cand", *prose);
  EXPECT_DOUBLE_EQ(h[GEvalDimension::coherence], 0.0);
  EXPECT_TRUE(h.parse_flags[0]);
}

TEST(GEval, OneCallPerDimensionNamed) {
  auto gw = mock({{"rules",
                   {{{"pattern", "dimension: coherence"}, {"response", "SCORE: 10"}},
                    {{"pattern", "dimension: completeness"}, {"response", "SCORE: 20"}},
                    {{"pattern", "dimension: correctness"}, {"response", "SCORE: 30"}},
                    {{"pattern", "dimension: empathy"}, {"response", "SCORE: 40"}}}}});
  auto g = g_eval("q", "ref", "cand", *gw);
  EXPECT_EQ(g.scores, (std::array<double, 4>{10, 20, 30, 40}));
}

TEST(ParseScore, Forms) {
  EXPECT_EQ(parse_score("SCORE: 72.5"), 72.5);
  bool clamped = false;
  EXPECT_EQ(parse_score("SCORE: -4", &clamped), 0.0);
  EXPECT_TRUE(clamped);
  EXPECT_FALSE(parse_score("no score").has_value());
}

TEST(Json, Shapes) {
  auto j = to_json(judge_mc("Final answer: B", {'B'}, kABCD));
  EXPECT_EQ(j["verdict"], "correct");
  EXPECT_EQ(j["extracted"], "B");
  auto r = to_json(rouge("a b", "a b", Tokenization::space_tokenized));
  EXPECT_TRUE(r.contains("r1") && r.contains("r2") && r.contains("rl"));
}
