#include <gtest/gtest.h>

#include "kgrag/enhancer.hpp"
#include "kgrag/errors.hpp"

using namespace kgrag;

namespace {

struct Fixture {
  KnowledgeGraph graph = KnowledgeGraph::parse_tsv(
      "flu\thas_symptom\tfever\n"
      "fever\ttreated_by\taspirin\n"
      "migraine\thas_symptom\theadache\n"
      "eye strain\thas_symptom\theadache\n"
      "headache\tco_occurs\tblurred vision\n");
  EntityLinker linker{graph};
  TemplateStore templates = TemplateStore::builtin();
  std::unique_ptr<LlmGateway> gateway;

  template <class... Rules>
  explicit Fixture(Rules... rules) {
    GatewaySettings s;
    s.backoff_initial_ms = 0;
    gateway = std::make_unique<LlmGateway>(
        std::make_unique<MockBackend>(MockScript::from_json({{"rules", nlohmann::json::array({rules...})}})), s);
  }
  QueryEnhancer enhancer(Tokenization t = Tokenization::space_tokenized) {
    EnhancerSettings es;
    es.tokenization = t;
    return QueryEnhancer(linker, templates, gateway.get(), es);
  }
};

nlohmann::json rule(const std::string& pattern, const std::vector<std::string>& responses) {
  return {{"pattern", pattern}, {"responses", responses}};
}

}  // namespace

TEST(EnhanceNone, LongestMatchScan) {
  Fixture f;
  auto q = f.enhancer().enhance_none("does flu cause fever");
  EXPECT_EQ(q.seeds, (std::vector<std::string>{"flu", "fever"}));
  EXPECT_EQ(q.strategy, EnhancementStrategy::none);
  EXPECT_TRUE(q.trace.empty());
}

TEST(EnhanceNone, NoLinkableTokens) {
  Fixture f;
  EXPECT_TRUE(f.enhancer().enhance_none("what is the weather").seeds.empty());
}

TEST(EnhanceNone, Deduplicated) {
  Fixture f;
  EXPECT_EQ(f.enhancer().enhance_none("flu flu").seeds, (std::vector<std::string>{"flu"}));
}

TEST(EnhanceNone, MultiWordPreferredAndPunctuationBreaks) {
  Fixture f;
  auto q = f.enhancer().enhance_none("Is blurred vision, or eye strain, linked to headache?");
  EXPECT_EQ(q.seeds, (std::vector<std::string>{"blurred vision", "eye strain", "headache"}));
  // "fever. aspirin" must not be read as one two-word mention across the stop.
  EXPECT_EQ(f.enhancer().enhance_none("fever. aspirin").seeds,
            (std::vector<std::string>{"fever", "aspirin"}));
}

TEST(EnhanceNone, ExactMentionsBeatLongerFuzzySpans) {
  KnowledgeGraph g = KnowledgeGraph::parse_tsv(
      "diabetes mellitus\ttreated_by\tmetformin\nmigraine\ttreated_by\tsumatriptan\n");
  EntityLinker linker(g);
  auto templates = TemplateStore::builtin();
  QueryEnhancer e(linker, templates, nullptr);
  // "diabetes mellitus is" and "a migraine" both clear the fuzzy threshold.
  EXPECT_EQ(e.enhance_none("diabetes mellitus is treated with a migraine drug").seeds,
            (std::vector<std::string>{"diabetes mellitus", "migraine"}));
  // Without an exact hit the fuzzy pass still links a near miss.
  EXPECT_EQ(e.enhance_none("is it migrane").seeds, (std::vector<std::string>{"migrane"}));
}

TEST(EnhanceNone, NeverCallsGateway) {
  KnowledgeGraph g = KnowledgeGraph::parse_tsv("flu\tr\tfever\n");
  EntityLinker linker(g);
  auto templates = TemplateStore::builtin();
  QueryEnhancer offline(linker, templates, nullptr);
  EXPECT_EQ(offline.enhance("flu?", EnhancementStrategy::none).seeds,
            (std::vector<std::string>{"flu"}));
  EXPECT_THROW(offline.enhance("flu?", EnhancementStrategy::understand), ConfigError);
}

TEST(EnhanceNone, CharacterTokenization) {
  KnowledgeGraph g = KnowledgeGraph::parse_tsv("头痛\t伴随\t视力模糊\n流感\t症状\t发热\n");
  EntityLinker linker(g);
  auto templates = TemplateStore::builtin();
  EnhancerSettings es;
  es.tokenization = Tokenization::char_tokenized;
  QueryEnhancer e(linker, templates, nullptr, es);
  EXPECT_EQ(e.enhance_none("我经常头痛并且视力模糊，是流感吗？").seeds,
            (std::vector<std::string>{"头痛", "视力模糊", "流感"}));
}

TEST(EnhanceUnderstand, ParsesListedConcepts) {
  Fixture f(rule("core intent", {"headache\nblurred vision"}));
  auto q = f.enhancer().enhance_understand("I keep getting recurring headaches and blurred vision");
  EXPECT_EQ(q.seeds, (std::vector<std::string>{"headache", "blurred vision"}));
  EXPECT_FALSE(q.fallback);
  ASSERT_EQ(q.trace.size(), 1u);
  EXPECT_EQ(q.template_ids, (std::vector<std::string>{"enhance_understand.v1"}));
}

TEST(EnhanceUnderstand, FormattedReplyWithIntentAndBullets) {
  Fixture f(rule("core intent",
                  {"Intent: find the cause of the symptoms.\nKey concepts:\n- Headache\n- "
                   "Blurred vision\n"}));
  auto q = f.enhancer().enhance_understand("recurring headaches and blurred vision");
  EXPECT_EQ(q.seeds, (std::vector<std::string>{"Headache", "Blurred vision"}));
}

TEST(EnhanceUnderstand, ProseFallsBackToScan) {
  Fixture f(rule("core intent", {"The user seems worried about something."}));
  auto q = f.enhancer().enhance_understand("does flu cause fever");
  EXPECT_TRUE(q.fallback);
  EXPECT_EQ(q.seeds, (std::vector<std::string>{"flu", "fever"}));
}

TEST(EnhanceExpand, UnionOfExtractedAndRelated) {
  Fixture f(rule("which entities", {"Looking at it step by step.\nEntities:\nheadache"}),
             rule("closely related", {"migraine\neye strain\nheadache"}));
  auto q = f.enhancer().enhance_expand("recurring headaches");
  EXPECT_EQ(q.seeds, (std::vector<std::string>{"headache", "migraine", "eye strain"}));
  EXPECT_EQ(q.trace.size(), 2u);
}

TEST(EnhanceExpand, ScriptedAThenB) {
  Fixture f(rule("which entities", {"Entities:\nflu"}), rule("closely related", {"fever"}));
  EXPECT_EQ(f.enhancer().enhance_expand("q").seeds, (std::vector<std::string>{"flu", "fever"}));
}

TEST(EnhanceExpand, NothingExtractedSkipsSecondCall) {
  Fixture f(rule("which entities", {"Entities:\n"}), rule("closely related", {"flu"}));
  auto q = f.enhancer().enhance_expand("does flu cause fever");
  EXPECT_EQ(q.trace.size(), 1u);
  EXPECT_TRUE(q.fallback);
}

TEST(EnhanceDecompose, TwoClauses) {
  Fixture f(rule("simpler clauses", {"1. What causes fever?\n2. What treats flu?"}));
  auto q = f.enhancer().enhance_decompose("What causes fever and what treats flu?");
  EXPECT_EQ(q.sub_queries, (std::vector<std::string>{"What causes fever", "What treats flu"}));
  ASSERT_EQ(q.clause_seeds.size(), 2u);
  EXPECT_EQ(q.clause_seeds[0], (std::vector<std::string>{"fever"}));
  EXPECT_EQ(q.clause_seeds[1], (std::vector<std::string>{"flu"}));
}

TEST(EnhanceDecompose, SingleClauseBehavesAsNone) {
  Fixture f(rule("simpler clauses", {"does flu cause fever"}));
  auto q = f.enhancer().enhance_decompose("does flu cause fever");
  EXPECT_EQ(q.sub_queries.size(), 1u);
  EXPECT_EQ(q.seeds, f.enhancer().enhance_none("does flu cause fever").seeds);
}

TEST(EnhanceDecompose, EmptyClauseListUsesQuestion) {
  Fixture f(rule("simpler clauses", {"\n\n"}));
  auto q = f.enhancer().enhance_decompose("does flu cause fever");
  EXPECT_EQ(q.sub_queries, (std::vector<std::string>{"does flu cause fever"}));
  EXPECT_EQ(q.seeds, (std::vector<std::string>{"flu", "fever"}));
}

TEST(ParseListReply, StripsBulletsNumbersAndHeaders) {
  EXPECT_EQ(parse_list_reply("Concepts:\n1. fever\n2) cough\n* rash\n• itch\n\n"),
            (std::vector<std::string>{"fever", "cough", "rash", "itch"}));
  EXPECT_EQ(parse_list_reply("reasoning\nEntities: flu, fever\naspirin", "Entities:"),
            (std::vector<std::string>{"flu", "fever", "aspirin"}));
}
