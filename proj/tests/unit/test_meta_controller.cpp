#include <gtest/gtest.h>

#include "kgrag/errors.hpp"
#include "kgrag/meta_controller.hpp"

using namespace kgrag;

namespace {

struct Env {
  KnowledgeGraph graph = KnowledgeGraph::parse_tsv(
      "flu\thas_symptom\tfever\nfever\ttreated_by\taspirin\n");
  TemplateStore templates = TemplateStore::builtin();
  std::unique_ptr<LlmGateway> gateway;
  std::unique_ptr<LlmGateway> judge;

  Env(std::vector<std::string> confidences) {
    GatewaySettings s;
    s.backoff_initial_ms = 0;
    nlohmann::json gen = {{"rules",
                           {{{"pattern", "Answering mode"}, {"responses", {"first", "second", "third"}}},
                            {{"pattern", "which entities"}, {"response", "Entities:\nflu"}},
                            {{"pattern", "closely related"}, {"response", "fever"}}}}};
    gateway = std::make_unique<LlmGateway>(std::make_unique<MockBackend>(MockScript::from_json(gen)), s);
    nlohmann::json jr = {{"rules", {{{"pattern", "reviewing an answer"}, {"responses", confidences}}}}};
    judge = std::make_unique<LlmGateway>(std::make_unique<MockBackend>(MockScript::from_json(jr)), s);
  }
};

MetaPolicy policy(double threshold, int iterations = 3) {
  MetaPolicy p;
  p.confidence_threshold = threshold;
  p.max_iterations = iterations;
  return p;
}

PipelineConfig base() {
  PipelineConfig c;
  c.enhancement = EnhancementStrategy::none;
  c.form = RetrievalForm::fact;
  return c;
}

}  // namespace

TEST(Confidence, Parsing) {
  EXPECT_EQ(parse_confidence("CONFIDENCE: 85\nCRITIQUE: fine"), 85);
  EXPECT_EQ(parse_confidence("CONFIDENCE:250"), 100);
  EXPECT_EQ(parse_confidence("CONFIDENCE: -3"), 0);
  EXPECT_FALSE(parse_confidence("I am confident").has_value());
}

TEST(Revision, Steps) {
  bool changed = false;
  auto c = apply_revision(base(), Revision::switch_form, &changed);
  EXPECT_TRUE(changed);
  EXPECT_EQ(c.form, RetrievalForm::path);
  c = apply_revision(apply_revision(c, Revision::switch_form), Revision::switch_form, &changed);
  EXPECT_EQ(c.form, RetrievalForm::subgraph);
  EXPECT_FALSE(changed);
  EXPECT_EQ(apply_revision(base(), Revision::raise_hops).budget.max_hops, 4);
  EXPECT_EQ(apply_revision(base(), Revision::widen_seeds).enhancement, EnhancementStrategy::expand);
}

TEST(Meta, AcceptsHighConfidenceImmediately) {
  Env env({"CONFIDENCE: 90\nCRITIQUE: good"});
  Pipeline p(env.graph, env.gateway.get(), env.templates);
  auto out = MetaController(p, *env.judge).run("does flu cause fever", TaskKind::generation,
                                               Tokenization::space_tokenized, base(), policy(0.7));
  ASSERT_EQ(out.states.size(), 1u);
  EXPECT_EQ(out.states[0].verdict, Verdict::accept);
  EXPECT_DOUBLE_EQ(out.states[0].confidence, 0.9);
  EXPECT_EQ(out.final_answer, "first");
  EXPECT_EQ(out.states[0].revision_note, "good");
}

TEST(Meta, LowThenHighBacktracks) {
  Env env({"CONFIDENCE: 20\nCRITIQUE: thin", "CONFIDENCE: 90"});
  Pipeline p(env.graph, env.gateway.get(), env.templates);
  auto out = MetaController(p, *env.judge).run("does flu cause fever", TaskKind::generation,
                                               Tokenization::space_tokenized, base(), policy(0.7));
  ASSERT_EQ(out.states.size(), 2u);
  EXPECT_EQ(out.states[0].verdict, Verdict::revise);
  EXPECT_EQ(out.states[1].verdict, Verdict::accept);
  EXPECT_EQ(out.states[1].config_used.enhancement, EnhancementStrategy::expand);
  EXPECT_EQ(out.states[1].config_used.form, RetrievalForm::fact);
  EXPECT_NE(out.states[0].revision_note.find("widen_seeds"), std::string::npos);
  EXPECT_EQ(out.final_answer, "second");
}

TEST(Meta, NoOpStepIsSkipped) {
  Env env({"CONFIDENCE: 10", "CONFIDENCE: 95"});
  Pipeline p(env.graph, env.gateway.get(), env.templates);
  auto start = base();
  start.enhancement = EnhancementStrategy::expand;
  auto out = MetaController(p, *env.judge).run("does flu cause fever", TaskKind::generation,
                                               Tokenization::space_tokenized, start, policy(0.7));
  ASSERT_EQ(out.states.size(), 2u);
  EXPECT_EQ(out.states[1].config_used.form, RetrievalForm::path);
  EXPECT_NE(out.states[0].revision_note.find("switch_form"), std::string::npos);
}

TEST(Meta, IterationCapForcesAccept) {
  Env env({"CONFIDENCE: 5"});
  Pipeline p(env.graph, env.gateway.get(), env.templates);
  auto out = MetaController(p, *env.judge).run("does flu cause fever", TaskKind::generation,
                                               Tokenization::space_tokenized, base(), policy(0.99, 3));
  ASSERT_EQ(out.states.size(), 3u);
  EXPECT_EQ(out.states.back().verdict, Verdict::accept);
  EXPECT_EQ(out.final_answer, "third");
  EXPECT_EQ(out.states[2].config_used.form, RetrievalForm::path);
}

TEST(Meta, UnparsableConfidenceIsZero) {
  Env env({"looks fine to me"});
  Pipeline p(env.graph, env.gateway.get(), env.templates);
  auto out = MetaController(p, *env.judge).run("flu", TaskKind::generation,
                                               Tokenization::space_tokenized, base(), policy(0.5, 2));
  ASSERT_EQ(out.states.size(), 2u);
  EXPECT_FALSE(out.states[0].confidence_parsed);
  EXPECT_DOUBLE_EQ(out.states[0].confidence, 0.0);
}

TEST(Meta, ThresholdZeroEqualsPlainPipeline) {
  Env env({"CONFIDENCE: 0"});
  Pipeline p(env.graph, env.gateway.get(), env.templates);
  auto out = MetaController(p, *env.judge).run("does flu cause fever", TaskKind::generation,
                                               Tokenization::space_tokenized, base(), policy(0.0));
  Env plain_env({"unused"});
  Pipeline plain(plain_env.graph, plain_env.gateway.get(), plain_env.templates);
  auto r = plain.run("does flu cause fever", TaskKind::generation, Tokenization::space_tokenized, base());
  ASSERT_EQ(out.states.size(), 1u);
  EXPECT_EQ(out.final_answer, r.response);
  EXPECT_EQ(out.final_result.prompt_hash, r.prompt_hash);
}

TEST(Meta, StateJson) {
  Env env({"CONFIDENCE: 90"});
  Pipeline p(env.graph, env.gateway.get(), env.templates);
  auto out = MetaController(p, *env.judge).run("flu", TaskKind::generation,
                                               Tokenization::space_tokenized, base(), policy(0.7));
  auto j = to_json(out.states[0]);
  EXPECT_EQ(j["verdict"], "accept");
  EXPECT_EQ(j["iteration"], 1);
  EXPECT_TRUE(j.contains("evidence"));
}
