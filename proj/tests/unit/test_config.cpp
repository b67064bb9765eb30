#include <gtest/gtest.h>

#include "claimshift/core/errors.hpp"
#include "claimshift/pipeline/config.hpp"
#include "test_support.hpp"

using namespace claimshift;
using namespace claimshift::pipeline;

namespace {

RunConfig fixture_config() { return load_config(testsupport::e2e_dir() / "config_none.json"); }

bool has_field(const std::vector<Diagnostic>& ds, const std::string& field) {
  for (const auto& d : ds)
    if (d.field == field) return true;
  return false;
}

}  // namespace

TEST(Config, FixtureConfigIsRunnable) {
  auto c = fixture_config();
  EXPECT_TRUE(validate_config(c).empty());
  EXPECT_EQ(c.run_name, "fixture-none");
  EXPECT_EQ(c.domains, std::vector<std::string>{"Computer Science"});
  EXPECT_EQ(c.papers_per_domain, 10u);
  EXPECT_EQ(c.probe_concurrency, 2u);
  EXPECT_EQ(c.model.url, "scripted:model.json");
  EXPECT_EQ(c.out(), testsupport::e2e_dir() / "out-none");
  EXPECT_EQ(&c.paraphraser_spec(), &c.judge);
}

TEST(Config, InstTuneWithoutAdapterIsDiagnosed) {
  auto c = fixture_config();
  c.update.kind = updates::UpdateKind::kInstTune;
  auto ds = validate_config(c);
  ASSERT_FALSE(ds.empty());
  EXPECT_TRUE(has_field(ds, "update.adapter_command"));
  c.update.adapter_command = "/definitely/not/here.sh";
  EXPECT_TRUE(has_field(validate_config(c), "update.adapter_command"));
  c.update.adapter_command = "/bin/true";
  EXPECT_TRUE(validate_config(c).empty());
}

TEST(Config, SemanticProblemsAreListed) {
  auto c = fixture_config();
  c.split_ratio = 1.0;
  EXPECT_TRUE(has_field(validate_config(c), "split.ratio"));
  c = fixture_config();
  c.domains = {"Astrology"};
  EXPECT_TRUE(has_field(validate_config(c), "domains"));
  c = fixture_config();
  c.claim_filter.min_words = 40;
  EXPECT_TRUE(has_field(validate_config(c), "claims.min_words"));
  c = fixture_config();
  c.task = TaskSelection::kGeneration;
  EXPECT_TRUE(has_field(validate_config(c), "analysis.correlation_task"));
  c = fixture_config();
  c.analysis.tokenizer = "bpe";
  EXPECT_TRUE(has_field(validate_config(c), "analysis.tokenizer"));
}

TEST(Config, MalformedFieldsThrow) {
  EXPECT_THROW(config_from_json(json::array(), "."), ContractError);
  EXPECT_THROW(config_from_json({{"cutoff", "December"}}, "."), ContractError);
  EXPECT_THROW(config_from_json({{"papers_per_domain", "many"}}, "."), ContractError);
  EXPECT_THROW(config_from_json({{"update", {{"method", "FINETUNE"}}}}, "."), ContractError);
  EXPECT_THROW(config_from_json({{"task", "summarize"}}, "."), ContractError);
}

TEST(Config, HashIgnoresLocationsAndScheduling) {
  auto a = fixture_config();
  auto b = a;
  b.output_dir = "/elsewhere";
  b.cache_dir = "/cache";
  b.probe_concurrency = 7;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.split_seed = 1;
  EXPECT_NE(config_hash(a), config_hash(b));
  auto c = a;
  c.update.kind = updates::UpdateKind::kInfer;
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, JsonRoundTripKeepsHash) {
  auto a = load_config(testsupport::e2e_dir() / "config_infer.json");
  auto b = config_from_json(config_to_json(a), a.base_dir);
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(b.infer_context_scope, updates::ContextScope::kAll);
  EXPECT_EQ(b.update.kind, updates::UpdateKind::kInfer);
}
