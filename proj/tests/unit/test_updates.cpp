#include <gtest/gtest.h>

#include <random>

#include "claimshift/core/errors.hpp"
#include "claimshift/core/text.hpp"
#include "claimshift/updates/updates.hpp"
#include "test_support.hpp"

using namespace claimshift;
using namespace claimshift::updates;
using testsupport::record;

namespace {

std::vector<corpus::PaperRecord> new_papers(int n) {
  std::vector<corpus::PaperRecord> out;
  for (int i = 0; i < n; ++i) out.push_back(record("N" + std::to_string(i), "2024-04-01"));
  return out;
}

corpus::PaperTriplet triplet(const std::string& k) {
  return {record("P" + k, "2023-02-01"), record("N" + k, "2024-04-01", 0, {"P" + k}),
          record("F" + k, "2024-12-20", 0, {"N" + k}), corpus::FutureEdge::kCitesNew};
}

claims::Claim claim_for(const corpus::PaperRecord& p, Epoch e, Label l) {
  claims::Claim c;
  c.claim_id = claims::claim_id_for(p.paper_id, l);
  c.text = "A finding about " + p.paper_id + " that holds across settings.";
  c.gold_label = l;
  c.paper_id = p.paper_id;
  c.epoch = e;
  return c;
}

struct Fixture {
  std::vector<corpus::PaperTriplet> triplets = {triplet("1"), triplet("2")};
  ClaimIndex index{triplets};
  CorpusSplit split{{"N1"}, {"N2"}, 0, 0.5};
  claims::ClaimSet claims;
  Fixture() {
    for (const auto& t : triplets)
      for (Epoch e : kAllEpochs)
        for (Label l : {Label::kSupport, Label::kRefute}) claims.claims.push_back(claim_for(t.at(e), e, l));
  }
  probes::Probe judgment(const std::string& paper, Epoch e) const {
    const auto& t = index.triplet_of(paper);
    auto c = claim_for(t.at(e), e, Label::kSupport);
    auto title = e == Epoch::kFuture ? std::nullopt : std::optional<std::string>(t.at(e).title);
    return probes::build_judgment_prompt(c, title);
  }
};

std::string write_script(const std::filesystem::path& dir, const std::string& name,
                         const std::string& body) {
  auto path = dir / name;
  write_text_atomic(path, "#!/bin/sh\n" + body);
  std::filesystem::permissions(path, std::filesystem::perms::owner_all);
  return path.string();
}

UpdateOptions quick() {
  UpdateOptions o;
  o.poll_interval = std::chrono::milliseconds(10);
  o.ready_timeout = std::chrono::seconds(20);
  return o;
}

}  // namespace

TEST(Split, HalvesTenPapersDeterministically) {
  auto papers = new_papers(10);
  auto a = split_new(papers, 0.5, 7);
  EXPECT_EQ(a.train_new.size(), 5u);
  EXPECT_EQ(a.test_new.size(), 5u);
  std::reverse(papers.begin(), papers.end());
  EXPECT_EQ(split_new(papers, 0.5, 7), a);
  EXPECT_EQ(split_from_json(to_json(a)), a);
  EXPECT_NE(split_new(papers, 0.5, 8), a);  // 252 possible halves; seeds 7 and 8 differ
}

TEST(Split, BoundsAndErrors) {
  EXPECT_THROW(split_new(new_papers(10), 0.0, 1), ContractError);
  EXPECT_THROW(split_new(new_papers(10), 1.0, 1), ContractError);
  EXPECT_THROW(split_new(new_papers(1), 0.5, 1), ContractError);
  auto two = split_new(new_papers(2), 0.5, 1);
  EXPECT_EQ(two.train_new.size(), 1u);
  EXPECT_EQ(two.test_new.size(), 1u);
  auto tiny = split_new(new_papers(5), 0.01, 1);
  EXPECT_EQ(tiny.train_new.size(), 1u);
  auto dup = new_papers(3);
  dup.push_back(dup[0]);
  EXPECT_THROW(split_new(dup, 0.5, 1), ContractError);
}

TEST(Split, PartitionsForAnySeed) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + static_cast<int>(rng() % 30);
    double ratio = 0.05 + 0.9 * (rng() % 1000) / 1000.0;
    auto s = split_new(new_papers(n), ratio, rng());
    std::vector<std::string> all = s.train_new;
    all.insert(all.end(), s.test_new.begin(), s.test_new.end());
    std::sort(all.begin(), all.end());
    EXPECT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());
    EXPECT_EQ(all.size(), static_cast<std::size_t>(n));
    EXPECT_GE(s.train_new.size(), 1u);
    EXPECT_GE(s.test_new.size(), 1u);
    EXPECT_TRUE(std::is_sorted(s.train_new.begin(), s.train_new.end()));
  }
}

TEST(InferUpdate, AddsNewAbstractAsContext) {
  Fixture f;
  auto p = f.judgment("N2", Epoch::kNew);
  auto out = apply_inference_update(p, f.split, f.index);
  ASSERT_EQ(out.context_papers.size(), 1u);
  EXPECT_EQ(out.context_papers[0], f.index.triplet_of("N2").new_paper.abstract);
  EXPECT_EQ(out.prompt, p.prompt);
  EXPECT_EQ(apply_inference_update(out, f.split, f.index), out);

  auto prior = apply_inference_update(f.judgment("P2", Epoch::kPrior), f.split, f.index);
  EXPECT_EQ(prior.context_papers, out.context_papers);
  auto prior_scoped =
      apply_inference_update(f.judgment("P2", Epoch::kPrior), f.split, f.index, ContextScope::kNew);
  EXPECT_TRUE(prior_scoped.context_papers.empty());
  auto gen = probes::build_generation_prompt(Epoch::kFuture, "Subject", "F2");
  EXPECT_EQ(apply_inference_update(gen, f.split, f.index).context_papers.size(), 1u);
}

TEST(InferUpdate, RefusesTrainingPapersAndMissingAbstracts) {
  Fixture f;
  EXPECT_THROW(apply_inference_update(f.judgment("N1", Epoch::kNew), f.split, f.index), ContractError);
  f.triplets[1].new_paper.abstract = "";
  ClaimIndex index(f.triplets);
  EXPECT_THROW(apply_inference_update(f.judgment("N2", Epoch::kNew), f.split, index), ContractError);
  auto unnamed = f.judgment("N2", Epoch::kNew);
  unnamed.paper_id.reset();
  EXPECT_THROW(apply_inference_update(unnamed, f.split, f.index), ContractError);
}

TEST(NoneUpdate, ReturnsBaseModelAndPromptsStayIdentical) {
  Fixture f;
  auto base = endpoints::ScriptedChatModel::from_json({{"tag", "base"}, {"default", "Yes"}});
  testsupport::TempDir dir;
  auto h = run_update({}, f.split, dir.path(), base, f.index, f.claims);
  EXPECT_EQ(h.model, base);
  EXPECT_FALSE(h.inference_context);
  EXPECT_EQ(h.update_tag, "NONE");
  EXPECT_FALSE(std::filesystem::exists(dir / "update_bundle"));

  UpdateMethodSpec infer;
  infer.kind = UpdateKind::kInfer;
  auto hi = run_update(infer, f.split, dir.path(), base, f.index, f.claims);
  EXPECT_TRUE(hi.inference_context);
  EXPECT_EQ(hi.model, base);
}

TEST(UpdateMethod, ChecksAdapterConsistency) {
  UpdateMethodSpec s;
  s.kind = UpdateKind::kInstTune;
  EXPECT_EQ(check_spec(s).size(), 1u);
  s.adapter_command = "train.sh";
  EXPECT_TRUE(check_spec(s).empty());
  s.kind = UpdateKind::kInfer;
  EXPECT_EQ(check_spec(s).size(), 1u);
  EXPECT_EQ(parse_update_kind("inst-tune-plus-infer"), UpdateKind::kInstTunePlusInfer);
  EXPECT_THROW(parse_update_kind("FINETUNE"), ContractError);
  EXPECT_TRUE(uses_inference_context(UpdateKind::kInstTunePlusInfer));
  EXPECT_FALSE(needs_adapter(UpdateKind::kInfer));
}

TEST(Bundle, ContainsOnlyTrainingQa) {
  Fixture f;
  testsupport::TempDir dir;
  UpdateMethodSpec s;
  s.kind = UpdateKind::kInstTune;
  auto bundle = write_bundle(dir.path(), s, f.split, f.index, f.claims);
  auto qa = read_jsonl(bundle / "qa_train.jsonl");
  ASSERT_EQ(qa.size(), 2u);
  for (const auto& row : qa) EXPECT_EQ(row.at("paper_id"), "N1");
  auto test = read_jsonl(bundle / "abstracts_test.jsonl");
  ASSERT_EQ(test.size(), 1u);
  EXPECT_EQ(test[0].at("paper_id"), "N2");
  EXPECT_EQ(read_jsonl(bundle / "abstracts_train.jsonl").size(), 1u);
  EXPECT_EQ(read_json(bundle / "spec.json").at("kind"), "INST_TUNE");

  auto pair = qa_pair(claim_for(record("X", "2024-04-01"), Epoch::kNew, Label::kRefute), "A title");
  EXPECT_TRUE(pair.at("answer").get<std::string>().starts_with("REFUTE"));
  EXPECT_NE(pair.at("question").get<std::string>().find("paper A title"), std::string::npos);
}

TEST(AdapterUpdate, ReadyFileNamesTheNewEndpoint) {
  Fixture f;
  testsupport::TempDir dir;
  write_text_atomic(dir / "tuned.json", R"({"tag":"tuned","default":"No"})");
  UpdateMethodSpec s;
  s.kind = UpdateKind::kInstTune;
  s.adapter_command = write_script(
      dir.path(), "adapter.sh",
      "test -s \"$1/qa_train.jsonl\" || exit 3\n"
      "echo training on $(wc -l < \"$1/qa_train.jsonl\") pairs\n"
      "printf '{\"endpoint\":\"scripted:" + (dir / "tuned.json").string() + "\"}' > \"$1/ready.json\"\n");
  auto base = endpoints::ScriptedChatModel::from_json({{"tag", "base"}, {"default", "Yes"}});
  auto h = run_update(s, f.split, dir / "work", base, f.index, f.claims, quick());
  ASSERT_TRUE(h.model);
  EXPECT_EQ(h.model->tag(), "tuned");
  EXPECT_EQ(h.update_tag, "INST_TUNE");
  EXPECT_FALSE(h.inference_context);
  EXPECT_TRUE(h.ready.contains("endpoint"));
  EXPECT_NE(read_text(dir / "work" / "logs" / "adapter.log").find("training on 2 pairs"),
            std::string::npos);
}

TEST(AdapterUpdate, NonzeroExitCarriesLog) {
  Fixture f;
  testsupport::TempDir dir;
  UpdateMethodSpec s;
  s.kind = UpdateKind::kCntPretrain;
  s.adapter_command = write_script(dir.path(), "fail.sh", "echo out of memory\nexit 4\n");
  auto base = endpoints::ScriptedChatModel::from_json({{"tag", "base"}, {"default", "Yes"}});
  try {
    run_update(s, f.split, dir / "work", base, f.index, f.claims, quick());
    FAIL();
  } catch (const UpdateFailedError& e) {
    EXPECT_NE(std::string(e.what()).find("status 4"), std::string::npos);
    EXPECT_NE(e.log().find("out of memory"), std::string::npos);
  }
}

TEST(AdapterUpdate, TimesOutWithoutReadyFile) {
  Fixture f;
  testsupport::TempDir dir;
  UpdateMethodSpec s;
  s.kind = UpdateKind::kPreInstTune;
  s.adapter_command = write_script(dir.path(), "slow.sh", "sleep 30\n");
  auto base = endpoints::ScriptedChatModel::from_json({{"tag", "base"}, {"default", "Yes"}});
  auto opts = quick();
  opts.ready_timeout = std::chrono::milliseconds(200);
  auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(run_update(s, f.split, dir / "work", base, f.index, f.claims, opts), UpdateFailedError);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(10));
}

TEST(AdapterUpdate, CheckpointNeedsConfiguredEndpoint) {
  Fixture f;
  testsupport::TempDir dir;
  UpdateMethodSpec s;
  s.kind = UpdateKind::kInstTune;
  s.adapter_command =
      write_script(dir.path(), "ckpt.sh", "printf '{\"checkpoint\":\"/tmp/x\"}' > \"$1/ready.json\"\n");
  auto base = endpoints::ScriptedChatModel::from_json({{"tag", "base"}, {"default", "Yes"}});
  EXPECT_THROW(run_update(s, f.split, dir / "work", base, f.index, f.claims, quick()),
               UpdateFailedError);
}
