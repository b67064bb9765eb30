// Prints one PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "claimshift/analysis/analysis.hpp"
#include "claimshift/confidence/confidence.hpp"
#include "claimshift/core/errors.hpp"
#include "claimshift/core/text.hpp"
#include "claimshift/corpus/windows.hpp"
#include "claimshift/metrics/metrics.hpp"
#include "claimshift/pipeline/pipeline.hpp"
#include "test_support.hpp"

using namespace claimshift;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using S = KnowledgeState;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct RandomPair {
  metrics::StateSnapshot pre, post;
};

RandomPair random_pair(std::mt19937_64& rng) {
  RandomPair p;
  p.pre.phase = metrics::Phase::kPre;
  p.post.phase = metrics::Phase::kPost;
  p.pre.model_tag = p.post.model_tag = "m";
  std::size_t n = 1 + rng() % 100;
  for (std::size_t i = 0; i < n; ++i) {
    metrics::SnapshotEntry e{kAllStates[rng() % 3], kAllEpochs[rng() % 3],
                             rng() % 2 ? Task::kJudgment : Task::kGeneration, "p" + std::to_string(i),
                             rng() % 2 ? "Biology" : "Medicine"};
    auto id = "c" + std::to_string(i);
    p.pre.items[id] = e;
    e.state = kAllStates[rng() % 3];
    p.post.items[id] = e;
  }
  return p;
}

// Per-claim enumeration: walk every item and count it into the one bucket it
// belongs to, keyed by (task, domain-or-all, metric, post state).
using Buckets = std::map<std::string, std::int64_t>;
Buckets enumerate(const RandomPair& p) {
  Buckets b;
  for (const auto& [id, pre] : p.pre.items) {
    const char* metric = nullptr;
    if (pre.epoch == Epoch::kPrior && pre.state == S::kCorrect) metric = "pres";
    if (pre.epoch == Epoch::kNew && pre.state == S::kUnknown) metric = "acq";
    if (pre.epoch == Epoch::kFuture && pre.state == S::kUnknown) metric = "proj";
    if (!metric) continue;
    auto post = std::string(to_string(p.post.items.at(id).state));
    auto task = std::string(to_string(pre.task));
    b[task + "|all|" + metric + "|" + post]++;
    b[task + "|" + pre.domain + "|" + metric + "|" + post]++;
  }
  return b;
}

Buckets from_reports(const std::vector<metrics::MetricReport>& reps) {
  Buckets b;
  const char* states[] = {"correct", "incorrect", "unknown"};
  for (const auto& r : reps) {
    auto key = std::string(to_string(r.task)) + "|" + r.domain + "|";
    for (int i = 0; i < 3; ++i) {
      if (r.prior_from_correct[i]) b[key + "pres|" + states[i]] = r.prior_from_correct[i];
      if (r.new_from_unknown[i]) b[key + "acq|" + states[i]] = r.new_from_unknown[i];
      if (r.future_from_unknown[i]) b[key + "proj|" + states[i]] = r.future_from_unknown[i];
    }
  }
  return b;
}

Outcome metric_oracle() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  auto start = Clock::now();
  for (int i = 0; i < 1000 && o.ok; ++i) {
    auto p = random_pair(rng);
    auto reps = metrics::compute_reports(p.pre, p.post);
    o.require(from_reports(reps) == enumerate(p), "pair " + std::to_string(i) + " differs from oracle");
    // fractions must be recomputed from exactly those counts
    for (const auto& r : reps) {
      auto t = r.preservation();
      std::int64_t den = r.prior_from_correct[0] + r.prior_from_correct[1] + r.prior_from_correct[2];
      o.require(t.kept == (metrics::Fraction{r.prior_from_correct[0], den}), "preservation fraction");
    }
  }
  double secs = seconds_since(start);
  o.require(secs < 5.0, "took " + std::to_string(secs) + " s");
  if (o.ok) o.detail = "1000 pairs, " + std::to_string(secs).substr(0, 5) + " s";
  return o;
}

Outcome sum_to_one() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::size_t triples = 0;
  for (int i = 0; i < 1000 && o.ok; ++i) {
    auto p = random_pair(rng);
    for (const auto& r : metrics::compute_reports(p.pre, p.post))
      for (const auto& m : {r.preservation(), r.acquisition(), r.projection()}) {
        if (m.denominator == 0) continue;
        // common denominator, so integer numerators must add up to it
        o.require(m.kept.den == m.denominator && m.distortion.den == m.denominator &&
                      m.loss.den == m.denominator,
                  "denominators differ");
        o.require(m.kept.num + m.distortion.num + m.loss.num == m.denominator, "triple does not sum to 1");
        ++triples;
      }
  }
  if (o.ok) o.detail = std::to_string(triples) + " triples";
  return o;
}

Outcome published_rows() {
  Outcome o;
  std::istringstream in(read_text(testsupport::data_dir() / "published_update_rows.md"));
  int rows = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("| ", 0) != 0) continue;
    auto problems = metrics::check_percent_row(metrics::parse_summary_row(line), 0.15);
    o.require(problems.empty(), problems.empty() ? "" : problems.front());
    ++rows;
  }
  o.require(rows == 20, "expected 20 rows, read " + std::to_string(rows));
  auto spot = metrics::parse_summary_row("| spot | 86.3 | 4.1 | 9.6 | 38.9 | 28.3 | 32.8 | 24.1 | 41.3 |");
  o.require(std::abs(spot.preservation[0] + spot.preservation[1] + spot.preservation[2] - 100.0) < 1e-9,
            "86.3 + 4.1 + 9.6 != 100.0");
  if (o.ok) o.detail = std::to_string(rows) + " rows within 0.15";
  return o;
}

pipeline::RunConfig e2e_config(const char* name, const fs::path& out) {
  auto c = pipeline::load_config(testsupport::e2e_dir() / name);
  c.output_dir = out;
  return c;
}

Outcome end_to_end() {
  Outcome o;
  auto start = Clock::now();
  for (const char* kind : {"none", "infer"}) {
    testsupport::TempDir dir;
    auto c = e2e_config(("config_" + std::string(kind) + ".json").c_str(), dir.path());
    pipeline::run_pipeline(c);
    auto want = read_text(testsupport::e2e_dir() / ("expected_" + std::string(kind) + "_metrics.jsonl"));
    want = text::replace_all(want, "@CONFIG_HASH@", pipeline::config_hash(c));
    o.require(read_text(dir / "report/metrics.jsonl") == want, std::string(kind) + " report differs");
  }
  double secs = seconds_since(start);
  o.require(secs < 30.0, "took " + std::to_string(secs) + " s");
  if (o.ok) o.detail = "NONE and INFER byte-identical, " + std::to_string(secs).substr(0, 4) + " s";
  return o;
}

Outcome state_table() {
  Outcome o;
  using confidence::classify_state;
  o.require(classify_state(true, true) == S::kCorrect, "(T,T)");
  o.require(classify_state(false, true) == S::kIncorrect, "(F,T)");
  o.require(classify_state(true, false) == S::kUnknown, "(T,F)");
  o.require(classify_state(false, false) == S::kUnknown, "(F,F)");
  o.require(classify_state(std::nullopt, false) == S::kUnknown, "(n/a,F)");
  bool threw = false;
  try {
    classify_state(std::nullopt, true);
  } catch (const ContractError&) {
    threw = true;
  }
  o.require(threw, "(n/a,T) accepted");
  if (o.ok) o.detail = "5 legal cases, illegal case rejected";
  return o;
}

Outcome windows() {
  Outcome o;
  auto d = [](const char* s) { return parse_date_or_throw(s); };
  auto dec = corpus::window_for({std::chrono::year(2023), std::chrono::month(12)});
  o.require(dec.prior_window == DateRange{d("2022-10-01"), d("2023-09-30")}, "Dec prior");
  o.require(dec.new_window == DateRange{d("2024-03-01"), d("2024-11-30")}, "Dec new");
  o.require(dec.future_window == DateRange{d("2024-12-01"), d("2025-02-01")}, "Dec future");
  auto oct = corpus::window_for({std::chrono::year(2023), std::chrono::month(10)});
  o.require(oct.prior_window == DateRange{d("2022-08-01"), d("2023-07-31")}, "Oct prior");
  o.require(oct.new_window == DateRange{d("2024-01-01"), d("2024-11-30")}, "Oct new");
  o.require(oct.future_window == DateRange{d("2024-12-01"), d("2025-03-01")}, "Oct future");

  std::mt19937 rng(5);
  int rejected = 0;
  for (int i = 0; i < 500; ++i) {
    YearMonth cutoff{std::chrono::year(2019 + static_cast<int>(rng() % 8)),
                     std::chrono::month(1 + rng() % 12)};
    auto p = corpus::WindowPolicy::standard(cutoff);
    int bad = static_cast<int>(rng() % corpus::kMinBufferMonths);
    if (rng() % 2) p.buffer_before_months = bad;
    else p.buffer_after_months = bad;
    p.prior_span_months = 1 + static_cast<int>(rng() % 24);
    try {
      corpus::window_for(cutoff, p);
    } catch (const ContractError&) {
      ++rejected;
    }
  }
  o.require(rejected == 500, std::to_string(500 - rejected) + " short-buffer policies accepted");
  if (o.ok) o.detail = "both calendar rows exact, 500/500 short buffers rejected";
  return o;
}

Outcome analysis_checks() {
  Outcome o;
  o.require(analysis::pearson({1, 2, 3}, {2, 4, 6}) == 1.0, "+1");
  o.require(analysis::pearson({1, 2, 3}, {6, 4, 2}) == -1.0, "-1");
  std::mt19937 rng(9);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 100 && o.ok; ++i) {
    std::size_t n = 5 + rng() % 50;
    std::vector<double> x(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = nd(rng);
      y[k] = 0.3 * x[k] + nd(rng);
    }
    // brute force: covariance over standard deviations, all pairwise sums
    long double mx = 0, my = 0;
    for (std::size_t k = 0; k < n; ++k) mx += x[k], my += y[k];
    mx /= n;
    my /= n;
    long double cov = 0, vx = 0, vy = 0;
    for (std::size_t k = 0; k < n; ++k) {
      cov += (x[k] - mx) * (y[k] - my);
      vx += (x[k] - mx) * (x[k] - mx);
      vy += (y[k] - my) * (y[k] - my);
    }
    double want = static_cast<double>(cov / std::sqrt(vx * vy));
    o.require(std::abs(*analysis::pearson(x, y) - want) < 1e-12, "random vector " + std::to_string(i));
  }

  std::vector<std::string> abstracts = {
      "Sparse attention reduces memory. sparse attention scales.",
      "Graph attention forecasts traffic with memory.",
      "The graph model forecasts traffic 42 times faster.",
  };
  std::vector<std::pair<std::string, std::int64_t>> table = {
      {"Graph", 1}, {"Sparse", 1}, {"faster", 1}, {"graph", 1}, {"model", 1}, {"reduces", 1},
      {"scales", 1}, {"sparse", 1}, {"times", 1}, {"forecasts", 2}, {"memory", 2}, {"traffic", 2},
      {"attention", 3}};
  auto rare = analysis::rare_tokens(abstracts, analysis::WhitespaceTokenizer(), 13);
  o.require(rare.tokens == table && !rare.short_list, "rare token table");

  // 1000 sampled papers whose citations total 7192
  std::vector<corpus::PaperRecord> sample;
  std::mt19937 crng(3);
  std::int64_t left = 7192;
  for (int i = 0; i < 1000; ++i) {
    corpus::PaperRecord p;
    p.paper_id = "m" + std::to_string(i);
    p.citation_count = i == 999 ? left : std::min<std::int64_t>(left, crng() % 15);
    left -= p.citation_count;
    sample.push_back(p);
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", analysis::avg_citation_count(sample));
  o.require(left == 0 && std::string(buf) == "7.192", std::string("Materials Science average ") + buf);
  if (o.ok) o.detail = "pearson exact on 100 vectors, rare table matches, avg 7.192";
  return o;
}

Outcome denominator_hygiene() {
  Outcome o;
  testsupport::TempDir dir;
  auto c = e2e_config("config_none.json", dir.path());
  pipeline::run_pipeline(c);
  auto split = read_json(dir / "snapshots/split.json");
  std::set<std::string> train;
  for (const auto& id : split.at("train_new")) train.insert(id.get<std::string>());
  for (const char* phase : {"pre", "post"}) {
    auto states = read_json(dir / "snapshots" / phase / "states.json");
    for (const auto& it : states.at("items"))
      o.require(!train.count(it.at("paper_id").get<std::string>()), "training paper in snapshot");
  }
  // plant a probe of a training paper and re-evaluate
  const auto& planted_paper = *train.begin();
  for (const char* phase : {"pre", "post"}) {
    auto path = dir / "snapshots" / phase / "states.json";
    auto states = read_json(path);
    states["items"].push_back({{"domain", "Computer Science"}, {"epoch", "new"},
                               {"item_id", planted_paper + ":support"}, {"paper_id", planted_paper},
                               {"state", "unknown"}, {"task", "judgment"}});
    write_json(path, states);
  }
  pipeline::RunOptions only;
  only.only = std::vector<pipeline::Stage>{pipeline::Stage::kEvaluate};
  bool rejected = false;
  try {
    pipeline::run_pipeline(c, only);
  } catch (const pipeline::StageFailedError& e) {
    rejected = e.stage() == pipeline::Stage::kEvaluate;
  }
  o.require(rejected, "planted training probe was evaluated");
  if (o.ok) o.detail = "planted " + planted_paper + " probe rejected";
  return o;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::off);
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"metric oracle equivalence", metric_oracle},
      {"sum-to-one", sum_to_one},
      {"published update rows sum to 100", published_rows},
      {"end-to-end deterministic run", end_to_end},
      {"state classification table", state_table},
      {"window invariants", windows},
      {"analysis checks", analysis_checks},
      {"denominator hygiene", denominator_hygiene},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("threw: ") + e.what();
    }
    std::cout << (o.ok ? "PASS" : "FAIL") << "  " << name << "  (" << o.detail << ")\n";
    failed += !o.ok;
  }
  return failed ? 1 : 0;
}
