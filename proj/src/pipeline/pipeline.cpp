#include "claimshift/pipeline/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <mutex>
#include <sstream>

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/spdlog.h>

#include "claimshift/confidence/confidence.hpp"
#include "claimshift/core/errors.hpp"
#include "claimshift/core/hashing.hpp"
#include "claimshift/core/text.hpp"
#include "claimshift/corpus/corpus.hpp"

namespace claimshift::pipeline {

namespace fs = std::filesystem;

namespace {
constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::kCorpus, "corpus"},       {Stage::kClaims, "claims"},
    {Stage::kPreSnapshot, "snapshot_pre"}, {Stage::kUpdate, "update"},
    {Stage::kPostSnapshot, "snapshot_post"}, {Stage::kEvaluate, "evaluate"},
    {Stage::kAnalyze, "analyze"},     {Stage::kReport, "report"},
};

// Artifact layout, relative to the output directory.
const fs::path kPapers = "corpus/papers.jsonl";
const fs::path kTriplets = "corpus/triplets.jsonl";
const fs::path kCorpusStats = "corpus/stats.json";
const fs::path kClaimsDir = "claims";
const fs::path kClaims = "claims/claims.jsonl";
const fs::path kClaimsMeta = "claims/claims_meta.json";
const fs::path kSplit = "snapshots/split.json";
const fs::path kHandle = "update/handle.json";
const fs::path kMetrics = "report/metrics.jsonl";
const fs::path kAudit = "report/audit.json";
const fs::path kProfiles = "report/domain_profiles.jsonl";
const fs::path kCorrelations = "report/correlations.json";
const fs::path kSummary = "report/summary.md";

fs::path phase_dir(metrics::Phase p) { return fs::path("snapshots") / std::string(metrics::to_string(p)); }
fs::path states_path(metrics::Phase p) { return phase_dir(p) / "states.json"; }
}  // namespace

std::string_view to_string(Stage s) {
  for (const auto& [st, name] : kStageNames)
    if (st == s) return name;
  return "?";
}

Stage parse_stage(std::string_view s) {
  for (const auto& [st, name] : kStageNames)
    if (name == s) return st;
  throw ContractError("unknown stage '" + std::string(s) + "'");
}

const StageRecord* RunManifest::find(Stage s) const {
  for (const auto& r : stages)
    if (r.name == to_string(s)) return &r;
  return nullptr;
}

bool RunManifest::complete() const {
  for (Stage s : kAllStages) {
    auto r = find(s);
    if (!r || r->status != "complete") return false;
  }
  return true;
}

json to_json(const RunManifest& m) {
  json stages = json::array();
  for (const auto& r : m.stages)
    stages.push_back({{"name", r.name},
                      {"status", r.status},
                      {"started", r.started},
                      {"finished", r.finished},
                      {"inputs", r.inputs},
                      {"outputs", r.outputs},
                      {"error", r.error},
                      {"log", r.log}});
  return {{"schema_version", kSchemaVersion}, {"config_hash", m.config_hash}, {"stages", stages}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.config_hash = j.at("config_hash").get<std::string>();
  for (const auto& s : j.at("stages")) {
    StageRecord r;
    r.name = s.at("name").get<std::string>();
    r.status = s.at("status").get<std::string>();
    r.started = s.value("started", "");
    r.finished = s.value("finished", "");
    r.inputs = s.value("inputs", std::map<std::string, std::string>{});
    r.outputs = s.value("outputs", std::map<std::string, std::string>{});
    r.error = s.value("error", "");
    r.log = s.value("log", "");
    m.stages.push_back(std::move(r));
  }
  return m;
}

RunManifest read_manifest(const fs::path& output_dir) {
  return manifest_from_json(read_json(output_dir / "manifest.json"));
}

// --- services --------------------------------------------------------------

corpus::LiteratureClientPtr make_literature_client(const RunConfig& c) {
  corpus::LiteratureClientPtr client;
  const auto& s = c.literature;
  if (s.url.rfind("fixture:", 0) == 0) {
    client = corpus::FixtureLiteratureClient::from_file(c.resolve(s.url.substr(8)));
  } else {
    corpus::SemanticScholarConfig cfg;
    cfg.base_url = s.url;
    if (!s.api_key_env.empty())
      if (const char* key = std::getenv(s.api_key_env.c_str())) cfg.api_key = key;
    if (s.requests_per_second > 0) cfg.budget = std::make_shared<TokenBucket>(s.requests_per_second);
    client = std::make_shared<corpus::SemanticScholarClient>(cfg);
  }
  if (auto cache = c.cache())
    client = std::make_shared<corpus::CachingLiteratureClient>(client, DiskCache(*cache / "literature"));
  return client;
}

std::unique_ptr<analysis::NgramCounter> make_ngram_counter(const RunConfig& c) {
  if (!c.analysis.ngram) return nullptr;
  const auto& s = *c.analysis.ngram;
  if (s.url.rfind("fixture:", 0) == 0) {
    auto doc = read_json(c.resolve(s.url.substr(8)));
    return std::make_unique<analysis::FixtureNgramCounter>(
        doc.at("counts").get<std::map<std::string, std::int64_t>>());
  }
  analysis::InfiniGramConfig cfg;
  cfg.base_url = s.url;
  if (!s.index.empty()) cfg.index = s.index;
  if (s.requests_per_second > 0) cfg.budget = std::make_shared<TokenBucket>(s.requests_per_second);
  return std::make_unique<analysis::InfiniGramClient>(cfg);
}

namespace {

std::string now_iso() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<fs::path> chat_cache(const RunConfig& c) {
  if (auto cache = c.cache()) return *cache / "chat";
  return std::nullopt;
}

struct Context {
  const RunConfig& config;
  std::string hash;
  fs::path out;
  // Carried from the update stage to the post snapshot within one invocation.
  std::optional<updates::UpdateHandle> handle;

  fs::path at(const fs::path& rel) const { return out / rel; }
};

// --- corpus ----------------------------------------------------------------

std::vector<fs::path> run_corpus(Context& ctx) {
  const auto& c = ctx.config;
  auto windows = corpus::window_for(c.cutoff, c.effective_policy());
  auto client = make_literature_client(c);
  std::vector<corpus::PaperRecord> priors;
  std::set<std::string> seen;
  json per_domain = json::object();
  for (const auto& domain : c.domains) {
    auto fetched = corpus::fetch_papers(domain, windows.prior_window, c.papers_per_domain, *client);
    const auto& st = fetched.stats;
    per_domain[domain] = {{"seen", st.seen},
                          {"kept", st.kept},
                          {"no_abstract", st.no_abstract},
                          {"no_citation_info", st.no_citation_info},
                          {"survey_or_review", st.survey_or_review},
                          {"not_journal_or_conference", st.not_journal_or_conference},
                          {"no_date", st.no_date},
                          {"out_of_window", st.out_of_window},
                          {"out_of_domain", st.out_of_domain}};
    for (auto& r : fetched.records)
      if (seen.insert(r.paper_id).second) priors.push_back(std::move(r));
  }
  auto assembled = corpus::assemble_triplets(priors, windows, *client, c.per_prior_cap);
  json skipped = json::array();
  for (const auto& s : assembled.skipped) skipped.push_back({{"paper_id", s.paper_id}, {"reason", s.reason}});
  fs::create_directories(ctx.at("corpus"));
  corpus::write_papers(ctx.at(kPapers), priors, ctx.hash);
  corpus::write_triplets(ctx.at(kTriplets), assembled.triplets, ctx.hash);
  write_json(ctx.at(kCorpusStats),
             stamp({{"windows",
                     {{"cutoff", format_year_month(windows.cutoff)},
                      {"prior", format_range(windows.prior_window)},
                      {"new", format_range(windows.new_window)},
                      {"future", format_range(windows.future_window)}}},
                    {"filter", per_domain},
                    {"triplets", assembled.triplets.size()},
                    {"skipped_priors", skipped}},
                   ctx.hash));
  spdlog::info("corpus: {} priors, {} triplets", priors.size(), assembled.triplets.size());
  return {kPapers, kTriplets, kCorpusStats};
}

// --- claims ----------------------------------------------------------------

std::vector<fs::path> run_claims(Context& ctx) {
  const auto& c = ctx.config;
  auto triplets = corpus::read_triplets(ctx.at(kTriplets), ctx.hash);
  auto generator = endpoints::make_chat_model(c.generator, c.base_dir, chat_cache(c));
  claims::ClaimGenConfig gen;
  gen.filter = c.claim_filter;
  gen.max_attempts = c.claim_attempts;
  gen.max_reject_fraction = c.max_reject_fraction;
  gen.concurrency = c.claim_concurrency;
  auto set = claims::build_claim_set(triplets, *generator, gen);
  fs::create_directories(ctx.at(kClaimsDir));
  claims::write_claim_set(ctx.at(kClaimsDir), set, ctx.hash);
  spdlog::info("claims: {} claims, {} papers rejected", set.claims.size(), set.rejected.size());
  return {kClaims, kClaimsMeta};
}

// --- snapshots -------------------------------------------------------------

struct Job {
  probes::Probe probe;
  std::optional<Label> gold;
  std::string abstract;
  metrics::SnapshotEntry entry;
};

std::vector<corpus::PaperRecord> new_papers(const std::vector<corpus::PaperTriplet>& triplets) {
  std::vector<corpus::PaperRecord> out;
  for (const auto& t : triplets) out.push_back(t.new_paper);
  return out;
}

// Items of every triplet whose new paper is in the evaluated half.
std::vector<Job> build_jobs(const RunConfig& c, const std::vector<corpus::PaperTriplet>& triplets,
                            const claims::ClaimSet& claim_set, const updates::CorpusSplit& split) {
  std::set<std::string> test(split.test_new.begin(), split.test_new.end());
  std::map<std::string, const corpus::PaperRecord*> papers;
  for (const auto& t : triplets) {
    if (!test.count(t.new_paper.paper_id)) continue;
    for (Epoch e : kAllEpochs) papers[t.at(e).paper_id] = &t.at(e);
  }
  std::vector<Job> jobs;
  if (includes(c.task, Task::kJudgment)) {
    for (const auto& cl : claim_set.claims) {
      auto it = papers.find(cl.paper_id);
      if (it == papers.end()) continue;
      Job j;
      std::optional<std::string> title;
      if (cl.epoch != Epoch::kFuture) title = it->second->title;
      j.probe = probes::build_judgment_prompt(cl, title);
      j.gold = cl.gold_label;
      j.entry = {KnowledgeState::kUnknown, cl.epoch, Task::kJudgment, cl.paper_id, cl.domain};
      jobs.push_back(std::move(j));
    }
  }
  if (includes(c.task, Task::kGeneration)) {
    std::map<std::string, std::string> subjects;
    for (const auto& cl : claim_set.claims)
      if (cl.subject) subjects.emplace(cl.paper_id, *cl.subject);
    std::set<std::string> with_claims;
    for (const auto& cl : claim_set.claims) with_claims.insert(cl.paper_id);
    for (const auto& t : triplets) {
      if (!test.count(t.new_paper.paper_id)) continue;
      for (Epoch e : kAllEpochs) {
        const auto& p = t.at(e);
        if (!with_claims.count(p.paper_id)) continue;  // rejected during claim generation
        std::string text = p.title;
        if (e == Epoch::kFuture) {
          auto s = subjects.find(p.paper_id);
          if (s == subjects.end()) continue;
          text = s->second;
        }
        Job j;
        j.probe = probes::build_generation_prompt(e, text, p.paper_id);
        j.abstract = p.abstract;
        j.entry = {KnowledgeState::kUnknown, e, Task::kGeneration, p.paper_id, p.domain};
        jobs.push_back(std::move(j));
      }
    }
  }
  std::sort(jobs.begin(), jobs.end(),
            [](const Job& a, const Job& b) { return a.probe.probe_id < b.probe.probe_id; });
  return jobs;
}

updates::UpdateHandle handle_from_disk(Context& ctx, endpoints::ChatModelPtr base) {
  const auto& c = ctx.config;
  auto doc = read_json(ctx.at(kHandle));
  check_stamps({doc}, ctx.hash, kHandle.string());
  updates::UpdateHandle h;
  h.update_tag = doc.at("update_tag").get<std::string>();
  h.inference_context = doc.at("inference_context").get<bool>();
  h.ready = doc.at("ready");
  if (h.ready.is_null()) {
    h.model = std::move(base);
    return h;
  }
  endpoints::EndpointSpec e = c.update.post_update_endpoint.value_or(c.model);
  if (h.ready.contains("endpoint")) e.url = h.ready.at("endpoint").get<std::string>();
  h.model = endpoints::make_chat_model(e, ctx.at("update/update_bundle"), chat_cache(c));
  return h;
}

std::vector<fs::path> run_snapshot(Context& ctx, metrics::Phase phase) {
  const auto& c = ctx.config;
  auto triplets = corpus::read_triplets(ctx.at(kTriplets), ctx.hash);
  auto claim_set = claims::read_claim_set(ctx.at(kClaimsDir), ctx.hash);
  std::vector<fs::path> outputs;

  updates::CorpusSplit split;
  if (phase == metrics::Phase::kPre) {
    split = updates::split_new(new_papers(triplets), c.split_ratio, c.split_seed);
    fs::create_directories(ctx.at("snapshots"));
    write_json(ctx.at(kSplit), stamp(updates::to_json(split), ctx.hash));
    outputs.push_back(kSplit);
  } else {
    auto doc = read_json(ctx.at(kSplit));
    check_stamps({doc}, ctx.hash, kSplit.string());
    split = updates::split_from_json(doc);
  }

  auto base = endpoints::make_chat_model(c.model, c.base_dir, chat_cache(c));
  endpoints::ChatModelPtr model = base;
  std::string update_tag = "NONE";
  bool with_context = false;
  if (phase == metrics::Phase::kPost) {
    if (!ctx.handle) ctx.handle = handle_from_disk(ctx, base);
    model = ctx.handle->model;
    update_tag = ctx.handle->update_tag;
    with_context = ctx.handle->inference_context;
  }
  auto judge = endpoints::make_chat_model(c.judge, c.base_dir, chat_cache(c));
  auto paraphraser = endpoints::make_chat_model(c.paraphraser_spec(), c.base_dir, chat_cache(c));
  confidence::AssessorConfig acfg;
  acfg.paraphrase_count = c.paraphrase_count;
  confidence::Assessor assessor(model, judge, paraphraser, acfg);

  auto jobs = build_jobs(c, triplets, claim_set, split);
  if (with_context) {
    updates::ClaimIndex index(triplets);
    for (auto& j : jobs)
      j.probe = updates::apply_inference_update(j.probe, split, index, c.infer_context_scope);
  }

  struct Result {
    std::optional<probes::ProbeResponse> response;
    std::optional<confidence::Assessment> assessment;
    std::string failure;
  };
  std::vector<Result> results(jobs.size());
  parallel_for(jobs.size(), c.probe_concurrency, [&](std::size_t i) {
    const auto& job = jobs[i];
    try {
      auto r = probes::run_probe(job.probe, *model);
      results[i].assessment = job.gold ? assessor.assess_judgment(job.probe, r, *job.gold)
                                       : assessor.assess_generation(job.probe, r, job.abstract);
      results[i].response = std::move(r);
    } catch (const ProbeFailedError& e) {
      spdlog::warn("{} excluded: {}", job.probe.probe_id, e.what());
      results[i].failure = e.what();
    }
  });

  std::size_t failed = 0;
  for (const auto& r : results) failed += r.response ? 0 : 1;
  if (!jobs.empty() && failed == jobs.size())
    throw Error("every probe failed in the " + std::string(metrics::to_string(phase)) +
                " snapshot; first error: " + results.front().failure);

  metrics::StateSnapshot snap;
  snap.phase = phase;
  snap.model_tag = model->tag();
  snap.update_tag = update_tag;
  json failed_items = json::array();
  std::vector<json> probe_rows, response_rows, verdict_rows;
  json latency;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& job = jobs[i];
    probe_rows.push_back(stamp(probes::to_json(job.probe), ctx.hash));
    if (!results[i].response) {
      failed_items.push_back({{"item_id", job.probe.item_id()}, {"error", results[i].failure}});
      continue;
    }
    response_rows.push_back(stamp(probes::to_json(*results[i].response), ctx.hash));
    verdict_rows.push_back(stamp(confidence::to_json(*results[i].assessment), ctx.hash));
    auto entry = job.entry;
    entry.state = results[i].assessment->state;
    snap.items.emplace(job.probe.item_id(), entry);
  }
  auto dir = phase_dir(phase);
  fs::create_directories(ctx.at(dir));
  write_jsonl(ctx.at(dir / "probes.jsonl"), probe_rows);
  write_jsonl(ctx.at(dir / "responses.jsonl"), response_rows);
  write_jsonl(ctx.at(dir / "verdicts.jsonl"), verdict_rows);
  json states = metrics::to_json(snap);
  states["failed"] = failed_items;
  write_json(ctx.at(states_path(phase)), stamp(states, ctx.hash));

  // Timing is not reproducible, so it stays out of the digested artifacts.
  fs::create_directories(ctx.at("logs"));
  std::vector<json> lat;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (results[i].response)
      lat.push_back({{"phase", metrics::to_string(phase)},
                     {"probe_id", jobs[i].probe.probe_id},
                     {"latency_ms", results[i].response->latency.count()},
                     {"model_tag", results[i].response->model_tag}});
  write_jsonl(ctx.at("logs/latency_" + std::string(metrics::to_string(phase)) + ".jsonl"), lat);

  spdlog::info("{} snapshot: {} items, {} failed", metrics::to_string(phase), snap.items.size(), failed);
  for (const char* f : {"probes.jsonl", "responses.jsonl", "verdicts.jsonl", "states.json"})
    outputs.push_back(dir / f);
  return outputs;
}

// --- update ----------------------------------------------------------------

std::string absolute_adapter(const RunConfig& c, const std::string& cmd) {
  auto t = text::trim(cmd);
  auto space = t.find_first_of(" \t");
  std::string program = t.substr(0, space);
  if (program.find('/') == std::string::npos || fs::path(program).is_absolute()) return t;
  std::string rest = space == std::string::npos ? "" : t.substr(space);
  return c.resolve(program).string() + rest;
}

std::vector<fs::path> run_update_stage(Context& ctx) {
  const auto& c = ctx.config;
  auto triplets = corpus::read_triplets(ctx.at(kTriplets), ctx.hash);
  auto claim_set = claims::read_claim_set(ctx.at(kClaimsDir), ctx.hash);
  auto split_doc = read_json(ctx.at(kSplit));
  check_stamps({split_doc}, ctx.hash, kSplit.string());
  auto split = updates::split_from_json(split_doc);

  auto spec = c.update;
  if (spec.adapter_command) spec.adapter_command = absolute_adapter(c, *spec.adapter_command);
  updates::UpdateOptions opts;
  opts.ready_timeout = std::chrono::seconds(c.ready_timeout_seconds);
  opts.base_endpoint = c.model;
  auto base = endpoints::make_chat_model(c.model, c.base_dir, chat_cache(c));
  updates::ClaimIndex index(triplets);
  ctx.handle = updates::run_update(spec, split, ctx.at("update"), base, index, claim_set, opts);

  std::vector<fs::path> outputs = {kHandle};
  fs::create_directories(ctx.at("update"));
  write_json(ctx.at(kHandle),
             stamp({{"update_tag", ctx.handle->update_tag},
                    {"inference_context", ctx.handle->inference_context},
                    {"infer_context_scope", updates::to_string(c.infer_context_scope)},
                    {"ready", updates::needs_adapter(spec.kind) ? ctx.handle->ready : json(nullptr)}},
                   ctx.hash));
  if (updates::needs_adapter(spec.kind))
    for (const char* f : {"abstracts_test.jsonl", "abstracts_train.jsonl", "qa_train.jsonl", "spec.json"})
      outputs.push_back(fs::path("update/update_bundle") / f);
  return outputs;
}

// --- evaluate --------------------------------------------------------------

std::pair<metrics::StateSnapshot, std::set<std::string>> load_states(Context& ctx, metrics::Phase p) {
  auto doc = read_json(ctx.at(states_path(p)));
  check_stamps({doc}, ctx.hash, states_path(p).string());
  std::set<std::string> failed;
  for (const auto& f : doc.value("failed", json::array())) failed.insert(f.at("item_id").get<std::string>());
  return {metrics::snapshot_from_json(doc), failed};
}

std::vector<fs::path> run_evaluate(Context& ctx) {
  auto [pre, pre_failed] = load_states(ctx, metrics::Phase::kPre);
  auto [post, post_failed] = load_states(ctx, metrics::Phase::kPost);
  auto split_doc = read_json(ctx.at(kSplit));
  check_stamps({split_doc}, ctx.hash, kSplit.string());
  auto split = updates::split_from_json(split_doc);

  std::set<std::string> dropped = pre_failed;
  dropped.insert(post_failed.begin(), post_failed.end());
  for (const auto& id : dropped) {
    pre.items.erase(id);
    post.items.erase(id);
  }
  metrics::ReportOptions opts;
  opts.forbidden_papers.insert(split.train_new.begin(), split.train_new.end());
  auto reports = metrics::compute_reports(pre, post, opts);

  fs::create_directories(ctx.at("report"));
  std::vector<json> rows;
  for (const auto& r : reports) rows.push_back(stamp(metrics::to_json(r), ctx.hash));
  write_jsonl(ctx.at(kMetrics), rows);
  write_json(ctx.at(kAudit), stamp({{"items_evaluated", pre.items.size()},
                                    {"excluded_failed_probes", std::vector<std::string>(dropped.begin(), dropped.end())},
                                    {"training_papers_withheld", split.train_new},
                                    {"evaluated_new_papers", split.test_new}},
                                   ctx.hash));
  return {kMetrics, kAudit};
}

std::vector<metrics::MetricReport> load_metrics(Context& ctx) {
  auto rows = read_jsonl(ctx.at(kMetrics));
  check_stamps(rows, ctx.hash, kMetrics.string());
  std::vector<metrics::MetricReport> out;
  for (const auto& r : rows) out.push_back(metrics::report_from_json(r));
  return out;
}

// --- analyze ---------------------------------------------------------------

std::vector<fs::path> run_analyze(Context& ctx) {
  const auto& c = ctx.config;
  std::vector<json> profile_rows;
  json corr = json::array();
  if (c.analysis.enabled) {
    auto papers = corpus::read_papers(ctx.at(kPapers), ctx.hash);
    std::map<std::string, std::vector<corpus::PaperRecord>> by_domain;
    for (auto& p : papers) by_domain[p.domain].push_back(std::move(p));
    auto tokenizer = analysis::make_tokenizer(c.analysis.tokenizer);
    auto counter = make_ngram_counter(c);
    std::vector<analysis::DomainProfile> profiles;
    for (const auto& [domain, list] : by_domain) {
      profiles.push_back(analysis::profile_domain(domain, list, *tokenizer, counter.get(),
                                                  c.analysis.rare_tokens));
      profile_rows.push_back(stamp(analysis::to_json(profiles.back()), ctx.hash));
    }
    for (const auto& x : analysis::correlate(profiles, load_metrics(ctx), c.analysis.correlation_task))
      corr.push_back(analysis::to_json(x));
  }
  fs::create_directories(ctx.at("report"));
  write_jsonl(ctx.at(kProfiles), profile_rows);
  write_json(ctx.at(kCorrelations),
             stamp({{"task", to_string(c.analysis.correlation_task)},
                    {"update_method", updates::to_string(c.update.kind)},
                    {"correlations", corr}},
                   ctx.hash));
  return {kProfiles, kCorrelations};
}

// --- report ----------------------------------------------------------------

std::string fmt_double(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(3);
  s << v;
  return s.str();
}

std::vector<fs::path> run_report(Context& ctx) {
  const auto& c = ctx.config;
  auto reports = load_metrics(ctx);
  auto profile_rows = read_jsonl(ctx.at(kProfiles));
  auto corr_doc = read_json(ctx.at(kCorrelations));
  check_stamps(profile_rows, ctx.hash, kProfiles.string());
  check_stamps({corr_doc}, ctx.hash, kCorrelations.string());
  auto split = updates::split_from_json(read_json(ctx.at(kSplit)));
  auto windows = corpus::window_for(c.cutoff, c.effective_policy());

  json notes = {{"run", c.run_name},
                {"model", c.model.model.empty() ? c.model.url : c.model.model},
                {"update_method", updates::to_string(c.update.kind)},
                {"infer_context_scope", updates::to_string(c.infer_context_scope)},
                {"cutoff", format_year_month(c.cutoff)},
                {"windows", "prior " + format_range(windows.prior_window) + ", new " +
                                format_range(windows.new_window) + ", future " +
                                format_range(windows.future_window)},
                {"split", "ratio " + fmt_double(split.ratio) + ", seed " + std::to_string(split.seed) +
                              ", " + std::to_string(split.train_new.size()) + " train / " +
                              std::to_string(split.test_new.size()) + " evaluated new papers"}};

  std::ostringstream md;
  if (!profile_rows.empty()) {
    md << "## Domain factors\n\n| Domain | Papers | Avg citations | Avg rare-token occurrence |\n"
       << "|---|---|---|---|\n";
    std::ostringstream csv;
    csv << "domain,papers,avg_citation_count,avg_token_occurrence\n";
    for (const auto& row : profile_rows) {
      auto p = analysis::profile_from_json(row);
      std::string occ = p.avg_token_occurrence ? fmt_double(*p.avg_token_occurrence) : "undefined";
      md << "| " << p.domain << " | " << p.paper_count << " | " << fmt_double(p.avg_citation_count)
         << " | " << occ << " |\n";
      csv << p.domain << "," << p.paper_count << "," << fmt_double(p.avg_citation_count) << ","
          << occ << "\n";
    }
    fs::create_directories(ctx.at("report/plotdata"));
    write_text_atomic(ctx.at("report/plotdata/domain_factors.csv"), csv.str());
    md << "\nCorrelations use " << corr_doc.at("task").get<std::string>() << " metrics under "
       << corr_doc.at("update_method").get<std::string>() << ".\n\n"
       << "| Factor | Metric | r | n |\n|---|---|---|---|\n";
    for (const auto& x : corr_doc.at("correlations")) {
      const auto& r = x.at("r");
      md << "| " << x.at("factor").get<std::string>() << " | " << x.at("metric").get<std::string>()
         << " | " << (r.is_number() ? fmt_double(r.get<double>()) : "undefined") << " | "
         << x.at("n").get<std::size_t>() << " |\n";
    }
    md << "\n";
  }
  metrics::write_report_bundle(ctx.at("report"), reports, ctx.hash, notes, md.str());

  std::vector<fs::path> outputs = {kSummary};
  for (const auto& entry : fs::directory_iterator(ctx.at("report/plotdata")))
    outputs.push_back(fs::relative(entry.path(), ctx.out));
  std::sort(outputs.begin(), outputs.end());
  return outputs;
}

// --- orchestration ---------------------------------------------------------

std::vector<fs::path> stage_inputs(Stage s) {
  switch (s) {
    case Stage::kCorpus: return {};
    case Stage::kClaims: return {kTriplets};
    case Stage::kPreSnapshot: return {kTriplets, kClaims, kClaimsMeta};
    case Stage::kUpdate: return {kTriplets, kClaims, kClaimsMeta, kSplit};
    case Stage::kPostSnapshot: return {kTriplets, kClaims, kClaimsMeta, kSplit, kHandle};
    case Stage::kEvaluate: return {states_path(metrics::Phase::kPre), states_path(metrics::Phase::kPost), kSplit};
    case Stage::kAnalyze: return {kPapers, kMetrics};
    case Stage::kReport: return {kMetrics, kProfiles, kCorrelations, kSplit};
  }
  return {};
}

std::vector<fs::path> run_stage(Stage s, Context& ctx) {
  switch (s) {
    case Stage::kCorpus: return run_corpus(ctx);
    case Stage::kClaims: return run_claims(ctx);
    case Stage::kPreSnapshot: return run_snapshot(ctx, metrics::Phase::kPre);
    case Stage::kUpdate: return run_update_stage(ctx);
    case Stage::kPostSnapshot: return run_snapshot(ctx, metrics::Phase::kPost);
    case Stage::kEvaluate: return run_evaluate(ctx);
    case Stage::kAnalyze: return run_analyze(ctx);
    case Stage::kReport: return run_report(ctx);
  }
  return {};
}

std::map<std::string, std::string> digests(const fs::path& out, const std::vector<fs::path>& rels) {
  std::map<std::string, std::string> d;
  for (const auto& r : rels) {
    auto p = out / r;
    d[r.string()] = fs::exists(p) ? sha256_file(p) : "missing";
  }
  return d;
}

bool still_valid(const StageRecord* rec, const RunManifest& m, const std::string& hash,
                 const fs::path& out) {
  if (!rec || rec->status != "complete" || m.config_hash != hash) return false;
  for (const auto& [path, digest] : rec->inputs)
    if (!fs::exists(out / path) || sha256_file(out / path) != digest) return false;
  for (const auto& [path, digest] : rec->outputs)
    if (!fs::exists(out / path) || sha256_file(out / path) != digest) return false;
  return true;
}

void upsert(RunManifest& m, StageRecord rec) {
  for (auto& r : m.stages)
    if (r.name == rec.name) {
      r = std::move(rec);
      return;
    }
  m.stages.push_back(std::move(rec));
  std::sort(m.stages.begin(), m.stages.end(), [](const StageRecord& a, const StageRecord& b) {
    return parse_stage(a.name) < parse_stage(b.name);
  });
}

void save(const RunManifest& m, const fs::path& out) { write_json(out / "manifest.json", to_json(m)); }

// Adds a per-run log file to the default logger for the lifetime of a run.
class RunLog {
 public:
  explicit RunLog(const fs::path& path) {
    fs::create_directories(path.parent_path());
    sink_ = std::make_shared<spdlog::sinks::basic_file_sink_mt>(path.string(), false);
    spdlog::default_logger()->sinks().push_back(sink_);
  }
  ~RunLog() {
    auto& sinks = spdlog::default_logger()->sinks();
    sinks.erase(std::remove(sinks.begin(), sinks.end(), sink_), sinks.end());
  }

 private:
  spdlog::sink_ptr sink_;
};

}  // namespace

RunManifest run_pipeline(const RunConfig& config, const RunOptions& options) {
  auto diags = validate_config(config);
  if (!diags.empty()) {
    std::string msg = "invalid run config:";
    for (const auto& d : diags) msg += "\n  " + d.field + ": " + d.message;
    throw ContractError(msg);
  }
  Context ctx{config, config_hash(config), config.out(), std::nullopt};
  RunManifest manifest;
  if (fs::exists(ctx.out / "manifest.json")) manifest = read_manifest(ctx.out);
  bool same_run = manifest.config_hash == ctx.hash;
  if (!same_run) manifest = RunManifest{};
  RunManifest before = manifest;
  manifest.config_hash = ctx.hash;

  std::vector<Stage> stages;
  if (options.only) {
    stages = *options.only;
  } else {
    stages.assign(std::begin(kAllStages), std::end(kAllStages));
  }

  if (options.dry_run) {
    RunManifest plan;
    plan.config_hash = ctx.hash;
    for (Stage s : stages) {
      StageRecord r;
      r.name = std::string(to_string(s));
      bool valid = options.resume && still_valid(before.find(s), before, ctx.hash, ctx.out);
      r.status = valid ? "skipped" : "planned";
      plan.stages.push_back(r);
    }
    return plan;
  }

  fs::create_directories(ctx.out);
  RunLog log(ctx.out / "logs" / "run.log");
  for (Stage s : stages) {
    if (options.resume && still_valid(manifest.find(s), manifest, ctx.hash, ctx.out)) {
      spdlog::info("stage {} unchanged; skipped", to_string(s));
      continue;
    }
    if (options.only) {
      for (const auto& in : stage_inputs(s))
        if (!fs::exists(ctx.at(in)))
          throw StageFailedError(s, "stage " + std::string(to_string(s)) + " needs " + in.string() +
                                        "; run the earlier stages first");
    }
    StageRecord rec;
    rec.name = std::string(to_string(s));
    rec.started = now_iso();
    rec.log = "logs/run.log";
    rec.inputs = digests(ctx.out, stage_inputs(s));
    spdlog::info("stage {} started", to_string(s));
    try {
      auto outputs = run_stage(s, ctx);
      rec.outputs = digests(ctx.out, outputs);
      rec.status = "complete";
      rec.finished = now_iso();
      upsert(manifest, rec);
      save(manifest, ctx.out);
    } catch (const std::exception& e) {
      rec.status = "failed";
      rec.error = e.what();
      rec.finished = now_iso();
      upsert(manifest, rec);
      save(manifest, ctx.out);
      spdlog::error("stage {} failed: {}", to_string(s), e.what());
      throw StageFailedError(s, "stage " + std::string(to_string(s)) + " failed: " + e.what());
    }
  }
  save(manifest, ctx.out);
  return manifest;
}

}  // namespace claimshift::pipeline
