#include "claimshift/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "claimshift/core/errors.hpp"
#include "claimshift/core/text.hpp"

namespace claimshift::metrics {

std::string_view to_string(Phase p) { return p == Phase::kPre ? "pre" : "post"; }

Phase parse_phase(std::string_view s) {
  if (s == "pre") return Phase::kPre;
  if (s == "post") return Phase::kPost;
  throw ContractError("unknown phase '" + std::string(s) + "'");
}

std::string Fraction::render(int decimals) const {
  if (!defined()) return "undefined";
  __int128 scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  __int128 scaled = (static_cast<__int128>(num) * scale * 2 + den) / (2 * static_cast<__int128>(den));
  auto whole = static_cast<long long>(scaled / scale);
  auto frac = static_cast<long long>(scaled % scale);
  std::string f = std::to_string(frac);
  if (decimals == 0) return std::to_string(whole);
  return std::to_string(whole) + "." + std::string(decimals - f.size(), '0') + f;
}

double Fraction::value() const {
  return defined() ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

std::int64_t TransitionTable::row_total(KnowledgeState pre) const {
  const auto& row = counts[index_of(pre)];
  return row[0] + row[1] + row[2];
}

std::int64_t TransitionTable::at(KnowledgeState pre, KnowledgeState post) const {
  return counts[index_of(pre)][index_of(post)];
}

namespace {

void check_universe(const StateSnapshot& pre, const StateSnapshot& post) {
  if (pre.phase != Phase::kPre || post.phase != Phase::kPost)
    throw ContractError("transition needs a pre snapshot followed by a post snapshot");
  std::vector<std::string> only_pre, only_post;
  for (const auto& [id, e] : pre.items)
    if (!post.items.count(id)) only_pre.push_back(id);
  for (const auto& [id, e] : post.items)
    if (!pre.items.count(id)) only_post.push_back(id);
  for (const auto& [id, e] : pre.items) {
    auto it = post.items.find(id);
    if (it == post.items.end()) continue;
    if (it->second.epoch != e.epoch || it->second.task != e.task ||
        it->second.paper_id != e.paper_id)
      throw ContractError("item " + id + " changed epoch, task or paper between snapshots");
  }
  if (only_pre.empty() && only_post.empty()) return;
  std::string msg = "snapshots cover different items; only in pre: [";
  for (std::size_t i = 0; i < only_pre.size(); ++i) msg += (i ? ", " : "") + only_pre[i];
  msg += "]; only in post: [";
  for (std::size_t i = 0; i < only_post.size(); ++i) msg += (i ? ", " : "") + only_post[i];
  throw ContractError(msg + "]");
}

MetricTriple triple_from_row(const std::array<std::int64_t, 3>& row) {
  std::int64_t den = row[0] + row[1] + row[2];
  MetricTriple m;
  m.denominator = den;
  m.kept = {row[index_of(KnowledgeState::kCorrect)], den};
  m.distortion = {row[index_of(KnowledgeState::kIncorrect)], den};
  m.loss = {row[index_of(KnowledgeState::kUnknown)], den};
  return m;
}

void check_epoch(const TransitionTable& t, Epoch want, const char* metric) {
  if (t.epoch != want)
    throw ContractError(std::string(metric) + " needs a " + std::string(to_string(want)) +
                        " transition table");
}

}  // namespace

TransitionTable build_transition(const StateSnapshot& pre, const StateSnapshot& post, Epoch epoch) {
  check_universe(pre, post);
  TransitionTable t;
  t.epoch = epoch;
  for (const auto& [id, e] : pre.items) {
    if (e.epoch != epoch) continue;
    auto a = index_of(e.state);
    auto b = index_of(post.items.at(id).state);
    ++t.counts[a][b];
    t.items[a][b].push_back(id);
  }
  return t;
}

MetricTriple preservation(const TransitionTable& t) {
  check_epoch(t, Epoch::kPrior, "preservation");
  return triple_from_row(t.counts[index_of(KnowledgeState::kCorrect)]);
}

MetricTriple acquisition(const TransitionTable& t) {
  check_epoch(t, Epoch::kNew, "acquisition");
  return triple_from_row(t.counts[index_of(KnowledgeState::kUnknown)]);
}

MetricTriple projection(const TransitionTable& t) {
  check_epoch(t, Epoch::kFuture, "projection");
  return triple_from_row(t.counts[index_of(KnowledgeState::kUnknown)]);
}

MetricTriple MetricReport::preservation() const { return triple_from_row(prior_from_correct); }
MetricTriple MetricReport::acquisition() const { return triple_from_row(new_from_unknown); }
MetricTriple MetricReport::projection() const { return triple_from_row(future_from_unknown); }

MetricReport make_report(const TransitionTable& prior, const TransitionTable& next,
                         const TransitionTable& future, Task task, std::string domain,
                         std::string model_tag, std::string update_tag) {
  check_epoch(prior, Epoch::kPrior, "report");
  check_epoch(next, Epoch::kNew, "report");
  check_epoch(future, Epoch::kFuture, "report");
  MetricReport r;
  r.task = task;
  r.domain = std::move(domain);
  r.model_tag = std::move(model_tag);
  r.update_tag = std::move(update_tag);
  r.prior_from_correct = prior.counts[index_of(KnowledgeState::kCorrect)];
  r.new_from_unknown = next.counts[index_of(KnowledgeState::kUnknown)];
  r.future_from_unknown = future.counts[index_of(KnowledgeState::kUnknown)];
  auto excl = [&](const TransitionTable& t, KnowledgeState s) {
    r.excluded[std::string(to_string(t.epoch)) + "_pre_" + std::string(to_string(s))] =
        t.row_total(s);
  };
  excl(prior, KnowledgeState::kIncorrect);
  excl(prior, KnowledgeState::kUnknown);
  excl(next, KnowledgeState::kCorrect);
  excl(next, KnowledgeState::kIncorrect);
  excl(future, KnowledgeState::kCorrect);
  excl(future, KnowledgeState::kIncorrect);
  return r;
}

namespace {

StateSnapshot subset(const StateSnapshot& s, Task task, const std::string* domain) {
  StateSnapshot out;
  out.phase = s.phase;
  out.model_tag = s.model_tag;
  out.update_tag = s.update_tag;
  for (const auto& [id, e] : s.items)
    if (e.task == task && (!domain || e.domain == *domain)) out.items.emplace(id, e);
  return out;
}

MetricReport report_for(const StateSnapshot& pre, const StateSnapshot& post, Task task,
                        const std::string& domain) {
  return make_report(build_transition(pre, post, Epoch::kPrior),
                     build_transition(pre, post, Epoch::kNew),
                     build_transition(pre, post, Epoch::kFuture), task, domain, post.model_tag,
                     post.update_tag);
}

}  // namespace

std::vector<MetricReport> compute_reports(const StateSnapshot& pre, const StateSnapshot& post,
                                          const ReportOptions& options) {
  check_universe(pre, post);
  std::vector<std::string> planted;
  for (const auto& [id, e] : pre.items)
    if (options.forbidden_papers.count(e.paper_id)) planted.push_back(id);
  if (!planted.empty()) {
    std::string msg = "items of training papers reached the metric input:";
    for (const auto& id : planted) msg += " " + id;
    throw ContractError(msg);
  }
  std::vector<MetricReport> out;
  for (Task task : {Task::kJudgment, Task::kGeneration}) {
    auto pre_t = subset(pre, task, nullptr);
    if (pre_t.items.empty()) continue;
    auto post_t = subset(post, task, nullptr);
    out.push_back(report_for(pre_t, post_t, task, "all"));
    std::set<std::string> domains;
    for (const auto& [id, e] : pre_t.items) domains.insert(e.domain);
    for (const auto& d : domains)
      out.push_back(report_for(subset(pre_t, task, &d), subset(post_t, task, &d), task, d));
  }
  return out;
}

GroupBy parse_group_by(std::string_view s) {
  if (s == "domain") return GroupBy::kDomain;
  if (s == "model") return GroupBy::kModel;
  if (s == "update") return GroupBy::kUpdate;
  throw ContractError("unknown group key '" + std::string(s) + "'");
}

std::vector<MetricReport> aggregate(const std::vector<MetricReport>& reports, GroupBy group_by) {
  if (reports.empty()) throw ContractError("aggregate needs at least one report");
  auto key_of = [&](const MetricReport& r) -> const std::string& {
    switch (group_by) {
      case GroupBy::kDomain: return r.domain;
      case GroupBy::kModel: return r.model_tag;
      case GroupBy::kUpdate: return r.update_tag;
    }
    return r.domain;
  };
  std::map<std::string, MetricReport> pooled;
  for (const auto& r : reports) {
    auto [it, fresh] = pooled.try_emplace(key_of(r), r);
    if (fresh) continue;
    auto& acc = it->second;
    if (acc.task != r.task)
      throw ContractError("cannot pool " + std::string(to_string(acc.task)) + " and " +
                          std::string(to_string(r.task)) + " reports in group '" + it->first + "'");
    if (acc.domain != r.domain) acc.domain = "*";
    if (acc.model_tag != r.model_tag) acc.model_tag = "*";
    if (acc.update_tag != r.update_tag) acc.update_tag = "*";
    for (int i = 0; i < 3; ++i) {
      acc.prior_from_correct[i] += r.prior_from_correct[i];
      acc.new_from_unknown[i] += r.new_from_unknown[i];
      acc.future_from_unknown[i] += r.future_from_unknown[i];
    }
    for (const auto& [k, v] : r.excluded) acc.excluded[k] += v;
  }
  std::vector<MetricReport> out;
  for (auto& [k, r] : pooled) out.push_back(std::move(r));
  return out;
}

// --- serialization ---------------------------------------------------------

namespace {

json fraction_json(const Fraction& f) {
  return {{"num", f.num}, {"den", f.den}, {"value", f.render()}};
}

json counts_json(const std::array<std::int64_t, 3>& row) {
  return {{"correct", row[0]}, {"incorrect", row[1]}, {"unknown", row[2]}};
}

std::array<std::int64_t, 3> counts_from(const json& j) {
  return {j.at("correct").get<std::int64_t>(), j.at("incorrect").get<std::int64_t>(),
          j.at("unknown").get<std::int64_t>()};
}

}  // namespace

json to_json(const MetricReport& r) {
  auto p = r.preservation();
  auto a = r.acquisition();
  auto f = r.projection();
  json j;
  j["task"] = to_string(r.task);
  j["domain"] = r.domain;
  j["model_tag"] = r.model_tag;
  j["update_tag"] = r.update_tag;
  j["preservation"] = fraction_json(p.kept);
  j["pres_distortion"] = fraction_json(p.distortion);
  j["pres_loss"] = fraction_json(p.loss);
  j["acquisition"] = fraction_json(a.kept);
  j["acq_distortion"] = fraction_json(a.distortion);
  j["acq_loss"] = fraction_json(a.loss);
  j["projection"] = fraction_json(f.kept);
  j["proj_loss"] = fraction_json(f.loss);
  j["proj_other"] = fraction_json(f.distortion);
  j["denominators"] = {{"preservation", p.denominator},
                       {"acquisition", a.denominator},
                       {"projection", f.denominator}};
  j["counts"] = {{"prior_from_correct", counts_json(r.prior_from_correct)},
                 {"new_from_unknown", counts_json(r.new_from_unknown)},
                 {"future_from_unknown", counts_json(r.future_from_unknown)}};
  j["excluded"] = r.excluded;
  return j;
}

MetricReport report_from_json(const json& j) {
  MetricReport r;
  r.task = parse_task(j.at("task").get<std::string>());
  r.domain = j.at("domain").get<std::string>();
  r.model_tag = j.at("model_tag").get<std::string>();
  r.update_tag = j.at("update_tag").get<std::string>();
  const auto& c = j.at("counts");
  r.prior_from_correct = counts_from(c.at("prior_from_correct"));
  r.new_from_unknown = counts_from(c.at("new_from_unknown"));
  r.future_from_unknown = counts_from(c.at("future_from_unknown"));
  r.excluded = j.at("excluded").get<std::map<std::string, std::int64_t>>();
  return r;
}

json to_json(const StateSnapshot& s) {
  json items = json::array();
  for (const auto& [id, e] : s.items)
    items.push_back({{"item_id", id},
                     {"state", to_string(e.state)},
                     {"epoch", to_string(e.epoch)},
                     {"task", to_string(e.task)},
                     {"paper_id", e.paper_id},
                     {"domain", e.domain}});
  return {{"phase", to_string(s.phase)},
          {"model_tag", s.model_tag},
          {"update_tag", s.update_tag},
          {"items", items}};
}

StateSnapshot snapshot_from_json(const json& j) {
  StateSnapshot s;
  s.phase = parse_phase(j.at("phase").get<std::string>());
  s.model_tag = j.at("model_tag").get<std::string>();
  s.update_tag = j.at("update_tag").get<std::string>();
  for (const auto& it : j.at("items")) {
    SnapshotEntry e;
    e.state = parse_state(it.at("state").get<std::string>());
    e.epoch = parse_epoch(it.at("epoch").get<std::string>());
    e.task = parse_task(it.at("task").get<std::string>());
    e.paper_id = it.at("paper_id").get<std::string>();
    e.domain = it.at("domain").get<std::string>();
    if (!s.items.emplace(it.at("item_id").get<std::string>(), e).second)
      throw ArtifactError("duplicate snapshot item " + it.at("item_id").get<std::string>());
  }
  return s;
}

// --- percent rows & summary ------------------------------------------------

PercentRow parse_summary_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, '|')) cells.push_back(text::trim(cell));
  // Leading '|' yields an empty first cell.
  if (!cells.empty() && cells.front().empty()) cells.erase(cells.begin());
  if (cells.size() < 9) throw ContractError("summary row needs a label and 8 numbers: " + line);
  PercentRow row;
  row.label = cells[0];
  double v[8];
  for (int i = 0; i < 8; ++i) {
    try {
      std::size_t used = 0;
      v[i] = std::stod(cells[i + 1], &used);
      if (used != cells[i + 1].size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw ContractError("not a percentage: '" + cells[i + 1] + "'");
    }
  }
  row.preservation = {v[0], v[1], v[2]};
  row.acquisition = {v[3], v[4], v[5]};
  row.projection = {v[6], v[7]};
  return row;
}

std::vector<std::string> check_percent_row(const PercentRow& row, double tol) {
  std::vector<std::string> problems;
  auto check_triple = [&](const std::array<double, 3>& t, const char* name) {
    double sum = t[0] + t[1] + t[2];
    if (std::abs(sum - 100.0) > tol + 1e-9)
      problems.push_back(row.label + ": " + name + " sums to " + std::to_string(sum));
  };
  check_triple(row.preservation, "preservation");
  check_triple(row.acquisition, "acquisition");
  double proj = row.projection[0] + row.projection[1];
  if (proj > 100.0 + tol + 1e-9)
    problems.push_back(row.label + ": projection plus loss is " + std::to_string(proj));
  for (double x : {row.preservation[0], row.preservation[1], row.preservation[2],
                   row.acquisition[0], row.acquisition[1], row.acquisition[2],
                   row.projection[0], row.projection[1]})
    if (x < 0.0 || x > 100.0) problems.push_back(row.label + ": value out of range");
  return problems;
}

namespace {
std::string pct(const Fraction& f) {
  if (!f.defined()) return "n/a";
  return Fraction{f.num * 100, f.den}.render(1);
}
}  // namespace

std::string render_summary(const std::vector<MetricReport>& reports) {
  std::ostringstream out;
  for (Task task : {Task::kJudgment, Task::kGeneration}) {
    bool header = false;
    for (const auto& r : reports) {
      if (r.task != task) continue;
      if (!header) {
        out << "## " << to_string(task) << "\n\n"
            << "| Domain | Pres | Dist | Loss | Acqu | Dist | Loss | Proj | Loss | n |\n"
            << "|---|---|---|---|---|---|---|---|---|---|\n";
        header = true;
      }
      auto p = r.preservation();
      auto a = r.acquisition();
      auto f = r.projection();
      out << "| " << r.domain << " | " << pct(p.kept) << " | " << pct(p.distortion) << " | "
          << pct(p.loss) << " | " << pct(a.kept) << " | " << pct(a.distortion) << " | "
          << pct(a.loss) << " | " << pct(f.kept) << " | " << pct(f.loss) << " | "
          << p.denominator << "/" << a.denominator << "/" << f.denominator << " |\n";
    }
    if (header) out << "\n";
  }
  return out.str();
}

void write_report_bundle(const std::filesystem::path& dir, const std::vector<MetricReport>& reports,
                         const std::string& config_hash, const json& run_notes,
                         const std::string& appendix) {
  std::filesystem::create_directories(dir / "plotdata");

  std::ostringstream md;
  md << "# Knowledge update metrics\n\n";
  for (const auto& [k, v] : run_notes.items())
    md << "- " << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  md << "- config_hash: " << config_hash << "\n\n";
  md << "Percentages. Pres/Dist/Loss condition on prior items correct before the update; "
        "Acqu/Dist/Loss and Proj/Loss on new and future items unknown before it. "
        "n lists the three denominators.\n\n";
  md << render_summary(reports);
  md << appendix;
  write_text_atomic(dir / "summary.md", md.str());

  for (Task task : {Task::kJudgment, Task::kGeneration}) {
    std::ostringstream csv;
    csv << "domain,metric,num,den,value\n";
    bool any = false;
    for (const auto& r : reports) {
      if (r.task != task || r.domain == "all") continue;
      any = true;
      auto p = r.preservation();
      auto a = r.acquisition();
      auto f = r.projection();
      std::pair<const char*, Fraction> cells[] = {
          {"preservation", p.kept}, {"pres_distortion", p.distortion}, {"pres_loss", p.loss},
          {"acquisition", a.kept},  {"acq_distortion", a.distortion},  {"acq_loss", a.loss},
          {"projection", f.kept},   {"proj_loss", f.loss},             {"proj_other", f.distortion}};
      for (const auto& [name, fr] : cells)
        csv << r.domain << "," << name << "," << fr.num << "," << fr.den << "," << fr.render()
            << "\n";
    }
    if (any) write_text_atomic(dir / "plotdata" / (std::string(to_string(task)) + ".csv"), csv.str());
  }
}

}  // namespace claimshift::metrics
