#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "claimshift/core/jsonl.hpp"
#include "claimshift/core/types.hpp"

namespace claimshift::metrics {

enum class Phase { kPre, kPost };
std::string_view to_string(Phase p);
Phase parse_phase(std::string_view s);

struct SnapshotEntry {
  KnowledgeState state = KnowledgeState::kUnknown;
  Epoch epoch = Epoch::kPrior;
  Task task = Task::kJudgment;
  std::string paper_id;
  std::string domain;
  bool operator==(const SnapshotEntry&) const = default;
};

struct StateSnapshot {
  Phase phase = Phase::kPre;
  std::string model_tag;
  std::string update_tag;
  std::map<std::string, SnapshotEntry> items;  // item id -> entry
};

// Exact non-negative fraction; den == 0 is the undefined marker.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 0;
  bool defined() const { return den > 0; }
  // Fixed decimals, rounded half up; "undefined" when den == 0.
  std::string render(int decimals = 6) const;
  double value() const;
  bool operator==(const Fraction&) const = default;
};

struct TransitionTable {
  Epoch epoch = Epoch::kPrior;
  std::array<std::array<std::int64_t, 3>, 3> counts{};             // [pre][post]
  std::array<std::array<std::vector<std::string>, 3>, 3> items{};  // audit trail
  std::int64_t row_total(KnowledgeState pre) const;
  std::int64_t at(KnowledgeState pre, KnowledgeState post) const;
};

// Only items of the given epoch are counted. Throws ContractError if the two
// snapshots cover different items (message lists the symmetric difference)
// or the phases are wrong.
TransitionTable build_transition(const StateSnapshot& pre, const StateSnapshot& post, Epoch epoch);

// For projection, distortion holds the pre-unknown -> incorrect mass (proj_other).
struct MetricTriple {
  Fraction kept;  // preservation / acquisition / projection
  Fraction distortion;
  Fraction loss;
  std::int64_t denominator = 0;
};

MetricTriple preservation(const TransitionTable& t);
MetricTriple acquisition(const TransitionTable& t);
MetricTriple projection(const TransitionTable& t);

// Counts are stored; fractions are always recomputed from them.
struct MetricReport {
  Task task = Task::kJudgment;
  std::string domain = "all";
  std::string model_tag;
  std::string update_tag;
  // Post-state counts (correct, incorrect, unknown) of the qualifying rows.
  std::array<std::int64_t, 3> prior_from_correct{};
  std::array<std::int64_t, 3> new_from_unknown{};
  std::array<std::int64_t, 3> future_from_unknown{};
  // Items outside every metric's conditioning, by "<epoch>_pre_<state>".
  std::map<std::string, std::int64_t> excluded;

  MetricTriple preservation() const;
  MetricTriple acquisition() const;
  MetricTriple projection() const;
};

MetricReport make_report(const TransitionTable& prior, const TransitionTable& next,
                         const TransitionTable& future, Task task, std::string domain,
                         std::string model_tag, std::string update_tag);

struct ReportOptions {
  // Papers that must not reach any denominator (the training half of P_new).
  std::set<std::string> forbidden_papers;
};

// One pooled report per task plus one per (task, domain). Rows come sorted by
// task, then "all", then domain name. Throws ContractError when an item of a
// forbidden paper is present.
std::vector<MetricReport> compute_reports(const StateSnapshot& pre, const StateSnapshot& post,
                                          const ReportOptions& options = {});

enum class GroupBy { kDomain, kModel, kUpdate };
GroupBy parse_group_by(std::string_view s);

// Pools counts per group and recomputes. Fields that differ inside a group
// and are not the group key become "*". Mixing tasks is an error, as is an
// empty input.
std::vector<MetricReport> aggregate(const std::vector<MetricReport>& reports, GroupBy group_by);

json to_json(const MetricReport& r);
MetricReport report_from_json(const json& j);
json to_json(const StateSnapshot& s);
StateSnapshot snapshot_from_json(const json& j);

// Percent view of one summary row: preservation, acquisition, projection columns.
struct PercentRow {
  std::string label;
  std::array<double, 3> preservation{};  // pres, dist, loss
  std::array<double, 3> acquisition{};   // acq, dist, loss
  std::array<double, 2> projection{};    // proj, loss
};

// Parses "| label | p | d | l | a | d | l | pr | l |"; throws ContractError.
PercentRow parse_summary_row(const std::string& line);
// Empty when the two triples each sum to 100 within tol and projection plus
// loss does not exceed 100 + tol; otherwise one message per failed check.
std::vector<std::string> check_percent_row(const PercentRow& row, double tol = 0.15);

std::string render_summary(const std::vector<MetricReport>& reports);

// Writes summary.md and plotdata/<task>.csv under dir; appendix is extra
// markdown placed after the metric tables.
void write_report_bundle(const std::filesystem::path& dir, const std::vector<MetricReport>& reports,
                         const std::string& config_hash, const json& run_notes,
                         const std::string& appendix = {});

}  // namespace claimshift::metrics
