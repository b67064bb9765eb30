#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "claimshift/analysis/analysis.hpp"
#include "claimshift/corpus/literature_client.hpp"
#include "claimshift/metrics/metrics.hpp"
#include "claimshift/pipeline/config.hpp"

namespace claimshift::pipeline {

enum class Stage { kCorpus, kClaims, kPreSnapshot, kUpdate, kPostSnapshot, kEvaluate, kAnalyze, kReport };
inline constexpr Stage kAllStages[] = {Stage::kCorpus,       Stage::kClaims,   Stage::kPreSnapshot,
                                       Stage::kUpdate,       Stage::kPostSnapshot,
                                       Stage::kEvaluate,     Stage::kAnalyze,  Stage::kReport};
std::string_view to_string(Stage s);
Stage parse_stage(std::string_view s);

struct StageRecord {
  std::string name;
  std::string status;  // complete | failed | skipped (dry run only)
  std::string started;
  std::string finished;
  std::map<std::string, std::string> inputs;   // relative path -> sha256
  std::map<std::string, std::string> outputs;  // relative path -> sha256
  std::string error;
  std::string log;
};

struct RunManifest {
  std::string config_hash;
  std::vector<StageRecord> stages;  // pipeline order
  const StageRecord* find(Stage s) const;
  bool complete() const;
};

json to_json(const RunManifest& m);
RunManifest manifest_from_json(const json& j);
RunManifest read_manifest(const std::filesystem::path& output_dir);

struct RunOptions {
  bool resume = false;   // skip stages whose recorded inputs and outputs still match
  bool dry_run = false;  // report the plan without running anything
  std::optional<std::vector<Stage>> only;  // run just these stages (upstream must be valid)
};

// Runs the stages in order and records each in output_dir/manifest.json.
// A failing stage is recorded as failed and its error rethrown as
// StageFailedError after the manifest is written.
RunManifest run_pipeline(const RunConfig& config, const RunOptions& options = {});

class StageFailedError : public Error {
 public:
  StageFailedError(Stage stage, const std::string& what) : Error(what), stage_(stage) {}
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

// Service factories used by the stages; exposed for tests and the CLI.
corpus::LiteratureClientPtr make_literature_client(const RunConfig& c);
std::unique_ptr<analysis::NgramCounter> make_ngram_counter(const RunConfig& c);

}  // namespace claimshift::pipeline
