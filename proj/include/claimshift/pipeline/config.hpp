#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "claimshift/claims/claims.hpp"
#include "claimshift/core/date.hpp"
#include "claimshift/core/jsonl.hpp"
#include "claimshift/corpus/windows.hpp"
#include "claimshift/endpoints/chat_model.hpp"
#include "claimshift/updates/updates.hpp"

namespace claimshift::pipeline {

// fixture:<path> or an http(s) base URL.
struct ServiceSpec {
  std::string url;
  std::string api_key_env;
  double requests_per_second = 0.0;
  std::string index;  // n-gram corpus name; unused for literature
};

enum class TaskSelection { kJudgment, kGeneration, kBoth };
std::string_view to_string(TaskSelection t);
TaskSelection parse_task_selection(std::string_view s);
bool includes(TaskSelection sel, Task t);

struct AnalysisSpec {
  bool enabled = true;
  std::string tokenizer = "whitespace";
  std::optional<ServiceSpec> ngram;
  std::size_t rare_tokens = 100;
  Task correlation_task = Task::kJudgment;
};

struct RunConfig {
  std::filesystem::path base_dir;  // relative paths below resolve against it
  std::string run_name = "run";
  std::filesystem::path output_dir = "out";
  std::optional<std::filesystem::path> cache_dir;

  std::vector<std::string> domains;
  YearMonth cutoff{std::chrono::year(2023), std::chrono::month(12)};
  std::optional<corpus::WindowPolicy> window_policy;  // default: WindowPolicy::standard(cutoff)
  std::size_t papers_per_domain = 100;
  std::size_t per_prior_cap = 1;
  ServiceSpec literature;

  endpoints::EndpointSpec model;
  endpoints::EndpointSpec judge;
  endpoints::EndpointSpec generator;
  std::optional<endpoints::EndpointSpec> paraphraser;  // default: judge

  TaskSelection task = TaskSelection::kBoth;
  updates::UpdateMethodSpec update;
  updates::ContextScope infer_context_scope = updates::ContextScope::kAll;
  int ready_timeout_seconds = 1800;
  double split_ratio = 0.5;
  std::uint64_t split_seed = 0;

  std::size_t probe_concurrency = 4;
  std::size_t claim_concurrency = 4;
  int paraphrase_count = 3;
  claims::ClaimFilter claim_filter;
  int claim_attempts = 3;
  double max_reject_fraction = 0.05;

  AnalysisSpec analysis;

  corpus::WindowPolicy effective_policy() const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::filesystem::path out() const { return resolve(output_dir); }
  std::optional<std::filesystem::path> cache() const;
  const endpoints::EndpointSpec& paraphraser_spec() const { return paraphraser ? *paraphraser : judge; }
};

// Throws ContractError on malformed or mistyped fields; semantic problems are
// left to validate_config.
RunConfig config_from_json(const json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);
json config_to_json(const RunConfig& c);

// Hash of the canonical config without output and cache locations.
std::string config_hash(const RunConfig& c);

struct Diagnostic {
  std::string field;
  std::string message;
  bool operator==(const Diagnostic&) const = default;
};

// Empty iff the config is runnable. Never throws.
std::vector<Diagnostic> validate_config(const RunConfig& c);

}  // namespace claimshift::pipeline
