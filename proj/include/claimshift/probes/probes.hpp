#pragma once

#include <chrono>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "claimshift/claims/claims.hpp"
#include "claimshift/core/concurrency.hpp"
#include "claimshift/core/types.hpp"
#include "claimshift/endpoints/chat_model.hpp"

namespace claimshift::probes {

inline constexpr std::string_view kPromptVersion = "v1";
inline constexpr std::string_view kContextHeader = "Reference paper:";

struct Probe {
  std::string probe_id;
  Task task = Task::kJudgment;
  Epoch epoch = Epoch::kPrior;
  std::optional<std::string> claim_id;
  // Paper the probe is about; always set for generation probes.
  std::optional<std::string> paper_id;
  std::optional<std::string> paper_title;
  std::optional<std::string> subject;
  std::string system_prompt;
  std::string prompt;
  std::vector<std::string> context_papers;

  // Key of the knowledge item the probe measures: the claim id for judgment,
  // "gen:<paper_id>" for generation.
  std::string item_id() const;
  bool operator==(const Probe&) const = default;
};

// Judgment probes on prior/new claims need the paper title; future claims
// must come without one. Throws ContractError otherwise.
Probe build_judgment_prompt(const claims::Claim& claim, const std::optional<std::string>& title);

// Throws ContractError on empty input.
Probe build_generation_prompt(Epoch epoch, const std::string& title_or_subject,
                              const std::string& paper_id = {});

// User turn with any context papers prepended under the reference header.
std::string user_message(const Probe& probe);
endpoints::ChatRequest to_request(const Probe& probe, double temperature = 0.0);

struct ProbeResponse {
  std::string probe_id;
  std::string raw_text;
  std::optional<ParsedLabel> parsed;           // judgment only
  std::optional<std::string> generated_claim;  // generation only
  std::chrono::milliseconds latency{0};
  std::string model_tag;
};

// Throws ProbeFailedError once the retry budget is spent.
ProbeResponse run_probe(const Probe& probe, endpoints::ChatModel& model,
                        const RetryPolicy& retry = {});

// Case-insensitive regex table. The first sentence with any match decides;
// within a sentence overlapping matches resolve to the longest, and matches
// for both labels make the answer UNPARSEABLE.
class JudgmentParser {
 public:
  static JudgmentParser from_json(const json& table);
  static const JudgmentParser& shipped();

  ParsedLabel parse(std::string_view raw) const;
  const std::string& version() const { return version_; }

 private:
  struct Pattern {
    std::regex re;
    ParsedLabel label;
  };
  std::vector<Pattern> patterns_;
  std::string version_;
};

ParsedLabel parse_judgment(std::string_view raw);

json to_json(const Probe& p);
Probe probe_from_json(const json& j);
json to_json(const ProbeResponse& r);  // latency omitted; see latency log
ProbeResponse response_from_json(const json& j);

}  // namespace claimshift::probes
