#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "claimshift/core/concurrency.hpp"
#include "claimshift/core/jsonl.hpp"
#include "claimshift/core/types.hpp"
#include "claimshift/endpoints/chat_model.hpp"
#include "claimshift/probes/probes.hpp"

namespace claimshift::confidence {

inline constexpr std::string_view kJudgePromptVersion = "v1";
inline constexpr double kParaphraseTemperature = 0.7;

// nullopt means not-applicable (no parseable answer).
using Accuracy = std::optional<bool>;

Accuracy accuracy_judgment(ParsedLabel parsed, Label gold);

// One call made while judging a probe, kept verbatim for the verdict log.
struct Exchange {
  std::string method;  // generation_judge | more_info | paraphrase | paraphrase_answer | linguistic
  std::string prompt;
  std::string reply;
  double temperature = 0.0;
  bool failed = false;
};
using Trace = std::vector<Exchange>;

// Leading yes/no of a reply; nullopt if neither or both are present.
std::optional<bool> parse_yes_no(std::string_view reply);

// Judge decides from the abstract whether it supports the claim. Throws
// ProbeFailedError when the judge stays unreachable.
bool accuracy_generation(const std::string& generated_claim, const std::string& paper_abstract,
                         endpoints::ChatModel& judge, const RetryPolicy& retry = {},
                         Trace* trace = nullptr);

// Follow-up turn on the same conversation. "No" (no more information needed)
// means confident; "Yes", garbage or endpoint failure mean not confident.
bool conf_more_info(const probes::Probe& probe, const probes::ProbeResponse& prior_response,
                    endpoints::ChatModel& model, const RetryPolicy& retry = {},
                    Trace* trace = nullptr);

// k paraphrases from the paraphraser, one sampled answer each; confident iff
// every answer parses and matches the original label.
bool conf_consistency(const probes::Probe& probe, ParsedLabel original,
                      endpoints::ChatModel& model, endpoints::ChatModel& paraphraser,
                      int k = 3, const RetryPolicy& retry = {}, Trace* trace = nullptr);

// Judge sees only the response text.
bool conf_linguistic(const probes::ProbeResponse& response, endpoints::ChatModel& judge,
                     const RetryPolicy& retry = {}, Trace* trace = nullptr);

// Odd, non-empty input only.
bool majority_vote(const std::vector<bool>& verdicts);

KnowledgeState classify_state(Accuracy accurate, bool confident);

struct ConfidenceVerdict {
  std::optional<bool> more_info;
  std::optional<bool> consistency;
  std::optional<bool> linguistic;
  bool final = false;
  std::vector<std::string> method_mask;
  bool operator==(const ConfidenceVerdict&) const = default;
};

struct Assessment {
  std::string probe_id;
  std::string item_id;
  Task task = Task::kJudgment;
  Epoch epoch = Epoch::kPrior;
  Accuracy accurate;
  ConfidenceVerdict verdict;
  KnowledgeState state = KnowledgeState::kUnknown;
  Trace trace;
};

struct AssessorConfig {
  int paraphrase_count = 3;
  RetryPolicy retry;
};

// Bundles the endpoints used to turn a probe response into a state.
class Assessor {
 public:
  Assessor(endpoints::ChatModelPtr model, endpoints::ChatModelPtr judge,
           endpoints::ChatModelPtr paraphraser, AssessorConfig config = {});

  Assessment assess_judgment(const probes::Probe& probe, const probes::ProbeResponse& response,
                             Label gold) const;
  Assessment assess_generation(const probes::Probe& probe, const probes::ProbeResponse& response,
                               const std::string& paper_abstract) const;

 private:
  endpoints::ChatModelPtr model_;
  endpoints::ChatModelPtr judge_;
  endpoints::ChatModelPtr paraphraser_;
  AssessorConfig config_;
};

// Share of positions where both lists agree; lists must be equal and non-empty.
double agreement_rate(const std::vector<bool>& a, const std::vector<bool>& b);

json to_json(const Assessment& a);
Assessment assessment_from_json(const json& j);

}  // namespace claimshift::confidence
