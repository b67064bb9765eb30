#include "claimshift/core/types.hpp"

#include <algorithm>

#include "claimshift/core/errors.hpp"

namespace claimshift {

std::string_view to_string(Epoch e) {
  switch (e) {
    case Epoch::kPrior: return "prior";
    case Epoch::kNew: return "new";
    case Epoch::kFuture: return "future";
  }
  return "?";
}

std::string_view to_string(Label l) {
  return l == Label::kSupport ? "SUPPORT" : "REFUTE";
}

std::string_view to_string(ParsedLabel l) {
  switch (l) {
    case ParsedLabel::kSupport: return "SUPPORT";
    case ParsedLabel::kRefute: return "REFUTE";
    case ParsedLabel::kUnparseable: return "UNPARSEABLE";
  }
  return "?";
}

std::string_view to_string(KnowledgeState s) {
  switch (s) {
    case KnowledgeState::kCorrect: return "correct";
    case KnowledgeState::kIncorrect: return "incorrect";
    case KnowledgeState::kUnknown: return "unknown";
  }
  return "?";
}

std::string_view to_string(Task t) {
  return t == Task::kJudgment ? "judgment" : "generation";
}

Epoch parse_epoch(std::string_view s) {
  for (Epoch e : kAllEpochs)
    if (to_string(e) == s) return e;
  throw ContractError("unknown epoch: " + std::string(s));
}

Label parse_label(std::string_view s) {
  if (s == "SUPPORT") return Label::kSupport;
  if (s == "REFUTE") return Label::kRefute;
  throw ContractError("unknown label: " + std::string(s));
}

ParsedLabel parse_parsed_label(std::string_view s) {
  if (s == "SUPPORT") return ParsedLabel::kSupport;
  if (s == "REFUTE") return ParsedLabel::kRefute;
  if (s == "UNPARSEABLE") return ParsedLabel::kUnparseable;
  throw ContractError("unknown parsed label: " + std::string(s));
}

KnowledgeState parse_state(std::string_view s) {
  for (KnowledgeState k : kAllStates)
    if (to_string(k) == s) return k;
  throw ContractError("unknown knowledge state: " + std::string(s));
}

Task parse_task(std::string_view s) {
  if (s == "judgment") return Task::kJudgment;
  if (s == "generation") return Task::kGeneration;
  throw ContractError("unknown task: " + std::string(s));
}

bool is_known_domain(std::string_view name) {
  return std::find(kDomains.begin(), kDomains.end(), name) != kDomains.end();
}

}  // namespace claimshift
