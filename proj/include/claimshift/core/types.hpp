#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace claimshift {

enum class Epoch { kPrior, kNew, kFuture };
inline constexpr std::array<Epoch, 3> kAllEpochs = {Epoch::kPrior, Epoch::kNew,
                                                    Epoch::kFuture};

enum class Label { kSupport, kRefute };

// Judgment answer as parsed from free text.
enum class ParsedLabel { kSupport, kRefute, kUnparseable };

enum class KnowledgeState { kCorrect, kIncorrect, kUnknown };
inline constexpr std::array<KnowledgeState, 3> kAllStates = {
    KnowledgeState::kCorrect, KnowledgeState::kIncorrect, KnowledgeState::kUnknown};

enum class Task { kJudgment, kGeneration };

std::string_view to_string(Epoch e);
std::string_view to_string(Label l);
std::string_view to_string(ParsedLabel l);
std::string_view to_string(KnowledgeState s);
std::string_view to_string(Task t);

// Parsers throw ContractError on unknown names.
Epoch parse_epoch(std::string_view s);
Label parse_label(std::string_view s);
ParsedLabel parse_parsed_label(std::string_view s);
KnowledgeState parse_state(std::string_view s);
Task parse_task(std::string_view s);

constexpr std::size_t index_of(KnowledgeState s) { return static_cast<std::size_t>(s); }
constexpr std::size_t index_of(Epoch e) { return static_cast<std::size_t>(e); }

// The ten fields of study the corpus is drawn from.
inline constexpr std::array<std::string_view, 10> kDomains = {
    "Computer Science",      "Medicine",
    "Biology",               "Materials Science",
    "Psychology",            "Business",
    "Political Science",     "Environmental Science",
    "Agricultural and Food Sciences", "Education"};

bool is_known_domain(std::string_view name);

}  // namespace claimshift
