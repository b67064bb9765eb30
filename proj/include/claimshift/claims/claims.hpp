#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "claimshift/core/concurrency.hpp"
#include "claimshift/core/types.hpp"
#include "claimshift/corpus/paper.hpp"
#include "claimshift/endpoints/chat_model.hpp"

namespace claimshift::claims {

struct Claim {
  std::string claim_id;
  std::string text;
  Label gold_label = Label::kSupport;
  std::string paper_id;
  Epoch epoch = Epoch::kPrior;
  std::optional<std::string> subject;
  std::string triplet_id;
  std::string domain;

  bool operator==(const Claim&) const = default;
};

std::string claim_id_for(const std::string& paper_id, Label label);

struct Rejection {
  std::string paper_id;
  std::string reason;
  bool operator==(const Rejection&) const = default;
};

struct ClaimSet {
  std::vector<Claim> claims;
  std::vector<std::string> source_triplets;
  // "epoch:prior", "label:SUPPORT", "domain:Biology" -> count.
  std::map<std::string, std::size_t> stats;
  std::vector<Rejection> rejected;

  bool operator==(const ClaimSet&) const = default;
};

struct ClaimFilter {
  std::size_t min_words = 8;
  std::size_t max_words = 30;
  double max_refute_overlap = 0.7;
};

struct ClaimGenConfig {
  ClaimFilter filter;
  int max_attempts = 3;
  double max_reject_fraction = 0.05;
  std::size_t subject_max_words = 6;
  std::size_t concurrency = 4;
  RetryPolicy transport_retry;
};

bool claim_length_ok(std::string_view text, std::size_t min_words = 8, std::size_t max_words = 30);

// Share of the claim's content words (stop words removed) that also occur in
// the abstract.
double abstract_overlap(std::string_view claim, std::string_view abstract);

// Nullopt when the claim passes the post-filters, otherwise the reason.
std::optional<std::string> filter_failure(std::string_view text, Label label,
                                          std::string_view abstract, const ClaimFilter& filter);

// Strips "Claim:" prefixes, quotes and list markers; keeps the first line.
std::string clean_generation(std::string_view raw);

// The exact request sent for a claim of the given label.
endpoints::ChatRequest claim_request(const corpus::PaperRecord& paper, Label label);
endpoints::ChatRequest subject_request(const corpus::PaperRecord& paper);

// Each throws ContractError on an empty abstract and ClaimRejectedError when
// every attempt fails the post-filters.
Claim generate_support_claim(const corpus::PaperRecord& paper, Epoch epoch,
                             endpoints::ChatModel& generator, const ClaimGenConfig& config = {});
Claim generate_refute_claim(const corpus::PaperRecord& paper, Epoch epoch,
                            endpoints::ChatModel& generator, const ClaimGenConfig& config = {});
std::string extract_subject(const corpus::PaperRecord& paper, endpoints::ChatModel& generator,
                            const ClaimGenConfig& config = {});

// Two claims per constituent paper, plus a subject on future-epoch claims.
// Throws ClaimRejectedError when more than max_reject_fraction of the papers
// are rejected.
ClaimSet build_claim_set(const std::vector<corpus::PaperTriplet>& triplets,
                         endpoints::ChatModel& generator, const ClaimGenConfig& config = {});

json to_json(const Claim& c);
Claim claim_from_json(const json& j);

// claims.jsonl plus claims_meta.json (source triplets, stats, rejections).
void write_claim_set(const std::filesystem::path& dir, const ClaimSet& set,
                     const std::string& config_hash);
ClaimSet read_claim_set(const std::filesystem::path& dir, const std::string& config_hash);

}  // namespace claimshift::claims
