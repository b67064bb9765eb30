#pragma once

#include <string>
#include <vector>

#include "claimshift/corpus/literature_client.hpp"
#include "claimshift/corpus/paper.hpp"
#include "claimshift/corpus/windows.hpp"

namespace claimshift::corpus {

struct FetchedPapers {
  std::vector<PaperRecord> records;
  FilterStats stats;
};

// Retrieves up to limit papers for domain and keeps the in-window journal or
// conference papers that have an abstract and citation information.
FetchedPapers fetch_papers(const std::string& domain, const DateRange& window, std::size_t limit,
                           LiteratureClient& client);

// Papers citing paper_id published inside window, filtered as above. Every
// returned record lists paper_id among its cited_paper_ids.
FetchedPapers fetch_citing_papers(const std::string& paper_id, const DateRange& window,
                                  LiteratureClient& client);

struct SkippedPrior {
  std::string paper_id;
  std::string reason;
};

struct AssembledTriplets {
  std::vector<PaperTriplet> triplets;
  std::vector<SkippedPrior> skipped;
};

// For each prior (in paper_id order) picks citers in the new window ranked by
// citation count desc, then date asc, then id; for each, a future-window
// citer of the new paper, falling back to a citer of the prior. A paper is
// used in at most one triplet.
AssembledTriplets assemble_triplets(const std::vector<PaperRecord>& prior_papers,
                                    const TemporalWindows& windows, LiteratureClient& client,
                                    std::size_t per_prior_cap = 1);

// Ranking used for candidate citers.
bool citer_precedes(const PaperRecord& a, const PaperRecord& b);

}  // namespace claimshift::corpus
