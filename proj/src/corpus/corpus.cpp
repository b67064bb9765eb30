#include "claimshift/corpus/corpus.hpp"

#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

#include "claimshift/core/errors.hpp"

namespace claimshift::corpus {

namespace {

FetchedPapers filter_all(const std::vector<json>& raw, const DateRange& window,
                         const std::string& domain) {
  FetchedPapers out;
  for (const auto& r : raw) {
    ++out.stats.seen;
    auto n = normalize_paper(r, window, domain);
    if (n.dropped) {
      out.stats.count(*n.dropped);
      continue;
    }
    ++out.stats.kept;
    out.records.push_back(std::move(*n.record));
  }
  return out;
}

}  // namespace

FetchedPapers fetch_papers(const std::string& domain, const DateRange& window, std::size_t limit,
                           LiteratureClient& client) {
  if (limit < 1) throw ContractError("fetch_papers: limit must be at least 1");
  if (window.empty()) throw ContractError("fetch_papers: empty window");
  auto out = filter_all(client.search(domain, window, limit), window, domain);
  if (out.records.size() > limit) out.records.resize(limit);
  spdlog::info("fetch_papers {} {}: {} seen, {} kept ({} no abstract, {} no citation info, "
               "{} survey/review)",
               domain, format_range(window), out.stats.seen, out.stats.kept,
               out.stats.no_abstract, out.stats.no_citation_info, out.stats.survey_or_review);
  return out;
}

FetchedPapers fetch_citing_papers(const std::string& paper_id, const DateRange& window,
                                  LiteratureClient& client) {
  auto out = filter_all(client.citations(paper_id, window), window, {});
  for (auto& r : out.records)
    if (std::find(r.cited_paper_ids.begin(), r.cited_paper_ids.end(), paper_id) ==
        r.cited_paper_ids.end())
      r.cited_paper_ids.push_back(paper_id);
  return out;
}

bool citer_precedes(const PaperRecord& a, const PaperRecord& b) {
  if (a.citation_count != b.citation_count) return a.citation_count > b.citation_count;
  auto da = std::chrono::sys_days{a.publication_date};
  auto db = std::chrono::sys_days{b.publication_date};
  if (da != db) return da < db;
  return a.paper_id < b.paper_id;
}

AssembledTriplets assemble_triplets(const std::vector<PaperRecord>& prior_papers,
                                    const TemporalWindows& windows, LiteratureClient& client,
                                    std::size_t per_prior_cap) {
  validate_windows(windows);
  if (per_prior_cap < 1) throw ContractError("per_prior_cap must be at least 1");
  for (const auto& p : prior_papers)
    if (!windows.prior_window.contains(p.publication_date))
      throw ContractError("prior paper " + p.paper_id + " is outside the prior window");

  std::vector<const PaperRecord*> priors;
  for (const auto& p : prior_papers) priors.push_back(&p);
  std::sort(priors.begin(), priors.end(),
            [](const PaperRecord* a, const PaperRecord* b) { return a->paper_id < b->paper_id; });

  std::set<std::string> used;
  for (const auto* p : priors) used.insert(p->paper_id);

  auto candidates = [&](const std::string& cited, const DateRange& window) {
    auto fetched = fetch_citing_papers(cited, window, client).records;
    std::erase_if(fetched, [&](const PaperRecord& r) { return used.count(r.paper_id) > 0; });
    std::sort(fetched.begin(), fetched.end(), citer_precedes);
    return fetched;
  };

  AssembledTriplets out;
  for (const auto* prior : priors) {
    auto news = candidates(prior->paper_id, windows.new_window);
    if (news.empty()) {
      out.skipped.push_back({prior->paper_id, "no citing paper in the new window"});
      continue;
    }
    std::size_t made = 0;
    for (const auto& n : news) {
      if (made >= per_prior_cap) break;
      if (used.count(n.paper_id)) continue;
      FutureEdge edge = FutureEdge::kCitesNew;
      auto futures = candidates(n.paper_id, windows.future_window);
      if (futures.empty()) {
        edge = FutureEdge::kCitesPrior;
        futures = candidates(prior->paper_id, windows.future_window);
        std::erase_if(futures, [&](const PaperRecord& r) { return r.paper_id == n.paper_id; });
      }
      if (futures.empty()) continue;
      PaperTriplet t{*prior, n, futures.front(), edge};
      t.new_paper.domain = prior->domain;
      t.future.domain = prior->domain;
      used.insert(t.new_paper.paper_id);
      used.insert(t.future.paper_id);
      out.triplets.push_back(std::move(t));
      ++made;
    }
    if (made == 0) out.skipped.push_back({prior->paper_id, "no citing paper in the future window"});
  }
  for (const auto& s : out.skipped) spdlog::debug("skipped prior {}: {}", s.paper_id, s.reason);
  return out;
}

}  // namespace claimshift::corpus
