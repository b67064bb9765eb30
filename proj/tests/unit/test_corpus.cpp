#include <gtest/gtest.h>

#include "claimshift/core/errors.hpp"
#include "claimshift/corpus/corpus.hpp"
#include "claimshift/corpus/literature_client.hpp"
#include "claimshift/corpus/windows.hpp"
#include "fixture_server.hpp"
#include "test_support.hpp"

using namespace claimshift;
using namespace claimshift::corpus;
using testsupport::day;
using testsupport::raw_paper;
using testsupport::record;

namespace {

YearMonth ym(int y, unsigned m) { return YearMonth{std::chrono::year(y), std::chrono::month(m)}; }

DateRange range(const char* a, const char* b) { return {day(a), day(b)}; }

}  // namespace

// --- windows ----------------------------------------------------------------

TEST(Windows, DecemberCutoffLayout) {
  auto w = window_for(ym(2023, 12));
  EXPECT_EQ(w.prior_window, range("2022-10-01", "2023-09-30"));
  EXPECT_EQ(w.new_window, range("2024-03-01", "2024-11-30"));
  EXPECT_EQ(w.future_window, range("2024-12-01", "2025-02-01"));
}

TEST(Windows, OctoberCutoffLayout) {
  auto w = window_for(ym(2023, 10));
  EXPECT_EQ(w.prior_window, range("2022-08-01", "2023-07-31"));
  EXPECT_EQ(w.new_window, range("2024-01-01", "2024-11-30"));
  EXPECT_EQ(w.future_window, range("2024-12-01", "2025-03-01"));
}

TEST(Windows, ZeroLengthFutureWindowRejected) {
  auto policy = WindowPolicy::standard(ym(2023, 12));
  policy.future_end = policy.new_end;  // future would start the day after and end before it
  EXPECT_THROW(window_for(ym(2023, 12), policy), ContractError);
}

TEST(Windows, ShortBuffersRejected) {
  for (int b = 0; b < kMinBufferMonths; ++b) {
    auto before = WindowPolicy::standard(ym(2023, 12));
    before.buffer_before_months = b;
    EXPECT_THROW(window_for(ym(2023, 12), before), ContractError) << b;
    auto after = WindowPolicy::standard(ym(2023, 12));
    after.buffer_after_months = b;
    EXPECT_THROW(window_for(ym(2023, 12), after), ContractError) << b;
  }
}

TEST(Windows, NewWindowEndingBeforeItStartsRejected) {
  auto policy = WindowPolicy::standard(ym(2023, 12));
  policy.new_end = day("2024-02-01");
  EXPECT_THROW(window_for(ym(2023, 12), policy), ContractError);
}

TEST(Windows, GenericCutoffHonoursInvariants) {
  for (int y = 2020; y <= 2026; ++y)
    for (unsigned m = 1; m <= 12; ++m) {
      auto w = window_for(ym(y, m));
      EXPECT_NO_THROW(validate_windows(w));
      EXPECT_GE(month_distance(YearMonth{w.prior_window.last.year(), w.prior_window.last.month()},
                               ym(y, m)),
                kMinBufferMonths);
      EXPECT_GE(month_distance(ym(y, m),
                               YearMonth{w.new_window.first.year(), w.new_window.first.month()}),
                kMinBufferMonths);
    }
}

// --- normalization ------------------------------------------------------------

TEST(Normalize, DropsPapersWithoutAbstractOrCitations) {
  auto window = range("2023-01-01", "2023-12-31");
  auto raw = raw_paper("a", "2023-03-04");
  raw["abstract"] = nullptr;
  EXPECT_EQ(normalize_paper(raw, window, "").dropped, DropReason::kNoAbstract);
  raw = raw_paper("a", "2023-03-04");
  raw.erase("citationCount");
  EXPECT_EQ(normalize_paper(raw, window, "").dropped, DropReason::kNoCitationInfo);
}

TEST(Normalize, ExcludesReviewsAndSurveys) {
  auto window = range("2023-01-01", "2023-12-31");
  auto raw = raw_paper("a", "2023-03-04");
  raw["publicationTypes"] = {"Review", "JournalArticle"};
  EXPECT_EQ(normalize_paper(raw, window, "").dropped, DropReason::kSurveyOrReview);
  raw = raw_paper("b", "2023-03-04");
  raw.erase("publicationTypes");
  raw["venue"] = "Journal of Things";
  raw["title"] = "A survey of graph learning";
  EXPECT_EQ(normalize_paper(raw, window, "").dropped, DropReason::kSurveyOrReview);
}

TEST(Normalize, MonthOnlyDateSnapsToFirst) {
  auto raw = raw_paper("a", "2023-03");
  auto n = normalize_paper(raw, range("2023-03-01", "2023-03-01"), "Computer Science");
  ASSERT_TRUE(n.record);
  EXPECT_EQ(n.record->publication_date, day("2023-03-01"));
  raw["publicationDate"] = "2023";
  EXPECT_EQ(normalize_paper(raw, range("2023-01-01", "2023-12-31"), "").dropped,
            DropReason::kNoDate);
}

TEST(Normalize, DomainAndWindowFilters) {
  auto raw = raw_paper("a", "2023-03-04", 3, {}, "Biology");
  EXPECT_EQ(normalize_paper(raw, range("2023-01-01", "2023-12-31"), "Computer Science").dropped,
            DropReason::kOutOfDomain);
  EXPECT_EQ(normalize_paper(raw, range("2024-01-01", "2024-12-31"), "Biology").dropped,
            DropReason::kOutOfWindow);
  raw["publicationTypes"] = {"Book"};
  EXPECT_EQ(normalize_paper(raw, range("2023-01-01", "2023-12-31"), "Biology").dropped,
            DropReason::kNotJournalOrConference);
}

TEST(Normalize, JsonRoundTrip) {
  auto p = record("x", "2023-05-06", 12, {"a", "b"});
  p.venue_kind = VenueKind::kConference;
  EXPECT_EQ(paper_from_json(to_json(p)), p);
}

// --- fetching -------------------------------------------------------------------

TEST(Fetch, FixtureWithMissingAbstractsKeepsThree) {
  json doc = {{"papers", json::array()}};
  for (int i = 0; i < 5; ++i) {
    auto p = raw_paper("p" + std::to_string(i), "2023-02-0" + std::to_string(i + 1));
    if (i == 1 || i == 3) p.erase("abstract");
    doc["papers"].push_back(p);
  }
  auto client = FixtureLiteratureClient::from_json(doc);
  auto got = fetch_papers("Computer Science", range("2023-01-01", "2023-12-31"), 10, *client);
  ASSERT_EQ(got.records.size(), 3u);
  EXPECT_EQ(got.stats.seen, 5u);
  EXPECT_EQ(got.stats.no_abstract, 2u);
  EXPECT_EQ(got.records[0].paper_id, "p0");
  EXPECT_EQ(got.records[2].paper_id, "p4");
}

TEST(Fetch, ZeroLimitIsAnError) {
  auto client = FixtureLiteratureClient::from_json({{"papers", json::array()}});
  EXPECT_THROW(fetch_papers("Computer Science", range("2023-01-01", "2023-12-31"), 0, *client),
               ContractError);
}

TEST(Fetch, CitingPapersRespectWindow) {
  json doc = {{"papers",
               {raw_paper("A", "2023-01-10"), raw_paper("B", "2024-04-01", 1, {"A"}),
                raw_paper("C", "2025-06-01", 1, {"A"}), raw_paper("Z", "2023-02-01")}}};
  auto client = FixtureLiteratureClient::from_json(doc);
  auto got = fetch_citing_papers("A", range("2024-03-01", "2024-11-30"), *client);
  ASSERT_EQ(got.records.size(), 1u);
  EXPECT_EQ(got.records[0].paper_id, "B");
  EXPECT_TRUE(fetch_citing_papers("Z", range("2024-03-01", "2024-11-30"), *client).records.empty());
  EXPECT_THROW(fetch_citing_papers("nope", range("2024-03-01", "2024-11-30"), *client),
               NotFoundError);
}

// --- assembly --------------------------------------------------------------------

namespace {

// Four priors; P1 and P2 have complete chains (P2 through the prior-citing
// fallback), P3 has only a new-window citer, P4 has none.
json four_prior_graph() {
  return {{"papers",
           {raw_paper("P1", "2023-01-15", 9), raw_paper("P2", "2023-02-15", 9),
            raw_paper("P3", "2023-03-15", 9), raw_paper("P4", "2023-04-15", 9),
            raw_paper("N1", "2024-04-01", 5, {"P1"}), raw_paper("N1b", "2024-05-01", 2, {"P1"}),
            raw_paper("N2", "2024-06-01", 4, {"P2"}), raw_paper("N3", "2024-07-01", 4, {"P3"}),
            raw_paper("F1", "2024-12-15", 0, {"N1"}), raw_paper("F2", "2025-01-15", 0, {"P2"}),
            raw_paper("late", "2025-05-01", 0, {"N3"})}}};
}

}  // namespace

TEST(Assemble, TwoCompleteChainsOfFour) {
  auto client = FixtureLiteratureClient::from_json(four_prior_graph());
  auto w = window_for(ym(2023, 12));
  auto priors = fetch_papers("Computer Science", w.prior_window, 100, *client).records;
  ASSERT_EQ(priors.size(), 4u);
  auto got = assemble_triplets(priors, w, *client);
  ASSERT_EQ(got.triplets.size(), 2u);
  EXPECT_EQ(got.triplets[0].prior.paper_id, "P1");
  EXPECT_EQ(got.triplets[0].new_paper.paper_id, "N1");  // higher citation count than N1b
  EXPECT_EQ(got.triplets[0].future.paper_id, "F1");
  EXPECT_EQ(got.triplets[0].future_edge, FutureEdge::kCitesNew);
  EXPECT_EQ(got.triplets[1].prior.paper_id, "P2");
  EXPECT_EQ(got.triplets[1].future.paper_id, "F2");
  EXPECT_EQ(got.triplets[1].future_edge, FutureEdge::kCitesPrior);
  ASSERT_EQ(got.skipped.size(), 2u);
  EXPECT_EQ(got.skipped[0].paper_id, "P3");
  EXPECT_EQ(got.skipped[1].paper_id, "P4");

  for (const auto& t : got.triplets) {
    EXPECT_TRUE(w.prior_window.contains(t.prior.publication_date));
    EXPECT_TRUE(w.new_window.contains(t.new_paper.publication_date));
    EXPECT_TRUE(w.future_window.contains(t.future.publication_date));
    EXPECT_NE(std::find(t.new_paper.cited_paper_ids.begin(), t.new_paper.cited_paper_ids.end(),
                        t.prior.paper_id),
              t.new_paper.cited_paper_ids.end());
  }
}

TEST(Assemble, PerPriorCapAllowsMoreTriplets) {
  auto doc = four_prior_graph();
  doc["papers"].push_back(raw_paper("F1b", "2025-01-20", 0, {"N1b"}));
  auto client = FixtureLiteratureClient::from_json(doc);
  auto w = window_for(ym(2023, 12));
  auto priors = fetch_papers("Computer Science", w.prior_window, 100, *client).records;
  EXPECT_EQ(assemble_triplets(priors, w, *client, 2).triplets.size(), 3u);
  EXPECT_EQ(assemble_triplets(priors, w, *client, 1).triplets.size(), 2u);
}

TEST(Assemble, RecordWithoutAbstractDoesNotChangeTriplets) {
  auto w = window_for(ym(2023, 12));
  auto base = FixtureLiteratureClient::from_json(four_prior_graph());
  auto priors = fetch_papers("Computer Science", w.prior_window, 100, *base).records;
  auto expected = assemble_triplets(priors, w, *base).triplets;

  auto doc = four_prior_graph();
  auto noisy = raw_paper("N9", "2024-04-02", 50, {"P1"});
  noisy.erase("abstract");
  doc["papers"].push_back(noisy);
  auto client = FixtureLiteratureClient::from_json(doc);
  EXPECT_EQ(assemble_triplets(priors, w, *client).triplets, expected);
}

TEST(Assemble, DeterministicAcrossReruns) {
  auto client = FixtureLiteratureClient::from_json(four_prior_graph());
  auto w = window_for(ym(2023, 12));
  auto priors = fetch_papers("Computer Science", w.prior_window, 100, *client).records;
  testsupport::TempDir dir;
  write_triplets(dir / "a.jsonl", assemble_triplets(priors, w, *client).triplets, "h");
  std::reverse(priors.begin(), priors.end());
  write_triplets(dir / "b.jsonl", assemble_triplets(priors, w, *client).triplets, "h");
  EXPECT_EQ(read_text(dir / "a.jsonl"), read_text(dir / "b.jsonl"));
  EXPECT_EQ(read_triplets(dir / "a.jsonl", "h").size(), 2u);
  EXPECT_THROW(read_triplets(dir / "a.jsonl", "other"), ArtifactError);
}

TEST(Assemble, PriorOutsideWindowIsAContractError) {
  auto client = FixtureLiteratureClient::from_json(four_prior_graph());
  auto w = window_for(ym(2023, 12));
  EXPECT_THROW(assemble_triplets({record("x", "2024-06-01")}, w, *client), ContractError);
}

// --- HTTP client against a local fixture server -----------------------------------

using testsupport::FixtureServer;

TEST(SemanticScholar, PaginatesSearchAndCitations) {
  FixtureServer fx;
  std::atomic<int> search_calls{0};
  std::string seen_key;
  fx.server.Get("/graph/v1/paper/search/bulk", [&](const httplib::Request& req, httplib::Response& res) {
    ++search_calls;
    seen_key = req.get_header_value("x-api-key");
    EXPECT_EQ(req.get_param_value("fieldsOfStudy"), "Computer Science");
    EXPECT_EQ(req.get_param_value("publicationDateOrYear"), "2023-01-01:2023-12-31");
    json page;
    if (!req.has_param("token")) {
      page = {{"data", {raw_paper("a", "2023-01-02"), raw_paper("b", "2023-01-03")}},
              {"token", "next"}};
    } else {
      page = {{"data", {raw_paper("c", "2023-01-04")}}, {"token", nullptr}};
    }
    res.set_content(page.dump(), "application/json");
  });
  fx.server.Get("/graph/v1/paper/a/citations", [&](const httplib::Request& req, httplib::Response& res) {
    json page;
    if (req.get_param_value("offset") == "0") {
      page = {{"data", {{{"citingPaper", raw_paper("in", "2024-04-01", 1, {"a"})}}}}, {"next", 1}};
    } else {
      page = {{"data", {{{"citingPaper", raw_paper("out", "2026-04-01", 1, {"a"})}}}}};
    }
    res.set_content(page.dump(), "application/json");
  });
  fx.server.Get("/graph/v1/paper/missing", [](const httplib::Request&, httplib::Response& res) {
    res.status = 404;
    res.set_content("{\"error\":\"not found\"}", "application/json");
  });

  SemanticScholarConfig cfg;
  cfg.base_url = fx.url("/graph/v1");
  cfg.api_key = "secret";
  cfg.retry.base_delay = std::chrono::milliseconds(1);
  SemanticScholarClient client(cfg);

  auto papers = client.search("Computer Science", range("2023-01-01", "2023-12-31"), 10);
  ASSERT_EQ(papers.size(), 3u);
  EXPECT_EQ(search_calls.load(), 2);
  EXPECT_EQ(seen_key, "secret");
  EXPECT_EQ(client.search("Computer Science", range("2023-01-01", "2023-12-31"), 2).size(), 2u);

  auto citers = client.citations("a", range("2024-03-01", "2024-11-30"));
  ASSERT_EQ(citers.size(), 1u);
  EXPECT_EQ(citers[0].at("paperId"), "in");
  EXPECT_THROW(client.paper("missing"), NotFoundError);
}

TEST(SemanticScholar, RetriesThenSurfacesQuota) {
  FixtureServer fx;
  std::atomic<int> calls{0};
  fx.server.Get("/paper/p", [&](const httplib::Request&, httplib::Response& res) {
    if (++calls < 3) {
      res.status = 503;
      return;
    }
    res.set_content(raw_paper("p", "2023-01-01").dump(), "application/json");
  });
  fx.server.Get("/paper/q", [&](const httplib::Request&, httplib::Response& res) {
    res.status = 429;
    res.set_header("Retry-After", "0");
  });
  SemanticScholarConfig cfg;
  cfg.base_url = fx.url();
  cfg.retry.base_delay = std::chrono::milliseconds(1);
  SemanticScholarClient client(cfg);
  EXPECT_EQ(client.paper("p").at("paperId"), "p");
  EXPECT_EQ(calls.load(), 3);
  EXPECT_THROW(client.paper("q"), QuotaError);
}

TEST(SemanticScholar, UnreachableIsRetryable) {
  SemanticScholarConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";
  cfg.retry.max_attempts = 2;
  cfg.retry.base_delay = std::chrono::milliseconds(1);
  SemanticScholarClient client(cfg);
  EXPECT_THROW(client.paper("x"), TransportError);
}

TEST(CachingLiterature, ReplaysOffline) {
  testsupport::TempDir dir;
  auto inner = FixtureLiteratureClient::from_json(four_prior_graph());
  auto w = window_for(ym(2023, 12));
  {
    CachingLiteratureClient cached(inner, DiskCache(dir.path()));
    EXPECT_EQ(cached.search("Computer Science", w.prior_window, 100).size(), 4u);
    EXPECT_EQ(cached.citations("P1", w.new_window).size(), 2u);
  }
  // An empty inner graph: answers must come from disk.
  auto empty = FixtureLiteratureClient::from_json({{"papers", json::array()}});
  CachingLiteratureClient replay(empty, DiskCache(dir.path()));
  EXPECT_EQ(replay.search("Computer Science", w.prior_window, 100).size(), 4u);
  EXPECT_EQ(replay.citations("P1", w.new_window).size(), 2u);
  EXPECT_THROW(replay.citations("P2", w.new_window), NotFoundError);
}
