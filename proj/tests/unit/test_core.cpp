#include <gtest/gtest.h>

#include <atomic>

#include "claimshift/core/concurrency.hpp"
#include "claimshift/core/date.hpp"
#include "claimshift/core/disk_cache.hpp"
#include "claimshift/core/errors.hpp"
#include "claimshift/core/hashing.hpp"
#include "claimshift/core/jsonl.hpp"
#include "claimshift/core/stopwords.hpp"
#include "claimshift/core/text.hpp"
#include "claimshift/core/types.hpp"
#include "test_support.hpp"

using namespace claimshift;

TEST(Dates, ParseAndFormat) {
  EXPECT_EQ(format_date(parse_date_or_throw("2024-02-29")), "2024-02-29");
  EXPECT_EQ(format_date(*parse_date("2024-02")), "2024-02-01");
  EXPECT_FALSE(parse_date("2024"));
  EXPECT_FALSE(parse_date("2023-02-29"));
  EXPECT_FALSE(parse_date("2023-13-01"));
  EXPECT_FALSE(parse_date("garbage!!"));
  EXPECT_THROW(parse_date_or_throw(""), ContractError);
  auto ym = *parse_year_month("2023-12");
  EXPECT_EQ(format_year_month(ym), "2023-12");
  EXPECT_EQ(format_date(last_day(*parse_year_month("2024-02"))), "2024-02-29");
  EXPECT_EQ(month_distance(ym, *parse_year_month("2024-03")), 3);
  EXPECT_EQ(format_date(add_days(parse_date_or_throw("2024-11-30"), 1)), "2024-12-01");
}

TEST(Dates, RangeMembership) {
  DateRange r{parse_date_or_throw("2024-01-01"), parse_date_or_throw("2024-01-31")};
  EXPECT_TRUE(r.contains(parse_date_or_throw("2024-01-01")));
  EXPECT_TRUE(r.contains(parse_date_or_throw("2024-01-31")));
  EXPECT_FALSE(r.contains(parse_date_or_throw("2024-02-01")));
  EXPECT_FALSE(r.empty());
  EXPECT_TRUE((DateRange{r.last, r.first}).empty());
}

TEST(Text, Helpers) {
  EXPECT_EQ(text::trim("  a b \n"), "a b");
  EXPECT_EQ(text::word_count("one  two\tthree"), 3u);
  EXPECT_EQ(text::render("{a} and {b} and {c}", {{"a", "x"}, {"b", "{a}"}}), "x and {a} and {c}");
  EXPECT_TRUE(text::contains_icase("Reference PAPER", "paper"));
  EXPECT_EQ(text::word_tokens("Hello, World-2!"), (std::vector<std::string>{"hello", "world", "2"}));
}

TEST(Hashing, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  testsupport::TempDir dir;
  write_text_atomic(dir / "f", "abc");
  EXPECT_EQ(sha256_file(dir / "f"), sha256_hex("abc"));
}

TEST(Jsonl, StampsAreChecked) {
  testsupport::TempDir dir;
  std::vector<json> rows = {stamp({{"a", 1}}, "h1"), stamp({{"a", 2}}, "h1")};
  write_jsonl(dir / "x.jsonl", rows);
  auto back = read_jsonl(dir / "x.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_NO_THROW(check_stamps(back, "h1", "x"));
  EXPECT_NO_THROW(check_stamps(back, "", "x"));
  EXPECT_THROW(check_stamps(back, "h2", "x"), ArtifactError);
  back.push_back(stamp({{"a", 3}}, "h2"));
  EXPECT_THROW(check_stamps(back, "", "x"), ArtifactError);
  json old = {{"a", 1}, {"schema_version", 0}, {"config_hash", "h1"}};
  EXPECT_THROW(check_stamps({old}, "h1", "x"), ArtifactError);
}

TEST(DiskCacheTest, PutGet) {
  testsupport::TempDir dir;
  DiskCache cache(dir / "c");
  EXPECT_FALSE(cache.get("k"));
  cache.put("k", "v");
  EXPECT_EQ(cache.get("k"), "v");
  DiskCache again(dir / "c");
  EXPECT_EQ(again.get("k"), "v");
}

TEST(Concurrency, ParallelForCoversAllAndRethrows) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw ContractError("boom");
                            }),
               ContractError);
}

TEST(Concurrency, RetriesOnlyTransportErrors) {
  RetryPolicy p;
  p.base_delay = std::chrono::milliseconds(1);
  int calls = 0;
  EXPECT_EQ(with_retries(p,
                         [&] {
                           if (++calls < 3) throw TransportError("flaky");
                           return 5;
                         }),
            5);
  EXPECT_EQ(calls, 3);
  calls = 0;
  EXPECT_THROW(with_retries(p, [&]() -> int { ++calls; throw TransportError("down"); }),
               TransportError);
  EXPECT_EQ(calls, 3);
  calls = 0;
  EXPECT_THROW(with_retries(p, [&]() -> int { ++calls; throw ContractError("bad"); }),
               ContractError);
  EXPECT_EQ(calls, 1);
}

TEST(Types, NamesRoundTrip) {
  for (auto e : kAllEpochs) EXPECT_EQ(parse_epoch(to_string(e)), e);
  for (auto s : kAllStates) EXPECT_EQ(parse_state(to_string(s)), s);
  EXPECT_EQ(parse_label("SUPPORT"), Label::kSupport);
  EXPECT_THROW(parse_label("MAYBE"), ContractError);
  EXPECT_TRUE(is_known_domain("Materials Science"));
  EXPECT_FALSE(is_known_domain("Astrology"));
}

TEST(Stopwords, ParsingSkipsCommentsAndBlanks) {
  auto s = parse_stopwords("# header\nthe\n\nAnd\n  of  \n");
  EXPECT_EQ(s, (std::set<std::string>{"the", "and", "of"}));
  EXPECT_TRUE(default_stopwords().count("the"));
}
