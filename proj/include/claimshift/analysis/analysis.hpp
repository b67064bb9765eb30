#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "claimshift/core/concurrency.hpp"
#include "claimshift/core/jsonl.hpp"
#include "claimshift/core/stopwords.hpp"
#include "claimshift/corpus/paper.hpp"
#include "claimshift/metrics/metrics.hpp"

namespace claimshift::analysis {

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

// Splits on whitespace and trims punctuation from both ends of each piece.
class WhitespaceTokenizer : public Tokenizer {
 public:
  std::vector<std::string> tokenize(std::string_view text) const override;
  std::string name() const override { return "whitespace"; }
};

// Runs an external program with the text on stdin; it prints one token per
// line. Lets a real subword tokenizer plug in without linking it.
class CommandTokenizer : public Tokenizer {
 public:
  explicit CommandTokenizer(std::string command) : command_(std::move(command)) {}
  std::vector<std::string> tokenize(std::string_view text) const override;
  std::string name() const override { return "command:" + command_; }

 private:
  std::string command_;
};

std::unique_ptr<Tokenizer> make_tokenizer(const std::string& spec);  // "whitespace" | "command:<cmd>"

double avg_citation_count(const std::vector<corpus::PaperRecord>& papers);

bool is_numeric_token(std::string_view token);
bool is_punctuation_token(std::string_view token);

struct RareTokens {
  std::vector<std::pair<std::string, std::int64_t>> tokens;  // (token, frequency in the corpus)
  bool short_list = false;  // fewer than n tokens survived filtering
};

// Counts are case-sensitive; the stop-word test is not. Ascending frequency,
// ties broken by byte order.
RareTokens rare_tokens(const std::vector<std::string>& abstracts, const Tokenizer& tokenizer,
                       std::size_t n = 100,
                       const std::set<std::string>& stopwords = default_stopwords());

class NgramCounter {
 public:
  virtual ~NgramCounter() = default;
  virtual std::int64_t count(const std::string& query) = 0;
};

struct InfiniGramConfig {
  std::string base_url = "https://api.infini-gram.io";
  std::string index = "v4_dolma-v1_7_llama";
  int timeout_seconds = 60;
  RetryPolicy retry;
  std::shared_ptr<TokenBucket> budget;
};

// POST {"index", "query_type": "count", "query"} -> {"count": n}.
class InfiniGramClient : public NgramCounter {
 public:
  explicit InfiniGramClient(InfiniGramConfig config) : config_(std::move(config)) {}
  std::int64_t count(const std::string& query) override;

 private:
  InfiniGramConfig config_;
};

class FixtureNgramCounter : public NgramCounter {
 public:
  explicit FixtureNgramCounter(std::map<std::string, std::int64_t> counts)
      : counts_(std::move(counts)) {}
  std::int64_t count(const std::string& query) override;  // NotFoundError if absent

 private:
  std::map<std::string, std::int64_t> counts_;
};

struct Occurrence {
  double mean = 0.0;
  std::vector<std::pair<std::string, std::int64_t>> counts;
  std::vector<std::string> skipped;
};

// Tokens whose query fails are skipped with a warning; throws Error if all fail.
Occurrence pretraining_occurrence(const std::vector<std::string>& tokens, NgramCounter& service,
                                  std::size_t concurrency = 4);

// nullopt when either side has zero variance.
std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys);

struct DomainProfile {
  std::string domain;
  std::size_t paper_count = 0;
  double avg_citation_count = 0.0;
  std::vector<std::pair<std::string, std::int64_t>> rare_tokens;  // (token, pretraining count)
  std::optional<double> avg_token_occurrence;
  std::vector<std::string> warnings;
};

DomainProfile profile_domain(const std::string& domain,
                             const std::vector<corpus::PaperRecord>& papers,
                             const Tokenizer& tokenizer, NgramCounter* service,
                             std::size_t n_rare = 100);

struct Correlation {
  std::string factor;
  std::string metric;
  std::optional<double> r;
  std::size_t n = 0;
};

// Pairs every profile factor with the per-domain reports of one task. Domains
// where the metric is undefined are left out of that pair.
std::vector<Correlation> correlate(const std::vector<DomainProfile>& profiles,
                                   const std::vector<metrics::MetricReport>& reports, Task task);

json to_json(const DomainProfile& p);
DomainProfile profile_from_json(const json& j);
json to_json(const Correlation& c);

}  // namespace claimshift::analysis
