#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "claimshift/core/concurrency.hpp"
#include "claimshift/core/date.hpp"
#include "claimshift/core/disk_cache.hpp"
#include "claimshift/core/jsonl.hpp"

namespace claimshift::corpus {

// Raw paper objects in Semantic Scholar Graph API shape (paperId, title,
// abstract, publicationDate, publicationTypes, citationCount,
// fieldsOfStudy, ...).
class LiteratureClient {
 public:
  virtual ~LiteratureClient() = default;
  // Papers in a field of study published inside window, at most limit.
  virtual std::vector<json> search(const std::string& domain, const DateRange& window,
                                   std::size_t limit) = 0;
  // Throws NotFoundError for unknown ids.
  virtual json paper(const std::string& paper_id) = 0;
  // Papers citing paper_id, optionally pre-filtered to window. Throws
  // NotFoundError for unknown ids.
  virtual std::vector<json> citations(const std::string& paper_id, const DateRange& window) = 0;
};

using LiteratureClientPtr = std::shared_ptr<LiteratureClient>;

struct SemanticScholarConfig {
  std::string base_url = "https://api.semanticscholar.org/graph/v1";
  std::string api_key;  // sent as x-api-key
  std::size_t page_size = 100;
  RetryPolicy retry;
  std::shared_ptr<TokenBucket> budget;
};

class SemanticScholarClient : public LiteratureClient {
 public:
  explicit SemanticScholarClient(SemanticScholarConfig config);
  std::vector<json> search(const std::string& domain, const DateRange& window,
                           std::size_t limit) override;
  json paper(const std::string& paper_id) override;
  std::vector<json> citations(const std::string& paper_id, const DateRange& window) override;

  static constexpr const char* kFields =
      "paperId,title,abstract,publicationDate,year,publicationTypes,venue,journal,"
      "citationCount,fieldsOfStudy,s2FieldsOfStudy";

 private:
  json get(const std::string& path, const std::map<std::string, std::string>& params);
  SemanticScholarConfig config_;
};

// In-memory citation graph loaded from {"papers": [...]}; each paper may
// carry "references": [ids] from which the citation edges are derived.
class FixtureLiteratureClient : public LiteratureClient {
 public:
  static std::shared_ptr<FixtureLiteratureClient> from_file(const std::filesystem::path& path);
  static std::shared_ptr<FixtureLiteratureClient> from_json(const json& doc);

  std::vector<json> search(const std::string& domain, const DateRange& window,
                           std::size_t limit) override;
  json paper(const std::string& paper_id) override;
  std::vector<json> citations(const std::string& paper_id, const DateRange& window) override;

 private:
  std::vector<json> papers_;
  std::map<std::string, std::size_t> index_;
};

// Caches every response on disk keyed by (endpoint, query, window) so a run
// can be replayed offline.
class CachingLiteratureClient : public LiteratureClient {
 public:
  CachingLiteratureClient(LiteratureClientPtr inner, DiskCache cache);
  std::vector<json> search(const std::string& domain, const DateRange& window,
                           std::size_t limit) override;
  json paper(const std::string& paper_id) override;
  std::vector<json> citations(const std::string& paper_id, const DateRange& window) override;

 private:
  LiteratureClientPtr inner_;
  DiskCache cache_;
};

}  // namespace claimshift::corpus
