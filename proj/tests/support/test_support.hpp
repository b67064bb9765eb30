#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "claimshift/core/date.hpp"
#include "claimshift/core/jsonl.hpp"
#include "claimshift/corpus/paper.hpp"

namespace testsupport {

namespace fs = std::filesystem;
using claimshift::json;

inline fs::path data_dir() { return fs::path(CLAIMSHIFT_TEST_DATA); }
inline fs::path e2e_dir() { return data_dir() / "e2e"; }

// Removed with its contents on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("claimshift-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline claimshift::Date day(const char* s) { return claimshift::parse_date_or_throw(s); }

inline claimshift::corpus::PaperRecord record(std::string id, const char* date,
                                              std::int64_t citations = 0,
                                              std::vector<std::string> refs = {},
                                              std::string abstract = "Some abstract text.") {
  claimshift::corpus::PaperRecord p;
  p.paper_id = id;
  p.title = "Title of " + id;
  p.abstract = std::move(abstract);
  p.publication_date = day(date);
  p.domain = "Computer Science";
  p.citation_count = citations;
  p.cited_paper_ids = std::move(refs);
  return p;
}

// Semantic-Scholar-shaped raw paper.
inline json raw_paper(const std::string& id, const std::string& date, std::int64_t citations = 3,
                      std::vector<std::string> refs = {},
                      const std::string& field = "Computer Science") {
  return {{"paperId", id},
          {"title", "Paper " + id},
          {"abstract", "Abstract of " + id + " with a finding."},
          {"publicationDate", date},
          {"publicationTypes", {"JournalArticle"}},
          {"citationCount", citations},
          {"fieldsOfStudy", {field}},
          {"references", refs}};
}

}  // namespace testsupport
