#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "claimshift/core/date.hpp"
#include "claimshift/core/jsonl.hpp"
#include "claimshift/core/types.hpp"

namespace claimshift::corpus {

enum class VenueKind { kJournal, kConference };

struct PaperRecord {
  std::string paper_id;
  std::string title;
  std::string abstract;
  Date publication_date;
  VenueKind venue_kind = VenueKind::kJournal;
  std::string domain;
  std::int64_t citation_count = 0;
  std::vector<std::string> cited_paper_ids;

  bool operator==(const PaperRecord&) const = default;
};

enum class FutureEdge { kCitesNew, kCitesPrior };

struct PaperTriplet {
  PaperRecord prior;
  PaperRecord new_paper;
  PaperRecord future;
  FutureEdge future_edge = FutureEdge::kCitesNew;

  std::string id() const;
  const PaperRecord& at(Epoch e) const;
  bool operator==(const PaperTriplet&) const = default;
};

// Why a raw literature-API record was dropped.
enum class DropReason {
  kNoAbstract,
  kNoCitationInfo,
  kSurveyOrReview,
  kNotJournalOrConference,
  kNoDate,
  kOutOfWindow,
  kOutOfDomain,
};

struct FilterStats {
  std::size_t seen = 0;
  std::size_t kept = 0;
  std::size_t no_abstract = 0;
  std::size_t no_citation_info = 0;
  std::size_t survey_or_review = 0;
  std::size_t not_journal_or_conference = 0;
  std::size_t no_date = 0;
  std::size_t out_of_window = 0;
  std::size_t out_of_domain = 0;

  void count(DropReason r);
  FilterStats& operator+=(const FilterStats& o);
};

// Converts a Semantic-Scholar-shaped paper object. Returns the drop reason
// instead when the record fails a filter. domain is matched against
// fieldsOfStudy / s2FieldsOfStudy when non-empty.
struct Normalized {
  std::optional<PaperRecord> record;
  std::optional<DropReason> dropped;
};
Normalized normalize_paper(const json& raw, const DateRange& window, const std::string& domain);

bool looks_like_survey(const std::string& title);

json to_json(const PaperRecord& p);
PaperRecord paper_from_json(const json& j);
json to_json(const PaperTriplet& t);
PaperTriplet triplet_from_json(const json& j);

void write_papers(const std::filesystem::path& path, const std::vector<PaperRecord>& papers,
                  const std::string& config_hash);
std::vector<PaperRecord> read_papers(const std::filesystem::path& path,
                                     const std::string& config_hash);
void write_triplets(const std::filesystem::path& path, const std::vector<PaperTriplet>& triplets,
                    const std::string& config_hash);
std::vector<PaperTriplet> read_triplets(const std::filesystem::path& path,
                                        const std::string& config_hash);

}  // namespace claimshift::corpus
