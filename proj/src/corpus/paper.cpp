#include "claimshift/corpus/paper.hpp"

#include <algorithm>

#include "claimshift/core/errors.hpp"
#include "claimshift/core/text.hpp"

namespace claimshift::corpus {

std::string PaperTriplet::id() const {
  return prior.paper_id + "|" + new_paper.paper_id + "|" + future.paper_id;
}

const PaperRecord& PaperTriplet::at(Epoch e) const {
  switch (e) {
    case Epoch::kPrior: return prior;
    case Epoch::kNew: return new_paper;
    case Epoch::kFuture: return future;
  }
  return prior;
}

void FilterStats::count(DropReason r) {
  switch (r) {
    case DropReason::kNoAbstract: ++no_abstract; break;
    case DropReason::kNoCitationInfo: ++no_citation_info; break;
    case DropReason::kSurveyOrReview: ++survey_or_review; break;
    case DropReason::kNotJournalOrConference: ++not_journal_or_conference; break;
    case DropReason::kNoDate: ++no_date; break;
    case DropReason::kOutOfWindow: ++out_of_window; break;
    case DropReason::kOutOfDomain: ++out_of_domain; break;
  }
}

FilterStats& FilterStats::operator+=(const FilterStats& o) {
  seen += o.seen;
  kept += o.kept;
  no_abstract += o.no_abstract;
  no_citation_info += o.no_citation_info;
  survey_or_review += o.survey_or_review;
  not_journal_or_conference += o.not_journal_or_conference;
  no_date += o.no_date;
  out_of_window += o.out_of_window;
  out_of_domain += o.out_of_domain;
  return *this;
}

bool looks_like_survey(const std::string& title) {
  auto t = text::to_lower(title);
  return t.find("survey") != std::string::npos || t.find("review: ") != std::string::npos;
}

namespace {

std::string str_or_empty(const json& raw, const char* key) {
  if (!raw.contains(key) || !raw.at(key).is_string()) return {};
  return raw.at(key).get<std::string>();
}

std::vector<std::string> fields_of(const json& raw) {
  std::vector<std::string> out;
  if (raw.contains("fieldsOfStudy") && raw.at("fieldsOfStudy").is_array())
    for (const auto& f : raw.at("fieldsOfStudy"))
      if (f.is_string()) out.push_back(f.get<std::string>());
  if (raw.contains("s2FieldsOfStudy") && raw.at("s2FieldsOfStudy").is_array())
    for (const auto& f : raw.at("s2FieldsOfStudy"))
      if (f.is_object() && f.contains("category") && f.at("category").is_string())
        out.push_back(f.at("category").get<std::string>());
  return out;
}

std::optional<VenueKind> venue_of(const json& raw) {
  if (raw.contains("publicationTypes") && raw.at("publicationTypes").is_array() &&
      !raw.at("publicationTypes").empty()) {
    bool journal = false, conference = false;
    for (const auto& t : raw.at("publicationTypes")) {
      if (!t.is_string()) continue;
      journal = journal || t == "JournalArticle";
      conference = conference || t == "Conference";
    }
    if (conference) return VenueKind::kConference;
    if (journal) return VenueKind::kJournal;
    return std::nullopt;
  }
  auto venue = text::to_lower(str_or_empty(raw, "venue"));
  for (const char* kw : {"conference", "proceedings", "workshop", "symposium"})
    if (venue.find(kw) != std::string::npos) return VenueKind::kConference;
  if (!venue.empty() || (raw.contains("journal") && raw.at("journal").is_object()))
    return VenueKind::kJournal;
  return std::nullopt;
}

bool is_review_type(const json& raw) {
  if (!raw.contains("publicationTypes") || !raw.at("publicationTypes").is_array()) return false;
  for (const auto& t : raw.at("publicationTypes"))
    if (t.is_string() && (t == "Review" || t == "Survey")) return true;
  return false;
}

bool has_types(const json& raw) {
  return raw.contains("publicationTypes") && raw.at("publicationTypes").is_array() &&
         !raw.at("publicationTypes").empty();
}

}  // namespace

Normalized normalize_paper(const json& raw, const DateRange& window, const std::string& domain) {
  auto drop = [](DropReason r) { return Normalized{std::nullopt, r}; };
  PaperRecord p;
  p.paper_id = str_or_empty(raw, "paperId");
  p.title = str_or_empty(raw, "title");
  p.abstract = text::trim(str_or_empty(raw, "abstract"));
  if (p.abstract.empty()) return drop(DropReason::kNoAbstract);
  if (!raw.contains("citationCount") || !raw.at("citationCount").is_number_integer())
    return drop(DropReason::kNoCitationInfo);
  p.citation_count = raw.at("citationCount").get<std::int64_t>();
  if (p.citation_count < 0) return drop(DropReason::kNoCitationInfo);
  if (is_review_type(raw) || (!has_types(raw) && looks_like_survey(p.title)))
    return drop(DropReason::kSurveyOrReview);
  auto venue = venue_of(raw);
  if (!venue) return drop(DropReason::kNotJournalOrConference);
  p.venue_kind = *venue;
  auto date = parse_date(str_or_empty(raw, "publicationDate"));
  if (!date) return drop(DropReason::kNoDate);
  p.publication_date = *date;
  if (!window.contains(p.publication_date)) return drop(DropReason::kOutOfWindow);

  auto fields = fields_of(raw);
  if (!domain.empty()) {
    if (std::find(fields.begin(), fields.end(), domain) == fields.end())
      return drop(DropReason::kOutOfDomain);
    p.domain = domain;
  } else {
    for (const auto& f : fields)
      if (is_known_domain(f)) {
        p.domain = f;
        break;
      }
  }
  if (raw.contains("references") && raw.at("references").is_array())
    for (const auto& r : raw.at("references")) {
      if (r.is_string()) p.cited_paper_ids.push_back(r.get<std::string>());
      else if (r.is_object() && r.contains("paperId") && r.at("paperId").is_string())
        p.cited_paper_ids.push_back(r.at("paperId").get<std::string>());
    }
  return Normalized{std::move(p), std::nullopt};
}

json to_json(const PaperRecord& p) {
  return {{"paper_id", p.paper_id},
          {"title", p.title},
          {"abstract", p.abstract},
          {"publication_date", format_date(p.publication_date)},
          {"venue_kind", p.venue_kind == VenueKind::kJournal ? "journal" : "conference"},
          {"domain", p.domain},
          {"citation_count", p.citation_count},
          {"cited_paper_ids", p.cited_paper_ids}};
}

PaperRecord paper_from_json(const json& j) {
  PaperRecord p;
  p.paper_id = j.at("paper_id").get<std::string>();
  p.title = j.at("title").get<std::string>();
  p.abstract = j.at("abstract").get<std::string>();
  p.publication_date = parse_date_or_throw(j.at("publication_date").get<std::string>());
  auto venue = j.at("venue_kind").get<std::string>();
  if (venue != "journal" && venue != "conference")
    throw ArtifactError("bad venue_kind: " + venue);
  p.venue_kind = venue == "journal" ? VenueKind::kJournal : VenueKind::kConference;
  p.domain = j.at("domain").get<std::string>();
  p.citation_count = j.at("citation_count").get<std::int64_t>();
  p.cited_paper_ids = j.at("cited_paper_ids").get<std::vector<std::string>>();
  return p;
}

json to_json(const PaperTriplet& t) {
  return {{"triplet_id", t.id()},
          {"prior", to_json(t.prior)},
          {"new", to_json(t.new_paper)},
          {"future", to_json(t.future)},
          {"future_edge", t.future_edge == FutureEdge::kCitesNew ? "cites_new" : "cites_prior"}};
}

PaperTriplet triplet_from_json(const json& j) {
  PaperTriplet t;
  t.prior = paper_from_json(j.at("prior"));
  t.new_paper = paper_from_json(j.at("new"));
  t.future = paper_from_json(j.at("future"));
  t.future_edge =
      j.at("future_edge").get<std::string>() == "cites_new" ? FutureEdge::kCitesNew
                                                            : FutureEdge::kCitesPrior;
  return t;
}

void write_papers(const std::filesystem::path& path, const std::vector<PaperRecord>& papers,
                  const std::string& config_hash) {
  std::vector<json> rows;
  rows.reserve(papers.size());
  for (const auto& p : papers) rows.push_back(stamp(to_json(p), config_hash));
  write_jsonl(path, rows);
}

std::vector<PaperRecord> read_papers(const std::filesystem::path& path,
                                     const std::string& config_hash) {
  auto rows = read_jsonl(path);
  check_stamps(rows, config_hash, path.string());
  std::vector<PaperRecord> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(paper_from_json(r));
  return out;
}

void write_triplets(const std::filesystem::path& path, const std::vector<PaperTriplet>& triplets,
                    const std::string& config_hash) {
  std::vector<json> rows;
  rows.reserve(triplets.size());
  for (const auto& t : triplets) rows.push_back(stamp(to_json(t), config_hash));
  write_jsonl(path, rows);
}

std::vector<PaperTriplet> read_triplets(const std::filesystem::path& path,
                                        const std::string& config_hash) {
  auto rows = read_jsonl(path);
  check_stamps(rows, config_hash, path.string());
  std::vector<PaperTriplet> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(triplet_from_json(r));
  return out;
}

}  // namespace claimshift::corpus
