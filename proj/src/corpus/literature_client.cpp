#include "claimshift/corpus/literature_client.hpp"

#include <algorithm>

#include "claimshift/core/errors.hpp"
#include "claimshift/endpoints/http.hpp"
#include "httplib.h"

namespace claimshift::corpus {

namespace {

std::string window_param(const DateRange& w) {
  return format_date(w.first) + ":" + format_date(w.last);
}

bool in_window(const json& raw, const DateRange& w) {
  if (!raw.contains("publicationDate") || !raw.at("publicationDate").is_string()) return false;
  auto d = parse_date(raw.at("publicationDate").get<std::string>());
  return d && w.contains(*d);
}

bool has_field(const json& raw, const std::string& domain) {
  if (raw.contains("fieldsOfStudy") && raw.at("fieldsOfStudy").is_array())
    for (const auto& f : raw.at("fieldsOfStudy"))
      if (f == domain) return true;
  if (raw.contains("s2FieldsOfStudy") && raw.at("s2FieldsOfStudy").is_array())
    for (const auto& f : raw.at("s2FieldsOfStudy"))
      if (f.is_object() && f.value("category", std::string{}) == domain) return true;
  return false;
}

}  // namespace

// --- SemanticScholarClient -------------------------------------------------

SemanticScholarClient::SemanticScholarClient(SemanticScholarConfig config)
    : config_(std::move(config)) {}

json SemanticScholarClient::get(const std::string& path,
                                const std::map<std::string, std::string>& params) {
  auto url = endpoints::split_url(config_.base_url);
  httplib::Params query(params.begin(), params.end());
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("x-api-key", config_.api_key);
  return with_retries(config_.retry, [&] {
    if (config_.budget) config_.budget->acquire();
    httplib::Client cli(url.origin);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(60);
    auto res = cli.Get(url.prefix + path, query, headers);
    if (!res)
      throw TransportError("literature API unreachable: " + httplib::to_string(res.error()));
    endpoints::raise_for_status(res->status, res->body, "literature API " + path,
                                res->get_header_value("Retry-After"));
    try {
      return json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw TransportError("malformed literature API response: " + std::string(e.what()));
    }
  });
}

std::vector<json> SemanticScholarClient::search(const std::string& domain, const DateRange& window,
                                                std::size_t limit) {
  std::vector<json> out;
  std::string token;
  while (out.size() < limit) {
    std::map<std::string, std::string> params{
        {"fields", kFields},
        {"fieldsOfStudy", domain},
        {"publicationDateOrYear", window_param(window)},
        {"publicationTypes", "JournalArticle,Conference"}};
    if (!token.empty()) params["token"] = token;
    auto page = get("/paper/search/bulk", params);
    for (const auto& p : page.value("data", json::array())) {
      if (out.size() >= limit) break;
      out.push_back(p);
    }
    if (!page.contains("token") || page.at("token").is_null()) break;
    token = page.at("token").get<std::string>();
    if (page.value("data", json::array()).empty()) break;
  }
  return out;
}

json SemanticScholarClient::paper(const std::string& paper_id) {
  return get("/paper/" + paper_id, {{"fields", kFields}});
}

std::vector<json> SemanticScholarClient::citations(const std::string& paper_id,
                                                   const DateRange& window) {
  std::vector<json> out;
  std::size_t offset = 0;
  for (;;) {
    auto page = get("/paper/" + paper_id + "/citations",
                    {{"fields", kFields},
                     {"offset", std::to_string(offset)},
                     {"limit", std::to_string(config_.page_size)}});
    auto data = page.value("data", json::array());
    for (const auto& c : data) {
      if (!c.contains("citingPaper")) continue;
      const auto& p = c.at("citingPaper");
      if (in_window(p, window)) out.push_back(p);
    }
    if (!page.contains("next") || page.at("next").is_null() || data.empty()) break;
    offset = page.at("next").get<std::size_t>();
  }
  return out;
}

// --- FixtureLiteratureClient -----------------------------------------------

std::shared_ptr<FixtureLiteratureClient> FixtureLiteratureClient::from_file(
    const std::filesystem::path& path) {
  return from_json(read_json(path));
}

std::shared_ptr<FixtureLiteratureClient> FixtureLiteratureClient::from_json(const json& doc) {
  auto c = std::make_shared<FixtureLiteratureClient>();
  for (const auto& p : doc.at("papers")) {
    auto id = p.at("paperId").get<std::string>();
    if (c->index_.count(id)) throw ContractError("duplicate fixture paper " + id);
    c->index_[id] = c->papers_.size();
    c->papers_.push_back(p);
  }
  return c;
}

std::vector<json> FixtureLiteratureClient::search(const std::string& domain,
                                                  const DateRange& window, std::size_t limit) {
  std::vector<json> out;
  for (const auto& p : papers_) {
    if (out.size() >= limit) break;
    if (has_field(p, domain) && in_window(p, window)) out.push_back(p);
  }
  return out;
}

json FixtureLiteratureClient::paper(const std::string& paper_id) {
  auto it = index_.find(paper_id);
  if (it == index_.end()) throw NotFoundError("paper not found: " + paper_id);
  return papers_[it->second];
}

std::vector<json> FixtureLiteratureClient::citations(const std::string& paper_id,
                                                     const DateRange& window) {
  if (!index_.count(paper_id)) throw NotFoundError("paper not found: " + paper_id);
  std::vector<json> out;
  for (const auto& p : papers_) {
    if (!p.contains("references")) continue;
    const auto& refs = p.at("references");
    if (std::find(refs.begin(), refs.end(), paper_id) != refs.end() && in_window(p, window))
      out.push_back(p);
  }
  return out;
}

// --- CachingLiteratureClient -----------------------------------------------

CachingLiteratureClient::CachingLiteratureClient(LiteratureClientPtr inner, DiskCache cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::vector<json> CachingLiteratureClient::search(const std::string& domain,
                                                  const DateRange& window, std::size_t limit) {
  json key = {{"endpoint", "search"}, {"query", domain}, {"limit", limit},
              {"window", window_param(window)}};
  if (auto hit = cache_.get(key.dump())) return json::parse(*hit).get<std::vector<json>>();
  auto out = inner_->search(domain, window, limit);
  cache_.put(key.dump(), json(out).dump());
  return out;
}

json CachingLiteratureClient::paper(const std::string& paper_id) {
  json key = {{"endpoint", "paper"}, {"query", paper_id}, {"window", ""}};
  if (auto hit = cache_.get(key.dump())) return json::parse(*hit);
  auto out = inner_->paper(paper_id);
  cache_.put(key.dump(), out.dump());
  return out;
}

std::vector<json> CachingLiteratureClient::citations(const std::string& paper_id,
                                                     const DateRange& window) {
  json key = {{"endpoint", "citations"}, {"query", paper_id}, {"window", window_param(window)}};
  if (auto hit = cache_.get(key.dump())) return json::parse(*hit).get<std::vector<json>>();
  auto out = inner_->citations(paper_id, window);
  cache_.put(key.dump(), json(out).dump());
  return out;
}

}  // namespace claimshift::corpus
