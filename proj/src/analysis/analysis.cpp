#include "claimshift/analysis/analysis.hpp"

#include <stdio.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>

#include <spdlog/spdlog.h>

#include "claimshift/core/errors.hpp"
#include "claimshift/core/text.hpp"
#include "claimshift/endpoints/http.hpp"
#include "httplib.h"

namespace claimshift::analysis {

namespace {
bool is_punct(unsigned char c) { return c < 128 && std::ispunct(c); }
}  // namespace

std::vector<std::string> WhitespaceTokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> out;
  for (auto& piece : text::split_whitespace(text)) {
    std::size_t b = 0, e = piece.size();
    while (b < e && is_punct(static_cast<unsigned char>(piece[b]))) ++b;
    while (e > b && is_punct(static_cast<unsigned char>(piece[e - 1]))) --e;
    // Pure punctuation is kept whole so the filter, not the tokenizer, drops it.
    out.push_back(b == e ? piece : piece.substr(b, e - b));
  }
  return out;
}

std::vector<std::string> CommandTokenizer::tokenize(std::string_view text) const {
  char tmpl[] = "/tmp/claimshift-tok-XXXXXX";
  int fd = ::mkstemp(tmpl);
  if (fd < 0) throw Error("cannot create tokenizer input file");
  std::size_t off = 0;
  while (off < text.size()) {
    auto w = ::write(fd, text.data() + off, text.size() - off);
    if (w <= 0) break;
    off += static_cast<std::size_t>(w);
  }
  ::close(fd);
  std::string cmd = command_ + " < '" + std::string(tmpl) + "'";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    ::unlink(tmpl);
    throw Error("cannot run tokenizer: " + command_);
  }
  std::string output;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  int status = ::pclose(pipe);
  ::unlink(tmpl);
  if (status != 0) throw Error("tokenizer exited with status " + std::to_string(status));
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= output.size()) {
    auto nl = output.find('\n', start);
    auto line = output.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!text::trim(line).empty()) out.push_back(text::trim(line));
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  return out;
}

std::unique_ptr<Tokenizer> make_tokenizer(const std::string& spec) {
  if (spec.empty() || spec == "whitespace") return std::make_unique<WhitespaceTokenizer>();
  if (spec.rfind("command:", 0) == 0) return std::make_unique<CommandTokenizer>(spec.substr(8));
  throw ContractError("unknown tokenizer '" + spec + "'");
}

double avg_citation_count(const std::vector<corpus::PaperRecord>& papers) {
  if (papers.empty()) throw ContractError("average citation count of an empty sample");
  long double sum = 0;
  for (const auto& p : papers) sum += static_cast<long double>(p.citation_count);
  return static_cast<double>(sum / static_cast<long double>(papers.size()));
}

bool is_punctuation_token(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) {
    return is_punct(static_cast<unsigned char>(c));
  });
}

bool is_numeric_token(std::string_view token) {
  bool digit = false;
  for (char c : token) {
    auto u = static_cast<unsigned char>(c);
    if (std::isdigit(u)) {
      digit = true;
    } else if (!(c == '.' || c == ',' || c == '-' || c == '+' || c == '%' || c == '/')) {
      return false;
    }
  }
  return digit;
}

RareTokens rare_tokens(const std::vector<std::string>& abstracts, const Tokenizer& tokenizer,
                       std::size_t n, const std::set<std::string>& stopwords) {
  if (abstracts.empty()) throw ContractError("rare tokens of an empty corpus");
  std::map<std::string, std::int64_t> freq;
  for (const auto& a : abstracts)
    for (auto& tok : tokenizer.tokenize(a)) {
      auto t = text::trim(tok);
      if (t.empty() || is_punctuation_token(t) || is_numeric_token(t)) continue;
      if (stopwords.count(text::to_lower(t))) continue;
      ++freq[t];
    }
  RareTokens out;
  out.tokens.assign(freq.begin(), freq.end());
  // map order is already byte order, so a stable sort by count keeps ties sorted.
  std::stable_sort(out.tokens.begin(), out.tokens.end(),
                   [](const auto& a, const auto& b) { return a.second < b.second; });
  if (out.tokens.size() < n) {
    out.short_list = true;
    spdlog::warn("only {} tokens survived filtering, wanted {}", out.tokens.size(), n);
  } else {
    out.tokens.resize(n);
  }
  return out;
}

std::int64_t InfiniGramClient::count(const std::string& query) {
  return with_retries(config_.retry, [&]() -> std::int64_t {
    if (config_.budget) config_.budget->acquire();
    auto url = endpoints::split_url(config_.base_url);
    httplib::Client cli(url.origin);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(config_.timeout_seconds);
    json body = {{"index", config_.index}, {"query_type", "count"}, {"query", query}};
    auto res = cli.Post(url.prefix.empty() ? "/" : url.prefix, body.dump(), "application/json");
    if (!res)
      throw TransportError("n-gram service unreachable: " + httplib::to_string(res.error()));
    endpoints::raise_for_status(res->status, res->body, "n-gram service",
                                res->get_header_value("Retry-After"));
    json doc;
    try {
      doc = json::parse(res->body);
    } catch (const json::exception&) {
      throw TransportError("malformed n-gram response");
    }
    if (doc.contains("error")) throw Error("n-gram service: " + doc.at("error").dump());
    if (!doc.contains("count") || !doc.at("count").is_number_integer())
      throw TransportError("n-gram response without a count");
    return doc.at("count").get<std::int64_t>();
  });
}

std::int64_t FixtureNgramCounter::count(const std::string& query) {
  auto it = counts_.find(query);
  if (it == counts_.end()) throw NotFoundError("no fixture count for '" + query + "'");
  return it->second;
}

Occurrence pretraining_occurrence(const std::vector<std::string>& tokens, NgramCounter& service,
                                  std::size_t concurrency) {
  if (tokens.empty()) throw ContractError("occurrence of an empty token list");
  std::vector<std::optional<std::int64_t>> counts(tokens.size());
  parallel_for(tokens.size(), concurrency, [&](std::size_t i) {
    try {
      counts[i] = service.count(tokens[i]);
    } catch (const Error& e) {
      spdlog::debug("count for token '{}' failed: {}", tokens[i], e.what());
    }
  });
  Occurrence out;
  long double sum = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!counts[i]) {
      out.skipped.push_back(tokens[i]);
      continue;
    }
    out.counts.emplace_back(tokens[i], *counts[i]);
    sum += static_cast<long double>(*counts[i]);
  }
  if (out.counts.empty()) throw Error("every n-gram count query failed");
  if (!out.skipped.empty())
    spdlog::warn("{} of {} token counts failed; mean taken over the rest", out.skipped.size(),
                 tokens.size());
  out.mean = static_cast<double>(sum / static_cast<long double>(out.counts.size()));
  return out;
}

std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ContractError("pearson needs equal-length inputs");
  if (xs.size() < 2) throw ContractError("pearson needs at least two points");
  auto n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

DomainProfile profile_domain(const std::string& domain,
                             const std::vector<corpus::PaperRecord>& papers,
                             const Tokenizer& tokenizer, NgramCounter* service,
                             std::size_t n_rare) {
  DomainProfile p;
  p.domain = domain;
  p.paper_count = papers.size();
  p.avg_citation_count = avg_citation_count(papers);
  std::vector<std::string> abstracts;
  for (const auto& r : papers) abstracts.push_back(r.abstract);
  auto rare = rare_tokens(abstracts, tokenizer, n_rare);
  if (rare.short_list)
    p.warnings.push_back("only " + std::to_string(rare.tokens.size()) + " rare tokens available");
  std::vector<std::string> toks;
  for (const auto& [t, f] : rare.tokens) toks.push_back(t);
  if (service && !toks.empty()) {
    auto occ = pretraining_occurrence(toks, *service);
    p.rare_tokens = occ.counts;
    p.avg_token_occurrence = occ.mean;
    for (const auto& s : occ.skipped) p.warnings.push_back("no count for token '" + s + "'");
  } else {
    for (const auto& t : toks) p.rare_tokens.emplace_back(t, 0);
    p.warnings.push_back("no n-gram service configured; occurrence not measured");
  }
  return p;
}

std::vector<Correlation> correlate(const std::vector<DomainProfile>& profiles,
                                   const std::vector<metrics::MetricReport>& reports, Task task) {
  std::map<std::string, const metrics::MetricReport*> by_domain;
  for (const auto& r : reports)
    if (r.task == task && r.domain != "all") by_domain[r.domain] = &r;

  using Factor = std::optional<double> (*)(const DomainProfile&);
  using Metric = metrics::Fraction (*)(const metrics::MetricReport&);
  const std::pair<const char*, Factor> factors[] = {
      {"avg_citation_count",
       [](const DomainProfile& p) -> std::optional<double> { return p.avg_citation_count; }},
      {"avg_token_occurrence",
       [](const DomainProfile& p) -> std::optional<double> { return p.avg_token_occurrence; }},
  };
  const std::pair<const char*, Metric> metric_list[] = {
      {"preservation", [](const metrics::MetricReport& r) { return r.preservation().kept; }},
      {"acquisition", [](const metrics::MetricReport& r) { return r.acquisition().kept; }},
      {"projection", [](const metrics::MetricReport& r) { return r.projection().kept; }},
  };
  std::vector<Correlation> out;
  for (const auto& [fname, factor] : factors)
    for (const auto& [mname, metric] : metric_list) {
      std::vector<double> xs, ys;
      for (const auto& p : profiles) {
        auto it = by_domain.find(p.domain);
        if (it == by_domain.end()) continue;
        auto x = factor(p);
        auto y = metric(*it->second);
        if (!x || !y.defined()) continue;
        xs.push_back(*x);
        ys.push_back(y.value());
      }
      Correlation c{fname, mname, std::nullopt, xs.size()};
      if (xs.size() >= 2) c.r = pearson(xs, ys);
      out.push_back(c);
    }
  return out;
}

json to_json(const DomainProfile& p) {
  json toks = json::array();
  for (const auto& [t, c] : p.rare_tokens) toks.push_back({{"token", t}, {"occurrence", c}});
  return {{"domain", p.domain},
          {"paper_count", p.paper_count},
          {"avg_citation_count", p.avg_citation_count},
          {"rare_tokens", toks},
          {"avg_token_occurrence",
           p.avg_token_occurrence ? json(*p.avg_token_occurrence) : json("undefined")},
          {"warnings", p.warnings}};
}

DomainProfile profile_from_json(const json& j) {
  DomainProfile p;
  p.domain = j.at("domain").get<std::string>();
  p.paper_count = j.at("paper_count").get<std::size_t>();
  p.avg_citation_count = j.at("avg_citation_count").get<double>();
  for (const auto& t : j.at("rare_tokens"))
    p.rare_tokens.emplace_back(t.at("token").get<std::string>(), t.at("occurrence").get<std::int64_t>());
  if (j.at("avg_token_occurrence").is_number())
    p.avg_token_occurrence = j.at("avg_token_occurrence").get<double>();
  p.warnings = j.value("warnings", std::vector<std::string>{});
  return p;
}

json to_json(const Correlation& c) {
  return {{"factor", c.factor},
          {"metric", c.metric},
          {"r", c.r ? json(*c.r) : json("undefined")},
          {"n", c.n}};
}

}  // namespace claimshift::analysis
