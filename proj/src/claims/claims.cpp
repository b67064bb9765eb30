#include "claimshift/claims/claims.hpp"

#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

#include "claimshift/core/errors.hpp"
#include "claimshift/core/stopwords.hpp"
#include "claimshift/core/text.hpp"
#include "claimshift/embedded_data.hpp"

namespace claimshift::claims {

using endpoints::ChatMessage;
using endpoints::ChatRequest;

std::string claim_id_for(const std::string& paper_id, Label label) {
  return paper_id + (label == Label::kSupport ? ":support" : ":refute");
}

bool claim_length_ok(std::string_view text, std::size_t min_words, std::size_t max_words) {
  auto n = text::word_count(text);
  return n >= min_words && n <= max_words;
}

double abstract_overlap(std::string_view claim, std::string_view abstract) {
  const auto& stop = default_stopwords();
  std::set<std::string> claim_words, abstract_words;
  for (auto& w : text::word_tokens(claim))
    if (!stop.count(w)) claim_words.insert(w);
  for (auto& w : text::word_tokens(abstract)) abstract_words.insert(w);
  if (claim_words.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& w : claim_words) shared += abstract_words.count(w);
  return static_cast<double>(shared) / static_cast<double>(claim_words.size());
}

std::optional<std::string> filter_failure(std::string_view text, Label label,
                                          std::string_view abstract, const ClaimFilter& filter) {
  if (text::trim(text).empty()) return "empty claim";
  if (!claim_length_ok(text, filter.min_words, filter.max_words))
    return "claim must have " + std::to_string(filter.min_words) + " to " +
           std::to_string(filter.max_words) + " words";
  for (const char* deixis : {"this paper", "the paper", "this study", "the study"})
    if (text::contains_icase(text, deixis))
      return std::string("claim refers to \"") + deixis + "\" instead of stating the finding";
  if (label == Label::kRefute && abstract_overlap(text, abstract) > filter.max_refute_overlap)
    return "refute claim repeats the abstract";
  return std::nullopt;
}

std::string clean_generation(std::string_view raw) {
  std::string s;
  // First non-empty line.
  std::size_t i = 0;
  std::string_view rest = raw;
  while (i <= rest.size()) {
    auto nl = rest.find('\n', i);
    if (nl == std::string_view::npos) nl = rest.size();
    s = text::trim(rest.substr(i, nl - i));
    if (!s.empty()) break;
    i = nl + 1;
  }
  for (const char* prefix : {"claim:", "scientific claim:", "subject:", "- ", "* "}) {
    if (text::to_lower(s).rfind(prefix, 0) == 0) s = text::trim(s.substr(std::char_traits<char>::length(prefix)));
  }
  auto strip = [](std::string& t, char c) {
    while (t.size() >= 2 && t.front() == c && t.back() == c) t = t.substr(1, t.size() - 2);
  };
  for (int round = 0; round < 2; ++round) {
    strip(s, '"');
    strip(s, '*');
    strip(s, '\'');
  }
  return text::trim(s);
}

namespace {

std::string prompt_body(std::string_view tpl, const corpus::PaperRecord& paper) {
  return text::render(text::trim(tpl), {{"title", paper.title}, {"abstract", paper.abstract}});
}

ChatRequest make_request(std::string user) {
  ChatRequest req;
  req.messages.push_back({"system", text::trim(embedded::kPromptClaimSystem)});
  req.messages.push_back({"user", std::move(user)});
  req.temperature = 0.0;
  return req;
}

Claim generate_claim(const corpus::PaperRecord& paper, Epoch epoch, Label label,
                     endpoints::ChatModel& generator, const ClaimGenConfig& config) {
  if (text::trim(paper.abstract).empty())
    throw ContractError("cannot generate a claim for " + paper.paper_id + ": empty abstract");
  auto base = claim_request(paper, label);
  std::string last_reason;
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    auto req = base;
    if (attempt > 0)
      req.messages.back().content += "\n\nYour previous answer was rejected (" + last_reason +
                                     "). Reply with a single claim of " +
                                     std::to_string(config.filter.min_words) + " to " +
                                     std::to_string(config.filter.max_words) + " words.";
    auto raw = with_retries(config.transport_retry, [&] { return generator.complete(req); });
    auto claim_text = clean_generation(raw);
    auto failure = filter_failure(claim_text, label, paper.abstract, config.filter);
    if (!failure) {
      Claim c;
      c.claim_id = claim_id_for(paper.paper_id, label);
      c.text = claim_text;
      c.gold_label = label;
      c.paper_id = paper.paper_id;
      c.epoch = epoch;
      c.domain = paper.domain;
      return c;
    }
    last_reason = *failure;
  }
  throw ClaimRejectedError(std::string(to_string(label)) + " claim for " + paper.paper_id +
                           " rejected: " + last_reason);
}

}  // namespace

ChatRequest claim_request(const corpus::PaperRecord& paper, Label label) {
  return make_request(prompt_body(
      label == Label::kSupport ? embedded::kPromptClaimSupport : embedded::kPromptClaimRefute,
      paper));
}

ChatRequest subject_request(const corpus::PaperRecord& paper) {
  return make_request(prompt_body(embedded::kPromptSubject, paper));
}

Claim generate_support_claim(const corpus::PaperRecord& paper, Epoch epoch,
                             endpoints::ChatModel& generator, const ClaimGenConfig& config) {
  return generate_claim(paper, epoch, Label::kSupport, generator, config);
}

Claim generate_refute_claim(const corpus::PaperRecord& paper, Epoch epoch,
                            endpoints::ChatModel& generator, const ClaimGenConfig& config) {
  return generate_claim(paper, epoch, Label::kRefute, generator, config);
}

std::string extract_subject(const corpus::PaperRecord& paper, endpoints::ChatModel& generator,
                            const ClaimGenConfig& config) {
  if (text::trim(paper.abstract).empty())
    throw ContractError("cannot extract a subject for " + paper.paper_id + ": empty abstract");
  auto base = subject_request(paper);
  std::string subject;
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    auto req = base;
    if (attempt > 0)
      req.messages.back().content += "\n\nYour previous answer was too long. Reply with at most " +
                                     std::to_string(config.subject_max_words) + " words.";
    subject = clean_generation(with_retries(config.transport_retry, [&] { return generator.complete(req); }));
    while (!subject.empty() && (subject.back() == '.' || subject.back() == ';')) subject.pop_back();
    auto n = text::word_count(subject);
    if (n >= 1 && n <= config.subject_max_words) return subject;
  }
  auto words = text::split_whitespace(subject);
  if (words.empty()) throw ClaimRejectedError("empty subject for " + paper.paper_id);
  words.resize(std::min(words.size(), config.subject_max_words));
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
  return out;
}

ClaimSet build_claim_set(const std::vector<corpus::PaperTriplet>& triplets,
                         endpoints::ChatModel& generator, const ClaimGenConfig& config) {
  if (triplets.empty()) throw ContractError("build_claim_set: no triplets");

  struct Job {
    const corpus::PaperRecord* paper;
    Epoch epoch;
    std::string triplet_id;
  };
  std::map<std::string, Job> jobs_by_id;
  ClaimSet set;
  for (const auto& t : triplets) {
    set.source_triplets.push_back(t.id());
    for (Epoch e : kAllEpochs) {
      const auto& p = t.at(e);
      auto [it, inserted] = jobs_by_id.emplace(p.paper_id, Job{&p, e, t.id()});
      if (!inserted && it->second.epoch != e)
        throw ContractError("paper " + p.paper_id + " appears in two epochs");
    }
  }
  std::vector<Job> jobs;
  for (auto& [id, job] : jobs_by_id) jobs.push_back(job);

  struct Outcome {
    std::vector<Claim> claims;
    std::optional<std::string> rejection;
  };
  std::vector<Outcome> outcomes(jobs.size());
  parallel_for(jobs.size(), config.concurrency, [&](std::size_t i) {
    const auto& job = jobs[i];
    try {
      auto support = generate_support_claim(*job.paper, job.epoch, generator, config);
      auto refute = generate_refute_claim(*job.paper, job.epoch, generator, config);
      if (job.epoch == Epoch::kFuture) {
        auto subject = extract_subject(*job.paper, generator, config);
        support.subject = subject;
        refute.subject = subject;
      }
      support.triplet_id = refute.triplet_id = job.triplet_id;
      outcomes[i].claims = {std::move(support), std::move(refute)};
    } catch (const ClaimRejectedError& e) {
      outcomes[i].rejection = e.what();
    } catch (const TransportError& e) {
      outcomes[i].rejection = std::string("generator failure: ") + e.what();
    }
  });

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (outcomes[i].rejection) {
      spdlog::warn("paper {} excluded: {}", jobs[i].paper->paper_id, *outcomes[i].rejection);
      set.rejected.push_back({jobs[i].paper->paper_id, *outcomes[i].rejection});
      continue;
    }
    for (auto& c : outcomes[i].claims) {
      ++set.stats["epoch:" + std::string(to_string(c.epoch))];
      ++set.stats["label:" + std::string(to_string(c.gold_label))];
      ++set.stats["domain:" + c.domain];
      set.claims.push_back(std::move(c));
    }
  }
  double fraction = static_cast<double>(set.rejected.size()) / static_cast<double>(jobs.size());
  if (fraction > config.max_reject_fraction)
    throw ClaimRejectedError("claim generation rejected " + std::to_string(set.rejected.size()) +
                             " of " + std::to_string(jobs.size()) + " papers");
  return set;
}

json to_json(const Claim& c) {
  json j = {{"claim_id", c.claim_id},     {"text", c.text},
            {"gold_label", to_string(c.gold_label)}, {"paper_id", c.paper_id},
            {"epoch", to_string(c.epoch)}, {"triplet_id", c.triplet_id},
            {"domain", c.domain}};
  j["subject"] = c.subject ? json(*c.subject) : json(nullptr);
  return j;
}

Claim claim_from_json(const json& j) {
  Claim c;
  c.claim_id = j.at("claim_id").get<std::string>();
  c.text = j.at("text").get<std::string>();
  c.gold_label = parse_label(j.at("gold_label").get<std::string>());
  c.paper_id = j.at("paper_id").get<std::string>();
  c.epoch = parse_epoch(j.at("epoch").get<std::string>());
  c.triplet_id = j.value("triplet_id", std::string{});
  c.domain = j.value("domain", std::string{});
  if (j.contains("subject") && !j.at("subject").is_null())
    c.subject = j.at("subject").get<std::string>();
  if (c.text.empty()) throw ArtifactError("claim " + c.claim_id + " has empty text");
  return c;
}

void write_claim_set(const std::filesystem::path& dir, const ClaimSet& set,
                     const std::string& config_hash) {
  std::vector<json> rows;
  for (const auto& c : set.claims) rows.push_back(stamp(to_json(c), config_hash));
  write_jsonl(dir / "claims.jsonl", rows);
  json rejected = json::array();
  for (const auto& r : set.rejected) rejected.push_back({{"paper_id", r.paper_id}, {"reason", r.reason}});
  write_json(dir / "claims_meta.json", stamp({{"source_triplets", set.source_triplets},
                                              {"stats", set.stats},
                                              {"rejected", rejected}},
                                             config_hash));
}

ClaimSet read_claim_set(const std::filesystem::path& dir, const std::string& config_hash) {
  auto rows = read_jsonl(dir / "claims.jsonl");
  auto meta = read_json(dir / "claims_meta.json");
  rows.push_back(meta);
  check_stamps(rows, config_hash, (dir / "claims.jsonl").string());
  rows.pop_back();
  ClaimSet set;
  for (const auto& r : rows) set.claims.push_back(claim_from_json(r));
  set.source_triplets = meta.at("source_triplets").get<std::vector<std::string>>();
  set.stats = meta.at("stats").get<std::map<std::string, std::size_t>>();
  for (const auto& r : meta.at("rejected"))
    set.rejected.push_back({r.at("paper_id").get<std::string>(), r.at("reason").get<std::string>()});
  return set;
}

}  // namespace claimshift::claims
