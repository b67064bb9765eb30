#include "claimshift/probes/probes.hpp"

#include <algorithm>

#include "claimshift/core/errors.hpp"
#include "claimshift/core/text.hpp"
#include "claimshift/embedded_data.hpp"

namespace claimshift::probes {

std::string Probe::item_id() const {
  if (task == Task::kJudgment) return claim_id.value_or(probe_id);
  return "gen:" + paper_id.value_or(probe_id);
}

Probe build_judgment_prompt(const claims::Claim& claim, const std::optional<std::string>& title) {
  bool needs_title = claim.epoch != Epoch::kFuture;
  if (needs_title && (!title || text::trim(*title).empty()))
    throw ContractError("judgment probe for a " + std::string(to_string(claim.epoch)) +
                        " claim needs the paper title");
  if (!needs_title && title)
    throw ContractError("judgment probe for a future claim must not carry a title");
  Probe p;
  p.task = Task::kJudgment;
  p.epoch = claim.epoch;
  p.claim_id = claim.claim_id;
  p.paper_id = claim.paper_id;
  p.probe_id = "judgment:" + claim.claim_id;
  p.system_prompt = text::trim(embedded::kPromptProbeSystem);
  if (needs_title) {
    p.paper_title = *title;
    p.prompt = text::render(text::trim(embedded::kPromptJudgmentVerification),
                            {{"claim", claim.text}, {"title", *title}});
  } else {
    p.prompt = text::render(text::trim(embedded::kPromptJudgmentClassification),
                            {{"claim", claim.text}});
  }
  return p;
}

Probe build_generation_prompt(Epoch epoch, const std::string& title_or_subject,
                              const std::string& paper_id) {
  if (text::trim(title_or_subject).empty())
    throw ContractError("generation probe needs a title or subject");
  Probe p;
  p.task = Task::kGeneration;
  p.epoch = epoch;
  if (!paper_id.empty()) p.paper_id = paper_id;
  p.probe_id = "generation:" + (paper_id.empty() ? title_or_subject : paper_id);
  p.system_prompt = text::trim(embedded::kPromptProbeSystem);
  if (epoch == Epoch::kFuture) {
    p.subject = title_or_subject;
    p.prompt = text::render(text::trim(embedded::kPromptGenerationSubject),
                            {{"subject", title_or_subject}});
  } else {
    p.paper_title = title_or_subject;
    p.prompt = text::render(text::trim(embedded::kPromptGenerationPaper),
                            {{"title", title_or_subject}});
  }
  return p;
}

std::string user_message(const Probe& probe) {
  if (probe.context_papers.empty()) return probe.prompt;
  std::string out;
  for (const auto& abstract : probe.context_papers) {
    out += kContextHeader;
    out += '\n';
    out += abstract;
    out += "\n\n";
  }
  return out + probe.prompt;
}

endpoints::ChatRequest to_request(const Probe& probe, double temperature) {
  endpoints::ChatRequest req;
  req.messages.push_back({"system", probe.system_prompt});
  req.messages.push_back({"user", user_message(probe)});
  req.temperature = temperature;
  return req;
}

ProbeResponse run_probe(const Probe& probe, endpoints::ChatModel& model, const RetryPolicy& retry) {
  ProbeResponse r;
  r.probe_id = probe.probe_id;
  r.model_tag = model.tag();
  auto start = std::chrono::steady_clock::now();
  try {
    r.raw_text = with_retries(retry, [&] { return model.complete(to_request(probe)); });
  } catch (const TransportError& e) {
    throw ProbeFailedError("probe " + probe.probe_id + " failed: " + e.what());
  }
  r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  if (probe.task == Task::kJudgment) {
    r.parsed = parse_judgment(r.raw_text);
  } else {
    r.generated_claim = claims::clean_generation(r.raw_text);
  }
  return r;
}

// --- JudgmentParser --------------------------------------------------------

JudgmentParser JudgmentParser::from_json(const json& table) {
  JudgmentParser p;
  p.version_ = table.value("version", std::string("unversioned"));
  auto add = [&](const char* key, ParsedLabel label) {
    for (const auto& s : table.at(key))
      p.patterns_.push_back(
          {std::regex(s.get<std::string>(), std::regex::ECMAScript | std::regex::icase), label});
  };
  add("support", ParsedLabel::kSupport);
  add("refute", ParsedLabel::kRefute);
  return p;
}

const JudgmentParser& JudgmentParser::shipped() {
  static const JudgmentParser parser = from_json(json::parse(embedded::kJudgmentPatterns));
  return parser;
}

namespace {

std::vector<std::string> sentences(std::string_view raw) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : raw) {
    if (c == '.' || c == '!' || c == '?' || c == '\n' || c == ';') {
      auto t = text::trim(cur);
      if (!t.empty()) out.push_back(std::move(t));
      cur.clear();
    } else {
      cur += c;
    }
  }
  auto t = text::trim(cur);
  if (!t.empty()) out.push_back(std::move(t));
  return out;
}

struct Match {
  std::size_t start;
  std::size_t length;
  ParsedLabel label;
};

}  // namespace

ParsedLabel JudgmentParser::parse(std::string_view raw) const {
  for (const auto& sentence : sentences(raw)) {
    std::vector<Match> found;
    for (const auto& pat : patterns_) {
      for (auto it = std::sregex_iterator(sentence.begin(), sentence.end(), pat.re);
           it != std::sregex_iterator(); ++it) {
        if (it->length(0) == 0) continue;
        found.push_back({static_cast<std::size_t>(it->position(0)),
                         static_cast<std::size_t>(it->length(0)), pat.label});
      }
    }
    if (found.empty()) continue;
    std::stable_sort(found.begin(), found.end(), [](const Match& a, const Match& b) {
      if (a.length != b.length) return a.length > b.length;
      return a.start < b.start;
    });
    std::vector<Match> kept;
    for (const auto& m : found) {
      bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const Match& k) {
        return m.start < k.start + k.length && k.start < m.start + m.length;
      });
      if (!overlaps) kept.push_back(m);
    }
    bool support = false, refute = false;
    for (const auto& k : kept) {
      support = support || k.label == ParsedLabel::kSupport;
      refute = refute || k.label == ParsedLabel::kRefute;
    }
    if (support && refute) return ParsedLabel::kUnparseable;
    return support ? ParsedLabel::kSupport : ParsedLabel::kRefute;
  }
  return ParsedLabel::kUnparseable;
}

ParsedLabel parse_judgment(std::string_view raw) { return JudgmentParser::shipped().parse(raw); }

// --- serialization ---------------------------------------------------------

namespace {
json opt(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }
std::optional<std::string> opt_str(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}
}  // namespace

json to_json(const Probe& p) {
  return {{"probe_id", p.probe_id},
          {"task", to_string(p.task)},
          {"epoch", to_string(p.epoch)},
          {"claim_id", opt(p.claim_id)},
          {"paper_id", opt(p.paper_id)},
          {"paper_title", opt(p.paper_title)},
          {"subject", opt(p.subject)},
          {"system_prompt", p.system_prompt},
          {"prompt", p.prompt},
          {"context_papers", p.context_papers},
          {"prompt_version", kPromptVersion}};
}

Probe probe_from_json(const json& j) {
  Probe p;
  p.probe_id = j.at("probe_id").get<std::string>();
  p.task = parse_task(j.at("task").get<std::string>());
  p.epoch = parse_epoch(j.at("epoch").get<std::string>());
  p.claim_id = opt_str(j, "claim_id");
  p.paper_id = opt_str(j, "paper_id");
  p.paper_title = opt_str(j, "paper_title");
  p.subject = opt_str(j, "subject");
  p.system_prompt = j.at("system_prompt").get<std::string>();
  p.prompt = j.at("prompt").get<std::string>();
  p.context_papers = j.at("context_papers").get<std::vector<std::string>>();
  return p;
}

json to_json(const ProbeResponse& r) {
  json j = {{"probe_id", r.probe_id}, {"raw_text", r.raw_text}, {"model_tag", r.model_tag}};
  j["parsed"] = r.parsed ? json(to_string(*r.parsed)) : json(nullptr);
  j["generated_claim"] = opt(r.generated_claim);
  return j;
}

ProbeResponse response_from_json(const json& j) {
  ProbeResponse r;
  r.probe_id = j.at("probe_id").get<std::string>();
  r.raw_text = j.at("raw_text").get<std::string>();
  r.model_tag = j.at("model_tag").get<std::string>();
  if (j.contains("parsed") && !j.at("parsed").is_null())
    r.parsed = parse_parsed_label(j.at("parsed").get<std::string>());
  r.generated_claim = opt_str(j, "generated_claim");
  return r;
}

}  // namespace claimshift::probes
