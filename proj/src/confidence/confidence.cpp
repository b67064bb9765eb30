#include "claimshift/confidence/confidence.hpp"

#include "claimshift/core/errors.hpp"
#include "claimshift/core/text.hpp"
#include "claimshift/embedded_data.hpp"

namespace claimshift::confidence {

using endpoints::ChatMessage;
using endpoints::ChatRequest;
using probes::parse_judgment;

Accuracy accuracy_judgment(ParsedLabel parsed, Label gold) {
  switch (parsed) {
    case ParsedLabel::kSupport: return gold == Label::kSupport;
    case ParsedLabel::kRefute: return gold == Label::kRefute;
    case ParsedLabel::kUnparseable: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<bool> parse_yes_no(std::string_view reply) {
  auto words = text::word_tokens(reply);
  if (words.empty()) return std::nullopt;
  if (words.front() == "yes") return true;
  if (words.front() == "no") return false;
  // Otherwise the first sentence must contain exactly one of the two.
  std::string_view first = reply.substr(0, reply.find_first_of(".!?\n"));
  bool yes = false, no = false;
  for (const auto& w : text::word_tokens(first)) {
    yes = yes || w == "yes";
    no = no || w == "no";
  }
  if (yes == no) return std::nullopt;
  return yes;
}

namespace {

// Returns nullopt when the endpoint stays down.
std::optional<std::string> ask(endpoints::ChatModel& m, const ChatRequest& req,
                               const RetryPolicy& retry, const char* method, Trace* trace) {
  Exchange ex;
  ex.method = method;
  ex.prompt = req.messages.back().content;
  ex.temperature = req.temperature;
  std::optional<std::string> out;
  try {
    out = with_retries(retry, [&] { return m.complete(req); });
    ex.reply = *out;
  } catch (const TransportError& e) {
    ex.failed = true;
    ex.reply = e.what();
  }
  if (trace) trace->push_back(std::move(ex));
  return out;
}

ChatRequest single_turn(std::string user, double temperature) {
  ChatRequest req;
  req.messages.push_back({"user", std::move(user)});
  req.temperature = temperature;
  return req;
}

}  // namespace

bool accuracy_generation(const std::string& generated_claim, const std::string& paper_abstract,
                         endpoints::ChatModel& judge, const RetryPolicy& retry, Trace* trace) {
  if (text::trim(paper_abstract).empty())
    throw ContractError("generation accuracy needs a non-empty abstract");
  if (text::trim(generated_claim).empty()) return false;
  auto prompt = text::render(text::trim(embedded::kPromptGenerationJudge),
                             {{"abstract", paper_abstract}, {"claim", generated_claim}});
  auto reply = ask(judge, single_turn(prompt, 0.0), retry, "generation_judge", trace);
  if (!reply) throw ProbeFailedError("generation judge unreachable");
  return parse_judgment(*reply) == ParsedLabel::kSupport;
}

bool conf_more_info(const probes::Probe& probe, const probes::ProbeResponse& prior_response,
                    endpoints::ChatModel& model, const RetryPolicy& retry, Trace* trace) {
  if (prior_response.probe_id != probe.probe_id)
    throw ContractError("response " + prior_response.probe_id + " does not belong to probe " +
                        probe.probe_id);
  ChatRequest req = probes::to_request(probe);
  req.messages.push_back({"assistant", prior_response.raw_text});
  req.messages.push_back({"user", text::trim(embedded::kPromptMoreInfo)});
  auto reply = ask(model, req, retry, "more_info", trace);
  if (!reply) return false;
  auto needs_more = parse_yes_no(*reply);
  return needs_more.has_value() && !*needs_more;
}

bool conf_consistency(const probes::Probe& probe, ParsedLabel original,
                      endpoints::ChatModel& model, endpoints::ChatModel& paraphraser, int k,
                      const RetryPolicy& retry, Trace* trace) {
  if (probe.task != Task::kJudgment) throw ContractError("consistency applies to judgment probes");
  if (k < 1) throw ContractError("paraphrase count must be at least 1");
  bool agree = original != ParsedLabel::kUnparseable;
  // Every paraphrase is still asked for so the trace is complete.
  for (int i = 1; i <= k; ++i) {
    auto prompt = text::render(text::trim(embedded::kPromptParaphrase),
                               {{"index", std::to_string(i)},
                                {"count", std::to_string(k)},
                                {"question", probe.prompt}});
    auto para = ask(paraphraser, single_turn(prompt, kParaphraseTemperature), retry,
                    "paraphrase", trace);
    if (!para || text::trim(*para).empty()) {
      agree = false;
      continue;
    }
    probes::Probe variant = probe;
    variant.prompt = text::trim(*para);
    auto answer = ask(model, probes::to_request(variant, kParaphraseTemperature), retry,
                      "paraphrase_answer", trace);
    if (!answer || parse_judgment(*answer) != original) agree = false;
  }
  return agree;
}

bool conf_linguistic(const probes::ProbeResponse& response, endpoints::ChatModel& judge,
                     const RetryPolicy& retry, Trace* trace) {
  if (text::trim(response.raw_text).empty()) return false;
  auto prompt = text::render(text::trim(embedded::kPromptLinguistic),
                             {{"response", response.raw_text}});
  auto reply = ask(judge, single_turn(prompt, 0.0), retry, "linguistic", trace);
  if (!reply) return false;
  return parse_yes_no(*reply).value_or(false);
}

bool majority_vote(const std::vector<bool>& verdicts) {
  if (verdicts.empty() || verdicts.size() % 2 == 0)
    throw ContractError("majority vote needs an odd number of verdicts, got " +
                        std::to_string(verdicts.size()));
  std::size_t yes = 0;
  for (bool v : verdicts) yes += v ? 1 : 0;
  return 2 * yes > verdicts.size();
}

KnowledgeState classify_state(Accuracy accurate, bool confident) {
  if (!confident) return KnowledgeState::kUnknown;
  if (!accurate) throw ContractError("a confident verdict without a parseable answer");
  return *accurate ? KnowledgeState::kCorrect : KnowledgeState::kIncorrect;
}

Assessor::Assessor(endpoints::ChatModelPtr model, endpoints::ChatModelPtr judge,
                   endpoints::ChatModelPtr paraphraser, AssessorConfig config)
    : model_(std::move(model)),
      judge_(std::move(judge)),
      paraphraser_(std::move(paraphraser)),
      config_(config) {}

namespace {
Assessment start(const probes::Probe& probe) {
  Assessment a;
  a.probe_id = probe.probe_id;
  a.item_id = probe.item_id();
  a.task = probe.task;
  a.epoch = probe.epoch;
  return a;
}
}  // namespace

Assessment Assessor::assess_judgment(const probes::Probe& probe,
                                     const probes::ProbeResponse& response, Label gold) const {
  Assessment a = start(probe);
  ParsedLabel parsed = response.parsed.value_or(parse_judgment(response.raw_text));
  a.accurate = accuracy_judgment(parsed, gold);
  if (!a.accurate) {
    // No answer to be confident about; the estimators are skipped.
    a.state = classify_state(a.accurate, false);
    return a;
  }
  auto& v = a.verdict;
  v.more_info = conf_more_info(probe, response, *model_, config_.retry, &a.trace);
  v.consistency = conf_consistency(probe, parsed, *model_, *paraphraser_,
                                   config_.paraphrase_count, config_.retry, &a.trace);
  v.linguistic = conf_linguistic(response, *judge_, config_.retry, &a.trace);
  v.method_mask = {"more_info", "consistency", "linguistic"};
  v.final = majority_vote({*v.more_info, *v.consistency, *v.linguistic});
  a.state = classify_state(a.accurate, v.final);
  return a;
}

Assessment Assessor::assess_generation(const probes::Probe& probe,
                                       const probes::ProbeResponse& response,
                                       const std::string& paper_abstract) const {
  Assessment a = start(probe);
  std::string claim = response.generated_claim.value_or(response.raw_text);
  a.accurate = accuracy_generation(claim, paper_abstract, *judge_, config_.retry, &a.trace);
  auto& v = a.verdict;
  v.more_info = conf_more_info(probe, response, *model_, config_.retry, &a.trace);
  v.method_mask = {"more_info"};
  v.final = majority_vote({*v.more_info});
  a.state = classify_state(a.accurate, v.final);
  return a;
}

double agreement_rate(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.empty() || a.size() != b.size())
    throw ContractError("agreement needs two non-empty lists of equal length");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(a.size());
}

namespace {
json opt_bool(const std::optional<bool>& b) { return b ? json(*b) : json(nullptr); }
std::optional<bool> read_opt_bool(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<bool>();
}
}  // namespace

json to_json(const Assessment& a) {
  json trace = json::array();
  for (const auto& ex : a.trace)
    trace.push_back({{"method", ex.method},
                     {"prompt", ex.prompt},
                     {"reply", ex.reply},
                     {"temperature", ex.temperature},
                     {"failed", ex.failed}});
  return {{"probe_id", a.probe_id},
          {"item_id", a.item_id},
          {"task", to_string(a.task)},
          {"epoch", to_string(a.epoch)},
          {"accurate", a.accurate ? json(*a.accurate) : json("not_applicable")},
          {"more_info", opt_bool(a.verdict.more_info)},
          {"consistency", opt_bool(a.verdict.consistency)},
          {"linguistic", opt_bool(a.verdict.linguistic)},
          {"final", a.verdict.final},
          {"method_mask", a.verdict.method_mask},
          {"state", to_string(a.state)},
          {"judge_prompt_version", kJudgePromptVersion},
          {"trace", trace}};
}

Assessment assessment_from_json(const json& j) {
  Assessment a;
  a.probe_id = j.at("probe_id").get<std::string>();
  a.item_id = j.at("item_id").get<std::string>();
  a.task = parse_task(j.at("task").get<std::string>());
  a.epoch = parse_epoch(j.at("epoch").get<std::string>());
  if (j.at("accurate").is_boolean()) a.accurate = j.at("accurate").get<bool>();
  a.verdict.more_info = read_opt_bool(j, "more_info");
  a.verdict.consistency = read_opt_bool(j, "consistency");
  a.verdict.linguistic = read_opt_bool(j, "linguistic");
  a.verdict.final = j.at("final").get<bool>();
  a.verdict.method_mask = j.at("method_mask").get<std::vector<std::string>>();
  a.state = parse_state(j.at("state").get<std::string>());
  for (const auto& t : j.value("trace", json::array()))
    a.trace.push_back({t.at("method").get<std::string>(), t.at("prompt").get<std::string>(),
                       t.at("reply").get<std::string>(), t.at("temperature").get<double>(),
                       t.value("failed", false)});
  return a;
}

}  // namespace claimshift::confidence
