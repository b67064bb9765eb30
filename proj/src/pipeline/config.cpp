#include "claimshift/pipeline/config.hpp"

#include <unistd.h>

#include <cstdlib>

#include "claimshift/core/errors.hpp"
#include "claimshift/core/hashing.hpp"
#include "claimshift/core/text.hpp"

namespace claimshift::pipeline {

namespace fs = std::filesystem;

std::string_view to_string(TaskSelection t) {
  switch (t) {
    case TaskSelection::kJudgment: return "judgment";
    case TaskSelection::kGeneration: return "generation";
    case TaskSelection::kBoth: return "both";
  }
  return "both";
}

TaskSelection parse_task_selection(std::string_view s) {
  if (s == "judgment") return TaskSelection::kJudgment;
  if (s == "generation") return TaskSelection::kGeneration;
  if (s == "both") return TaskSelection::kBoth;
  throw ContractError("task must be judgment, generation or both, got '" + std::string(s) + "'");
}

bool includes(TaskSelection sel, Task t) {
  return sel == TaskSelection::kBoth || (sel == TaskSelection::kJudgment) == (t == Task::kJudgment);
}

corpus::WindowPolicy RunConfig::effective_policy() const {
  return window_policy ? *window_policy : corpus::WindowPolicy::standard(cutoff);
}

fs::path RunConfig::resolve(const fs::path& p) const {
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

std::optional<fs::path> RunConfig::cache() const {
  if (!cache_dir) return std::nullopt;
  return resolve(*cache_dir);
}

// --- json ------------------------------------------------------------------

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

endpoints::EndpointSpec endpoint_from(const json& j) {
  endpoints::EndpointSpec e;
  if (j.is_string()) {
    e.url = j.get<std::string>();
    return e;
  }
  e.url = j.at("url").get<std::string>();
  read_opt(j, "model", e.model);
  read_opt(j, "api_key_env", e.api_key_env);
  read_opt(j, "requests_per_second", e.requests_per_second);
  read_opt(j, "timeout_seconds", e.timeout_seconds);
  return e;
}

json endpoint_json(const endpoints::EndpointSpec& e) {
  return {{"url", e.url},
          {"model", e.model},
          {"api_key_env", e.api_key_env},
          {"requests_per_second", e.requests_per_second},
          {"timeout_seconds", e.timeout_seconds}};
}

ServiceSpec service_from(const json& j) {
  ServiceSpec s;
  if (j.is_string()) {
    s.url = j.get<std::string>();
    return s;
  }
  s.url = j.at("url").get<std::string>();
  read_opt(j, "api_key_env", s.api_key_env);
  read_opt(j, "requests_per_second", s.requests_per_second);
  read_opt(j, "index", s.index);
  return s;
}

json service_json(const ServiceSpec& s) {
  return {{"url", s.url},
          {"api_key_env", s.api_key_env},
          {"requests_per_second", s.requests_per_second},
          {"index", s.index}};
}

Date date_field(const json& j, const char* key) {
  auto d = parse_date(j.at(key).get<std::string>());
  if (!d) throw ContractError(std::string("window_policy.") + key + " is not a date");
  return *d;
}

}  // namespace

RunConfig config_from_json(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ContractError("run config must be a JSON object");
  RunConfig c;
  c.base_dir = base_dir;
  try {
    read_opt(doc, "run_name", c.run_name);
    if (doc.contains("output_dir")) c.output_dir = doc.at("output_dir").get<std::string>();
    if (doc.contains("cache_dir") && !doc.at("cache_dir").is_null())
      c.cache_dir = doc.at("cache_dir").get<std::string>();
    read_opt(doc, "domains", c.domains);
    if (doc.contains("cutoff")) {
      auto ym = parse_year_month(doc.at("cutoff").get<std::string>());
      if (!ym) throw ContractError("cutoff must look like YYYY-MM");
      c.cutoff = *ym;
    }
    if (doc.contains("window_policy") && !doc.at("window_policy").is_null()) {
      const auto& w = doc.at("window_policy");
      corpus::WindowPolicy p = corpus::WindowPolicy::standard(c.cutoff);
      read_opt(w, "buffer_before_months", p.buffer_before_months);
      read_opt(w, "buffer_after_months", p.buffer_after_months);
      read_opt(w, "prior_span_months", p.prior_span_months);
      if (w.contains("new_end")) p.new_end = date_field(w, "new_end");
      if (w.contains("future_end")) p.future_end = date_field(w, "future_end");
      c.window_policy = p;
    }
    read_opt(doc, "papers_per_domain", c.papers_per_domain);
    read_opt(doc, "per_prior_cap", c.per_prior_cap);
    if (doc.contains("literature")) c.literature = service_from(doc.at("literature"));
    if (doc.contains("model")) c.model = endpoint_from(doc.at("model"));
    if (doc.contains("judge")) c.judge = endpoint_from(doc.at("judge"));
    if (doc.contains("generator")) c.generator = endpoint_from(doc.at("generator"));
    if (doc.contains("paraphraser") && !doc.at("paraphraser").is_null())
      c.paraphraser = endpoint_from(doc.at("paraphraser"));
    if (doc.contains("task")) c.task = parse_task_selection(doc.at("task").get<std::string>());
    if (doc.contains("update")) {
      const auto& u = doc.at("update");
      if (u.contains("method")) c.update.kind = updates::parse_update_kind(u.at("method").get<std::string>());
      if (u.contains("adapter_command") && !u.at("adapter_command").is_null())
        c.update.adapter_command = u.at("adapter_command").get<std::string>();
      if (u.contains("post_update_endpoint") && !u.at("post_update_endpoint").is_null())
        c.update.post_update_endpoint = endpoint_from(u.at("post_update_endpoint"));
      if (u.contains("infer_context_scope"))
        c.infer_context_scope =
            updates::parse_context_scope(u.at("infer_context_scope").get<std::string>());
      read_opt(u, "ready_timeout_seconds", c.ready_timeout_seconds);
    }
    if (doc.contains("split")) {
      read_opt(doc.at("split"), "ratio", c.split_ratio);
      read_opt(doc.at("split"), "seed", c.split_seed);
    }
    if (doc.contains("concurrency")) {
      read_opt(doc.at("concurrency"), "probes", c.probe_concurrency);
      read_opt(doc.at("concurrency"), "claims", c.claim_concurrency);
    }
    if (doc.contains("confidence")) read_opt(doc.at("confidence"), "paraphrase_count", c.paraphrase_count);
    if (doc.contains("claims")) {
      const auto& cl = doc.at("claims");
      read_opt(cl, "min_words", c.claim_filter.min_words);
      read_opt(cl, "max_words", c.claim_filter.max_words);
      read_opt(cl, "max_refute_overlap", c.claim_filter.max_refute_overlap);
      read_opt(cl, "max_attempts", c.claim_attempts);
      read_opt(cl, "max_reject_fraction", c.max_reject_fraction);
    }
    if (doc.contains("analysis")) {
      const auto& a = doc.at("analysis");
      read_opt(a, "enabled", c.analysis.enabled);
      read_opt(a, "tokenizer", c.analysis.tokenizer);
      read_opt(a, "rare_tokens", c.analysis.rare_tokens);
      if (a.contains("ngram") && !a.at("ngram").is_null()) c.analysis.ngram = service_from(a.at("ngram"));
      if (a.contains("correlation_task"))
        c.analysis.correlation_task = parse_task(a.at("correlation_task").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ContractError(std::string("run config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ContractError("cannot parse " + path.string() + ": " + e.what());
  }
  return config_from_json(doc, fs::absolute(path).parent_path());
}

json config_to_json(const RunConfig& c) {
  auto policy = c.effective_policy();
  json j;
  j["run_name"] = c.run_name;
  j["output_dir"] = c.output_dir.string();
  j["cache_dir"] = c.cache_dir ? json(c.cache_dir->string()) : json(nullptr);
  j["domains"] = c.domains;
  j["cutoff"] = format_year_month(c.cutoff);
  j["window_policy"] = {{"buffer_before_months", policy.buffer_before_months},
                        {"buffer_after_months", policy.buffer_after_months},
                        {"prior_span_months", policy.prior_span_months},
                        {"new_end", format_date(policy.new_end)},
                        {"future_end", format_date(policy.future_end)}};
  j["papers_per_domain"] = c.papers_per_domain;
  j["per_prior_cap"] = c.per_prior_cap;
  j["literature"] = service_json(c.literature);
  j["model"] = endpoint_json(c.model);
  j["judge"] = endpoint_json(c.judge);
  j["generator"] = endpoint_json(c.generator);
  j["paraphraser"] = c.paraphraser ? endpoint_json(*c.paraphraser) : json(nullptr);
  j["task"] = to_string(c.task);
  j["update"] = {{"method", updates::to_string(c.update.kind)},
                 {"adapter_command", c.update.adapter_command ? json(*c.update.adapter_command) : json(nullptr)},
                 {"post_update_endpoint", c.update.post_update_endpoint
                                              ? endpoint_json(*c.update.post_update_endpoint)
                                              : json(nullptr)},
                 {"infer_context_scope", updates::to_string(c.infer_context_scope)},
                 {"ready_timeout_seconds", c.ready_timeout_seconds}};
  j["split"] = {{"ratio", c.split_ratio}, {"seed", c.split_seed}};
  j["concurrency"] = {{"probes", c.probe_concurrency}, {"claims", c.claim_concurrency}};
  j["confidence"] = {{"paraphrase_count", c.paraphrase_count}};
  j["claims"] = {{"min_words", c.claim_filter.min_words},
                 {"max_words", c.claim_filter.max_words},
                 {"max_refute_overlap", c.claim_filter.max_refute_overlap},
                 {"max_attempts", c.claim_attempts},
                 {"max_reject_fraction", c.max_reject_fraction}};
  j["analysis"] = {{"enabled", c.analysis.enabled},
                   {"tokenizer", c.analysis.tokenizer},
                   {"rare_tokens", c.analysis.rare_tokens},
                   {"ngram", c.analysis.ngram ? service_json(*c.analysis.ngram) : json(nullptr)},
                   {"correlation_task", to_string(c.analysis.correlation_task)}};
  return j;
}

std::string config_hash(const RunConfig& c) {
  json j = config_to_json(c);
  j.erase("output_dir");
  j.erase("cache_dir");
  // Concurrency changes scheduling only, never artifacts.
  j.erase("concurrency");
  return sha256_hex(j.dump()).substr(0, 16);
}

// --- validation ------------------------------------------------------------

namespace {

bool writable_location(const fs::path& p) {
  std::error_code ec;
  fs::path probe = fs::absolute(p, ec);
  while (!probe.empty() && !fs::exists(probe, ec)) {
    auto parent = probe.parent_path();
    if (parent == probe) break;
    probe = parent;
  }
  return !probe.empty() && fs::is_directory(probe, ec) && ::access(probe.c_str(), W_OK) == 0;
}

bool executable_on_path(const std::string& name) {
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::string_view rest = path;
  while (!rest.empty()) {
    auto colon = rest.find(':');
    fs::path dir(std::string(rest.substr(0, colon)));
    if (::access((dir / name).c_str(), X_OK) == 0) return true;
    if (colon == std::string_view::npos) break;
    rest.remove_prefix(colon + 1);
  }
  return false;
}

void check_endpoint(const RunConfig& c, const endpoints::EndpointSpec& e, const std::string& field,
                    std::vector<Diagnostic>& out) {
  if (e.url.empty()) {
    out.push_back({field + ".url", "missing; give an http(s) base URL or scripted:<transcript>"});
    return;
  }
  if (e.url.rfind("scripted:", 0) == 0) {
    auto p = c.resolve(e.url.substr(9));
    if (!fs::exists(p)) out.push_back({field + ".url", "transcript " + p.string() + " not found"});
  } else if (e.url.rfind("http://", 0) != 0 && e.url.rfind("https://", 0) != 0) {
    out.push_back({field + ".url", "unsupported scheme in '" + e.url + "'; use http(s):// or scripted:"});
  }
  if (!e.api_key_env.empty() && !std::getenv(e.api_key_env.c_str()))
    out.push_back({field + ".api_key_env", "environment variable " + e.api_key_env + " is not set"});
  if (e.requests_per_second < 0) out.push_back({field + ".requests_per_second", "must be >= 0"});
  if (e.timeout_seconds <= 0) out.push_back({field + ".timeout_seconds", "must be positive"});
}

void check_service(const RunConfig& c, const ServiceSpec& s, const std::string& field,
                   std::vector<Diagnostic>& out) {
  if (s.url.rfind("fixture:", 0) == 0) {
    auto p = c.resolve(s.url.substr(8));
    if (!fs::exists(p)) out.push_back({field + ".url", "fixture " + p.string() + " not found"});
  } else if (s.url.rfind("http://", 0) != 0 && s.url.rfind("https://", 0) != 0) {
    out.push_back({field + ".url", "use an http(s) base URL or fixture:<file>, got '" + s.url + "'"});
  }
  if (!s.api_key_env.empty() && !std::getenv(s.api_key_env.c_str()))
    out.push_back({field + ".api_key_env", "environment variable " + s.api_key_env + " is not set"});
}

}  // namespace

std::vector<Diagnostic> validate_config(const RunConfig& c) {
  std::vector<Diagnostic> out;
  try {
    if (c.domains.empty()) out.push_back({"domains", "list at least one field of study"});
    for (const auto& d : c.domains)
      if (!is_known_domain(d))
        out.push_back({"domains", "'" + d + "' is not one of the supported fields of study"});
    try {
      corpus::window_for(c.cutoff, c.effective_policy());
    } catch (const Error& e) {
      out.push_back({"window_policy", e.what()});
    }
    if (c.papers_per_domain < 1) out.push_back({"papers_per_domain", "must be at least 1"});
    if (c.per_prior_cap < 1) out.push_back({"per_prior_cap", "must be at least 1"});
    check_service(c, c.literature, "literature", out);
    check_endpoint(c, c.model, "model", out);
    check_endpoint(c, c.judge, "judge", out);
    check_endpoint(c, c.generator, "generator", out);
    if (c.paraphraser) check_endpoint(c, *c.paraphraser, "paraphraser", out);

    for (const auto& m : updates::check_spec(c.update)) {
      auto colon = m.find(':');
      out.push_back({m.substr(0, colon), text::trim(m.substr(colon + 1))});
    }
    if (c.update.adapter_command && !text::trim(*c.update.adapter_command).empty()) {
      auto program = text::split_whitespace(*c.update.adapter_command).front();
      bool ok = program.find('/') != std::string::npos
                    ? ::access(c.resolve(program).c_str(), X_OK) == 0
                    : executable_on_path(program);
      if (!ok)
        out.push_back({"update.adapter_command", "'" + program + "' is not an executable file"});
    }
    if (c.update.post_update_endpoint)
      check_endpoint(c, *c.update.post_update_endpoint, "update.post_update_endpoint", out);
    if (c.ready_timeout_seconds <= 0)
      out.push_back({"update.ready_timeout_seconds", "must be positive"});
    if (!(c.split_ratio > 0.0 && c.split_ratio < 1.0))
      out.push_back({"split.ratio", "must lie strictly between 0 and 1, e.g. 0.5"});
    if (c.probe_concurrency < 1) out.push_back({"concurrency.probes", "must be at least 1"});
    if (c.claim_concurrency < 1) out.push_back({"concurrency.claims", "must be at least 1"});
    if (c.paraphrase_count < 1) out.push_back({"confidence.paraphrase_count", "must be at least 1"});
    if (c.claim_filter.min_words > c.claim_filter.max_words)
      out.push_back({"claims.min_words", "must not exceed claims.max_words"});
    if (c.claim_attempts < 1) out.push_back({"claims.max_attempts", "must be at least 1"});
    if (c.max_reject_fraction < 0 || c.max_reject_fraction > 1)
      out.push_back({"claims.max_reject_fraction", "must lie in [0, 1]"});
    if (!writable_location(c.out()))
      out.push_back({"output_dir", c.out().string() + " is not writable"});
    if (c.cache() && !writable_location(*c.cache()))
      out.push_back({"cache_dir", c.cache()->string() + " is not writable"});
    if (c.analysis.enabled) {
      const auto& t = c.analysis.tokenizer;
      if (!(t == "whitespace" || t.rfind("command:", 0) == 0))
        out.push_back({"analysis.tokenizer", "use 'whitespace' or 'command:<program>'"});
      if (c.analysis.ngram) check_service(c, *c.analysis.ngram, "analysis.ngram", out);
      if (c.analysis.rare_tokens < 1) out.push_back({"analysis.rare_tokens", "must be at least 1"});
      if (!includes(c.task, c.analysis.correlation_task))
        out.push_back({"analysis.correlation_task", "task is not probed in this run"});
    }
  } catch (const std::exception& e) {
    out.push_back({"config", e.what()});
  }
  return out;
}

}  // namespace claimshift::pipeline
