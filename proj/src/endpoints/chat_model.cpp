#include "claimshift/endpoints/chat_model.hpp"

#include <cstdlib>

#include "claimshift/core/errors.hpp"
#include "claimshift/endpoints/http.hpp"
#include "httplib.h"

namespace claimshift::endpoints {

namespace fs = std::filesystem;

json to_json(const ChatRequest& req) {
  json msgs = json::array();
  for (const auto& m : req.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  return {{"messages", msgs}, {"temperature", req.temperature}, {"max_tokens", req.max_tokens}};
}

// --- HttpChatModel ---------------------------------------------------------

HttpChatModel::HttpChatModel(HttpChatConfig config) : config_(std::move(config)) {}

std::string HttpChatModel::tag() const {
  return config_.model.empty() ? config_.base_url : config_.model;
}

std::string HttpChatModel::complete(const ChatRequest& request) {
  if (config_.budget) config_.budget->acquire();
  auto url = split_url(config_.base_url);
  httplib::Client cli(url.origin);
  cli.set_connection_timeout(10);
  cli.set_read_timeout(config_.timeout_seconds);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  json body = to_json(request);
  if (!config_.model.empty()) body["model"] = config_.model;
  auto res = cli.Post(url.prefix + "/chat/completions", headers, body.dump(), "application/json");
  if (!res) {
    throw TransportError("chat endpoint " + config_.base_url + " unreachable: " +
                         httplib::to_string(res.error()));
  }
  raise_for_status(res->status, res->body, "chat endpoint " + config_.base_url,
                   res->get_header_value("Retry-After"));
  try {
    auto doc = json::parse(res->body);
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string{} : content.get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError("malformed chat response: " + std::string(e.what()));
  }
}

bool HttpChatModel::health_check() const {
  auto url = split_url(config_.base_url);
  httplib::Client cli(url.origin);
  cli.set_connection_timeout(5);
  auto res = cli.Get(url.prefix + "/models");
  return res && res->status >= 200 && res->status < 300;
}

// --- ScriptedChatModel -----------------------------------------------------

namespace {

std::vector<std::string> string_list(const json& rule, const char* key) {
  std::vector<std::string> out;
  if (!rule.contains(key)) return out;
  const auto& v = rule.at(key);
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else {
    for (const auto& s : v) out.push_back(s.get<std::string>());
  }
  return out;
}

}  // namespace

std::shared_ptr<ScriptedChatModel> ScriptedChatModel::from_file(const fs::path& path) {
  return from_json(read_json(path));
}

std::shared_ptr<ScriptedChatModel> ScriptedChatModel::from_json(const json& doc) {
  auto model = std::make_shared<ScriptedChatModel>();
  model->tag_ = doc.value("tag", std::string("scripted"));
  if (doc.contains("default") && !doc.at("default").is_null())
    model->default_ = doc.at("default").get<std::string>();
  for (const auto& r : doc.value("rules", json::array())) {
    Rule rule;
    rule.contains = string_list(r, "contains");
    rule.last_contains = string_list(r, "last_contains");
    rule.not_contains = string_list(r, "not_contains");
    if (r.contains("respond")) rule.responses.push_back(r.at("respond").get<std::string>());
    for (const auto& s : r.value("respond_seq", json::array()))
      rule.responses.push_back(s.get<std::string>());
    rule.fail_transport = r.value("fail", std::string{}) == "transport";
    if (rule.responses.empty() && !rule.fail_transport)
      throw ContractError("scripted rule without a response");
    model->rules_.push_back(std::move(rule));
  }
  return model;
}

std::string ScriptedChatModel::complete(const ChatRequest& request) {
  std::string all;
  for (const auto& m : request.messages) {
    all += m.content;
    all += '\n';
  }
  const std::string last = request.messages.empty() ? std::string{} : request.messages.back().content;

  std::lock_guard lock(mu_);
  history_.push_back(request);
  for (auto& rule : rules_) {
    bool ok = true;
    for (const auto& s : rule.contains) ok = ok && all.find(s) != std::string::npos;
    for (const auto& s : rule.last_contains) ok = ok && last.find(s) != std::string::npos;
    for (const auto& s : rule.not_contains) ok = ok && all.find(s) == std::string::npos;
    if (!ok) continue;
    if (rule.fail_transport) throw TransportError(tag_ + ": scripted transport failure");
    std::size_t i = std::min(rule.next, rule.responses.size() - 1);
    ++rule.next;
    return rule.responses[i];
  }
  if (default_) return *default_;
  throw TransportError(tag_ + ": no scripted response for: " + last.substr(0, 160));
}

std::size_t ScriptedChatModel::calls() const {
  std::lock_guard lock(mu_);
  return history_.size();
}

std::vector<ChatRequest> ScriptedChatModel::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

// --- CachingChatModel ------------------------------------------------------

CachingChatModel::CachingChatModel(ChatModelPtr inner, DiskCache cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::string CachingChatModel::complete(const ChatRequest& request) {
  json key = to_json(request);
  key["model_tag"] = inner_->tag();
  auto k = key.dump();
  if (auto hit = cache_.get(k)) return *hit;
  auto out = inner_->complete(request);
  cache_.put(k, out);
  return out;
}

// --- factory ---------------------------------------------------------------

ChatModelPtr make_chat_model(const EndpointSpec& spec, const fs::path& base_dir,
                             const std::optional<fs::path>& cache_dir) {
  ChatModelPtr model;
  constexpr std::string_view kScripted = "scripted:";
  if (spec.url.rfind(kScripted, 0) == 0) {
    fs::path p = spec.url.substr(kScripted.size());
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    model = ScriptedChatModel::from_file(p);
  } else if (spec.url.rfind("http://", 0) == 0 || spec.url.rfind("https://", 0) == 0) {
    HttpChatConfig cfg;
    cfg.base_url = spec.url;
    cfg.model = spec.model;
    cfg.timeout_seconds = spec.timeout_seconds;
    if (!spec.api_key_env.empty()) {
      if (const char* key = std::getenv(spec.api_key_env.c_str())) cfg.api_key = key;
    }
    if (spec.requests_per_second > 0)
      cfg.budget = std::make_shared<TokenBucket>(spec.requests_per_second, 1.0);
    model = std::make_shared<HttpChatModel>(std::move(cfg));
  } else {
    throw ContractError("unsupported endpoint url: " + spec.url);
  }
  if (cache_dir) model = std::make_shared<CachingChatModel>(model, DiskCache(*cache_dir));
  return model;
}

}  // namespace claimshift::endpoints
