#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "claimshift/core/concurrency.hpp"
#include "claimshift/core/disk_cache.hpp"
#include "claimshift/core/jsonl.hpp"

namespace claimshift::endpoints {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 512;
};

json to_json(const ChatRequest& req);

// Text-in, text-out model contract. Implementations must be safe to call
// from several threads.
class ChatModel {
 public:
  virtual ~ChatModel() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::string tag() const = 0;
};

using ChatModelPtr = std::shared_ptr<ChatModel>;

struct HttpChatConfig {
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string model;
  std::string api_key;
  int timeout_seconds = 120;
  std::shared_ptr<TokenBucket> budget;
};

// OpenAI-style POST {base_url}/chat/completions.
class HttpChatModel : public ChatModel {
 public:
  explicit HttpChatModel(HttpChatConfig config);
  std::string complete(const ChatRequest& request) override;
  std::string tag() const override;
  // GET {base_url}/models; true on any 2xx.
  bool health_check() const;

 private:
  HttpChatConfig config_;
};

// Replays a transcript file. Each rule lists substrings that must all occur
// in the conversation (contains), in the final message (last_contains), or
// must not occur anywhere (not_contains). The first matching rule answers;
// respond_seq answers successive matching calls in order and then repeats
// its last entry; "fail": "transport" simulates an unreachable endpoint.
class ScriptedChatModel : public ChatModel {
 public:
  struct Rule {
    std::vector<std::string> contains;
    std::vector<std::string> last_contains;
    std::vector<std::string> not_contains;
    std::vector<std::string> responses;
    bool fail_transport = false;
    std::size_t next = 0;
  };

  static std::shared_ptr<ScriptedChatModel> from_file(const std::filesystem::path& path);
  static std::shared_ptr<ScriptedChatModel> from_json(const json& doc);

  std::string complete(const ChatRequest& request) override;
  std::string tag() const override { return tag_; }

  std::size_t calls() const;
  std::vector<ChatRequest> history() const;

 private:
  std::string tag_ = "scripted";
  std::vector<Rule> rules_;
  std::optional<std::string> default_;
  mutable std::mutex mu_;
  std::vector<ChatRequest> history_;
};

// Memoizes responses by (model tag, request). Failures are not cached.
class CachingChatModel : public ChatModel {
 public:
  CachingChatModel(ChatModelPtr inner, DiskCache cache);
  std::string complete(const ChatRequest& request) override;
  std::string tag() const override { return inner_->tag(); }

 private:
  ChatModelPtr inner_;
  DiskCache cache_;
};

struct EndpointSpec {
  // http(s)://... for a live endpoint, scripted:<path> for a transcript.
  std::string url;
  std::string model;
  std::string api_key_env;
  double requests_per_second = 0.0;
  int timeout_seconds = 120;
};

// Relative scripted paths resolve against base_dir.
ChatModelPtr make_chat_model(const EndpointSpec& spec,
                             const std::filesystem::path& base_dir = {},
                             const std::optional<std::filesystem::path>& cache_dir = {});

}  // namespace claimshift::endpoints
