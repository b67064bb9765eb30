#include "claimshift/updates/updates.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/file.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include <spdlog/spdlog.h>

#include "claimshift/core/errors.hpp"
#include "claimshift/core/text.hpp"

namespace claimshift::updates {

namespace fs = std::filesystem;

namespace {
constexpr std::pair<UpdateKind, std::string_view> kKindNames[] = {
    {UpdateKind::kNone, "NONE"},
    {UpdateKind::kInfer, "INFER"},
    {UpdateKind::kCntPretrain, "CNT_PRETRAIN"},
    {UpdateKind::kInstTune, "INST_TUNE"},
    {UpdateKind::kPreInstTune, "PRE_INST_TUNE"},
    {UpdateKind::kInstTunePlusInfer, "INST_TUNE_PLUS_INFER"},
};
}  // namespace

std::string_view to_string(UpdateKind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name;
  return "NONE";
}

UpdateKind parse_update_kind(std::string_view s) {
  std::string up;
  for (char c : s) up += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (const auto& [kind, name] : kKindNames)
    if (name == up) return kind;
  throw ContractError("unknown update method '" + std::string(s) + "'");
}

bool needs_adapter(UpdateKind k) {
  return k == UpdateKind::kCntPretrain || k == UpdateKind::kInstTune ||
         k == UpdateKind::kPreInstTune || k == UpdateKind::kInstTunePlusInfer;
}

bool uses_inference_context(UpdateKind k) {
  return k == UpdateKind::kInfer || k == UpdateKind::kInstTunePlusInfer;
}

std::vector<std::string> check_spec(const UpdateMethodSpec& spec) {
  std::vector<std::string> out;
  bool has_cmd = spec.adapter_command && !text::trim(*spec.adapter_command).empty();
  if (needs_adapter(spec.kind) && !has_cmd)
    out.push_back("update.adapter_command: " + std::string(to_string(spec.kind)) +
                  " trains a model and needs an adapter command");
  if (!needs_adapter(spec.kind) && spec.adapter_command)
    out.push_back("update.adapter_command: " + std::string(to_string(spec.kind)) +
                  " does not train; remove the adapter command");
  if (!needs_adapter(spec.kind) && spec.post_update_endpoint)
    out.push_back("update.post_update_endpoint: only training updates produce a new endpoint");
  return out;
}

// --- split -----------------------------------------------------------------

namespace {
// Uniform integer in [0, bound) by rejection, so results do not depend on the
// standard library's distribution implementation.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                        std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    std::uint64_t x = rng();
    if (x < limit) return x % bound;
  }
}
}  // namespace

CorpusSplit split_new(const std::vector<corpus::PaperRecord>& p_new, double ratio,
                      std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ContractError("split ratio must lie strictly between 0 and 1");
  std::vector<std::string> ids;
  for (const auto& p : p_new) ids.push_back(p.paper_id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw ContractError("duplicate paper ids in P_new");
  if (ids.size() < 2) throw ContractError("cannot split fewer than 2 new papers");

  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size() - 1; i > 0; --i)
    std::swap(ids[i], ids[uniform_below(rng, i + 1)]);

  auto n = static_cast<long long>(ids.size());
  long long k = std::llround(ratio * static_cast<double>(n));
  k = std::clamp(k, 1LL, n - 1);
  CorpusSplit s;
  s.seed = seed;
  s.ratio = ratio;
  s.train_new.assign(ids.begin(), ids.begin() + k);
  s.test_new.assign(ids.begin() + k, ids.end());
  std::sort(s.train_new.begin(), s.train_new.end());
  std::sort(s.test_new.begin(), s.test_new.end());
  return s;
}

json to_json(const CorpusSplit& s) {
  return {{"train_new", s.train_new}, {"test_new", s.test_new}, {"seed", s.seed}, {"ratio", s.ratio}};
}

CorpusSplit split_from_json(const json& j) {
  CorpusSplit s;
  s.train_new = j.at("train_new").get<std::vector<std::string>>();
  s.test_new = j.at("test_new").get<std::vector<std::string>>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.ratio = j.at("ratio").get<double>();
  return s;
}

// --- inference update ------------------------------------------------------

ClaimIndex::ClaimIndex(const std::vector<corpus::PaperTriplet>& triplets) : triplets_(triplets) {
  for (std::size_t i = 0; i < triplets_.size(); ++i)
    for (Epoch e : kAllEpochs) by_paper_.emplace(triplets_[i].at(e).paper_id, i);
}

const corpus::PaperTriplet& ClaimIndex::triplet_of(const std::string& paper_id) const {
  auto it = by_paper_.find(paper_id);
  if (it == by_paper_.end()) throw NotFoundError("paper " + paper_id + " is in no triplet");
  return triplets_[it->second];
}

std::string_view to_string(ContextScope s) { return s == ContextScope::kAll ? "all" : "new"; }

ContextScope parse_context_scope(std::string_view s) {
  if (s == "all") return ContextScope::kAll;
  if (s == "new") return ContextScope::kNew;
  throw ContractError("infer context scope must be 'all' or 'new', got '" + std::string(s) + "'");
}

probes::Probe apply_inference_update(const probes::Probe& probe, const CorpusSplit& split,
                                     const ClaimIndex& index, ContextScope scope) {
  if (!probe.paper_id) throw ContractError("probe " + probe.probe_id + " names no paper");
  const auto& triplet = index.triplet_of(*probe.paper_id);
  const auto& p_new = triplet.new_paper;
  if (probe.epoch == Epoch::kNew) {
    if (std::binary_search(split.train_new.begin(), split.train_new.end(), p_new.paper_id))
      throw ContractError("probe " + probe.probe_id + " targets training paper " + p_new.paper_id);
    if (!std::binary_search(split.test_new.begin(), split.test_new.end(), p_new.paper_id))
      throw ContractError("probe " + probe.probe_id + " targets paper " + p_new.paper_id +
                          " outside the split");
  }
  if (scope == ContextScope::kNew && probe.epoch != Epoch::kNew) return probe;
  if (text::trim(p_new.abstract).empty())
    throw ContractError("new paper " + p_new.paper_id + " has no abstract");
  probes::Probe out = probe;
  if (std::find(out.context_papers.begin(), out.context_papers.end(), p_new.abstract) ==
      out.context_papers.end())
    out.context_papers.push_back(p_new.abstract);
  return out;
}

// --- adapter bundle --------------------------------------------------------

json qa_pair(const claims::Claim& claim, const std::string& title) {
  auto probe = probes::build_judgment_prompt(claim, title);
  std::string answer =
      claim.gold_label == Label::kSupport
          ? "SUPPORT. Every detail in the claim is substantiated by the paper " + title + "."
          : "REFUTE. The claim is not substantiated by the paper " + title + ".";
  return {{"claim_id", claim.claim_id},
          {"paper_id", claim.paper_id},
          {"system", probe.system_prompt},
          {"question", probe.prompt},
          {"answer", answer}};
}

fs::path write_bundle(const fs::path& workdir, const UpdateMethodSpec& spec,
                      const CorpusSplit& split, const ClaimIndex& index,
                      const claims::ClaimSet& claims) {
  fs::path bundle = workdir / "update_bundle";
  fs::create_directories(bundle);
  fs::remove(bundle / "ready.json");
  auto abstracts = [&](const std::vector<std::string>& ids) {
    std::vector<json> rows;
    for (const auto& id : ids) {
      const auto& p = index.triplet_of(id).new_paper;
      rows.push_back({{"paper_id", p.paper_id}, {"title", p.title}, {"text", p.abstract}});
    }
    return rows;
  };
  write_jsonl(bundle / "abstracts_test.jsonl", abstracts(split.test_new));
  write_jsonl(bundle / "abstracts_train.jsonl", abstracts(split.train_new));
  std::set<std::string> train(split.train_new.begin(), split.train_new.end());
  std::vector<json> qa;
  for (const auto& c : claims.claims)
    if (c.epoch == Epoch::kNew && train.count(c.paper_id))
      qa.push_back(qa_pair(c, index.triplet_of(c.paper_id).new_paper.title));
  write_jsonl(bundle / "qa_train.jsonl", qa);
  write_json(bundle / "spec.json",
             {{"kind", to_string(spec.kind)},
              {"epochs", {{"autoregressive", 1}, {"sft", 4}}},
              {"split", {{"seed", split.seed}, {"ratio", split.ratio}}},
              {"notes",
               "abstracts_test.jsonl holds the evaluated new papers; qa_train.jsonl holds judgment "
               "questions for the training half with gold answers. Write ready.json into this "
               "directory with an endpoint URL or a checkpoint path when done."}});
  return bundle;
}

// --- adapter process -------------------------------------------------------

struct AdapterProcess {
  pid_t pid = -1;
  bool running = false;
  fs::path log;

  // Returns the exit status once the child is gone.
  std::optional<int> poll() {
    if (!running) return std::nullopt;
    int status = 0;
    pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r != pid) return std::nullopt;
    running = false;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  }

  ~AdapterProcess() {
    if (!running) return;
    ::kill(pid, SIGTERM);
    int status = 0;
    ::waitpid(pid, &status, 0);
  }
};

namespace {

std::string shell_quote(const std::string& s) {
  return "'" + text::replace_all(s, "'", "'\\''") + "'";
}

std::shared_ptr<AdapterProcess> spawn(const std::string& command, const fs::path& log) {
  int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw UpdateFailedError("cannot open adapter log " + log.string(), "");
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fd);
    throw UpdateFailedError("fork failed", "");
  }
  if (pid == 0) {
    ::dup2(fd, STDOUT_FILENO);
    ::dup2(fd, STDERR_FILENO);
    ::close(fd);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(fd);
  auto p = std::make_shared<AdapterProcess>();
  p->pid = pid;
  p->running = true;
  p->log = log;
  return p;
}

std::optional<json> try_read_ready(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  try {
    auto j = json::parse(read_text(path));
    if (j.is_object() && (j.contains("endpoint") || j.contains("checkpoint"))) return j;
  } catch (const std::exception&) {
    // Partially written; try again on the next poll.
  }
  return std::nullopt;
}

class WorkdirLock {
 public:
  explicit WorkdirLock(const fs::path& workdir) {
    fs::create_directories(workdir);
    auto path = workdir / ".update.lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0)
      throw UpdateFailedError("cannot lock " + path.string(), "");
  }
  ~WorkdirLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  WorkdirLock(const WorkdirLock&) = delete;
  WorkdirLock& operator=(const WorkdirLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace

UpdateHandle run_update(const UpdateMethodSpec& spec, const CorpusSplit& split,
                        const fs::path& workdir, endpoints::ChatModelPtr base_model,
                        const ClaimIndex& index, const claims::ClaimSet& claims,
                        const UpdateOptions& options) {
  auto problems = check_spec(spec);
  if (!problems.empty()) throw ContractError(problems.front());
  UpdateHandle h;
  h.inference_context = uses_inference_context(spec.kind);
  h.update_tag = std::string(to_string(spec.kind));
  if (!needs_adapter(spec.kind)) {
    h.model = std::move(base_model);
    return h;
  }

  WorkdirLock lock(workdir);
  auto bundle = write_bundle(workdir, spec, split, index, claims);
  fs::create_directories(workdir / "logs");
  auto log = workdir / "logs" / "adapter.log";
  std::string command = *spec.adapter_command + " " + shell_quote(fs::absolute(bundle).string());
  spdlog::info("running adapter: {}", command);
  auto proc = spawn(command, log);

  auto deadline = std::chrono::steady_clock::now() + options.ready_timeout;
  std::optional<json> ready;
  for (;;) {
    auto code = proc->poll();
    if (code && *code != 0) {
      std::string captured = fs::exists(log) ? read_text(log) : "";
      throw UpdateFailedError("adapter exited with status " + std::to_string(*code), captured);
    }
    ready = try_read_ready(bundle / "ready.json");
    if (ready) break;
    if (std::chrono::steady_clock::now() > deadline) {
      std::string captured = fs::exists(log) ? read_text(log) : "";
      throw UpdateFailedError("adapter did not write ready.json in time", captured);
    }
    std::this_thread::sleep_for(options.poll_interval);
  }
  h.ready = *ready;

  endpoints::EndpointSpec endpoint = spec.post_update_endpoint.value_or(options.base_endpoint);
  if (ready->contains("endpoint")) {
    endpoint.url = ready->at("endpoint").get<std::string>();
  } else if (!spec.post_update_endpoint) {
    throw UpdateFailedError("adapter reported only a checkpoint and no post-update endpoint is "
                            "configured",
                            "");
  }
  h.model = endpoints::make_chat_model(endpoint, bundle);
  h.process = std::move(proc);
  return h;
}

}  // namespace claimshift::updates
