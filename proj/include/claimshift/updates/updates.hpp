#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "claimshift/claims/claims.hpp"
#include "claimshift/corpus/paper.hpp"
#include "claimshift/endpoints/chat_model.hpp"
#include "claimshift/probes/probes.hpp"

namespace claimshift::updates {

enum class UpdateKind { kNone, kInfer, kCntPretrain, kInstTune, kPreInstTune, kInstTunePlusInfer };

std::string_view to_string(UpdateKind k);     // NONE, INFER, CNT_PRETRAIN, ...
UpdateKind parse_update_kind(std::string_view s);
bool needs_adapter(UpdateKind k);
bool uses_inference_context(UpdateKind k);

struct UpdateMethodSpec {
  UpdateKind kind = UpdateKind::kNone;
  std::optional<std::string> adapter_command;
  std::optional<endpoints::EndpointSpec> post_update_endpoint;
};

// Empty when the spec is consistent; otherwise one message per problem.
std::vector<std::string> check_spec(const UpdateMethodSpec& spec);

struct CorpusSplit {
  std::vector<std::string> train_new;  // sorted
  std::vector<std::string> test_new;   // sorted
  std::uint64_t seed = 0;
  double ratio = 0.5;
  bool operator==(const CorpusSplit&) const = default;
};

// Seeded shuffle of the sorted ids; |train| = round(ratio * N), kept within
// [1, N-1]. The shuffle is hand-rolled so the split is identical across
// standard libraries.
CorpusSplit split_new(const std::vector<corpus::PaperRecord>& p_new, double ratio,
                      std::uint64_t seed);

json to_json(const CorpusSplit& s);
CorpusSplit split_from_json(const json& j);

// Lookup from any paper of a triplet to the whole triplet.
class ClaimIndex {
 public:
  explicit ClaimIndex(const std::vector<corpus::PaperTriplet>& triplets);
  const corpus::PaperTriplet& triplet_of(const std::string& paper_id) const;
  bool contains(const std::string& paper_id) const { return by_paper_.count(paper_id) > 0; }

 private:
  std::vector<corpus::PaperTriplet> triplets_;
  std::map<std::string, std::size_t> by_paper_;
};

enum class ContextScope { kAll, kNew };
std::string_view to_string(ContextScope s);
ContextScope parse_context_scope(std::string_view s);

// Adds the linked triplet's new-paper abstract as context. With scope kNew
// only new-epoch probes are touched. Idempotent. Throws ContractError when a
// new-epoch probe belongs to the training split or the abstract is missing.
probes::Probe apply_inference_update(const probes::Probe& probe, const CorpusSplit& split,
                                     const ClaimIndex& index,
                                     ContextScope scope = ContextScope::kAll);

// Writes workdir/update_bundle/ and returns its path.
std::filesystem::path write_bundle(const std::filesystem::path& workdir, const UpdateMethodSpec& spec,
                                   const CorpusSplit& split, const ClaimIndex& index,
                                   const claims::ClaimSet& claims);

// Question/answer pair used as training QA for a SUPPORT/REFUTE claim.
json qa_pair(const claims::Claim& claim, const std::string& title);

struct AdapterProcess;

struct UpdateHandle {
  endpoints::ChatModelPtr model;
  bool inference_context = false;
  std::string update_tag;
  json ready;  // contents of ready.json for adapter kinds
  std::shared_ptr<AdapterProcess> process;  // kept alive while serving
};

struct UpdateOptions {
  std::chrono::milliseconds ready_timeout{std::chrono::minutes(30)};
  std::chrono::milliseconds poll_interval{100};
  endpoints::EndpointSpec base_endpoint;  // template for the post-update endpoint
};

// NONE and INFER return the base model. Adapter kinds write the bundle, run
// `<adapter_command> <bundle_dir>` through /bin/sh, and wait for
// bundle_dir/ready.json. Exclusive per workdir via a lock file.
UpdateHandle run_update(const UpdateMethodSpec& spec, const CorpusSplit& split,
                        const std::filesystem::path& workdir, endpoints::ChatModelPtr base_model,
                        const ClaimIndex& index, const claims::ClaimSet& claims,
                        const UpdateOptions& options = {});

}  // namespace claimshift::updates
