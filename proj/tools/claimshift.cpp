// Command-line front end for the knowledge-update evaluation pipeline.
#include <iostream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "claimshift/core/errors.hpp"
#include "claimshift/pipeline/pipeline.hpp"

namespace cs = claimshift;
namespace pl = claimshift::pipeline;

namespace {

struct Overrides {
  std::string update_method;
  std::optional<double> split_ratio;
  std::optional<std::uint64_t> split_seed;
  std::string adapter_cmd;
  std::string infer_scope;
  std::string output_dir;
  std::string cache_dir;
};

void apply(const Overrides& o, pl::RunConfig& c) {
  if (!o.update_method.empty()) c.update.kind = cs::updates::parse_update_kind(o.update_method);
  if (o.split_ratio) c.split_ratio = *o.split_ratio;
  if (o.split_seed) c.split_seed = *o.split_seed;
  if (!o.adapter_cmd.empty()) c.update.adapter_command = o.adapter_cmd;
  // Switching to a non-training method drops a file-provided adapter.
  if (!o.update_method.empty() && o.adapter_cmd.empty() && !cs::updates::needs_adapter(c.update.kind))
    c.update.adapter_command.reset();
  if (!o.infer_scope.empty()) c.infer_context_scope = cs::updates::parse_context_scope(o.infer_scope);
  if (!o.output_dir.empty()) c.output_dir = std::filesystem::absolute(o.output_dir);
  if (!o.cache_dir.empty()) c.cache_dir = std::filesystem::absolute(o.cache_dir);
}

void print_manifest(const pl::RunManifest& m) {
  std::cout << "config " << m.config_hash << "\n";
  for (const auto& s : m.stages) {
    std::cout << "  " << s.name << ": " << s.status;
    if (!s.error.empty()) std::cout << " (" << s.error << ")";
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measure how knowledge updates change a model's grasp of scientific claims."};
  app.require_subcommand(1);

  std::string config_path;
  bool resume = false, dry_run = false, verbose = false;
  Overrides ov;
  std::string scope_help = "all: every probe gets the new paper as context. new: only new-epoch probes";
  app.add_option("-c,--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  app.add_flag("--resume", resume, "Skip stages whose inputs and outputs are unchanged");
  app.add_flag("--dry-run", dry_run, "Validate the config and print the stage plan");
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_option("--update-method", ov.update_method,
                 "NONE, INFER, CNT_PRETRAIN, INST_TUNE, PRE_INST_TUNE or INST_TUNE_PLUS_INFER");
  app.add_option("--split-ratio", ov.split_ratio, "Share of new papers used for training");
  app.add_option("--split-seed", ov.split_seed, "Seed for the new-paper split");
  app.add_option("--adapter-cmd", ov.adapter_cmd, "Program that trains the model from update_bundle/");
  app.add_option("--infer-context-scope", ov.infer_scope, scope_help)->check(CLI::IsMember({"all", "new"}));
  app.add_option("--output-dir", ov.output_dir, "Override output_dir");
  app.add_option("--cache-dir", ov.cache_dir, "Override cache_dir");

  std::vector<pl::Stage> only;
  bool whole_run = false;
  std::string phase = "pre";
  auto add_verb = [&](const char* name, const char* help, pl::Stage stage) {
    app.add_subcommand(name, help)->callback([&, stage] { only = {stage}; });
  };
  add_verb("corpus", "Fetch papers and assemble prior/new/future triplets", pl::Stage::kCorpus);
  add_verb("claims", "Generate SUPPORT and REFUTE claims per paper", pl::Stage::kClaims);
  auto* snap = app.add_subcommand("snapshot", "Probe the model and record knowledge states");
  snap->add_option("--phase", phase, "pre or post")->check(CLI::IsMember({"pre", "post"}));
  snap->callback([&] { only = {phase == "pre" ? pl::Stage::kPreSnapshot : pl::Stage::kPostSnapshot}; });
  add_verb("update", "Apply the configured update method", pl::Stage::kUpdate);
  add_verb("evaluate", "Compute preservation, acquisition and projection", pl::Stage::kEvaluate);
  add_verb("analyze", "Domain factors and their correlation with the metrics", pl::Stage::kAnalyze);
  add_verb("report", "Write summary.md and plot data", pl::Stage::kReport);
  app.add_subcommand("run", "Run every stage in order")->callback([&] { whole_run = true; });

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    auto config = pl::load_config(config_path);
    apply(ov, config);
    auto diags = pl::validate_config(config);
    if (!diags.empty()) {
      std::cerr << "config problems:\n";
      for (const auto& d : diags) std::cerr << "  " << d.field << ": " << d.message << "\n";
      return 2;
    }
    pl::RunOptions opts;
    opts.resume = resume;
    opts.dry_run = dry_run;
    if (!whole_run) opts.only = only;
    auto manifest = pl::run_pipeline(config, opts);
    print_manifest(manifest);
    return 0;
  } catch (const pl::StageFailedError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const cs::ContractError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
