// Command line front end: extract | train | reproduce | check.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "cccrl/harness.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string scheme;
  long long seed = -1;
  int jobs = 0;
};

cccrl::ExperimentConfig load_with_overrides(const CommonOpts& opts) {
  cccrl::ExperimentConfig cfg = cccrl::load_config(opts.config_path);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (!opts.scheme.empty()) cfg.scheme = cccrl::share_scheme_from_name(opts.scheme);
  if (opts.seed >= 0) cfg.seeds = {static_cast<std::uint64_t>(opts.seed)};
  return cfg;
}

void print_artifacts(const cccrl::RunArtifacts& art) {
  for (const auto& f : art.files) {
    std::printf("wrote %s\n", f.string().c_str());
  }
  for (const auto& w : art.warnings) {
    std::printf("warning: %s\n", w.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal coordinated concurrent reinforcement learning"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* extract = app.add_subcommand(
      "extract", "mechanism extraction and batch allocation only");
  extract->add_option("--config", opts.config_path, "experiment config file")
      ->required();
  extract->add_option("--out", opts.out_dir, "output directory override");
  extract->add_option("--seed", opts.seed, "single seed override");
  extract->add_option("--scheme", opts.scheme, "share scheme override");

  auto* train = app.add_subcommand("train", "full pipeline with training");
  train->add_option("--config", opts.config_path, "experiment config file")
      ->required();
  train->add_option("--out", opts.out_dir, "output directory override");
  train->add_option("--seed", opts.seed, "single seed override");
  train->add_option("--scheme", opts.scheme, "share scheme override");
  train->add_option("--jobs", opts.jobs, "parallel seed workers");

  std::string figure;
  auto* reproduce = app.add_subcommand("reproduce",
                                       "run a desk-scale figure preset");
  reproduce->add_option("figure", figure, "fig2|fig3|fig4|fig5|fig6")
      ->required();
  reproduce->add_option("--out", opts.out_dir, "output directory");
  reproduce->add_option("--jobs", opts.jobs, "parallel seed workers");

  auto* check = app.add_subcommand("check", "run the quick invariant suite");
  (void)check;

  CLI11_PARSE(app, argc, argv);

  try {
    if (extract->parsed()) {
      print_artifacts(cccrl::run_extract(load_with_overrides(opts)));
    } else if (train->parsed()) {
      print_artifacts(
          cccrl::run_pipeline(load_with_overrides(opts), opts.jobs));
    } else if (reproduce->parsed()) {
      const std::string out = opts.out_dir.empty() ? "runs" : opts.out_dir;
      for (const auto& entry : cccrl::reproduce_plan(figure, out)) {
        std::printf("== %s/%s ==\n", figure.c_str(), entry.name.c_str());
        if (entry.extract_only) {
          print_artifacts(cccrl::run_extract(entry.config));
        } else {
          print_artifacts(cccrl::run_pipeline(entry.config, opts.jobs));
        }
      }
    } else if (check->parsed()) {
      bool all_ok = true;
      for (const auto& res : cccrl::run_quick_checks()) {
        std::printf("[%s] %s: %s\n", res.passed ? "PASS" : "FAIL",
                    res.name.c_str(), res.detail.c_str());
        all_ok = all_ok && res.passed;
      }
      return all_ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
