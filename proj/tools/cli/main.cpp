#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"PC-Kriging active learning for multiple limit states"};
  app.require_subcommand(1);

  std::string config;
  pckal::cli::RunOptions run_options;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "run a replicated active-learning study");
  run->add_option("config", config, "study configuration (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (overrides output_dir)");
  run->add_option("--jobs", run_options.jobs, "parallel runs")->check(CLI::PositiveNumber);
  run->add_flag("--resume", run_options.resume, "reuse finished records and checkpoints");

  std::size_t n = 0;
  std::uint64_t seed = 0;
  auto* truth = app.add_subcommand("truth", "brute-force Monte Carlo reference betas");
  truth->add_option("config", config, "study configuration (JSON)")->required();
  truth->add_option("--n", n, "sample size (>= 1e6)")->required();
  truth->add_option("--seed", seed, "random seed")->required();

  std::string study_dir;
  std::string format = "table";
  auto* report = app.add_subcommand("report", "summarize a finished study");
  report->add_option("dir", study_dir, "study output directory")->required();
  report->add_option("--format", format, "table or csv")
      ->check(CLI::IsMember({"table", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pckal::cli::kValidation;
  }

  if (run->parsed()) {
    if (!out_dir.empty()) run_options.out = out_dir;
    return pckal::cli::cmd_run(config, run_options, std::cout, std::cerr);
  }
  if (truth->parsed()) return pckal::cli::cmd_truth(config, n, seed, std::cout, std::cerr);
  return pckal::cli::cmd_report(study_dir, format, std::cout, std::cerr);
}
