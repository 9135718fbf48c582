// Command-line front end: tune, bruteforce, report.

#include <iostream>

#include <CLI11.hpp>

#include "flagtune/commands.hpp"

int main(int argc, char** argv) {
  using namespace flagtune;

  CLI::App app{"Compiler flag auto-tuning with a random-forest surrogate and binary PSO"};
  app.require_subcommand(1);

  TuneOptions tune;
  std::uint64_t seed = 0;
  double budget = 0.0;
  std::string strategy, out;
  auto* tune_cmd = app.add_subcommand("tune", "Tune the flags of one target and write a run report");
  tune_cmd->add_option("--config", tune.config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = tune_cmd->add_option("--seed", seed, "Override the config seed");
  auto* budget_opt = tune_cmd->add_option("--budget", budget, "Time budget in seconds");
  auto* strategy_opt = tune_cmd->add_option("--strategy", strategy, "comptuner | high_only | one_time | rio | ga");
  auto* out_opt = tune_cmd->add_option("--out", out, "Output directory");
  tune_cmd->add_flag("--allow-empty", tune.allow_empty, "With a zero budget, write a baseline-only report");
  tune_cmd->add_flag("--resume", tune.resume, "Reuse measurements from the output directory's journal");

  BruteforceOptions brute;
  std::string brute_out, compare;
  auto* brute_cmd = app.add_subcommand("bruteforce", "Enumerate every flag setting and report the optimum");
  brute_cmd->add_option("--config", brute.config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  auto* brute_out_opt = brute_cmd->add_option("--out", brute_out, "Output directory");
  auto* compare_opt = brute_cmd->add_option("--compare", compare, "report.json whose best sequence is compared");
  brute_cmd->add_flag("--confirm", brute.confirm, "Allow exhaustive builds with a real compiler (n <= 12)");
  brute_cmd->add_flag("--force", brute.force, "Lift the size limits");

  ReportOptions report;
  std::vector<std::string> inputs;
  std::string csv;
  double reference = 0.0;
  auto* report_cmd = app.add_subcommand("report", "Compare run reports across strategies");
  report_cmd->add_option("inputs", inputs, "Run directories or report files")->required();
  auto* csv_opt = report_cmd->add_option("--csv", csv, "Also write the table as CSV");
  auto* ref_opt = report_cmd->add_option("--reference-speedup", reference, "Speedup that marks a strategy with x");

  CLI11_PARSE(app, argc, argv);

  if (*tune_cmd) {
    if (*seed_opt) tune.seed = seed;
    if (*budget_opt) tune.budget_s = budget;
    if (*strategy_opt) tune.strategy = strategy;
    if (*out_opt) tune.out = out;
    return guarded([&] { run_tune(tune); });
  }
  if (*brute_cmd) {
    if (*brute_out_opt) brute.out = brute_out;
    if (*compare_opt) brute.compare = compare;
    return guarded([&] { run_bruteforce(brute); });
  }
  for (const auto& in : inputs) report.inputs.emplace_back(in);
  if (*csv_opt) report.csv = csv;
  if (*ref_opt) report.reference_speedup = reference;
  return guarded([&] { run_report(report); });
}
