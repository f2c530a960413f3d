#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uavsec/experiments.hpp"

namespace {

using namespace uavsec;

void add_sca_flags(CLI::App* cmd, ScaOptions& sca) {
  cmd->add_option("--eps", sca.epsilon, "Stop when the objective changes by at most this much")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", sca.max_iters, "Iteration cap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust UAV trajectory and power optimization for secure cognitive-radio links"};
  app.require_subcommand(1);

  SolveCommand solve;
  std::string solve_model = "wcr";
  auto* solve_cmd = app.add_subcommand("solve", "Solve one scheme and certify the result");
  solve_cmd->add_option("config", solve.config_path, "Scenario JSON file")->required();
  solve_cmd->add_option("--model", solve_model, "wcr, ocr, nonrobust, fixed1 or fixed2")
      ->capture_default_str()
      ->check(CLI::IsMember({"wcr", "ocr", "nonrobust", "fixed1", "fixed2"}));
  solve_cmd->add_option("--out", solve.out_dir, "Output directory")->capture_default_str();
  add_sca_flags(solve_cmd, solve.options.sca);
  solve_cmd->add_option("--seed", solve.options.seed, "Monte-Carlo seed")->capture_default_str();
  solve_cmd->add_option("--samples", solve.options.outage_samples, "Monte-Carlo samples per slot")
      ->capture_default_str()
      ->check(CLI::Range(1000, 100000000));
  bool no_timing = false;
  solve_cmd->add_flag("--no-timing", no_timing, "Write wall_ms as 0 so repeated runs are byte-identical");

  SweepCommand sweep;
  std::string sweep_var = "T";
  std::vector<std::string> sweep_schemes{"wcr"};
  auto* sweep_cmd = app.add_subcommand("sweep", "Solve over a list of parameter values");
  sweep_cmd->add_option("config", sweep.config_path, "Scenario JSON file")->required();
  sweep_cmd->add_option("--vary", sweep_var, "T (seconds), p_avg (W) or it_threshold (W)")
      ->capture_default_str()
      ->check(CLI::IsMember({"T", "p_avg", "it_threshold"}));
  sweep_cmd->add_option("--values", sweep.values, "Values of the swept quantity")->required()->delimiter(',');
  sweep_cmd->add_option("--schemes", sweep_schemes, "Schemes to run")
      ->delimiter(',')
      ->check(CLI::IsMember({"wcr", "ocr", "nonrobust", "fixed1", "fixed2"}));
  sweep_cmd->add_option("--out", sweep.out_dir, "Output directory")->capture_default_str();
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads (0 = hardware concurrency)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  add_sca_flags(sweep_cmd, sweep.options);

  CompareCommand compare;
  auto* compare_cmd = app.add_subcommand("compare", "Convergence of both robust schemes on three cases");
  compare_cmd->add_option("config", compare.config_path, "Scenario JSON file")->required();
  compare_cmd->add_option("--out", compare.out_dir, "Output directory")->capture_default_str();
  add_sca_flags(compare_cmd, compare.options);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const bool verbose = verbose_from_env();
  if (solve_cmd->parsed()) {
    solve.scheme = parse_scheme(solve_model);
    solve.include_timing = !no_timing;
    solve.options.sca.solver.verbose = verbose;
    return cmd_solve(solve);
  }
  if (sweep_cmd->parsed()) {
    sweep.variable = parse_sweep_variable(sweep_var);
    sweep.schemes.clear();
    for (const auto& name : sweep_schemes) sweep.schemes.push_back(parse_scheme(name));
    sweep.options.solver.verbose = verbose;
    return cmd_sweep(sweep);
  }
  compare.options.solver.verbose = verbose;
  return cmd_compare(compare);
}
