#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "uavsec/sca.hpp"
#include "uavsec/scenario.hpp"
#include "uavsec/validation.hpp"

namespace uavsec {

enum class Scheme { wcr, ocr, nonrobust, fixed1, fixed2 };

/// "wcr", "ocr", "nonrobust", "fixed1", "fixed2"; throws std::invalid_argument.
Scheme parse_scheme(const std::string& name);
const char* to_string(Scheme scheme);
/// wcr, nonrobust and fixed1 are certified against the disk model; ocr and
/// fixed2 against the Gaussian model.
UncertaintyModel certification_model(Scheme scheme);

struct RunOptions {
  ScaOptions sca;
  int outage_samples = 100000;
  std::uint64_t seed = 1;
};

struct SchemeRun {
  Scheme scheme = Scheme::wcr;
  ScaResult result;
  ValidationReport validation;
  /// Rate the scheme can certify: worst case over the disks for the bounded
  /// schemes (the non-robust design included), Bernstein effective for the
  /// probabilistic ones.
  double avg_secrecy_rate = 0.0;
  double wall_s = 0.0;
};

/// Runs one scheme and certifies the result. Propagates ScenarioError and ScaError.
SchemeRun run_scheme(const Scenario& scenario, Scheme scheme, const RunOptions& options);

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitSolver = 4;
inline constexpr int kExitCertification = 5;

struct SolveCommand {
  std::string config_path;
  Scheme scheme = Scheme::wcr;
  std::string out_dir = ".";
  RunOptions options;
  bool include_timing = true;
};

/// Writes solution.json, trace.csv and validation.json into out_dir.
int cmd_solve(const SolveCommand& command);

enum class SweepVariable { duration, p_avg, it_threshold };
/// "T", "p_avg", "it_threshold"; throws std::invalid_argument.
SweepVariable parse_sweep_variable(const std::string& name);
const char* to_string(SweepVariable v);

/// Scenario with the swept quantity set to `value` (seconds or watts).
/// Changing p_avg keeps P_max = 4 P_avg.
Scenario apply_sweep_value(const Scenario& base, SweepVariable v, double value);

struct SweepPoint {
  double x = 0.0;
  double avg_secrecy_rate = 0.0;
  double wall_s = 0.0;
  int iterations = 0;
  std::string status;  // "converged", "max_iters" or an error kind
};

using SweepCallback = std::function<void(std::size_t index, const SweepPoint& point)>;

/// Evaluates every value with a pool of `jobs` worker threads (0 picks the
/// hardware concurrency). The result order follows `values`. `on_point`
/// runs on the worker thread as each point finishes.
std::vector<SweepPoint> run_sweep(const Scenario& base, SweepVariable v, const std::vector<double>& values,
                                  Scheme scheme, const ScaOptions& options, int jobs = 0,
                                  const SweepCallback& on_point = nullptr);

/// Header "x,avg_secrecy_rate_bps_hz,wall_s,iterations,status".
std::string sweep_to_csv(const std::vector<SweepPoint>& points);

struct SweepCommand {
  std::string config_path;
  SweepVariable variable = SweepVariable::duration;
  std::vector<double> values;
  std::vector<Scheme> schemes{Scheme::wcr};
  std::string out_dir = ".";
  ScaOptions options;
  int jobs = 0;
};

/// One CSV per scheme: sweep_<variable>_<scheme>.csv.
int cmd_sweep(const SweepCommand& command);

/// The three (P_avg, Gamma) cases of the convergence study.
struct CompareCase {
  int index = 0;
  double p_avg_w = 0.0;
  double it_threshold_w = 0.0;
};
std::vector<CompareCase> compare_cases();

struct CompareRun {
  CompareCase c;
  Scheme scheme = Scheme::wcr;
  SolveTrace trace;
  std::optional<std::string> error;
};

std::vector<CompareRun> run_compare(const Scenario& base, const ScaOptions& options);

/// Header "case,p_avg_w,it_threshold_w,scheme,iteration,objective".
std::string compare_to_csv(const std::vector<CompareRun>& runs);

struct CompareCommand {
  std::string config_path;
  std::string out_dir = ".";
  ScaOptions options;
};

/// Writes convergence.csv.
int cmd_compare(const CompareCommand& command);

}  // namespace uavsec
