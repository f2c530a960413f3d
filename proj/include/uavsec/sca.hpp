#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavsec/conic/program.hpp"
#include "uavsec/conic/solver.hpp"
#include "uavsec/scenario.hpp"

namespace uavsec {

/// Expansion point of the first-order surrogates.
struct WcrIterate {
  std::vector<double> tau_tilde;
  std::vector<Vec2> q_tilde;
  std::vector<double> alpha_tilde;
  std::vector<double> varphi_tilde;

  int n_slots() const { return static_cast<int>(tau_tilde.size()); }
  /// Throws std::invalid_argument when sizes disagree or values leave
  /// tau >= 1/P_max, alpha > 1, varphi > 0.
  void check(const Scenario& scenario) const;
};

struct TraceRow {
  int iteration = 0;
  double objective = 0.0;
  std::string solver_status;
  double wall_ms = 0.0;
};

/// Row 0 is the initial point; row i >= 1 is the i-th subproblem.
struct SolveTrace {
  std::vector<TraceRow> rows;
  bool converged = false;
  double epsilon = 0.0;
  int max_iters = 0;

  int iterations() const { return rows.empty() ? 0 : static_cast<int>(rows.size()) - 1; }
  /// Header "iteration,objective,solver_status,wall_ms". With
  /// include_timing = false the wall_ms column is written as 0 so repeated
  /// runs produce identical files.
  std::string to_csv(bool include_timing = true) const;
};

struct ScaOptions {
  double epsilon = 1e-4;
  int max_iters = 50;
  conic::SolveOptions solver;
};

/// Raised when a subproblem cannot be solved. kind is "infeasible_subproblem"
/// or "numerical_failure"; iteration is 1-based.
class ScaError : public std::runtime_error {
 public:
  ScaError(std::string kind, int iteration, const std::string& what)
      : std::runtime_error(kind + " at iteration " + std::to_string(iteration) + ": " + what),
        kind_(std::move(kind)),
        iteration_(iteration) {}
  const std::string& kind() const noexcept { return kind_; }
  int iteration() const noexcept { return iteration_; }

 private:
  std::string kind_;
  int iteration_;
};

/// A convex subproblem plus the handles needed to read a Solution back.
/// When the trajectory is fixed, qx/qy are constant expressions.
struct Subproblem {
  conic::ConicProgram program;
  std::vector<conic::AffineExpr> qx, qy;
  std::vector<conic::Var> tau, varphi;
  /// alpha_n = 1 + excess_n, with the excess as the decision variable.
  std::vector<conic::AffineExpr> alpha;
  /// Named slack values to report, row-major (k * N + n).
  std::map<std::string, std::vector<conic::AffineExpr>> slacks;
};

/// Variables, objective and the model-independent constraints shared by the
/// bounded and probabilistic subproblems: rate objective with the varphi
/// surrogate, the SU-rate cone, mobility, power budgets.
Subproblem build_common_subproblem(const Scenario& scenario, const WcrIterate& iterate,
                                   bool fixed_trajectory);

/// (1/N) sum_n [log2(alpha_n) - log2(1 + varphi_n)].
double surrogate_free_objective(const std::vector<double>& alpha, const std::vector<double>& varphi);

struct ScaResult {
  Solution solution;
  SolveTrace trace;
  WcrIterate last_iterate;
};

using SubproblemBuilder = std::function<Subproblem(const WcrIterate&)>;
using RateEvaluator = std::function<double(const std::vector<Vec2>&, const std::vector<double>&)>;

/// Generic successive convex approximation loop: build, solve, update the
/// expansion point, stop once the objective moves by at most epsilon.
ScaResult run_sca(const WcrIterate& init, const SubproblemBuilder& build, const RateEvaluator& certified_rate,
                  const ScaOptions& options);

/// Reads UAVSEC_VERBOSE; any value other than "" or "0" enables solver logs.
bool verbose_from_env();

}  // namespace uavsec
