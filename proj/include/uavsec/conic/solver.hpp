#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uavsec/conic/program.hpp"

namespace uavsec::conic {

enum class StatusKind { optimal, infeasible, unbounded, numerical_failure, iteration_limit };

const char* to_string(StatusKind kind);

struct SolverStatus {
  StatusKind kind = StatusKind::numerical_failure;
  /// Present iff kind == optimal.
  std::optional<double> objective;
  /// Barrier-implied multipliers for the linear constraints (in program order).
  std::optional<std::vector<double>> duals;
  std::string message;
};

struct SolveOptions {
  double tol_feas = 1e-7;
  double tol_gap = 1e-7;
  double barrier_growth = 16.0;
  int max_newton_steps = 1500;
  bool verbose = false;
};

struct SolveResult {
  SolverStatus status;
  /// Variable values; for iteration_limit this is the last strictly feasible
  /// point, empty when phase I never found one.
  std::vector<double> x;
  /// Best available point objective (also set for iteration_limit).
  double objective_estimate = 0.0;
  int newton_steps = 0;
  int phase1_steps = 0;
  double wall_ms = 0.0;
};

/// Primal log-barrier path-following interior-point method. Starts from the
/// per-variable initial values, finds a strictly feasible point by a
/// relaxed phase I, then follows the central path until the duality-gap
/// bound m / t drops below tol_gap * max(1, |objective|).
SolveResult solve(const ConicProgram& program, const SolveOptions& options = {});

}  // namespace uavsec::conic
