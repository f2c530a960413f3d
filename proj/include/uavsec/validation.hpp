#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uavsec/sca.hpp"
#include "uavsec/scenario.hpp"

// Independent certification of solutions. Only the closed-form channel
// formulas are used here; nothing in this module touches the conic layer.
namespace uavsec {

struct ValidationReport {
  std::string kind;  // "worst_case" or "outage"
  bool passed = true;
  double tolerance = 0.0;
  /// Largest entry of `violations` (0 when everything holds).
  double max_violation = 0.0;
  /// Positive values are violations. Rates in bits/s/Hz, power and
  /// interference relative to their budgets, distances relative to V_max * slot.
  std::map<std::string, double> violations;
  /// Informational numbers that do not affect `passed`.
  std::map<std::string, double> diagnostics;
  /// Worst-case model: average secrecy rate with each Eve at its per-slot
  /// adversarial disk point. Outage model: (1/N) sum [R_U - beta_n]^+.
  double certified_rate_bps_hz = 0.0;

  // Outage certification only.
  int samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> eve_outage;  // per slot
  std::vector<double> pu_outage;   // row-major l * N + n
  double eve_limit = 0.0;          // rho plus the binomial margin
  double pu_limit = 0.0;           // phi plus the binomial margin
  std::vector<int> failing_slots;
};

inline constexpr double kCertifyTolerance = 1e-7;
inline constexpr int kDiskGridRadial = 32;
inline constexpr int kDiskGridAngular = 32;
inline constexpr double kBinomialSigmas = 3.0;

/// Points of the 32 x 32 polar grid over the disk (center included).
std::vector<Vec2> disk_grid(const Vec2& center_xy, double radius_m);

/// Largest gain over the grid and the closed-form nearest point of the disk.
double disk_max_gain(const Vec2& q_xy, const UncertainNode& node, double altitude_m, double beta0);

/// Checks power, mobility and endpoint constraints, worst-case Eve rates
/// against the beta slacks (when present) and worst-case interference
/// against the threshold and the gamma slacks (when present).
ValidationReport certify_worst_case(const Solution& solution, const Scenario& scenario,
                                    double tolerance = kCertifyTolerance);

/// Monte-Carlo outage check with Gaussian node positions. Requires the
/// "beta" slack (and "gamma" when the scenario has PUs). Throws
/// std::invalid_argument for fewer than 1000 samples.
ValidationReport certify_outage(const Solution& solution, const Scenario& scenario, int samples,
                                std::uint64_t seed);

/// Analytic Hessian of 1 / (x y).
Eigen::Matrix2d inverse_product_hessian(double x, double y);
/// Central finite-difference Hessian of 1 / (x y) with relative step h.
Eigen::Matrix2d inverse_product_hessian_fd(double x, double y, double h = 1e-4);

struct HessianCheck {
  bool passed = true;
  double min_eigenvalue = 0.0;
  double min_fd_eigenvalue = 0.0;
  double max_fd_relative_error = 0.0;
};

/// Samples x, y log-uniformly in [1e-2, 1e2] and checks both Hessians are
/// positive semidefinite (min eigenvalue >= -1e-8) and agree to 1e-5.
HessianCheck check_hessian_psd(int samples, std::uint64_t seed = 1);

struct TraceAudit {
  bool passed = true;
  bool monotone = true;
  /// Stopped at the first |delta| <= epsilon, or ran to max_iters without one.
  bool epsilon_rule = true;
  bool converged = false;
  double worst_decrease = 0.0;
  std::string message;
};

TraceAudit audit_trace(const SolveTrace& trace, double epsilon, double tol_gap = 1e-7);

}  // namespace uavsec
