#pragma once

#include <array>
#include <optional>

#include "uavsec/conic/program.hpp"
#include "uavsec/sca.hpp"
#include "uavsec/scenario.hpp"

namespace uavsec {

/// Per-Eve outage level so that K independent Eves jointly meet rho:
/// 1 - (1 - rho)^(1/K).
double decouple_outage(double rho, int num_eves);

/// Disk radius whose 2-D Gaussian coverage equals the given probability:
/// std * sqrt(-2 ln(1 - p)). With num_eves set, p = prob^(1/K).
/// Throws std::invalid_argument unless prob lies in (0, 1).
double matched_radius(double std_m, double prob, std::optional<int> num_eves = std::nullopt);

/// Deterministic surrogate of Pr{|q - c - std x|^2 + H^2 >= cap} >= 1 - outage
/// for x ~ N(0, I2): quadratic form x'Ax + 2b'x + c with A = std^2 I.
struct BernsteinTriple {
  double trace_term = 0.0;
  std::array<conic::AffineExpr, 2> b_vec;
  conic::AffineExpr c_term;
  conic::Var eta;
  conic::Var zeta;
  /// cap >= beta0 / (tau * z), the variable bounded by the distance term.
  conic::Var cap;
};

/// Interference to one PU: gamma >= s_l P holds with probability >= 1 - phi.
BernsteinTriple bernstein_interference(conic::ConicProgram& program, const conic::AffineExpr& qx,
                                       const conic::AffineExpr& qy, const Vec2& q_tilde, const UncertainNode& pu,
                                       conic::Var tau, conic::Var gamma, double altitude_m, double beta0,
                                       double phi, const std::string& tag = "pu");

/// Eve leakage: P g_k / noise <= varphi holds with probability >= 1 - rho_bar.
BernsteinTriple bernstein_eve(conic::ConicProgram& program, const conic::AffineExpr& qx,
                              const conic::AffineExpr& qy, const Vec2& q_tilde, const UncertainNode& eve,
                              conic::Var tau, conic::Var varphi, double altitude_m, double beta0, double noise_w,
                              double rho_bar, const std::string& tag = "eve");

/// beta0 / (d^2 + H^2 + 2 std^2 - sqrt(-2 ln outage) sqrt(2 std^4 + 2 std^2 d^2)):
/// the gain the surrogate effectively guarantees at horizontal distance d.
double bernstein_effective_gain(const Vec2& q_xy, const UncertainNode& node, double altitude_m, double beta0,
                                double outage);

Subproblem build_ocr_subproblem(const Scenario& scenario, const WcrIterate& iterate,
                                bool fixed_trajectory = false);

/// (1/N) sum [R_U - max_k log2(1 + P g_eff,k / noise_k)]^+ with the
/// Bernstein-effective Eve gains at level rho_bar.
double ocr_certified_rate(const Scenario& scenario, const std::vector<Vec2>& waypoints,
                          const std::vector<double>& powers);

ScaResult run_algorithm2(const Scenario& scenario, const WcrIterate& init, const ScaOptions& options = {},
                         bool fixed_trajectory = false);

}  // namespace uavsec
