#pragma once

#include "uavsec/conic/program.hpp"
#include "uavsec/sca.hpp"
#include "uavsec/scenario.hpp"

namespace uavsec {

/// Tangent of -log2(varphi + 1) at varphi_tilde; a global under-estimator.
conic::AffineExpr taylor_phi(const conic::AffineExpr& varphi, double varphi_tilde);
double taylor_phi_value(double varphi, double varphi_tilde);

/// Tangent plane of coeff / (tau (alpha - 1)) at (tau_tilde, alpha_tilde);
/// a global under-estimator on tau > 0, alpha > 1.
conic::AffineExpr taylor_theta(const conic::AffineExpr& tau, const conic::AffineExpr& alpha, double tau_tilde,
                               double alpha_tilde, double coeff);
double taylor_theta_value(double tau, double alpha, double tau_tilde, double alpha_tilde, double coeff);

/// (q_tilde - c)' (2 q - c - q_tilde), a lower bound on |q - c|^2 that is
/// exact at q = q_tilde.
conic::AffineExpr linearized_sq_distance(const conic::AffineExpr& qx, const conic::AffineExpr& qy,
                                         const Vec2& q_tilde, const Vec2& center);

/// [[(m + 1) I, -(q - c)], [-(q - c)', c_tilde - m r^2]] where
/// c_tilde = linearized_sq_distance + H^2 - slack_cap. PSD implies
/// |q + d - c|^2 + H^2 >= slack_cap for every |d| <= r (with the squared
/// distance replaced by its linearization).
conic::SymMatrix3Expr s_procedure_lmi(const conic::AffineExpr& qx, const conic::AffineExpr& qy,
                                      const conic::AffineExpr& slack_cap, const conic::AffineExpr& multiplier,
                                      const Vec2& center, double radius, const Vec2& q_tilde,
                                      double altitude_m);

/// Convex subproblem of the bounded-error model around `iterate`. With
/// fixed_trajectory the waypoints are the iterate's and stay constant.
Subproblem build_wcr_subproblem(const Scenario& scenario, const WcrIterate& iterate,
                                bool fixed_trajectory = false);

/// Worst-case rate over the bounded disks: (1/N) sum [R_U - max_k R_E,k^wc]^+.
double wcr_certified_rate(const Scenario& scenario, const std::vector<Vec2>& waypoints,
                          const std::vector<double>& powers);

ScaResult run_algorithm1(const Scenario& scenario, const WcrIterate& init, const ScaOptions& options = {},
                         bool fixed_trajectory = false);

}  // namespace uavsec
