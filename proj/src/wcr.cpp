#include "uavsec/wcr.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "uavsec/channel.hpp"
#include "uavsec/conic/reformulations.hpp"

namespace uavsec {

using conic::AffineExpr;
using conic::Var;

conic::AffineExpr taylor_phi(const AffineExpr& varphi, double varphi_tilde) {
  const double slope = -1.0 / ((varphi_tilde + 1.0) * std::numbers::ln2);
  return AffineExpr(-std::log2(varphi_tilde + 1.0) - slope * varphi_tilde) + slope * varphi;
}

double taylor_phi_value(double varphi, double varphi_tilde) {
  return -std::log2(varphi_tilde + 1.0) - (varphi - varphi_tilde) / ((varphi_tilde + 1.0) * std::numbers::ln2);
}

conic::AffineExpr taylor_theta(const AffineExpr& tau, const AffineExpr& alpha, double tau_tilde,
                               double alpha_tilde, double coeff) {
  const double am1 = alpha_tilde - 1.0;
  const double value = coeff / (tau_tilde * am1);
  const double d_tau = -coeff / (tau_tilde * tau_tilde * am1);
  const double d_alpha = -coeff / (tau_tilde * am1 * am1);
  return AffineExpr(value) + d_tau * (tau - tau_tilde) + d_alpha * (alpha - alpha_tilde);
}

double taylor_theta_value(double tau, double alpha, double tau_tilde, double alpha_tilde, double coeff) {
  const double am1 = alpha_tilde - 1.0;
  return coeff / (tau_tilde * am1) - coeff * (tau - tau_tilde) / (tau_tilde * tau_tilde * am1) -
         coeff * (alpha - alpha_tilde) / (tau_tilde * am1 * am1);
}

conic::AffineExpr linearized_sq_distance(const AffineExpr& qx, const AffineExpr& qy, const Vec2& q_tilde,
                                         const Vec2& center) {
  const Vec2 g = q_tilde - center;
  // g' (2q - c - q_tilde)
  return 2.0 * g.x() * qx + 2.0 * g.y() * qy - g.dot(center + q_tilde);
}

conic::SymMatrix3Expr s_procedure_lmi(const AffineExpr& qx, const AffineExpr& qy, const AffineExpr& slack_cap,
                                      const AffineExpr& multiplier, const Vec2& center, double radius,
                                      const Vec2& q_tilde, double altitude_m) {
  if (radius < 0.0) throw std::invalid_argument("s_procedure_lmi: negative radius");
  const AffineExpr c_tilde =
      linearized_sq_distance(qx, qy, q_tilde, center) + altitude_m * altitude_m - slack_cap;
  conic::SymMatrix3Expr m;
  m(0, 0) = multiplier + 1.0;
  m(1, 1) = multiplier + 1.0;
  m(0, 1) = AffineExpr(0.0);
  m(0, 2) = -(qx - center.x());
  m(1, 2) = -(qy - center.y());
  m(2, 2) = c_tilde - radius * radius * multiplier;
  return m;
}

namespace {

/// theta >= coeff / (tau * z) together with the robust distance condition
/// "every disk point is at squared 3-D distance at least theta".
struct CapHandles {
  Var cap;
  AffineExpr multiplier;
};

CapHandles add_robust_distance_cap(conic::ConicProgram& prog, const Scenario& s, const AffineExpr& qx,
                                   const AffineExpr& qy, const Vec2& q_tilde, const UncertainNode& node,
                                   Var tau, Var z, double coeff, const std::string& tag) {
  const double H2 = s.altitude_m * s.altitude_m;
  const double d = (q_tilde - node.center_xy).norm();
  const double d_wc = std::max(d - node.bounded_radius_m, 0.0);
  const double cap0 = d_wc * d_wc + H2;

  const Var cap = prog.add_variable(tag + "_cap", 0.0, conic::kInf, cap0);
  const double lb = coeff / (prog.variable(tau).initial * prog.variable(z).initial);
  prog.set_initial(cap, 0.5 * (std::min(lb, cap0) + cap0));
  conic::add_inverse_product_bound(prog, tau, z, cap, coeff, tag + "_inv");

  CapHandles h{cap, AffineExpr(0.0)};
  if (node.bounded_radius_m > 0.0) {
    const double m0 = std::max(d / node.bounded_radius_m - 1.0, 1e-3);
    const Var mult = prog.add_variable(tag + "_mult", 0.0, conic::kInf, std::max(m0, 1.0));
    prog.set_initial(mult, m0);
    prog.add_psd(s_procedure_lmi(qx, qy, cap, mult, node.center_xy, node.bounded_radius_m, q_tilde,
                                 s.altitude_m),
                 tag + "_lmi");
    h.multiplier = AffineExpr(mult);
  } else {
    // Zero radius: the robust condition is the nominal distance bound.
    prog.add_greater_equal(linearized_sq_distance(qx, qy, q_tilde, node.center_xy) + H2, cap,
                           tag + "_nominal");
  }
  return h;
}

}  // namespace

Subproblem build_wcr_subproblem(const Scenario& s, const WcrIterate& it, bool fixed_trajectory) {
  s.validate_for(UncertaintyModel::bounded);
  Subproblem sub = build_common_subproblem(s, it, fixed_trajectory);
  auto& prog = sub.program;
  const int N = s.n_slots;

  for (int k = 0; k < s.num_eves(); ++k) {
    const UncertainNode& eve = s.eves[k];
    for (int n = 0; n < N; ++n) {
      const std::string tag = "eve" + std::to_string(k) + "[" + std::to_string(n) + "]";
      const CapHandles h = add_robust_distance_cap(prog, s, sub.qx[n], sub.qy[n], it.q_tilde[n], eve, sub.tau[n],
                                                   sub.varphi[n], s.beta0 / s.noise_eve_w[k], tag);
      sub.slacks["theta"].emplace_back(h.cap);
      sub.slacks["lambda"].push_back(h.multiplier);
    }
  }

  for (int l = 0; l < s.num_pus(); ++l) {
    const UncertainNode& pu = s.pus[l];
    AffineExpr total;
    for (int n = 0; n < N; ++n) {
      const std::string tag = "pu" + std::to_string(l) + "[" + std::to_string(n) + "]";
      const double g0 = channel::worst_case_gain(it.q_tilde[n], pu, s.altitude_m, s.beta0) / it.tau_tilde[n];
      const Var gamma =
          prog.add_variable("gamma" + tag, 0.0, conic::kInf, std::max(g0, 1e-3 * s.it_threshold_w));
      prog.set_initial(gamma, g0);
      const CapHandles h =
          add_robust_distance_cap(prog, s, sub.qx[n], sub.qy[n], it.q_tilde[n], pu, sub.tau[n], gamma, s.beta0, tag);
      total += gamma;
      sub.slacks["gamma"].emplace_back(gamma);
      sub.slacks["chi"].emplace_back(h.cap);
      sub.slacks["mu"].push_back(h.multiplier);
    }
    prog.add_less_equal(total, N * s.it_threshold_w, "interference_avg");
  }
  return sub;
}

double wcr_certified_rate(const Scenario& s, const std::vector<Vec2>& waypoints, const std::vector<double>& powers) {
  return channel::worst_case_secrecy_rate(waypoints, powers, s);
}

ScaResult run_algorithm1(const Scenario& s, const WcrIterate& init, const ScaOptions& options,
                         bool fixed_trajectory) {
  s.validate_for(UncertaintyModel::bounded);
  return run_sca(
      init, [&](const WcrIterate& it) { return build_wcr_subproblem(s, it, fixed_trajectory); },
      [&](const std::vector<Vec2>& q, const std::vector<double>& p) { return wcr_certified_rate(s, q, p); },
      options);
}

}  // namespace uavsec
