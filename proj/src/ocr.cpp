#include "uavsec/ocr.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "uavsec/channel.hpp"
#include "uavsec/conic/reformulations.hpp"
#include "uavsec/wcr.hpp"

namespace uavsec {

using conic::AffineExpr;
using conic::Var;

double decouple_outage(double rho, int num_eves) {
  if (num_eves < 1) throw std::invalid_argument("decouple_outage: need at least one Eve");
  // 1 - (1 - rho)^(1/K), written to keep precision for small rho
  return -std::expm1(std::log1p(-rho) / num_eves);
}

double matched_radius(double std_m, double prob, std::optional<int> num_eves) {
  if (!(prob > 0.0 && prob < 1.0)) throw std::invalid_argument("matched_radius: prob must lie in (0, 1)");
  if (std_m < 0.0) throw std::invalid_argument("matched_radius: negative std");
  double p = prob;
  if (num_eves) {
    if (*num_eves < 1) throw std::invalid_argument("matched_radius: need at least one Eve");
    p = std::pow(prob, 1.0 / *num_eves);
  }
  return std_m * std::sqrt(-2.0 * std::log1p(-p));
}

namespace {

BernsteinTriple add_bernstein(conic::ConicProgram& prog, const AffineExpr& qx, const AffineExpr& qy,
                              const Vec2& q_tilde, const UncertainNode& node, Var tau, Var z, double coeff,
                              double altitude_m, double outage, const std::string& tag) {
  if (!(outage > 0.0 && outage < 1.0)) throw std::invalid_argument("Bernstein outage level must lie in (0, 1)");
  const double sd = node.gaussian_std_m;
  const double sd2 = sd * sd;
  const double H2 = altitude_m * altitude_m;
  const double s = std::sqrt(-2.0 * std::log(outage));
  const double d2 = (q_tilde - node.center_xy).squaredNorm();
  const double eta0 = std::sqrt(2.0 * sd2 * sd2 + 2.0 * sd2 * d2);

  BernsteinTriple bt;
  bt.trace_term = 2.0 * sd2;
  bt.b_vec = {sd * (node.center_xy.x() - qx), sd * (node.center_xy.y() - qy)};

  const double cap0 = std::max(d2 + H2 + 2.0 * sd2 - s * eta0, 0.5 * H2);
  bt.cap = prog.add_variable(tag + "_cap", 0.0, conic::kInf, cap0);
  const double lb = coeff / (prog.variable(tau).initial * prog.variable(z).initial);
  prog.set_initial(bt.cap, 0.5 * (std::min(lb, cap0) + cap0));
  conic::add_inverse_product_bound(prog, tau, z, bt.cap, coeff, tag + "_inv");

  bt.eta = prog.add_variable(tag + "_eta", 0.0, conic::kInf, std::max(eta0, 1.0));
  prog.set_initial(bt.eta, eta0 * 1.01 + 1e-3);
  bt.zeta = prog.add_variable(tag + "_zeta", 0.0, conic::kInf, std::max(sd2, 1.0));
  prog.set_initial(bt.zeta, 1e-2 * std::max(sd2, 1.0));

  bt.c_term = linearized_sq_distance(qx, qy, q_tilde, node.center_xy) + H2 - AffineExpr(bt.cap);
  // Tr(A) - sqrt(-2 ln p) eta + ln(p) zeta + c >= 0
  prog.add_greater_equal(bt.trace_term - s * AffineExpr(bt.eta) + std::log(outage) * AffineExpr(bt.zeta) + bt.c_term,
                         AffineExpr(0.0), tag + "_bernstein");
  // |[vec(A); sqrt(2) b]| <= eta
  prog.add_soc(AffineExpr(bt.eta),
               {AffineExpr(sd2), AffineExpr(0.0), AffineExpr(0.0), AffineExpr(sd2), std::numbers::sqrt2 * bt.b_vec[0],
                std::numbers::sqrt2 * bt.b_vec[1]},
               tag + "_norm");
  return bt;
}

}  // namespace

BernsteinTriple bernstein_interference(conic::ConicProgram& program, const AffineExpr& qx, const AffineExpr& qy,
                                       const Vec2& q_tilde, const UncertainNode& pu, Var tau, Var gamma,
                                       double altitude_m, double beta0, double phi, const std::string& tag) {
  return add_bernstein(program, qx, qy, q_tilde, pu, tau, gamma, beta0, altitude_m, phi, tag);
}

BernsteinTriple bernstein_eve(conic::ConicProgram& program, const AffineExpr& qx, const AffineExpr& qy,
                              const Vec2& q_tilde, const UncertainNode& eve, Var tau, Var varphi, double altitude_m,
                              double beta0, double noise_w, double rho_bar, const std::string& tag) {
  return add_bernstein(program, qx, qy, q_tilde, eve, tau, varphi, beta0 / noise_w, altitude_m, rho_bar, tag);
}

double bernstein_effective_gain(const Vec2& q_xy, const UncertainNode& node, double altitude_m, double beta0,
                                double outage) {
  const double sd2 = node.gaussian_std_m * node.gaussian_std_m;
  const double d2 = (q_xy - node.center_xy).squaredNorm();
  const double s = std::sqrt(-2.0 * std::log(outage));
  const double denom = d2 + altitude_m * altitude_m + 2.0 * sd2 - s * std::sqrt(2.0 * sd2 * sd2 + 2.0 * sd2 * d2);
  return beta0 / denom;
}

Subproblem build_ocr_subproblem(const Scenario& s, const WcrIterate& it, bool fixed_trajectory) {
  s.validate_for(UncertaintyModel::probabilistic);
  Subproblem sub = build_common_subproblem(s, it, fixed_trajectory);
  auto& prog = sub.program;
  const int N = s.n_slots;
  const double rho_bar = decouple_outage(s.rho, s.num_eves());

  for (int k = 0; k < s.num_eves(); ++k) {
    for (int n = 0; n < N; ++n) {
      const std::string tag = "eve" + std::to_string(k) + "[" + std::to_string(n) + "]";
      const BernsteinTriple bt = bernstein_eve(prog, sub.qx[n], sub.qy[n], it.q_tilde[n], s.eves[k], sub.tau[n],
                                               sub.varphi[n], s.altitude_m, s.beta0, s.noise_eve_w[k], rho_bar, tag);
      sub.slacks["theta"].emplace_back(bt.cap);
      sub.slacks["upsilon"].emplace_back(bt.eta);
      sub.slacks["varsigma"].emplace_back(bt.zeta);
    }
  }
  for (int l = 0; l < s.num_pus(); ++l) {
    AffineExpr total;
    for (int n = 0; n < N; ++n) {
      const std::string tag = "pu" + std::to_string(l) + "[" + std::to_string(n) + "]";
      const double g0 =
          bernstein_effective_gain(it.q_tilde[n], s.pus[l], s.altitude_m, s.beta0, s.phi) / it.tau_tilde[n];
      const Var gamma = prog.add_variable("gamma" + tag, 0.0, conic::kInf, std::max(g0, 1e-3 * s.it_threshold_w));
      prog.set_initial(gamma, g0);
      const BernsteinTriple bt = bernstein_interference(prog, sub.qx[n], sub.qy[n], it.q_tilde[n], s.pus[l],
                                                        sub.tau[n], gamma, s.altitude_m, s.beta0, s.phi, tag);
      total += gamma;
      sub.slacks["gamma"].emplace_back(gamma);
      sub.slacks["chi"].emplace_back(bt.cap);
      sub.slacks["eta"].emplace_back(bt.eta);
      sub.slacks["zeta"].emplace_back(bt.zeta);
    }
    prog.add_less_equal(total, N * s.it_threshold_w, "interference_avg");
  }
  return sub;
}

double ocr_certified_rate(const Scenario& s, const std::vector<Vec2>& waypoints, const std::vector<double>& powers) {
  const double rho_bar = decouple_outage(s.rho, s.num_eves());
  double total = 0.0;
  for (std::size_t n = 0; n < powers.size(); ++n) {
    const double r_u =
        channel::rate(powers[n], channel::gain(waypoints[n], s.su_xy, s.altitude_m, s.beta0), s.noise_su_w);
    double r_e = 0.0;
    for (int k = 0; k < s.num_eves(); ++k)
      r_e = std::max(r_e, channel::rate(powers[n],
                                        bernstein_effective_gain(waypoints[n], s.eves[k], s.altitude_m, s.beta0, rho_bar),
                                        s.noise_eve_w[k]));
    total += std::max(r_u - r_e, 0.0);
  }
  return total / static_cast<double>(powers.size());
}

ScaResult run_algorithm2(const Scenario& s, const WcrIterate& init, const ScaOptions& options, bool fixed_trajectory) {
  s.validate_for(UncertaintyModel::probabilistic);
  return run_sca(
      init, [&](const WcrIterate& it) { return build_ocr_subproblem(s, it, fixed_trajectory); },
      [&](const std::vector<Vec2>& q, const std::vector<double>& p) { return ocr_certified_rate(s, q, p); },
      options);
}

}  // namespace uavsec
