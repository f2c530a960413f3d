#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "uavsec/baselines.hpp"
#include "uavsec/channel.hpp"
#include "uavsec/validation.hpp"
#include "uavsec/wcr.hpp"

using namespace uavsec;
using conic::AffineExpr;

namespace {

Scenario toy_two_slots() {
  Scenario s = default_fixture();
  s.n_slots = 2;
  s.q_init_xy = Vec2(-5, 0);
  s.q_final_xy = Vec2(5, 0);
  s.validate();
  return s;
}

Eigen::Matrix3d evaluate(const conic::SymMatrix3Expr& m, const std::vector<double>& x) {
  Eigen::Matrix3d out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = m(i, j).evaluate(x);
  return out;
}

double min_eig(const Eigen::Matrix3d& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(m).eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("taylor_phi: exact at the expansion point and a global under-estimator") {
  CHECK(taylor_phi_value(0.7, 0.7) == doctest::Approx(-std::log2(1.7)).epsilon(1e-15));
  // phi_tilde = 1, phi = 3: -1 - 2 / (2 ln 2)
  CHECK(taylor_phi_value(3.0, 1.0) == doctest::Approx(-1.0 - 1.0 / std::numbers::ln2).epsilon(1e-12));
  CHECK(taylor_phi_value(3.0, 1.0) == doctest::Approx(-2.4427).epsilon(1e-4));
  CHECK(taylor_phi_value(3.0, 1.0) <= -2.0);

  conic::ConicProgram p;
  const conic::Var v = p.add_variable("varphi");
  const AffineExpr e = taylor_phi(AffineExpr(v), 0.4);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.99, 50.0), ut(1e-4, 50.0);
  for (int i = 0; i < 10000; ++i) {
    const double phi = u(rng), tilde = ut(rng);
    CHECK(taylor_phi_value(phi, tilde) <= -std::log2(phi + 1.0) + 1e-12);
  }
  const std::vector<double> x{2.5};
  CHECK(e.evaluate(x) == doctest::Approx(taylor_phi_value(2.5, 0.4)).epsilon(1e-14));
}

TEST_CASE("taylor_theta: exact at the expansion point and a global under-estimator") {
  CHECK(taylor_theta_value(1.3, 2.2, 1.3, 2.2, 0.5) == doctest::Approx(0.5 / (1.3 * 1.2)).epsilon(1e-15));
  // tau_tilde = 1, alpha_tilde = 2, coeff = 1 at (2, 3): 1 - 1 - 1
  CHECK(taylor_theta_value(2.0, 3.0, 1.0, 2.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-14));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> lt(std::log(1e-2), std::log(1e2)), le(std::log(1e-6), std::log(1e2));
  for (int i = 0; i < 10000; ++i) {
    const double tau = std::exp(lt(rng)), tt = std::exp(lt(rng));
    const double alpha = 1.0 + std::exp(le(rng)), at = 1.0 + std::exp(le(rng));
    const double coeff = std::exp(lt(rng));
    const double truth = coeff / (tau * (alpha - 1.0));
    CHECK(taylor_theta_value(tau, alpha, tt, at, coeff) <= truth * (1.0 + 1e-12) + 1e-12);
  }

  conic::ConicProgram p;
  const conic::Var tau = p.add_variable("tau"), alpha = p.add_variable("alpha");
  const AffineExpr e = taylor_theta(AffineExpr(tau), AffineExpr(alpha), 1.5, 1.25, 2.0);
  const std::vector<double> x{3.0, 1.75};
  CHECK(e.evaluate(x) == doctest::Approx(taylor_theta_value(3.0, 1.75, 1.5, 1.25, 2.0)).epsilon(1e-14));
}

TEST_CASE("linearized squared distance") {
  conic::ConicProgram p;
  const conic::Var qx = p.add_variable("qx"), qy = p.add_variable("qy");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  for (int i = 0; i < 10000; ++i) {
    const Vec2 tilde(u(rng), u(rng)), center(u(rng), u(rng)), q(u(rng), u(rng));
    const AffineExpr e = linearized_sq_distance(AffineExpr(qx), AffineExpr(qy), tilde, center);
    const std::vector<double> at_tilde{tilde.x(), tilde.y()}, at_q{q.x(), q.y()};
    CHECK(e.evaluate(at_tilde) == doctest::Approx((tilde - center).squaredNorm()).epsilon(1e-12));
    CHECK(e.evaluate(at_q) <= (q - center).squaredNorm() * (1.0 + 1e-12) + 1e-9);
  }
  const Vec2 c(10.0, -4.0);
  const AffineExpr flat = linearized_sq_distance(AffineExpr(qx), AffineExpr(qy), c, c);
  CHECK(flat.evaluate(std::vector<double>{123.0, -77.0}) == doctest::Approx(0.0));
}

TEST_CASE("S-procedure LMI") {
  conic::ConicProgram p;
  const conic::Var qx = p.add_variable("qx"), qy = p.add_variable("qy");
  const conic::Var cap = p.add_variable("cap"), mult = p.add_variable("mult");
  const double H = 100.0;

  SUBCASE("degenerate geometry is block diagonal") {
    const Vec2 c(20.0, 30.0);
    const auto m = s_procedure_lmi(AffineExpr(qx), AffineExpr(qy), AffineExpr(cap), AffineExpr(mult), c, 15.0, c, H);
    const std::vector<double> x{c.x(), c.y(), 4000.0, 0.0};
    const Eigen::Matrix3d v = evaluate(m, x);
    CHECK(v(0, 0) == doctest::Approx(1.0));
    CHECK(v(1, 1) == doctest::Approx(1.0));
    CHECK(v(0, 1) == doctest::Approx(0.0));
    CHECK(v(0, 2) == doctest::Approx(0.0));
    CHECK(v(2, 2) == doctest::Approx(H * H - 4000.0));
    CHECK(min_eig(evaluate(m, {c.x(), c.y(), H * H, 0.0})) >= -1e-9);
    CHECK(min_eig(evaluate(m, {c.x(), c.y(), H * H + 1.0, 0.0})) < 0.0);
  }

  SUBCASE("negative radius is rejected") {
    CHECK_THROWS_AS(s_procedure_lmi(AffineExpr(qx), AffineExpr(qy), AffineExpr(cap), AffineExpr(mult), Vec2(0, 0),
                                    -1.0, Vec2(0, 0), H),
                    std::invalid_argument);
  }

  SUBCASE("radius zero reduces to the nominal constraint") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-200.0, 200.0), cap_u(0.0, 8e4);
    const Vec2 c(-40, -80);
    for (int i = 0; i < 1000; ++i) {
      const Vec2 q(u(rng), u(rng));
      const double cap_v = cap_u(rng);
      const auto m = s_procedure_lmi(AffineExpr(qx), AffineExpr(qy), AffineExpr(cap), AffineExpr(mult), c, 0.0, q, H);
      const double c_tilde = (q - c).squaredNorm() + H * H - cap_v;
      if (std::abs(c_tilde) < 1e-6) continue;
      // Schur complement with the multiplier free: PSD for some multiplier iff c_tilde >= 0.
      bool any_psd = false;
      for (double lam : {0.0, 1.0, 10.0, 1e3, 1e6})
        any_psd = any_psd || min_eig(evaluate(m, {q.x(), q.y(), cap_v, lam})) >= -1e-9;
      CHECK(any_psd == (c_tilde > 0.0));
    }
  }

  SUBCASE("PSD points guarantee the distance bound over the whole disk") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-200.0, 200.0), unit(0.0, 1.0);
    const Vec2 c(240, -120);
    const double radius = 30.0;
    int certified = 0;
    for (int i = 0; i < 200; ++i) {
      const Vec2 q(u(rng) + 200.0, u(rng) - 100.0);
      const double d = std::max((q - c).norm() - radius, 0.0);
      const double cap_v = (d * d + H * H) * (0.5 + unit(rng));
      const auto m = s_procedure_lmi(AffineExpr(qx), AffineExpr(qy), AffineExpr(cap), AffineExpr(mult), c, radius, q, H);
      for (double lam : {0.1, 1.0, 5.0, 30.0}) {
        if (min_eig(evaluate(m, {q.x(), q.y(), cap_v, lam})) < 0.0) continue;
        ++certified;
        for (const Vec2& e : disk_grid(c, radius)) CHECK((q - e).squaredNorm() + H * H >= cap_v * (1.0 - 1e-9));
        break;
      }
    }
    CHECK(certified > 20);
  }
}

TEST_CASE("WCR subproblem census") {
  SUBCASE("two-slot toy") {
    const Scenario s = toy_two_slots();
    const Subproblem sub = build_wcr_subproblem(s, initial_iterate(s, UncertaintyModel::bounded));
    const conic::Census c = sub.program.census();
    // (K + L) N = 6 LMIs, each with a three-cone inverse-product bound; plus
    // N SU-rate cones and N average-power cones.
    CHECK(c.psd == 6);
    CHECK(c.rotated_soc == 6 * 3 + 2 + 2);
    CHECK(c.soc == 0);
    CHECK(c.linear_inequalities == 2);
    CHECK(c.log_terms == 2);
    CHECK(c.by_tag.at("interference_avg") == 1);
    CHECK(c.by_tag.at("avg_power_sum") == 1);
  }
  SUBCASE("fixture") {
    const Scenario s = default_fixture();
    const Subproblem sub = build_wcr_subproblem(s, initial_iterate(s, UncertaintyModel::bounded));
    CHECK(sub.program.census().psd == (s.num_eves() + s.num_pus()) * s.n_slots);
    CHECK(sub.program.census().psd == 180);
  }
}

TEST_CASE("WCR initial iterate is feasible and the first solve is optimal") {
  const Scenario s = default_fixture();
  const WcrIterate it = initial_iterate(s, UncertaintyModel::bounded);
  CHECK_NOTHROW(it.check(s));
  const Subproblem sub = build_wcr_subproblem(s, it);
  const auto r = conic::solve(sub.program);
  CHECK(r.status.kind == conic::StatusKind::optimal);
  CHECK(sub.program.max_violation(r.x) <= 1e-7);
}

TEST_CASE("WCR SCA: huge epsilon stops after one iteration with a certified solution") {
  const Scenario s = default_fixture();
  ScaOptions opt;
  opt.epsilon = 1e9;
  const ScaResult r = run_algorithm1(s, initial_iterate(s, UncertaintyModel::bounded), opt);
  CHECK(r.trace.iterations() == 1);
  CHECK(r.trace.converged);
  CHECK(r.solution.n_slots() == s.n_slots);
  const ValidationReport rep = certify_worst_case(r.solution, s);
  CHECK(rep.passed);
  CHECK(r.solution.objective_bps_hz <= rep.certified_rate_bps_hz + 1e-9);
}

TEST_CASE("WCR SCA: short run is monotone and every iterate is certified") {
  const Scenario s = default_fixture();
  ScaOptions opt;
  opt.max_iters = 4;
  const ScaResult r = run_algorithm1(s, initial_iterate(s, UncertaintyModel::bounded), opt);
  CHECK(r.trace.iterations() == 4);
  const TraceAudit audit = audit_trace(r.trace, opt.epsilon);
  CHECK(audit.monotone);
  CHECK(audit.epsilon_rule);
  const ValidationReport rep = certify_worst_case(r.solution, s);
  CHECK(rep.passed);
  CHECK(rep.max_violation <= kCertifyTolerance);
  // The reported rate is a lower bound on the rate at the adversarial Eve positions.
  CHECK(r.solution.objective_bps_hz <=
        channel::worst_case_secrecy_rate(r.solution.waypoints, r.solution.powers, s) + 1e-9);
}
