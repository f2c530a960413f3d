#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "uavsec/conic/cbf_writer.hpp"
#include "uavsec/conic/program.hpp"
#include "uavsec/conic/reformulations.hpp"
#include "uavsec/conic/solver.hpp"

using namespace uavsec::conic;

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

// Program holding x, y, t and the inverse-product cones. Returns the point
// with x, y, t set and the auxiliaries at their largest admissible values.
struct InverseProductCase {
  ConicProgram program;
  Var x, y, t;
  std::vector<double> witness(double xv, double yv, double tv, double coeff) const {
    std::vector<double> v(program.num_variables(), 0.0);
    v[x.index] = xv;
    v[y.index] = yv;
    v[t.index] = tv;
    const double sx = program.variable(x).scale, sy = program.variable(y).scale, st = program.variable(t).scale;
    const double g = std::cbrt(coeff / (sx * sy * st));
    v[3] = std::sqrt((xv / sx) * (yv / sy));
    v[4] = std::sqrt((tv / st) * g);
    return v;
  }
};

InverseProductCase inverse_product_case(double coeff, double sx, double sy, double st) {
  InverseProductCase c;
  c.x = c.program.add_variable("x", 0.0, kInf, sx);
  c.y = c.program.add_variable("y", 0.0, kInf, sy);
  c.t = c.program.add_variable("t", 0.0, kInf, st);
  add_inverse_product_bound(c.program, c.x, c.y, c.t, coeff);
  return c;
}

// Membership 2uv >= |w|^2 of every rotated cone, relative to the cone's own scale.
bool in_rotated_cones(const ConicProgram& p, const std::vector<double>& x) {
  for (const auto& r : p.rotated_soc_blocks()) {
    const double u = r.u.evaluate(x), v = r.v.evaluate(x);
    double sq = 0.0;
    for (const auto& e : r.entries) sq += std::pow(e.evaluate(x), 2);
    if (u < 0.0 || v < 0.0 || 2.0 * u * v < sq * (1.0 - 1e-12)) return false;
  }
  return true;
}

double min_eigenvalue(const PsdBlock& block, const std::vector<double>& x) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = block.matrix(i, j).evaluate(x);
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(m).eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("affine expressions combine and evaluate") {
  ConicProgram p;
  const Var a = p.add_variable("a"), b = p.add_variable("b");
  AffineExpr e = 2.0 * AffineExpr(a) - AffineExpr(b) + 3.0;
  e += AffineExpr(a);
  const std::vector<double> x{1.5, -2.0};
  CHECK(e.evaluate(x) == doctest::Approx(3.0 * 1.5 + 2.0 + 3.0));
  CHECK(e.coefficient(a) == 3.0);
  CHECK(e.coefficient(b) == -1.0);
  CHECK((e - e).is_constant());
}

TEST_CASE("program validation") {
  ConicProgram p;
  const Var v = p.add_variable("v", 1.0, kInf);
  const Var w = p.add_variable("w");
  CHECK_THROWS_AS(p.add_log_term(1.0, w), std::invalid_argument);
  CHECK_THROWS_AS(p.add_log_term(1.0, v, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(p.add_psd(std::vector<std::vector<AffineExpr>>(2, std::vector<AffineExpr>(2))),
                  std::invalid_argument);
  CHECK_THROWS_AS(p.add_greater_equal(AffineExpr(Var{7}), 0.0), std::exception);
  CHECK_THROWS_AS(add_inverse_product_bound(p, v, v, v, 0.0), std::invalid_argument);
}

TEST_CASE("census counts blocks by kind and dimension") {
  ConicProgram p;
  const auto v = p.add_variables("v", 4, 1.0, kInf);
  p.add_soc(AffineExpr(v[0]), {AffineExpr(v[1]), AffineExpr(v[2])}, "a");
  p.add_soc(AffineExpr(v[0]), {AffineExpr(v[1])}, "a");
  p.add_rotated_soc(AffineExpr(v[0]), AffineExpr(v[1]), {AffineExpr(v[3])}, "b");
  p.add_equal(AffineExpr(v[0]), 2.0);
  p.add_less_equal(AffineExpr(v[1]), 3.0);
  p.add_log_term(1.0, v[0]);
  SymMatrix3Expr m;
  for (int i = 0; i < 3; ++i) m(i, i) = 1.0;
  p.add_psd(m, "c");
  const Census c = p.census();
  CHECK(c.variables == 4);
  CHECK(c.soc == 2);
  CHECK(c.soc_by_dimension.at(3) == 1);
  CHECK(c.soc_by_dimension.at(2) == 1);
  CHECK(c.rotated_soc == 1);
  CHECK(c.psd == 1);
  CHECK(c.linear_equalities == 1);
  CHECK(c.log_terms == 1);
}

TEST_CASE("inverse-product bound: boundary and arithmetic examples") {
  const auto c = inverse_product_case(1.0, 1.0, 1.0, 1.0);
  CHECK(c.program.max_violation(c.witness(1.0, 1.0, 1.0, 1.0)) <= 1e-12);
  // 1 / (2 * 2) = 0.25 > 0.2
  CHECK(c.program.max_violation(c.witness(2.0, 2.0, 0.2, 1.0)) > 1e-3);
  CHECK(c.program.max_violation(c.witness(2.0, 2.0, 0.25, 1.0)) <= 1e-12);
}

TEST_CASE("inverse-product bound: cone membership iff coeff/(xy) <= t (10^4 samples)") {
  std::mt19937_64 rng(101);
  int agree = 0, checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const double coeff = log_uniform(rng, 1e-6, 1e2);
    const double sx = log_uniform(rng, 1e-2, 1e2), sy = log_uniform(rng, 1e-2, 1e2), st = log_uniform(rng, 1e-2, 1e2);
    const auto c = inverse_product_case(coeff, sx, sy, st);
    const double x = sx * log_uniform(rng, 1e-2, 1e2), y = sy * log_uniform(rng, 1e-2, 1e2);
    const double t = (coeff / (x * y)) * log_uniform(rng, 0.5, 2.0);
    const double margin = t - coeff / (x * y);
    if (std::abs(margin) <= 1e-9 * t) continue;  // boundary band
    ++checked;
    agree += in_rotated_cones(c.program, c.witness(x, y, t, coeff)) == (margin > 0.0);
  }
  CHECK(checked > 9900);
  CHECK(agree == checked);
}

TEST_CASE("inverse-product bound: solver minimum of t equals coeff/(xy)") {
  std::mt19937_64 rng(202);
  for (int i = 0; i < 20; ++i) {
    const double coeff = log_uniform(rng, 1e-3, 1e1);
    const double xv = log_uniform(rng, 0.1, 10.0), yv = log_uniform(rng, 0.1, 10.0);
    ConicProgram p;
    const Var x = p.add_variable("x", 0.0, kInf, xv), y = p.add_variable("y", 0.0, kInf, yv);
    const Var t = p.add_variable("t", 0.0, kInf, coeff / (xv * yv));
    p.set_initial(x, xv);
    p.set_initial(y, yv);
    p.set_initial(t, 2.0 * coeff / (xv * yv));
    add_inverse_product_bound(p, x, y, t, coeff);
    p.add_equal(AffineExpr(x), xv);
    p.add_equal(AffineExpr(y), yv);
    p.add_objective(-1.0 / (coeff / (xv * yv)) * AffineExpr(t));
    const SolveResult r = solve(p);
    REQUIRE(r.status.kind == StatusKind::optimal);
    CHECK(r.x[t.index] == doctest::Approx(coeff / (xv * yv)).epsilon(1e-5));
  }
}

TEST_CASE("reciprocal-sum bound") {
  std::mt19937_64 rng(303);
  const double p_avg = 0.1;
  auto build = [&](int n, std::vector<Var>& tau) {
    ConicProgram p;
    tau = p.add_variables("tau", n, 2.5, kInf, 1.0 / p_avg);
    add_reciprocal_sum_bound(p, tau, p_avg);
    return p;
  };
  auto witness = [&](const ConicProgram& p, const std::vector<Var>& tau, const std::vector<double>& tv) {
    std::vector<double> x(p.num_variables(), 0.0);
    for (std::size_t n = 0; n < tau.size(); ++n) {
      x[tau[n].index] = tv[n];
      x[tau.size() + n] = 1.0 / tv[n];
    }
    return x;
  };
  std::vector<Var> tau;
  const ConicProgram p = build(4, tau);
  CHECK(p.census().rotated_soc == 4);
  CHECK(p.max_violation(witness(p, tau, std::vector<double>(4, 1.0 / p_avg))) <= 1e-12);
  // tau = 2 / P_avg leaves half the budget unused.
  const auto x = witness(p, tau, std::vector<double>(4, 2.0 / p_avg));
  CHECK(p.max_violation(x) <= 0.0);
  const auto& sum_row = p.linear_constraints().back();
  CHECK(sum_row.expr.evaluate(x) == doctest::Approx(4 * p_avg / 2.0));

  int agree = 0, checked = 0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> tv(4);
    for (auto& v : tv) v = log_uniform(rng, 2.5, 40.0);
    double mean = 0.0;
    for (double v : tv) mean += 0.25 / v;
    if (std::abs(mean - p_avg) <= 1e-9 * p_avg) continue;
    ++checked;
    agree += (p.max_violation(witness(p, tau, tv)) <= 1e-12) == (mean <= p_avg);
  }
  CHECK(agree == checked);
}

TEST_CASE("solver: log objective with an upper bound") {
  ConicProgram p;
  const Var a = p.add_variable("alpha", 1.0 + 1e-6, kInf);
  p.set_initial(a, 1.5);
  p.add_less_equal(AffineExpr(a), 2.0);
  p.add_log_term(1.0, a);
  const SolveResult r = solve(p);
  REQUIRE(r.status.kind == StatusKind::optimal);
  REQUIRE(r.status.objective.has_value());
  CHECK(*r.status.objective == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x[a.index] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("solver: empty feasible set is infeasible") {
  ConicProgram p;
  const Var a = p.add_variable("alpha", 1.0 + 1e-6, kInf);
  p.set_initial(a, 1.5);
  p.add_less_equal(AffineExpr(a), 0.5);
  p.add_log_term(1.0, a);
  const SolveResult r = solve(p);
  CHECK(r.status.kind == StatusKind::infeasible);
  CHECK_FALSE(r.status.objective.has_value());
}

TEST_CASE("solver: LMI with known optimum") {
  ConicProgram p;
  const Var t = p.add_variable("t");
  SymMatrix3Expr m;
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  m(2, 2) = 1.0;
  m(0, 1) = AffineExpr(t);
  p.add_psd(m);
  p.add_objective(AffineExpr(t));
  const SolveResult r = solve(p);
  REQUIRE(r.status.kind == StatusKind::optimal);
  CHECK(r.x[t.index] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(min_eigenvalue(p.psd_blocks()[0], r.x) >= -1e-7);
}

TEST_CASE("solver: random feasible programs are never reported infeasible") {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    ConicProgram p;
    const int n = 6;
    const auto v = p.add_variables("v", n);
    Eigen::VectorXd x0(n);
    for (int i = 0; i < n; ++i) x0[i] = nd(rng);
    for (int row = 0; row < 8; ++row) {
      AffineExpr e;
      double at = 0.0;
      for (int i = 0; i < n; ++i) {
        const double c = nd(rng);
        e.add(v[i], c);
        at += c * x0[i];
      }
      p.add_less_equal(e, at + std::abs(nd(rng)) + 0.1);
    }
    AffineExpr bound = 3.0 + x0.norm();
    std::vector<AffineExpr> entries;
    for (int i = 0; i < n; ++i) entries.push_back(AffineExpr(v[i]));
    p.add_soc(bound, entries);
    SymMatrix3Expr m;
    for (int i = 0; i < 3; ++i) m(i, i) = AffineExpr(2.0 + std::abs(x0[i]));
    m(0, 1) = AffineExpr(v[0]);
    m(1, 2) = AffineExpr(v[1]);
    p.add_psd(m);
    AffineExpr obj;
    for (int i = 0; i < n; ++i) obj.add(v[i], nd(rng));
    p.add_objective(obj);
    const SolveResult r = solve(p);
    CHECK(r.status.kind != StatusKind::infeasible);
    if (r.status.kind == StatusKind::optimal) {
      CHECK(p.max_violation(r.x) <= 1e-7);
      CHECK(min_eigenvalue(p.psd_blocks()[0], r.x) >= -1e-7);
    }
  }
}

TEST_CASE("status names") {
  CHECK(std::string(to_string(StatusKind::optimal)) == "optimal");
  CHECK(std::string(to_string(StatusKind::infeasible)) == "infeasible");
  CHECK(std::string(to_string(StatusKind::numerical_failure)) == "numerical_failure");
}

TEST_CASE("CBF export") {
  ConicProgram p;
  const Var a = p.add_variable("alpha", 1.0 + 1e-6, kInf);
  const Var t = p.add_variable("t");
  p.add_less_equal(AffineExpr(a), 2.0);
  p.add_soc(AffineExpr(a), {AffineExpr(t)});
  SymMatrix3Expr m;
  for (int i = 0; i < 3; ++i) m(i, i) = 1.0;
  m(0, 2) = AffineExpr(t);
  p.add_psd(m);
  p.add_log_term(1.0, a, 0.5);
  std::ostringstream out;
  write_cbf(p, out);
  const std::string s = out.str();
  CHECK(s.rfind("VER\n3\n", 0) == 0);
  CHECK(s.find("OBJSENSE\nMAX") != std::string::npos);
  CHECK(s.find("EXP") != std::string::npos);
  CHECK(s.find("Q 2") != std::string::npos);
  CHECK(s.find("PSDCON") != std::string::npos);
}
