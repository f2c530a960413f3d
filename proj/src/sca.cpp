#include "uavsec/sca.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "uavsec/conic/reformulations.hpp"
#include "uavsec/report_io.hpp"
#include "uavsec/wcr.hpp"

namespace uavsec {

using conic::AffineExpr;
using conic::Var;

namespace {

constexpr double kAlphaMargin = 1e-6;

}  // namespace

void WcrIterate::check(const Scenario& s) const {
  const std::size_t n = tau_tilde.size();
  if (q_tilde.size() != n || alpha_tilde.size() != n || varphi_tilde.size() != n)
    throw std::invalid_argument("iterate: inconsistent slot counts");
  if (static_cast<int>(n) != s.n_slots) throw std::invalid_argument("iterate: slot count differs from scenario");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(tau_tilde[i] >= (1.0 - 1e-9) / s.p_max_w) || !std::isfinite(tau_tilde[i]))
      throw std::invalid_argument("iterate: tau below 1/P_max at slot " + std::to_string(i));
    if (!(alpha_tilde[i] > 1.0)) throw std::invalid_argument("iterate: alpha must exceed 1");
    if (!(varphi_tilde[i] > 0.0)) throw std::invalid_argument("iterate: varphi must be positive");
  }
}

std::string SolveTrace::to_csv(bool include_timing) const {
  std::ostringstream out;
  out << "iteration,objective,solver_status,wall_ms\n";
  for (const auto& r : rows)
    out << r.iteration << ',' << format_g9(r.objective) << ',' << r.solver_status << ',' << format_g9(include_timing ? r.wall_ms : 0.0)
        << '\n';
  return out.str();
}

double surrogate_free_objective(const std::vector<double>& alpha, const std::vector<double>& varphi) {
  double total = 0.0;
  for (std::size_t n = 0; n < alpha.size(); ++n) total += std::log2(alpha[n]) - std::log2(1.0 + varphi[n]);
  return total / static_cast<double>(alpha.size());
}

Subproblem build_common_subproblem(const Scenario& s, const WcrIterate& it, bool fixed_trajectory) {
  it.check(s);
  const int N = s.n_slots;
  Subproblem sub;
  auto& prog = sub.program;
  const double q_scale = std::max(s.altitude_m, 1.0);

  sub.qx.resize(N);
  sub.qy.resize(N);
  for (int n = 0; n < N; ++n) {
    const bool pinned = fixed_trajectory || n == 0 || n == N - 1;
    if (pinned) {
      const Vec2 q = n == 0 ? s.q_init_xy : (n == N - 1 ? s.q_final_xy : it.q_tilde[n]);
      sub.qx[n] = AffineExpr(q.x());
      sub.qy[n] = AffineExpr(q.y());
      continue;
    }
    const Var x = prog.add_variable("qx[" + std::to_string(n) + "]", -conic::kInf, conic::kInf, q_scale);
    const Var y = prog.add_variable("qy[" + std::to_string(n) + "]", -conic::kInf, conic::kInf, q_scale);
    prog.set_initial(x, it.q_tilde[n].x());
    prog.set_initial(y, it.q_tilde[n].y());
    sub.qx[n] = AffineExpr(x);
    sub.qy[n] = AffineExpr(y);
  }

  const double sigma2 = s.noise_su_w;
  AffineExpr objective;
  for (int n = 0; n < N; ++n) {
    const std::string idx = "[" + std::to_string(n) + "]";
    const Var tau = prog.add_variable("tau" + idx, 1.0 / s.p_max_w, conic::kInf, it.tau_tilde[n]);
    // alpha = 1 + excess keeps the tiny margin above 1 resolvable in double precision.
    const double excess_tilde = it.alpha_tilde[n] - 1.0;
    const Var excess =
        prog.add_variable("alpha_excess" + idx, kAlphaMargin, conic::kInf, std::max(excess_tilde, kAlphaMargin));
    const AffineExpr alpha = AffineExpr(excess) + 1.0;
    const Var varphi =
        prog.add_variable("varphi" + idx, 0.0, conic::kInf, std::max(it.varphi_tilde[n], 1e-6));
    prog.set_initial(tau, it.tau_tilde[n]);
    prog.set_initial(excess, excess_tilde);
    prog.set_initial(varphi, it.varphi_tilde[n]);
    sub.tau.push_back(tau);
    sub.alpha.push_back(alpha);
    sub.varphi.push_back(varphi);

    prog.add_log_term(1.0 / N, excess, 1.0);
    objective += (1.0 / N) * taylor_phi(varphi, it.varphi_tilde[n]);

    // |q - q_s|^2 <= Theta(tau, alpha) - H^2
    const AffineExpr theta_lb =
        taylor_theta(tau, alpha, it.tau_tilde[n], it.alpha_tilde[n], s.beta0 / sigma2) -
        s.altitude_m * s.altitude_m;
    prog.add_rotated_soc(theta_lb, AffineExpr(0.5), {sub.qx[n] - s.su_xy.x(), sub.qy[n] - s.su_xy.y()},
                         "su_rate");
  }
  prog.add_objective(objective);

  for (int n = 1; n < N; ++n) {
    if (sub.qx[n].is_constant() && sub.qx[n - 1].is_constant() && sub.qy[n].is_constant() &&
        sub.qy[n - 1].is_constant())
      continue;
    prog.add_soc(AffineExpr(s.max_step_m()), {sub.qx[n] - sub.qx[n - 1], sub.qy[n] - sub.qy[n - 1]},
                 "mobility");
  }

  conic::add_reciprocal_sum_bound(prog, sub.tau, s.p_avg_w, "avg_power");
  for (int n = 0; n < N; ++n) {
    sub.slacks["tau"].emplace_back(sub.tau[n]);
    sub.slacks["alpha"].push_back(sub.alpha[n]);
    sub.slacks["varphi"].emplace_back(sub.varphi[n]);
  }
  return sub;
}

bool verbose_from_env() {
  const char* v = std::getenv("UAVSEC_VERBOSE");
  return v != nullptr && std::string(v) != "" && std::string(v) != "0";
}

ScaResult run_sca(const WcrIterate& init, const SubproblemBuilder& build, const RateEvaluator& certified_rate,
                  const ScaOptions& options) {
  if (!(options.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (options.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");

  ScaResult out;
  out.trace.epsilon = options.epsilon;
  out.trace.max_iters = options.max_iters;
  out.trace.rows.push_back({0, surrogate_free_objective(init.alpha_tilde, init.varphi_tilde), "initial", 0.0});
  WcrIterate iterate = init;
  double previous = out.trace.rows.front().objective;

  for (int k = 1; k <= options.max_iters; ++k) {
    const auto started = std::chrono::steady_clock::now();
    Subproblem sub = build(iterate);
    const conic::SolveResult res = conic::solve(sub.program, options.solver);
    const double wall =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    if (options.solver.verbose)
      std::fprintf(stderr, "sca iteration %d: %s (%d newton steps, %.1f ms) %s\n", k,
                   conic::to_string(res.status.kind), res.newton_steps + res.phase1_steps, wall,
                   res.status.message.c_str());

    const auto kind = res.status.kind;
    if (kind == conic::StatusKind::infeasible) throw ScaError("infeasible_subproblem", k, res.status.message);
    const bool usable = kind == conic::StatusKind::optimal ||
                        (kind == conic::StatusKind::iteration_limit && !res.x.empty());
    if (!usable)
      throw ScaError("numerical_failure", k, std::string(conic::to_string(kind)) + ": " + res.status.message);

    const int N = static_cast<int>(sub.tau.size());
    WcrIterate next;
    next.tau_tilde.resize(N);
    next.q_tilde.resize(N);
    next.alpha_tilde.resize(N);
    next.varphi_tilde.resize(N);
    for (int n = 0; n < N; ++n) {
      next.tau_tilde[n] = res.x[sub.tau[n].index];
      next.alpha_tilde[n] = sub.alpha[n].evaluate(res.x);
      next.varphi_tilde[n] = res.x[sub.varphi[n].index];
      next.q_tilde[n] = Vec2(sub.qx[n].evaluate(res.x), sub.qy[n].evaluate(res.x));
    }
    const double objective = surrogate_free_objective(next.alpha_tilde, next.varphi_tilde);
    if (kind == conic::StatusKind::iteration_limit &&
        objective < previous - 10.0 * options.solver.tol_gap * std::max(1.0, std::abs(previous)))
      throw ScaError("numerical_failure", k, "iteration limit without improvement");

    out.trace.rows.push_back({k, objective, conic::to_string(kind), wall});

    Solution& sol = out.solution;
    sol.waypoints = next.q_tilde;
    sol.powers.resize(N);
    for (int n = 0; n < N; ++n) sol.powers[n] = 1.0 / next.tau_tilde[n];
    sol.slacks.clear();
    for (const auto& [name, exprs] : sub.slacks) {
      auto& v = sol.slacks[name];
      v.reserve(exprs.size());
      for (const auto& e : exprs) v.push_back(e.evaluate(res.x));
    }
    auto& beta = sol.slacks["beta"];
    beta.clear();
    for (double phi : next.varphi_tilde) beta.push_back(std::log2(1.0 + phi));

    iterate = std::move(next);
    if (std::abs(objective - previous) <= options.epsilon) {
      out.trace.converged = true;
      break;
    }
    previous = objective;
  }
  out.solution.objective_bps_hz = certified_rate(out.solution.waypoints, out.solution.powers);
  out.last_iterate = std::move(iterate);
  return out;
}

}  // namespace uavsec
