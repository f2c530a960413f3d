#include "uavsec/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "uavsec/channel.hpp"

namespace uavsec {

namespace {

const std::vector<double>* find_slack(const Solution& s, const std::string& name) {
  auto it = s.slacks.find(name);
  return it == s.slacks.end() ? nullptr : &it->second;
}

void record(ValidationReport& r, const std::string& name, double value) {
  r.violations[name] = value;
  r.max_violation = std::max(r.max_violation, value);
}

void check_sizes(const Solution& sol, const Scenario& s) {
  if (sol.n_slots() != s.n_slots || static_cast<int>(sol.waypoints.size()) != s.n_slots)
    throw std::invalid_argument("solution does not have one waypoint and power per slot");
}

}  // namespace

std::vector<Vec2> disk_grid(const Vec2& center_xy, double radius_m) {
  std::vector<Vec2> pts;
  pts.reserve(kDiskGridRadial * kDiskGridAngular);
  for (int i = 0; i < kDiskGridRadial; ++i) {
    const double r = radius_m * i / (kDiskGridRadial - 1);
    for (int j = 0; j < kDiskGridAngular; ++j) {
      const double a = 2.0 * std::numbers::pi * j / kDiskGridAngular;
      pts.push_back(center_xy + r * Vec2(std::cos(a), std::sin(a)));
    }
  }
  return pts;
}

double disk_max_gain(const Vec2& q, const UncertainNode& node, double altitude_m, double beta0) {
  double best = channel::gain(q, channel::nearest_disk_point(q, node.center_xy, node.bounded_radius_m),
                              altitude_m, beta0);
  if (node.bounded_radius_m > 0.0)
    for (const Vec2& p : disk_grid(node.center_xy, node.bounded_radius_m))
      best = std::max(best, channel::gain(q, p, altitude_m, beta0));
  return best;
}

ValidationReport certify_worst_case(const Solution& sol, const Scenario& s, double tolerance) {
  check_sizes(sol, s);
  const int N = s.n_slots;
  ValidationReport r;
  r.kind = "worst_case";
  r.tolerance = tolerance;

  double sum_p = 0.0, peak = 0.0, negative = 0.0;
  for (double p : sol.powers) {
    sum_p += p;
    peak = std::max(peak, p);
    negative = std::max(negative, -p);
  }
  record(r, "power_avg", (sum_p / N - s.p_avg_w) / s.p_avg_w);
  record(r, "power_peak", (peak - s.p_max_w) / s.p_max_w);
  record(r, "power_negative", negative / s.p_avg_w);

  const double step = s.max_step_m();
  double worst_step = 0.0;
  for (int n = 1; n < N; ++n) worst_step = std::max(worst_step, (sol.waypoints[n] - sol.waypoints[n - 1]).norm());
  record(r, "mobility", (worst_step - step) / step);
  record(r, "endpoints",
         std::max((sol.waypoints.front() - s.q_init_xy).norm(), (sol.waypoints.back() - s.q_final_xy).norm()) / step);

  // Eve side: worst-case rates, compared with the beta slacks when reported.
  const auto* beta = find_slack(sol, "beta");
  double eve_violation = 0.0, grid_gap = 0.0, rate_sum = 0.0;
  for (int n = 0; n < N; ++n) {
    const Vec2& q = sol.waypoints[n];
    const double p = sol.powers[n];
    const double r_u = channel::rate(p, channel::gain(q, s.su_xy, s.altitude_m, s.beta0), s.noise_su_w);
    double r_e = 0.0;
    for (int k = 0; k < s.num_eves(); ++k) {
      const double g = disk_max_gain(q, s.eves[k], s.altitude_m, s.beta0);
      const double closed = channel::worst_case_gain(q, s.eves[k], s.altitude_m, s.beta0);
      grid_gap = std::max(grid_gap, std::abs(g - closed) / closed);
      r_e = std::max(r_e, channel::rate(p, g, s.noise_eve_w[k]));
    }
    if (beta != nullptr) eve_violation = std::max(eve_violation, r_e - (*beta)[n]);
    rate_sum += std::max(r_u - r_e, 0.0);
  }
  if (beta != nullptr) record(r, "eve_rate", eve_violation);
  r.certified_rate_bps_hz = rate_sum / N;
  r.diagnostics["grid_vs_closed_form"] = grid_gap;

  // PU side: average worst-case interference and per-slot gamma slacks.
  const auto* gamma = find_slack(sol, "gamma");
  double avg_violation = 0.0, slot_violation = 0.0;
  for (int l = 0; l < s.num_pus(); ++l) {
    double total = 0.0;
    for (int n = 0; n < N; ++n) {
      const double i_wc = sol.powers[n] * disk_max_gain(sol.waypoints[n], s.pus[l], s.altitude_m, s.beta0);
      total += i_wc;
      if (gamma != nullptr)
        slot_violation = std::max(slot_violation, (i_wc - (*gamma)[l * N + n]) / s.it_threshold_w);
    }
    avg_violation = std::max(avg_violation, (total / N - s.it_threshold_w) / s.it_threshold_w);
  }
  if (s.num_pus() > 0) {
    record(r, "interference_avg", avg_violation);
    if (gamma != nullptr) record(r, "interference_slot", slot_violation);
  }
  r.passed = r.max_violation <= tolerance;
  return r;
}

ValidationReport certify_outage(const Solution& sol, const Scenario& s, int samples, std::uint64_t seed) {
  if (samples < 1000) throw std::invalid_argument("certify_outage needs at least 1000 samples");
  check_sizes(sol, s);
  const auto* beta = find_slack(sol, "beta");
  const auto* gamma = find_slack(sol, "gamma");
  if (beta == nullptr) throw std::invalid_argument("solution lacks the beta slack");
  if (s.num_pus() > 0 && gamma == nullptr) throw std::invalid_argument("solution lacks the gamma slack");

  const int N = s.n_slots;
  const int K = s.num_eves();
  const int L = s.num_pus();
  ValidationReport r;
  r.kind = "outage";
  r.samples = samples;
  r.seed = seed;

  std::vector<long> eve_hits(N, 0), pu_hits(static_cast<std::size_t>(L) * N, 0);
  std::vector<Vec2> eve_pos(K), pu_pos(L);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int m = 0; m < samples; ++m) {
    for (int k = 0; k < K; ++k) {
      const double x = normal(rng), y = normal(rng);
      eve_pos[k] = s.eves[k].center_xy + s.eves[k].gaussian_std_m * Vec2(x, y);
    }
    for (int l = 0; l < L; ++l) {
      const double x = normal(rng), y = normal(rng);
      pu_pos[l] = s.pus[l].center_xy + s.pus[l].gaussian_std_m * Vec2(x, y);
    }
    for (int n = 0; n < N; ++n) {
      const Vec2& q = sol.waypoints[n];
      const double p = sol.powers[n];
      double r_e = 0.0;
      for (int k = 0; k < K; ++k)
        r_e = std::max(r_e, channel::rate(p, channel::gain(q, eve_pos[k], s.altitude_m, s.beta0), s.noise_eve_w[k]));
      if (r_e > (*beta)[n]) ++eve_hits[n];
      for (int l = 0; l < L; ++l)
        if (p * channel::gain(q, pu_pos[l], s.altitude_m, s.beta0) > (*gamma)[l * N + n]) ++pu_hits[l * N + n];
    }
  }

  r.eve_limit = s.rho + kBinomialSigmas * std::sqrt(s.rho * (1.0 - s.rho) / samples);
  r.pu_limit = s.phi + kBinomialSigmas * std::sqrt(s.phi * (1.0 - s.phi) / samples);
  r.eve_outage.resize(N);
  r.pu_outage.resize(pu_hits.size());
  double worst_eve = 0.0, worst_pu = 0.0;
  for (int n = 0; n < N; ++n) {
    r.eve_outage[n] = static_cast<double>(eve_hits[n]) / samples;
    bool bad = r.eve_outage[n] > r.eve_limit;
    worst_eve = std::max(worst_eve, r.eve_outage[n]);
    for (int l = 0; l < L; ++l) {
      const double o = static_cast<double>(pu_hits[l * N + n]) / samples;
      r.pu_outage[l * N + n] = o;
      worst_pu = std::max(worst_pu, o);
      bad = bad || o > r.pu_limit;
    }
    if (bad) r.failing_slots.push_back(n);
  }
  record(r, "eve_outage", worst_eve - r.eve_limit > 0.0 ? worst_eve - r.eve_limit : 0.0);
  if (L > 0) record(r, "pu_outage", worst_pu - r.pu_limit > 0.0 ? worst_pu - r.pu_limit : 0.0);
  r.diagnostics["max_eve_outage"] = worst_eve;
  r.diagnostics["max_pu_outage"] = worst_pu;

  double rate_sum = 0.0;
  for (int n = 0; n < N; ++n) {
    const double r_u =
        channel::rate(sol.powers[n], channel::gain(sol.waypoints[n], s.su_xy, s.altitude_m, s.beta0), s.noise_su_w);
    rate_sum += std::max(r_u - (*beta)[n], 0.0);
  }
  r.certified_rate_bps_hz = rate_sum / N;
  r.passed = r.failing_slots.empty();
  return r;
}

Eigen::Matrix2d inverse_product_hessian(double x, double y) {
  Eigen::Matrix2d h;
  h << 2.0 / (x * x * x * y), 1.0 / (x * x * y * y), 1.0 / (x * x * y * y), 2.0 / (x * y * y * y);
  return h;
}

Eigen::Matrix2d inverse_product_hessian_fd(double x, double y, double h) {
  auto f = [](double a, double b) { return 1.0 / (a * b); };
  const double hx = h * x, hy = h * y;
  Eigen::Matrix2d m;
  m(0, 0) = (f(x + hx, y) - 2.0 * f(x, y) + f(x - hx, y)) / (hx * hx);
  m(1, 1) = (f(x, y + hy) - 2.0 * f(x, y) + f(x, y - hy)) / (hy * hy);
  m(0, 1) = m(1, 0) =
      (f(x + hx, y + hy) - f(x + hx, y - hy) - f(x - hx, y + hy) + f(x - hx, y - hy)) / (4.0 * hx * hy);
  return m;
}

HessianCheck check_hessian_psd(int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("check_hessian_psd needs at least one sample");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> expo(-2.0, 2.0);
  HessianCheck out;
  out.min_eigenvalue = out.min_fd_eigenvalue = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double x = std::pow(10.0, expo(rng));
    const double y = std::pow(10.0, expo(rng));
    const Eigen::Matrix2d a = inverse_product_hessian(x, y);
    const Eigen::Matrix2d fd = inverse_product_hessian_fd(x, y);
    // Scale-free eigenvalue test: the Hessian entries span many decades.
    const double scale = a.cwiseAbs().maxCoeff();
    const double ea = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(a / scale).eigenvalues()(0);
    const double ef = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(fd / scale).eigenvalues()(0);
    out.min_eigenvalue = std::min(out.min_eigenvalue, ea);
    out.min_fd_eigenvalue = std::min(out.min_fd_eigenvalue, ef);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        out.max_fd_relative_error = std::max(out.max_fd_relative_error, std::abs(fd(r, c) - a(r, c)) / std::abs(a(r, c)));
  }
  out.passed = out.min_eigenvalue >= -1e-8 && out.min_fd_eigenvalue >= -1e-8 && out.max_fd_relative_error <= 1e-5;
  return out;
}

TraceAudit audit_trace(const SolveTrace& trace, double epsilon, double tol_gap) {
  TraceAudit a;
  a.converged = trace.converged;
  if (trace.rows.size() < 2) {
    a.passed = a.epsilon_rule = false;
    a.message = "trace has no iterations";
    return a;
  }
  int first_hit = -1;
  for (std::size_t i = 1; i < trace.rows.size(); ++i) {
    const double prev = trace.rows[i - 1].objective;
    const double cur = trace.rows[i].objective;
    const double decrease = prev - cur;
    a.worst_decrease = std::max(a.worst_decrease, decrease);
    if (decrease > 10.0 * tol_gap * std::max(1.0, std::abs(prev))) a.monotone = false;
    if (first_hit < 0 && std::abs(cur - prev) <= epsilon) first_hit = static_cast<int>(i);
  }
  const int last = static_cast<int>(trace.rows.size()) - 1;
  if (trace.converged)
    a.epsilon_rule = first_hit == last;
  else
    a.epsilon_rule = first_hit < 0 && last == trace.max_iters;
  a.passed = a.monotone && a.epsilon_rule;
  if (!a.monotone) a.message = "objective decreased by " + std::to_string(a.worst_decrease);
  else if (!a.epsilon_rule) a.message = "termination does not match the epsilon rule";
  return a;
}

}  // namespace uavsec
