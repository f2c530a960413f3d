#include "uavsec/baselines.hpp"

#include <cmath>

#include "uavsec/channel.hpp"
#include "uavsec/ocr.hpp"
#include "uavsec/wcr.hpp"

namespace uavsec {

namespace {

int moves_needed(double distance, double step) {
  // Tolerate rounding so an exact multiple of the step does not need an extra move.
  return static_cast<int>(std::ceil(distance / step - 1e-9));
}

/// Interference gain of one slot under the model the iterate is built for.
double interference_gain(const Scenario& s, const Vec2& q, const UncertainNode& pu, UncertaintyModel model) {
  if (model == UncertaintyModel::bounded) return channel::worst_case_gain(q, pu, s.altitude_m, s.beta0);
  return bernstein_effective_gain(q, pu, s.altitude_m, s.beta0, s.phi);
}

double eve_gain(const Scenario& s, const Vec2& q, int k, UncertaintyModel model) {
  if (model == UncertaintyModel::bounded) return channel::worst_case_gain(q, s.eves[k], s.altitude_m, s.beta0);
  return bernstein_effective_gain(q, s.eves[k], s.altitude_m, s.beta0, decouple_outage(s.rho, s.num_eves()));
}

}  // namespace

std::vector<Vec2> fly_hover_fly(const Scenario& s, const Vec2& hover) {
  const int N = s.n_slots;
  const double step = s.max_step_m();
  const Vec2 out_leg = hover - s.q_init_xy;
  const Vec2 in_leg = hover - s.q_final_xy;
  const int n1 = moves_needed(out_leg.norm(), step);
  const int n2 = moves_needed(in_leg.norm(), step);
  if (n1 + n2 > N - 1) return {};
  std::vector<Vec2> q(N, hover);
  for (int i = 0; i <= n1; ++i) {
    const double along = std::min(i * step, out_leg.norm());
    q[i] = along > 0.0 ? Vec2(s.q_init_xy + out_leg.normalized() * along) : s.q_init_xy;
  }
  for (int j = 0; j <= n2; ++j) {
    const double along = std::min(j * step, in_leg.norm());
    q[N - 1 - j] = along > 0.0 ? Vec2(s.q_final_xy + in_leg.normalized() * along) : s.q_final_xy;
  }
  return q;
}

int hover_moves(const Scenario& s, const Vec2& hover) {
  const double step = s.max_step_m();
  return (s.n_slots - 1) - moves_needed((hover - s.q_init_xy).norm(), step) -
         moves_needed((hover - s.q_final_xy).norm(), step);
}

std::vector<Vec2> initial_trajectory(const Scenario& s) {
  auto q = fly_hover_fly(s, s.su_xy);
  if (!q.empty()) return q;
  const Vec2 mid = 0.5 * (s.q_init_xy + s.q_final_xy);
  double lo = 0.0, hi = 1.0;
  std::vector<Vec2> best = fly_hover_fly(s, mid);
  for (int i = 0; i < 50; ++i) {
    const double m = 0.5 * (lo + hi);
    auto candidate = fly_hover_fly(s, (1.0 - m) * s.su_xy + m * mid);
    if (candidate.empty()) {
      lo = m;
    } else {
      hi = m;
      best = std::move(candidate);
    }
  }
  if (!best.empty()) return best;
  std::vector<Vec2> line(s.n_slots);
  for (int n = 0; n < s.n_slots; ++n)
    line[n] = s.q_init_xy + (s.q_final_xy - s.q_init_xy) * (static_cast<double>(n) / (s.n_slots - 1));
  return line;
}

WcrIterate initial_iterate(const Scenario& s, UncertaintyModel model) {
  s.validate_for(model);
  const int N = s.n_slots;
  const std::vector<Vec2> q = initial_trajectory(s);

  // Interference is linear in a uniform power, so the largest admissible
  // level has a closed form; keep a small margin for strict feasibility.
  double power = s.p_avg_w;
  for (const auto& pu : s.pus) {
    double avg_gain = 0.0;
    for (const auto& qn : q) avg_gain += interference_gain(s, qn, pu, model);
    avg_gain /= N;
    power = std::min(power, (1.0 - 1e-3) * s.it_threshold_w / avg_gain);
  }
  if (!(power > 0.0) || !std::isfinite(power))
    throw ScenarioError("infeasible_scenario", "no positive power meets the interference threshold");

  WcrIterate it;
  it.q_tilde = q;
  it.tau_tilde.assign(N, 1.0 / power);
  it.alpha_tilde.resize(N);
  it.varphi_tilde.resize(N);
  for (int n = 0; n < N; ++n) {
    it.alpha_tilde[n] = 1.0 + power * channel::gain(q[n], s.su_xy, s.altitude_m, s.beta0) / s.noise_su_w;
    double phi = 0.0;
    for (int k = 0; k < s.num_eves(); ++k) phi = std::max(phi, power * eve_gain(s, q[n], k, model) / s.noise_eve_w[k]);
    it.varphi_tilde[n] = phi;
  }
  return it;
}

Scenario without_uncertainty(Scenario s) {
  for (auto& n : s.pus) n.bounded_radius_m = n.gaussian_std_m = 0.0;
  for (auto& n : s.eves) n.bounded_radius_m = n.gaussian_std_m = 0.0;
  return s;
}

ScaResult non_robust(const Scenario& s, const ScaOptions& options) {
  const Scenario nominal = without_uncertainty(s);
  return run_algorithm1(nominal, initial_iterate(nominal, UncertaintyModel::bounded), options);
}

ScaResult fixed_trajectory(const Scenario& s, UncertaintyModel model, const ScaOptions& options) {
  const WcrIterate init = initial_iterate(s, model);
  if (model == UncertaintyModel::bounded) return run_algorithm1(s, init, options, true);
  return run_algorithm2(s, init, options, true);
}

}  // namespace uavsec
