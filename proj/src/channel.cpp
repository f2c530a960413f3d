#include "uavsec/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uavsec::channel {

double gain(const Vec2& q_xy, const Vec2& node_xy, double altitude_m, double beta0) {
  return beta0 / ((q_xy - node_xy).squaredNorm() + altitude_m * altitude_m);
}

double rate(double power_w, double gain, double noise_w) {
  return std::log2(1.0 + power_w * gain / noise_w);
}

double avg_secrecy_rate(const Solution& solution, const Scenario& scenario,
                        std::span<const Vec2> eve_xy) {
  if (eve_xy.size() != scenario.eves.size())
    throw std::invalid_argument("avg_secrecy_rate: one position per Eve required");
  const int n_slots = solution.n_slots();
  double total = 0.0;
  for (int n = 0; n < n_slots; ++n) {
    const Vec2& q = solution.waypoints[n];
    const double p = solution.powers[n];
    const double r_u = rate(p, gain(q, scenario.su_xy, scenario.altitude_m, scenario.beta0),
                            scenario.noise_su_w);
    double slot = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < eve_xy.size(); ++k) {
      const double r_e =
          rate(p, gain(q, eve_xy[k], scenario.altitude_m, scenario.beta0), scenario.noise_eve_w[k]);
      slot = std::min(slot, std::max(r_u - r_e, 0.0));
    }
    total += slot;
  }
  return total / n_slots;
}

Vec2 nearest_disk_point(const Vec2& q_xy, const Vec2& center_xy, double radius_m) {
  const Vec2 d = q_xy - center_xy;
  const double dist = d.norm();
  if (dist <= radius_m) return q_xy;
  return center_xy + d * (radius_m / dist);
}

double worst_case_gain(const Vec2& q_xy, const UncertainNode& node, double altitude_m, double beta0) {
  const double d = std::max((q_xy - node.center_xy).norm() - node.bounded_radius_m, 0.0);
  return beta0 / (d * d + altitude_m * altitude_m);
}

double worst_case_interference(const Vec2& q_xy, double power_w, const UncertainNode& node,
                               double altitude_m, double beta0) {
  return power_w * worst_case_gain(q_xy, node, altitude_m, beta0);
}

double worst_case_secrecy_rate(std::span<const Vec2> waypoints, std::span<const double> powers,
                               const Scenario& s) {
  const std::size_t n_slots = powers.size();
  double total = 0.0;
  for (std::size_t n = 0; n < n_slots; ++n) {
    const double r_u = rate(powers[n], gain(waypoints[n], s.su_xy, s.altitude_m, s.beta0), s.noise_su_w);
    double r_e = 0.0;
    for (std::size_t k = 0; k < s.eves.size(); ++k)
      r_e = std::max(r_e, rate(powers[n], worst_case_gain(waypoints[n], s.eves[k], s.altitude_m, s.beta0),
                               s.noise_eve_w[k]));
    total += std::max(r_u - r_e, 0.0);
  }
  return total / static_cast<double>(n_slots);
}

}  // namespace uavsec::channel
