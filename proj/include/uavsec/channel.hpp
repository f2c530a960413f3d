#pragma once

#include <span>
#include <vector>

#include "uavsec/scenario.hpp"

// Line-of-sight channel, rate and interference formulas, plus closed-form
// worst cases over a disk of location uncertainty. Everything here is a pure
// function and safe to call concurrently.
namespace uavsec::channel {

struct SlotState {
  Vec2 q_xy = Vec2::Zero();
  double power_w = 0.0;
};

/// beta0 / (|q - node|^2 + H^2).
double gain(const Vec2& q_xy, const Vec2& node_xy, double altitude_m, double beta0);

/// log2(1 + P g / noise).
double rate(double power_w, double gain, double noise_w);
inline double rate_su(double power_w, double gain, double noise_w) { return rate(power_w, gain, noise_w); }
inline double rate_eve(double power_w, double gain, double noise_w) { return rate(power_w, gain, noise_w); }

/// (1/N) sum_n min_k [R_U[n] - R_E,k[n]]^+ with the Eves at the given fixed
/// positions (one per Eve in scenario order).
double avg_secrecy_rate(const Solution& solution, const Scenario& scenario,
                        std::span<const Vec2> eve_xy);

/// Point of the disk {|x - center| <= radius} nearest to q.
Vec2 nearest_disk_point(const Vec2& q_xy, const Vec2& center_xy, double radius_m);

/// max over the disk of the node's gain: the adversarial position is the disk
/// point nearest q, i.e. horizontal distance max(|q - center| - radius, 0).
double worst_case_gain(const Vec2& q_xy, const UncertainNode& node, double altitude_m, double beta0);
inline double worst_case_eve_gain(const Vec2& q_xy, const UncertainNode& node, double altitude_m,
                                  double beta0) {
  return worst_case_gain(q_xy, node, altitude_m, beta0);
}

/// Worst-case received interference power P * s over the PU disk.
double worst_case_interference(const Vec2& q_xy, double power_w, const UncertainNode& node,
                               double altitude_m, double beta0);

/// Per-slot average of [R_U - max_k R_E,k]^+ with every Eve at its own
/// per-slot adversarial disk point (bounded_radius_m).
double worst_case_secrecy_rate(std::span<const Vec2> waypoints, std::span<const double> powers,
                               const Scenario& scenario);

}  // namespace uavsec::channel
