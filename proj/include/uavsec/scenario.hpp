#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace uavsec {

using Vec2 = Eigen::Vector2d;

/// Ground node whose position is only known up to an estimation error.
/// The bounded model uses a disk of radius `bounded_radius_m` around the
/// estimate; the probabilistic model uses i.i.d. Gaussian coordinate errors
/// with standard deviation `gaussian_std_m`.
struct UncertainNode {
  Vec2 center_xy = Vec2::Zero();
  double bounded_radius_m = 0.0;
  double gaussian_std_m = 0.0;
};

enum class UncertaintyModel { bounded, probabilistic };

/// Thrown by load_scenario / Scenario::validate. `invariant()` names the
/// rule that was violated ("parse", "unit", "reachability", ...).
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string invariant, const std::string& what)
      : std::runtime_error(invariant + ": " + what), invariant_(std::move(invariant)) {}
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

/// Complete problem instance. All powers are linear watts, distances meters.
/// Immutable after validation; safe to share across threads.
struct Scenario {
  Vec2 su_xy = Vec2::Zero();
  std::vector<UncertainNode> pus;
  std::vector<UncertainNode> eves;
  double altitude_m = 100.0;
  double beta0 = 0.1;
  double noise_su_w = 1e-8;
  std::vector<double> noise_eve_w;
  double p_avg_w = 0.1;
  double p_max_w = 0.4;
  double v_max_mps = 10.0;
  double slot_s = 1.0;
  int n_slots = 60;
  Vec2 q_init_xy = Vec2::Zero();
  Vec2 q_final_xy = Vec2::Zero();
  double it_threshold_w = 2.5e-7;
  double rho = 0.2;
  double phi = 0.2;

  /// Throws ScenarioError naming the first violated invariant.
  void validate() const;
  /// Same checks, plus the per-node parameter the given model needs.
  void validate_for(UncertaintyModel model) const;

  double max_step_m() const { return v_max_mps * slot_s; }
  double duration_s() const { return slot_s * n_slots; }
  int num_eves() const { return static_cast<int>(eves.size()); }
  int num_pus() const { return static_cast<int>(pus.size()); }
};

/// Per-slot trajectory/power plus the slack values of the last subproblem.
/// Slack vectors indexed by (k, n) or (l, n) are stored row-major: k * N + n.
struct Solution {
  std::vector<Vec2> waypoints;
  std::vector<double> powers;
  double objective_bps_hz = 0.0;
  std::map<std::string, std::vector<double>> slacks;

  int n_slots() const { return static_cast<int>(powers.size()); }
};

double dbm_to_watts(double dbm);
double dbw_to_watts(double dbw);
double db_to_ratio(double db);

/// Parses a JSON scenario document. Field names carry unit suffixes
/// (_m, _w, _dbw, _dbm, _s, _mps); exactly one representation per power field.
Scenario load_scenario(std::string_view config_text);
Scenario load_scenario_file(const std::string& path);
/// Inverse of load_scenario; emits linear units with round-trip precision.
std::string serialize_scenario(const Scenario& scenario);

/// Desk-scale reference instance: H = 100 m, SU at the origin, one PU, two
/// Eves, T = 60 s with 1 s slots. P_avg = 0.1 W and the IT threshold
/// 2.5e-7 W are defaults the caller may override. Bounded radii are the
/// Gaussian stds mapped through matched_radius. The endpoints (-200, 0) and
/// (200, 0) are a fixture convention, not measured values.
Scenario default_fixture();

/// Returns a copy with the duration changed to `duration_s` (slot length kept).
Scenario with_duration(Scenario scenario, double duration_s);

}  // namespace uavsec
