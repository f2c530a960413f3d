#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "uavsec/baselines.hpp"
#include "uavsec/channel.hpp"
#include "uavsec/validation.hpp"
#include "uavsec/wcr.hpp"

using namespace uavsec;

TEST_CASE("pure hover when both endpoints sit above the SU") {
  Scenario s = default_fixture();
  s.q_init_xy = s.su_xy;
  s.q_final_xy = s.su_xy;
  const auto q = initial_trajectory(s);
  REQUIRE(q.size() == static_cast<std::size_t>(s.n_slots));
  for (const auto& p : q) CHECK(p == s.su_xy);
  CHECK(hover_moves(s, s.su_xy) == s.n_slots - 1);
}

TEST_CASE("fixture fly-hover-fly kinematics") {
  const Scenario s = default_fixture();
  const auto q = initial_trajectory(s);
  REQUIRE(q.size() == 60u);
  CHECK(q.front() == s.q_init_xy);
  CHECK(q.back() == s.q_final_xy);
  // (N - 1) - ceil(200 / 10) - ceil(200 / 10)
  CHECK(hover_moves(s, s.su_xy) == 19);
  int zero_moves = 0;
  for (std::size_t n = 1; n < q.size(); ++n) {
    const double step = (q[n] - q[n - 1]).norm();
    CHECK(step <= s.max_step_m() * (1.0 + 1e-12));
    zero_moves += step == 0.0;
  }
  CHECK(zero_moves == 19);
}

TEST_CASE("a detour that does not fit slides the hover point") {
  Scenario s = default_fixture();
  s.su_xy = Vec2(0.0, 200.0);
  const auto q = initial_trajectory(s);
  REQUIRE(q.size() == static_cast<std::size_t>(s.n_slots));
  CHECK(q.front() == s.q_init_xy);
  CHECK(q.back() == s.q_final_xy);
  for (std::size_t n = 1; n < q.size(); ++n) CHECK((q[n] - q[n - 1]).norm() <= s.max_step_m() * (1.0 + 1e-9));
}

TEST_CASE("initial iterate meets the interference budget") {
  const Scenario s = default_fixture();
  for (auto model : {UncertaintyModel::bounded, UncertaintyModel::probabilistic}) {
    const WcrIterate it = initial_iterate(s, model);
    CHECK_NOTHROW(it.check(s));
    if (model == UncertaintyModel::bounded) {
      double total = 0.0;
      for (int n = 0; n < s.n_slots; ++n)
        total += channel::worst_case_interference(it.q_tilde[n], 1.0 / it.tau_tilde[n], s.pus[0], s.altitude_m, s.beta0);
      CHECK(total / s.n_slots <= s.it_threshold_w);
    }
  }
}

TEST_CASE("without_uncertainty zeroes every radius and std") {
  const Scenario s = without_uncertainty(default_fixture());
  for (const auto& n : s.eves) {
    CHECK(n.bounded_radius_m == 0.0);
    CHECK(n.gaussian_std_m == 0.0);
  }
  CHECK(s.pus[0].bounded_radius_m == 0.0);
}

TEST_CASE("non-robust equals WCR SCA when the radii are already zero") {
  const Scenario s = without_uncertainty(default_fixture());
  ScaOptions opt;
  opt.max_iters = 2;
  const ScaResult a = non_robust(s, opt);
  const ScaResult b = run_algorithm1(s, initial_iterate(s, UncertaintyModel::bounded), opt);
  CHECK(a.solution.objective_bps_hz == b.solution.objective_bps_hz);
  CHECK(a.solution.powers == b.solution.powers);
}

TEST_CASE("non-robust design violates the worst-case constraints on the fixture") {
  const Scenario s = default_fixture();
  ScaOptions opt;
  opt.max_iters = 3;
  const ScaResult r = non_robust(s, opt);
  const ValidationReport rep = certify_worst_case(r.solution, s);
  CHECK_FALSE(rep.passed);
  CHECK(rep.max_violation > kCertifyTolerance);
}

TEST_CASE("fixed-trajectory schemes keep the initial path") {
  const Scenario s = default_fixture();
  ScaOptions opt;
  opt.max_iters = 3;
  const auto path = initial_trajectory(s);
  for (auto model : {UncertaintyModel::bounded, UncertaintyModel::probabilistic}) {
    const ScaResult r = fixed_trajectory(s, model, opt);
    REQUIRE(r.solution.waypoints.size() == path.size());
    for (std::size_t n = 0; n < path.size(); ++n) CHECK((r.solution.waypoints[n] - path[n]).norm() <= 1e-12);
    CHECK(r.solution.objective_bps_hz >= 0.0);
  }
}

TEST_CASE("fixed scheme II lowers power near the high-uncertainty Eve") {
  const Scenario s = default_fixture();
  ScaOptions opt;
  opt.max_iters = 30;
  const ScaResult r = fixed_trajectory(s, UncertaintyModel::probabilistic, opt);
  const auto& p = r.solution.powers;
  // The first slots of the path are the closest to Eve 2; the hover slots are above the SU.
  const double near_eve2 = std::accumulate(p.begin(), p.begin() + 5, 0.0) / 5.0;
  const double hovering = std::accumulate(p.begin() + 25, p.begin() + 35, 0.0) / 10.0;
  CHECK(near_eve2 < hovering);
}
