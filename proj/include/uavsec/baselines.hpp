#pragma once

#include <vector>

#include "uavsec/sca.hpp"
#include "uavsec/scenario.hpp"

namespace uavsec {

/// Fly at V_max from q_I to `hover_xy`, hover, then fly at V_max to q_F.
/// Empty when the detour does not fit in N slots.
std::vector<Vec2> fly_hover_fly(const Scenario& scenario, const Vec2& hover_xy);

/// Number of slots spent at the hover point (moves of length zero).
int hover_moves(const Scenario& scenario, const Vec2& hover_xy);

/// Fly-hover-fly path over the SU. If the detour is too long the hover
/// point slides toward the midpoint of q_I and q_F; the last resort is the
/// straight line at constant speed.
std::vector<Vec2> initial_trajectory(const Scenario& scenario);

/// Feasible starting point: initial_trajectory with uniform power scaled so
/// the average interference (worst case for the bounded model, Bernstein
/// effective for the probabilistic one) sits just below the threshold.
/// Throws ScenarioError("infeasible_scenario") if no positive power works.
WcrIterate initial_iterate(const Scenario& scenario, UncertaintyModel model);

/// Copy with every bounded radius and Gaussian std set to zero.
Scenario without_uncertainty(Scenario scenario);

/// Joint design that trusts the estimated Eve/PU locations. The returned
/// objective is the nominal rate; evaluate under the true model separately.
ScaResult non_robust(const Scenario& scenario, const ScaOptions& options = {});

/// Robust power allocation along the initial trajectory (scheme I for the
/// bounded model, scheme II for the probabilistic one).
ScaResult fixed_trajectory(const Scenario& scenario, UncertaintyModel model, const ScaOptions& options = {});

}  // namespace uavsec
