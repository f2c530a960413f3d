#pragma once

#include <span>
#include <string>

#include "uavsec/conic/program.hpp"

namespace uavsec::conic {

/// Appends cones equivalent to coeff / (x y) <= t for positive x, y, t.
/// The product x y t >= coeff is written as a geometric mean of four terms:
/// a^2 <= x y, b^2 <= t g and g^2 <= a b with g = coeff^(1/3) (after scaling
/// each variable by its declared scale). Throws on coeff <= 0.
void add_inverse_product_bound(ConicProgram& program, Var x, Var y, Var t, double coeff,
                               const std::string& tag = "inverse_product");

/// Appends p_n tau_n >= 1 per entry plus sum_n p_n <= N * budget, which
/// together encode (1/N) sum_n 1/tau_n <= budget. Returns nothing; the p_n
/// auxiliaries are named "<tag>_p".
void add_reciprocal_sum_bound(ConicProgram& program, std::span<const Var> tau, double budget,
                              const std::string& tag = "reciprocal_sum");

}  // namespace uavsec::conic
