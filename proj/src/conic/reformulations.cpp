#include "uavsec/conic/reformulations.hpp"

#include <cmath>
#include <stdexcept>

namespace uavsec::conic {

void add_inverse_product_bound(ConicProgram& program, Var x, Var y, Var t, double coeff,
                               const std::string& tag) {
  if (!(coeff > 0.0) || !std::isfinite(coeff))
    throw std::invalid_argument("add_inverse_product_bound: coeff must be positive");
  const double sx = program.variable(x).scale;
  const double sy = program.variable(y).scale;
  const double st = program.variable(t).scale;
  const double g = std::cbrt(coeff / (sx * sy * st));

  const AffineExpr xn = AffineExpr().add(x, 1.0 / sx);
  const AffineExpr yn = AffineExpr().add(y, 1.0 / sy);
  const AffineExpr tn = AffineExpr().add(t, 1.0 / st);

  const Var a = program.add_variable(tag + "_a", 0.0, kInf, 1.0);
  const Var b = program.add_variable(tag + "_b", 0.0, kInf, 1.0);
  const double x0 = std::max(program.variable(x).initial / sx, 0.0);
  const double y0 = std::max(program.variable(y).initial / sy, 0.0);
  const double t0 = std::max(program.variable(t).initial / st, 0.0);
  program.set_initial(a, std::sqrt(x0 * y0));
  program.set_initial(b, std::sqrt(t0 * g));

  program.add_rotated_soc(xn, 0.5 * yn, {AffineExpr(a)}, tag);
  program.add_rotated_soc(tn, AffineExpr(0.5 * g), {AffineExpr(b)}, tag);
  program.add_rotated_soc(AffineExpr(a), 0.5 * AffineExpr(b), {AffineExpr(g)}, tag);
}

void add_reciprocal_sum_bound(ConicProgram& program, std::span<const Var> tau, double budget,
                              const std::string& tag) {
  if (!(budget > 0.0)) throw std::invalid_argument("add_reciprocal_sum_bound: budget must be positive");
  AffineExpr total;
  for (std::size_t n = 0; n < tau.size(); ++n) {
    const double s = program.variable(tau[n]).scale;
    const Var p = program.add_variable(tag + "_p[" + std::to_string(n) + "]", 0.0, kInf, 1.0 / s);
    const double tau0 = program.variable(tau[n]).initial;
    if (tau0 > 0.0) program.set_initial(p, 1.0 / tau0);
    program.add_rotated_soc(AffineExpr().add(p, s), AffineExpr().add(tau[n], 0.5 / s), {AffineExpr(1.0)},
                            tag);
    total.add(p, 1.0);
  }
  program.add_less_equal(total, static_cast<double>(tau.size()) * budget, tag + "_sum");
}

}  // namespace uavsec::conic
