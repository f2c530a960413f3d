#include "uavsec/conic/program.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace uavsec::conic {

AffineExpr& AffineExpr::add(Var v, double coeff) {
  if (!v.valid()) throw std::invalid_argument("AffineExpr: invalid variable handle");
  if (coeff == 0.0) return *this;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), v.index,
                             [](const auto& term, int idx) { return term.first < idx; });
  if (it != terms_.end() && it->first == v.index) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  } else {
    terms_.insert(it, {v.index, coeff});
  }
  return *this;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  constant_ += other.constant_;
  if (terms_.empty()) {
    terms_ = other.terms_;
    return *this;
  }
  std::vector<std::pair<int, double>> merged;
  merged.reserve(terms_.size() + other.terms_.size());
  auto a = terms_.begin();
  auto b = other.terms_.begin();
  while (a != terms_.end() || b != other.terms_.end()) {
    if (b == other.terms_.end() || (a != terms_.end() && a->first < b->first)) {
      merged.push_back(*a++);
    } else if (a == terms_.end() || b->first < a->first) {
      merged.push_back(*b++);
    } else {
      const double c = a->second + b->second;
      if (c != 0.0) merged.emplace_back(a->first, c);
      ++a;
      ++b;
    }
  }
  terms_ = std::move(merged);
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) { return *this += -1.0 * other; }

AffineExpr& AffineExpr::operator*=(double s) {
  constant_ *= s;
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.second *= s;
  return *this;
}

double AffineExpr::coefficient(Var v) const {
  for (const auto& [idx, c] : terms_)
    if (idx == v.index) return c;
  return 0.0;
}

double AffineExpr::evaluate(std::span<const double> x) const {
  double value = constant_;
  for (const auto& [idx, c] : terms_) value += c * x[idx];
  return value;
}

Var ConicProgram::add_variable(std::string name, double lower, double upper, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("variable scale must be positive");
  if (lower > upper) throw std::invalid_argument("variable " + name + ": lower bound above upper bound");
  VariableInfo info;
  info.name = std::move(name);
  info.lower = lower;
  info.upper = upper;
  info.scale = scale;
  if (std::isfinite(lower) && std::isfinite(upper))
    info.initial = 0.5 * (lower + upper);
  else if (std::isfinite(lower))
    info.initial = lower + scale;
  else if (std::isfinite(upper))
    info.initial = upper - scale;
  variables_.push_back(std::move(info));
  return Var{static_cast<int>(variables_.size()) - 1};
}

std::vector<Var> ConicProgram::add_variables(const std::string& name, int count, double lower,
                                             double upper, double scale) {
  std::vector<Var> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(add_variable(name + "[" + std::to_string(i) + "]", lower, upper, scale));
  return out;
}

void ConicProgram::set_scale(Var v, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("variable scale must be positive");
  variables_.at(v.index).scale = scale;
}

void ConicProgram::check_expr(const AffineExpr& e) const {
  for (const auto& [idx, c] : e.terms()) {
    if (idx >= num_variables()) throw std::invalid_argument("expression references unknown variable");
    if (!std::isfinite(c)) throw std::invalid_argument("expression has non-finite coefficient");
  }
  if (!std::isfinite(e.constant())) throw std::invalid_argument("expression has non-finite constant");
}

void ConicProgram::add_greater_equal(const AffineExpr& lhs, const AffineExpr& rhs, std::string tag) {
  AffineExpr e = lhs - rhs;
  check_expr(e);
  linear_.push_back({std::move(e), Relation::greater_equal_zero, std::move(tag)});
}

void ConicProgram::add_less_equal(const AffineExpr& lhs, const AffineExpr& rhs, std::string tag) {
  add_greater_equal(rhs, lhs, std::move(tag));
}

void ConicProgram::add_equal(const AffineExpr& lhs, const AffineExpr& rhs, std::string tag) {
  AffineExpr e = lhs - rhs;
  check_expr(e);
  linear_.push_back({std::move(e), Relation::equal_zero, std::move(tag)});
}

void ConicProgram::add_soc(AffineExpr bound, std::vector<AffineExpr> entries, std::string tag) {
  check_expr(bound);
  for (const auto& e : entries) check_expr(e);
  soc_.push_back({std::move(bound), std::move(entries), std::move(tag)});
}

void ConicProgram::add_rotated_soc(AffineExpr u, AffineExpr v, std::vector<AffineExpr> entries,
                                   std::string tag) {
  check_expr(u);
  check_expr(v);
  for (const auto& e : entries) check_expr(e);
  rsoc_.push_back({std::move(u), std::move(v), std::move(entries), std::move(tag)});
}

void ConicProgram::add_psd(SymMatrix3Expr matrix, std::string tag) {
  for (const auto& e : matrix.upper()) check_expr(e);
  psd_.push_back({std::move(matrix), std::move(tag)});
}

namespace {

bool same_expr(const AffineExpr& a, const AffineExpr& b) {
  return a.constant() == b.constant() && a.terms() == b.terms();
}

}  // namespace

void ConicProgram::add_psd(const std::vector<std::vector<AffineExpr>>& matrix, std::string tag) {
  if (matrix.size() != 3) throw std::invalid_argument("PSD blocks must be 3x3");
  for (const auto& row : matrix)
    if (row.size() != 3) throw std::invalid_argument("PSD blocks must be 3x3");
  SymMatrix3Expr m;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      if (!same_expr(matrix[i][j], matrix[j][i])) throw std::invalid_argument("PSD block is not symmetric");
      m(i, j) = matrix[i][j];
    }
  add_psd(std::move(m), std::move(tag));
}

void ConicProgram::add_log_term(double weight, Var v, double offset) {
  if (!(weight > 0.0)) throw std::invalid_argument("log term weight must be positive");
  if (!(offset >= 0.0) || !std::isfinite(offset)) throw std::invalid_argument("log term offset must be >= 0");
  if (!(variable(v).lower > 0.0))
    throw std::invalid_argument("log term variable " + variable(v).name + " needs a positive lower bound");
  log_terms_.push_back({weight, v, offset});
}

Census ConicProgram::census() const {
  Census c;
  c.variables = num_variables();
  for (const auto& l : linear_) {
    if (l.relation == Relation::equal_zero)
      ++c.linear_equalities;
    else
      ++c.linear_inequalities;
    ++c.by_tag[l.tag];
  }
  for (const auto& s : soc_) {
    ++c.soc;
    ++c.soc_by_dimension[s.dimension()];
    ++c.by_tag[s.tag];
  }
  for (const auto& r : rsoc_) {
    ++c.rotated_soc;
    ++c.by_tag[r.tag];
  }
  for (const auto& p : psd_) {
    ++c.psd;
    ++c.by_tag[p.tag];
  }
  c.log_terms = static_cast<int>(log_terms_.size());
  return c;
}

double ConicProgram::objective_value(std::span<const double> x) const {
  double value = objective_.evaluate(x);
  for (const auto& t : log_terms_) value += t.weight * std::log2(x[t.var.index] + t.offset);
  return value;
}

double ConicProgram::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (int i = 0; i < num_variables(); ++i) {
    worst = std::max(worst, variables_[i].lower - x[i]);
    worst = std::max(worst, x[i] - variables_[i].upper);
  }
  for (const auto& l : linear_) {
    const double r = l.expr.evaluate(x);
    worst = std::max(worst, l.relation == Relation::equal_zero ? std::abs(r) : -r);
  }
  for (const auto& s : soc_) {
    double sq = 0.0;
    for (const auto& e : s.entries) sq += std::pow(e.evaluate(x), 2);
    worst = std::max(worst, std::sqrt(sq) - s.bound.evaluate(x));
  }
  for (const auto& r : rsoc_) {
    const double u = r.u.evaluate(x);
    const double v = r.v.evaluate(x);
    double sq = 0.0;
    for (const auto& e : r.entries) sq += std::pow(e.evaluate(x), 2);
    // 2uv >= |w|^2 is the SOC |(u - v, sqrt2 w)| <= u + v.
    worst = std::max(worst, std::sqrt((u - v) * (u - v) + 2.0 * sq) - (u + v));
  }
  for (const auto& p : psd_) {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = p.matrix(i, j).evaluate(x);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(m, Eigen::EigenvaluesOnly);
    worst = std::max(worst, -eig.eigenvalues()(0));
  }
  return worst;
}

}  // namespace uavsec::conic
