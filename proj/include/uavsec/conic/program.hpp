#pragma once

#include <array>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace uavsec::conic {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Handle to a scalar decision variable of a ConicProgram.
struct Var {
  int index = -1;
  bool valid() const { return index >= 0; }
};

/// constant + sum_i coeff_i * x_i
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(double constant) : constant_(constant) {}  // NOLINT(implicit)
  AffineExpr(Var v) { add(v, 1.0); }                   // NOLINT(implicit)

  AffineExpr& add(Var v, double coeff);
  AffineExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  AffineExpr& operator+=(const AffineExpr& other);
  AffineExpr& operator-=(const AffineExpr& other);
  AffineExpr& operator*=(double s);

  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator*(AffineExpr a, double s) { return a *= s; }
  friend AffineExpr operator*(double s, AffineExpr a) { return a *= s; }
  friend AffineExpr operator-(AffineExpr a) { return a *= -1.0; }

  double constant() const { return constant_; }
  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }
  double coefficient(Var v) const;

  double evaluate(std::span<const double> x) const;

 private:
  double constant_ = 0.0;
  std::vector<std::pair<int, double>> terms_;  // sorted by index, no duplicates
};

/// Symmetric 3x3 matrix of affine expressions.
class SymMatrix3Expr {
 public:
  AffineExpr& operator()(int i, int j) { return entries_[slot(i, j)]; }
  const AffineExpr& operator()(int i, int j) const { return entries_[slot(i, j)]; }
  /// Upper-triangle storage order: (0,0) (0,1) (0,2) (1,1) (1,2) (2,2).
  const std::array<AffineExpr, 6>& upper() const { return entries_; }

  static int slot(int i, int j) {
    if (i > j) std::swap(i, j);
    static constexpr int kSlot[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return kSlot[i][j];
  }

 private:
  std::array<AffineExpr, 6> entries_;
};

struct VariableInfo {
  std::string name;
  double lower = -kInf;
  double upper = kInf;
  /// Typical magnitude; the solver works in x / scale.
  double scale = 1.0;
  /// Starting guess for the interior-point phase I.
  double initial = 0.0;
};

enum class Relation { greater_equal_zero, equal_zero };

struct LinearConstraint {
  AffineExpr expr;
  Relation relation = Relation::greater_equal_zero;
  std::string tag;
};

/// |entries| <= bound
struct SocBlock {
  AffineExpr bound;
  std::vector<AffineExpr> entries;
  std::string tag;
  int dimension() const { return 1 + static_cast<int>(entries.size()); }
};

/// 2 u v >= |entries|^2, u >= 0, v >= 0
struct RotatedSocBlock {
  AffineExpr u;
  AffineExpr v;
  std::vector<AffineExpr> entries;
  std::string tag;
};

/// matrix >= 0 (positive semidefinite)
struct PsdBlock {
  SymMatrix3Expr matrix;
  std::string tag;
};

/// weight * log2(var + offset), added to the maximized objective.
struct LogTerm {
  double weight = 1.0;
  Var var;
  double offset = 0.0;
};

struct Census {
  int variables = 0;
  int linear_inequalities = 0;
  int linear_equalities = 0;
  int soc = 0;
  int rotated_soc = 0;
  int psd = 0;
  int log_terms = 0;
  std::map<int, int> soc_by_dimension;
  std::map<std::string, int> by_tag;
};

/// One convex subproblem: maximize sum(log terms) + linear objective over
/// affine, second-order-cone, rotated-cone and 3x3 PSD constraints.
class ConicProgram {
 public:
  Var add_variable(std::string name, double lower = -kInf, double upper = kInf, double scale = 1.0);
  std::vector<Var> add_variables(const std::string& name, int count, double lower = -kInf,
                                 double upper = kInf, double scale = 1.0);
  void set_initial(Var v, double value) { variables_.at(v.index).initial = value; }
  void set_scale(Var v, double scale);

  void add_greater_equal(const AffineExpr& lhs, const AffineExpr& rhs, std::string tag = {});
  void add_less_equal(const AffineExpr& lhs, const AffineExpr& rhs, std::string tag = {});
  void add_equal(const AffineExpr& lhs, const AffineExpr& rhs, std::string tag = {});
  void add_soc(AffineExpr bound, std::vector<AffineExpr> entries, std::string tag = {});
  void add_rotated_soc(AffineExpr u, AffineExpr v, std::vector<AffineExpr> entries,
                       std::string tag = {});
  void add_psd(SymMatrix3Expr matrix, std::string tag = {});
  /// Generic entry point; only 3x3 symmetric matrices are accepted.
  void add_psd(const std::vector<std::vector<AffineExpr>>& matrix, std::string tag = {});
  /// Adds weight * log2(v + offset). Requires a strictly positive lower
  /// bound on v and offset >= 0.
  void add_log_term(double weight, Var v, double offset = 0.0);
  void add_objective(const AffineExpr& expr) { objective_ += expr; }

  int num_variables() const { return static_cast<int>(variables_.size()); }
  const VariableInfo& variable(Var v) const { return variables_.at(v.index); }
  const std::vector<VariableInfo>& variables() const { return variables_; }
  const std::vector<LinearConstraint>& linear_constraints() const { return linear_; }
  const std::vector<SocBlock>& soc_blocks() const { return soc_; }
  const std::vector<RotatedSocBlock>& rotated_soc_blocks() const { return rsoc_; }
  const std::vector<PsdBlock>& psd_blocks() const { return psd_; }
  const std::vector<LogTerm>& log_terms() const { return log_terms_; }
  const AffineExpr& linear_objective() const { return objective_; }

  Census census() const;

  /// Objective (log terms in bits plus the linear part) at x.
  double objective_value(std::span<const double> x) const;
  /// Largest violation over bounds and constraints at x: affine residuals,
  /// cone distances |w| - t, and -lambda_min for PSD blocks.
  double max_violation(std::span<const double> x) const;

 private:
  void check_expr(const AffineExpr& e) const;

  std::vector<VariableInfo> variables_;
  std::vector<LinearConstraint> linear_;
  std::vector<SocBlock> soc_;
  std::vector<RotatedSocBlock> rsoc_;
  std::vector<PsdBlock> psd_;
  std::vector<LogTerm> log_terms_;
  AffineExpr objective_;
};

}  // namespace uavsec::conic
