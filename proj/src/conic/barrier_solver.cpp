#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "uavsec/conic/solver.hpp"

namespace uavsec::conic {

const char* to_string(StatusKind kind) {
  switch (kind) {
    case StatusKind::optimal: return "optimal";
    case StatusKind::infeasible: return "infeasible";
    case StatusKind::unbounded: return "unbounded";
    case StatusKind::numerical_failure: return "numerical_failure";
    case StatusKind::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

enum class BlockType { linear, soc, rsoc, psd };

struct Block {
  BlockType type = BlockType::linear;
  int rows = 1;
  std::vector<int> vars;
  MatrixXd A;
  VectorXd c;
  double nu = 1.0;
  int source = -1;        // index into the program's linear constraints
  double row_norm = 1.0;  // original row = z * row_norm (linear blocks)

  VectorXd z, dz, zt, gz;
  MatrixXd Hz, tmp, Hx;
  VectorXd gx;
  double phi = 0.0;
  std::vector<int> slots;
};

double cone_nu(BlockType t) {
  switch (t) {
    case BlockType::linear: return 1.0;
    case BlockType::soc:
    case BlockType::rsoc: return 2.0;
    case BlockType::psd: return 3.0;
  }
  return 1.0;
}

Eigen::Matrix3d psd_matrix(const VectorXd& z) {
  Eigen::Matrix3d m;
  m << z(0), z(1), z(2), z(1), z(3), z(4), z(2), z(4), z(5);
  return m;
}

/// Barrier value at z; false outside the open cone.
bool barrier_value(BlockType type, const VectorXd& z, double& phi) {
  switch (type) {
    case BlockType::linear:
      if (!(z(0) > 0.0)) return false;
      phi = -std::log(z(0));
      return true;
    case BlockType::soc: {
      const double nrm = z.tail(z.size() - 1).norm();
      const double gap = z(0) - nrm;
      if (!(gap > 0.0)) return false;
      phi = -std::log(gap) - std::log(z(0) + nrm);
      return true;
    }
    case BlockType::rsoc: {
      if (!(z(0) > 0.0) || !(z(1) > 0.0)) return false;
      const double d = 2.0 * z(0) * z(1) - z.tail(z.size() - 2).squaredNorm();
      if (!(d > 0.0)) return false;
      phi = -std::log(d);
      return true;
    }
    case BlockType::psd: {
      Eigen::LLT<Eigen::Matrix3d> llt(psd_matrix(z));
      if (llt.info() != Eigen::Success) return false;
      const auto& l = llt.matrixLLT();
      if (!(l(0, 0) > 0.0 && l(1, 1) > 0.0 && l(2, 2) > 0.0)) return false;
      phi = -2.0 * (std::log(l(0, 0)) + std::log(l(1, 1)) + std::log(l(2, 2)));
      return std::isfinite(phi);
    }
  }
  return false;
}

/// Gradient and Hessian of the barrier with respect to z.
void barrier_derivatives(Block& b) {
  const VectorXd& z = b.z;
  switch (b.type) {
    case BlockType::linear:
      b.gz(0) = -1.0 / z(0);
      b.Hz(0, 0) = 1.0 / (z(0) * z(0));
      break;
    case BlockType::soc: {
      const double nrm = z.tail(z.size() - 1).norm();
      const double d = (z(0) - nrm) * (z(0) + nrm);
      VectorXd qz = -z;
      qz(0) = z(0);
      b.gz = (-2.0 / d) * qz;
      b.Hz.noalias() = (4.0 / (d * d)) * qz * qz.transpose();
      b.Hz(0, 0) -= 2.0 / d;
      for (int i = 1; i < b.rows; ++i) b.Hz(i, i) += 2.0 / d;
      break;
    }
    case BlockType::rsoc: {
      const double d = 2.0 * z(0) * z(1) - z.tail(z.size() - 2).squaredNorm();
      VectorXd qz = -z;
      qz(0) = z(1);
      qz(1) = z(0);
      b.gz = (-2.0 / d) * qz;
      b.Hz.noalias() = (4.0 / (d * d)) * qz * qz.transpose();
      b.Hz(0, 1) -= 2.0 / d;
      b.Hz(1, 0) -= 2.0 / d;
      for (int i = 2; i < b.rows; ++i) b.Hz(i, i) += 2.0 / d;
      break;
    }
    case BlockType::psd: {
      const Eigen::Matrix3d w = psd_matrix(z).llt().solve(Eigen::Matrix3d::Identity());
      static constexpr int kI[6] = {0, 0, 0, 1, 1, 2};
      static constexpr int kJ[6] = {0, 1, 2, 1, 2, 2};
      std::array<Eigen::Matrix3d, 6> we;
      for (int a = 0; a < 6; ++a) {
        Eigen::Matrix3d e = Eigen::Matrix3d::Zero();
        e(kI[a], kJ[a]) = 1.0;
        e(kJ[a], kI[a]) = 1.0;
        we[a] = w * e;
        b.gz(a) = -we[a].trace();
      }
      for (int a = 0; a < 6; ++a)
        for (int c = a; c < 6; ++c) {
          const double h = (we[a].array() * we[c].transpose().array()).sum();
          b.Hz(a, c) = h;
          b.Hz(c, a) = h;
        }
      break;
    }
  }
}

/// Smallest positive root of qa a^2 + qb a + qc with qc > 0; infinity if none.
double first_positive_root(double qa, double qb, double qc) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (qa == 0.0) return qb < 0.0 ? -qc / qb : inf;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return inf;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (qb + std::copysign(sq, qb));
  double r1 = q / qa;
  double r2 = q != 0.0 ? qc / q : inf;
  double best = inf;
  for (double r : {r1, r2})
    if (r > 0.0) best = std::min(best, r);
  return best;
}

/// Largest step a with z + a dz still in the cone (infinity if unbounded).
/// PSD blocks report infinity and rely on the backtracking domain check.
double max_step(const Block& b) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const VectorXd& z = b.z;
  const VectorXd& d = b.dz;
  switch (b.type) {
    case BlockType::linear: return d(0) < 0.0 ? -z(0) / d(0) : inf;
    case BlockType::soc: {
      const int m = b.rows - 1;
      const double qa = d(0) * d(0) - d.tail(m).squaredNorm();
      const double qb = 2.0 * (z(0) * d(0) - z.tail(m).dot(d.tail(m)));
      const double nrm = z.tail(m).norm();
      const double qc = (z(0) - nrm) * (z(0) + nrm);
      return qc > 0.0 ? first_positive_root(qa, qb, qc) : inf;
    }
    case BlockType::rsoc: {
      const int m = b.rows - 2;
      const double qa = 2.0 * d(0) * d(1) - d.tail(m).squaredNorm();
      const double qb = 2.0 * (z(0) * d(1) + z(1) * d(0)) - 2.0 * z.tail(m).dot(d.tail(m));
      const double qc = 2.0 * z(0) * z(1) - z.tail(m).squaredNorm();
      return qc > 0.0 ? first_positive_root(qa, qb, qc) : inf;
    }
    case BlockType::psd: return inf;
  }
  return inf;
}

/// Smallest shift s such that z + s * e lies in the closed cone.
double required_shift(BlockType type, const VectorXd& z) {
  switch (type) {
    case BlockType::linear: return -z(0);
    case BlockType::soc: return z.tail(z.size() - 1).norm() - z(0);
    case BlockType::rsoc: {
      const double u = z(0), v = z(1);
      const double w2 = z.tail(z.size() - 2).squaredNorm();
      return 0.5 * (-(u + v) + std::sqrt((u - v) * (u - v) + 2.0 * w2));
    }
    case BlockType::psd: {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(psd_matrix(z), Eigen::EigenvaluesOnly);
      return -eig.eigenvalues()(0);
    }
  }
  return 0.0;
}

VectorXd shift_direction(BlockType type, int rows) {
  VectorXd e = VectorXd::Zero(rows);
  switch (type) {
    case BlockType::linear:
    case BlockType::soc: e(0) = 1.0; break;
    case BlockType::rsoc: e(0) = e(1) = 1.0; break;
    case BlockType::psd: e(0) = e(3) = e(5) = 1.0; break;
  }
  return e;
}

/// Barrier subproblem of one phase: minimize t * f0(x) + sum_b phi_b(x)
/// subject to Aeq x = beq, with f0(x) = cost' x - sum w log(x_j + c) + offset.
struct LogEntry {
  int j;
  double w;
  double shift;
};

struct Phase {
  int dim = 0;
  std::vector<Block> blocks;
  VectorXd cost;
  std::vector<LogEntry> logs;
  double offset = 0.0;
  MatrixXd aeq;
  VectorXd beq;
  double nu = 0.0;

  SpMat hess;
  std::vector<int> diag_slots;
  Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
  bool analyzed = false;
};

double objective(const Phase& p, const VectorXd& x) {
  double f = p.cost.dot(x) + p.offset;
  for (const auto& [j, w, c] : p.logs) f -= w * std::log(x(j) + c);
  return f;
}

void prepare_block(Block& b) {
  const int nl = static_cast<int>(b.vars.size());
  b.nu = cone_nu(b.type);
  b.z.resize(b.rows);
  b.dz.resize(b.rows);
  b.zt.resize(b.rows);
  b.gz.resize(b.rows);
  b.Hz.resize(b.rows, b.rows);
  b.tmp.resize(nl, b.rows);
  b.Hx.resize(nl, nl);
  b.gx.resize(nl);
}

void build_pattern(Phase& p) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < p.dim; ++i) trips.emplace_back(i, i, 0.0);
  for (const auto& b : p.blocks)
    for (std::size_t a = 0; a < b.vars.size(); ++a)
      for (std::size_t c = 0; c <= a; ++c) {
        const int r = std::max(b.vars[a], b.vars[c]);
        const int col = std::min(b.vars[a], b.vars[c]);
        trips.emplace_back(r, col, 0.0);
      }
  p.hess.resize(p.dim, p.dim);
  p.hess.setFromTriplets(trips.begin(), trips.end());
  p.hess.makeCompressed();
  auto slot_of = [&](int r, int col) {
    const int* inner = p.hess.innerIndexPtr();
    const int begin = p.hess.outerIndexPtr()[col];
    const int end = p.hess.outerIndexPtr()[col + 1];
    return static_cast<int>(std::lower_bound(inner + begin, inner + end, r) - inner);
  };
  p.diag_slots.resize(p.dim);
  for (int i = 0; i < p.dim; ++i) p.diag_slots[i] = slot_of(i, i);
  for (auto& b : p.blocks) {
    b.slots.clear();
    for (std::size_t a = 0; a < b.vars.size(); ++a)
      for (std::size_t c = 0; c <= a; ++c)
        b.slots.push_back(slot_of(std::max(b.vars[a], b.vars[c]), std::min(b.vars[a], b.vars[c])));
  }
  p.analyzed = false;
}

void update_z(Block& b, const VectorXd& x) {
  b.z = b.c;
  for (std::size_t j = 0; j < b.vars.size(); ++j) b.z += b.A.col(j) * x(b.vars[j]);
}

/// Evaluates all blocks at x; false if any lies outside its domain.
bool evaluate_blocks(Phase& p, const VectorXd& x) {
  for (auto& b : p.blocks) {
    update_z(b, x);
    if (!barrier_value(b.type, b.z, b.phi)) return false;
  }
  return true;
}

enum class CenterResult { centered, early_exit, limit, unbounded, stalled };

struct Budget {
  int used = 0;
  int limit = 0;
};

struct Newton {
  VectorXd g, dx;
  double decrement = 0.0;
};

bool newton_direction(Phase& p, const VectorXd& x, double t, Newton& nt) {
  nt.g = t * p.cost;
  double* hv = p.hess.valuePtr();
  std::fill(hv, hv + p.hess.nonZeros(), 0.0);
  for (const auto& [j, w, c] : p.logs) {
    const double arg = x(j) + c;
    nt.g(j) -= t * w / arg;
    hv[p.diag_slots[j]] += t * w / (arg * arg);
  }
  for (auto& b : p.blocks) {
    barrier_derivatives(b);
    b.gx.noalias() = b.A.transpose() * b.gz;
    b.tmp.noalias() = b.A.transpose() * b.Hz;
    b.Hx.noalias() = b.tmp * b.A;
    int k = 0;
    for (std::size_t a = 0; a < b.vars.size(); ++a) {
      nt.g(b.vars[a]) += b.gx(a);
      for (std::size_t c = 0; c <= a; ++c) hv[b.slots[k++]] += b.Hx(a, c);
    }
  }
  if (!p.analyzed) {
    p.llt.analyzePattern(p.hess);
    p.analyzed = true;
  }
  double max_diag = 0.0;
  for (int i = 0; i < p.dim; ++i) max_diag = std::max(max_diag, hv[p.diag_slots[i]]);
  p.llt.factorize(p.hess);
  double reg = 1e-14 * std::max(max_diag, 1.0);
  for (int attempt = 0; p.llt.info() != Eigen::Success && attempt < 8; ++attempt) {
    for (int i = 0; i < p.dim; ++i) hv[p.diag_slots[i]] += reg;
    p.llt.factorize(p.hess);
    reg *= 100.0;
  }
  if (p.llt.info() != Eigen::Success) return false;
  nt.dx = p.llt.solve(-nt.g);
  if (p.aeq.rows() > 0) {
    const MatrixXd hinv_at = p.llt.solve(MatrixXd(p.aeq.transpose()));
    const MatrixXd schur = p.aeq * hinv_at;
    const VectorXd nu = schur.ldlt().solve(p.aeq * nt.dx);
    nt.dx -= hinv_at * nu;
  }
  if (!nt.dx.allFinite()) return false;
  nt.decrement = -nt.g.dot(nt.dx);
  return true;
}

/// Change of t * f0 + barrier along dx, computed incrementally so the
/// comparison stays accurate when t * f0 is large.
bool merit_change(Phase& p, const VectorXd& x, const VectorXd& dx, double a, double t, double& delta) {
  double df = a * p.cost.dot(dx);
  for (const auto& [j, w, c] : p.logs) {
    const double r = a * dx(j) / (x(j) + c);
    if (!(r > -1.0)) return false;
    df -= w * std::log1p(r);
  }
  double dphi = 0.0;
  for (auto& b : p.blocks) {
    b.zt = b.z + a * b.dz;
    double phi_new = 0.0;
    if (!barrier_value(b.type, b.zt, phi_new)) return false;
    if (b.type == BlockType::linear)
      dphi -= std::log1p(a * b.dz(0) / b.z(0));
    else
      dphi += phi_new - b.phi;
  }
  delta = t * df + dphi;
  return std::isfinite(delta);
}

CenterResult center(Phase& p, VectorXd& x, double t, Budget& budget,
                    const std::function<bool(const VectorXd&)>& early_exit) {
  constexpr double kCenterTol = 1e-9;
  constexpr double kArmijo = 0.01;
  Newton nt;
  for (;;) {
    if (budget.used >= budget.limit) return CenterResult::limit;
    if (!newton_direction(p, x, t, nt)) return CenterResult::stalled;
    if (!(nt.decrement > 0.0) || 0.5 * nt.decrement <= kCenterTol) return CenterResult::centered;
    ++budget.used;

    for (auto& b : p.blocks) {
      b.dz.setZero();
      for (std::size_t j = 0; j < b.vars.size(); ++j) b.dz += b.A.col(j) * nt.dx(b.vars[j]);
    }
    // Fraction-to-boundary for linear rows; cones start from the largest
    // halving of that step that stays inside them.
    double a = 1.0;
    double cone_limit = std::numeric_limits<double>::infinity();
    for (const auto& b : p.blocks) {
      if (b.type == BlockType::linear)
        a = std::min(a, 0.99 * max_step(b));
      else
        cone_limit = std::min(cone_limit, max_step(b));
    }
    for (const auto& [j, w, c] : p.logs)
      if (nt.dx(j) < 0.0) a = std::min(a, -0.99 * (x(j) + c) / nt.dx(j));
    while (a >= cone_limit && a > 1e-20) a *= 0.5;
    double delta = 0.0;
    bool accepted = false;
    for (int k = 0; k < 80; ++k, a *= 0.5) {
      if (!merit_change(p, x, nt.dx, a, t, delta)) continue;
      if (delta <= -kArmijo * a * nt.decrement) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No measurable decrease: the iterate is centered to working precision.
      if (nt.decrement < 1e-3) return CenterResult::centered;
      return CenterResult::stalled;
    }
    x += a * nt.dx;
    for (auto& b : p.blocks) {
      b.z = b.z + a * b.dz;
      if (!barrier_value(b.type, b.z, b.phi)) return CenterResult::stalled;
    }
    if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > 1e15) return CenterResult::unbounded;
    if (early_exit && early_exit(x)) return CenterResult::early_exit;
  }
}

struct Compiled {
  int n = 0;
  VectorXd scale;
  std::vector<Block> blocks;  // phase II blocks, unshifted
  MatrixXd aeq;
  VectorXd beq;
  VectorXd cost;
  std::vector<LogEntry> logs;
  double offset = 0.0;
  bool trivially_infeasible = false;
  std::string infeasible_reason;
};

/// Adds a block from affine rows, dropping it when it has no variables.
void add_block(Compiled& cp, BlockType type, const std::vector<const AffineExpr*>& rows, int source,
               double tol) {
  std::vector<int> vars;
  for (const auto* r : rows)
    for (const auto& [idx, c] : r->terms()) vars.push_back(idx);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());

  Block b;
  b.type = type;
  b.rows = static_cast<int>(rows.size());
  b.vars = vars;
  b.source = source;
  b.A = MatrixXd::Zero(b.rows, static_cast<int>(vars.size()));
  b.c.resize(b.rows);
  for (int i = 0; i < b.rows; ++i) {
    b.c(i) = rows[i]->constant();
    for (const auto& [idx, c] : rows[i]->terms()) {
      const int local = static_cast<int>(std::lower_bound(vars.begin(), vars.end(), idx) - vars.begin());
      b.A(i, local) = c * cp.scale(idx);
    }
  }
  if (vars.empty()) {
    if (required_shift(type, b.c) > tol) {
      cp.trivially_infeasible = true;
      cp.infeasible_reason = "constant constraint violated";
    }
    return;
  }
  if (type == BlockType::soc || type == BlockType::rsoc) {
    // Constant entries of the norm side collapse into one row of equal norm.
    const int first = type == BlockType::soc ? 1 : 2;
    double const_sq = 0.0;
    int constant_rows = 0;
    for (int i = first; i < b.rows; ++i)
      if (b.A.row(i).isZero(0.0)) {
        const_sq += b.c(i) * b.c(i);
        ++constant_rows;
      }
    if (constant_rows > 1) {
      std::vector<int> rows_kept;
      for (int i = 0; i < b.rows; ++i)
        if (i < first || !b.A.row(i).isZero(0.0)) rows_kept.push_back(i);
      MatrixXd a(static_cast<int>(rows_kept.size()) + 1, b.A.cols());
      VectorXd c(a.rows());
      for (std::size_t r = 0; r < rows_kept.size(); ++r) {
        a.row(r) = b.A.row(rows_kept[r]);
        c(r) = b.c(rows_kept[r]);
      }
      a.row(a.rows() - 1).setZero();
      c(a.rows() - 1) = std::sqrt(const_sq);
      b.A = std::move(a);
      b.c = std::move(c);
      b.rows = static_cast<int>(b.A.rows());
    }
  }
  switch (type) {
    case BlockType::linear: {
      const double nrm = b.A.norm();
      b.A /= nrm;
      b.c /= nrm;
      b.row_norm = nrm;
      break;
    }
    case BlockType::soc:
    case BlockType::rsoc: {
      double nrm = 0.0;
      for (int i = 0; i < b.rows; ++i) nrm = std::max(nrm, b.A.row(i).norm());
      b.A /= nrm;
      b.c /= nrm;
      break;
    }
    case BlockType::psd: {
      static constexpr int kDiag[3] = {0, 3, 5};
      static constexpr int kI[6] = {0, 0, 0, 1, 1, 2};
      static constexpr int kJ[6] = {0, 1, 2, 1, 2, 2};
      double d[3];
      for (int i = 0; i < 3; ++i) {
        const double m = std::abs(b.c(kDiag[i])) + b.A.row(kDiag[i]).lpNorm<1>();
        d[i] = m > 0.0 ? 1.0 / std::sqrt(m) : 1.0;
      }
      for (int a = 0; a < 6; ++a) {
        const double f = d[kI[a]] * d[kJ[a]];
        b.A.row(a) *= f;
        b.c(a) *= f;
      }
      break;
    }
  }
  prepare_block(b);
  cp.blocks.push_back(std::move(b));
}

Compiled compile(const ConicProgram& prog, double tol) {
  Compiled cp;
  cp.n = prog.num_variables();
  cp.scale.resize(cp.n);
  for (int i = 0; i < cp.n; ++i) cp.scale(i) = prog.variables()[i].scale;

  std::vector<AffineExpr> bound_rows;
  bound_rows.reserve(2 * cp.n);
  for (int i = 0; i < cp.n; ++i) {
    const auto& v = prog.variables()[i];
    if (std::isfinite(v.lower)) bound_rows.push_back(AffineExpr(Var{i}) - v.lower);
    if (std::isfinite(v.upper)) bound_rows.push_back(AffineExpr(v.upper) - AffineExpr(Var{i}));
  }
  for (const auto& r : bound_rows) add_block(cp, BlockType::linear, {&r}, -1, tol);

  std::vector<const AffineExpr*> eq_rows;
  const auto& lin = prog.linear_constraints();
  for (std::size_t i = 0; i < lin.size(); ++i) {
    if (lin[i].relation == Relation::equal_zero)
      eq_rows.push_back(&lin[i].expr);
    else
      add_block(cp, BlockType::linear, {&lin[i].expr}, static_cast<int>(i), tol);
  }
  for (const auto& s : prog.soc_blocks()) {
    std::vector<const AffineExpr*> rows{&s.bound};
    for (const auto& e : s.entries) rows.push_back(&e);
    add_block(cp, BlockType::soc, rows, -1, tol);
  }
  for (const auto& r : prog.rotated_soc_blocks()) {
    std::vector<const AffineExpr*> rows{&r.u, &r.v};
    for (const auto& e : r.entries) rows.push_back(&e);
    add_block(cp, BlockType::rsoc, rows, -1, tol);
  }
  for (const auto& p : prog.psd_blocks()) {
    std::vector<const AffineExpr*> rows;
    for (const auto& e : p.matrix.upper()) rows.push_back(&e);
    add_block(cp, BlockType::psd, rows, -1, tol);
  }

  int p = 0;
  cp.aeq = MatrixXd::Zero(static_cast<int>(eq_rows.size()), cp.n);
  cp.beq = VectorXd::Zero(static_cast<int>(eq_rows.size()));
  for (const auto* r : eq_rows) {
    if (r->is_constant()) {
      if (std::abs(r->constant()) > tol) {
        cp.trivially_infeasible = true;
        cp.infeasible_reason = "constant equality violated";
      }
      continue;
    }
    for (const auto& [idx, c] : r->terms()) cp.aeq(p, idx) = c * cp.scale(idx);
    cp.beq(p) = -r->constant();
    const double nrm = cp.aeq.row(p).norm();
    cp.aeq.row(p) /= nrm;
    cp.beq(p) /= nrm;
    ++p;
  }
  cp.aeq.conservativeResize(p, cp.n);
  cp.beq.conservativeResize(p);

  // maximize objective  <=>  minimize -objective
  cp.cost = VectorXd::Zero(cp.n);
  for (const auto& [idx, c] : prog.linear_objective().terms()) cp.cost(idx) -= c * cp.scale(idx);
  cp.offset = -prog.linear_objective().constant();
  // w log(sc x' + c) = w log(sc) + w log(x' + c / sc)
  for (const auto& t : prog.log_terms()) {
    const int i = t.var.index;
    const double w = t.weight / std::numbers::ln2;
    cp.logs.push_back({i, w, t.offset / cp.scale(i)});
    cp.offset -= w * std::log(cp.scale(i));
  }
  return cp;
}

void project_onto_equalities(const MatrixXd& aeq, const VectorXd& beq, VectorXd& x) {
  if (aeq.rows() == 0) return;
  const MatrixXd gram = aeq * aeq.transpose();
  const VectorXd r = aeq * x.head(aeq.cols()) - beq;
  x.head(aeq.cols()) -= aeq.transpose() * gram.ldlt().solve(r);
}

constexpr double kPhase1Box = 1e2;
constexpr double kPhase1T0 = 1e3;

double total_nu(const Phase& p) {
  double nu = 0.0;
  for (const auto& b : p.blocks) nu += b.nu;
  return nu;
}

}  // namespace

SolveResult solve(const ConicProgram& program, const SolveOptions& opt) {
  const auto started = std::chrono::steady_clock::now();
  SolveResult res;
  auto finish = [&](StatusKind kind, std::string message) {
    res.status.kind = kind;
    res.status.message = std::move(message);
    res.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return res;
  };

  Compiled cp = compile(program, opt.tol_feas);
  if (cp.trivially_infeasible) return finish(StatusKind::infeasible, cp.infeasible_reason);
  const int n = cp.n;

  VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = program.variables()[i].initial / cp.scale(i);
  project_onto_equalities(cp.aeq, cp.beq, x);
  Budget budget{0, opt.max_newton_steps};

  // Phase I: minimize s over { z_b(x) + s e_b in cone } intersected with a box.
  double s0 = -kInf;
  for (auto& b : cp.blocks) {
    update_z(b, x);
    s0 = std::max(s0, required_shift(b.type, b.z));
  }
  if (s0 >= 0.0 || !std::isfinite(s0)) {
    Phase p1;
    p1.dim = n + 1;
    p1.blocks.reserve(cp.blocks.size() + 2 * n);
    for (const auto& src : cp.blocks) {
      Block b = src;
      b.vars.push_back(n);
      b.A.conservativeResize(Eigen::NoChange, b.A.cols() + 1);
      b.A.col(b.A.cols() - 1) = shift_direction(b.type, b.rows);
      prepare_block(b);
      p1.blocks.push_back(std::move(b));
    }
    for (int i = 0; i < n; ++i) {
      const double radius = kPhase1Box * std::max(1.0, std::abs(x(i)));
      for (double sign : {1.0, -1.0}) {
        Block b;
        b.type = BlockType::linear;
        b.rows = 1;
        b.vars = {i};
        b.A = MatrixXd::Constant(1, 1, sign);
        b.c = VectorXd::Constant(1, radius - sign * x(i));
        prepare_block(b);
        p1.blocks.push_back(std::move(b));
      }
    }
    p1.cost = VectorXd::Zero(n + 1);
    p1.cost(n) = 1.0;
    p1.aeq = MatrixXd::Zero(cp.aeq.rows(), n + 1);
    p1.aeq.leftCols(n) = cp.aeq;
    p1.beq = cp.beq;
    p1.nu = total_nu(p1);
    build_pattern(p1);

    VectorXd xs(n + 1);
    xs.head(n) = x;
    xs(n) = s0 + std::max(1.0, 0.1 * std::abs(s0));
    if (!evaluate_blocks(p1, xs)) return finish(StatusKind::numerical_failure, "phase I start outside domain");
    double t = kPhase1T0 / std::max(1.0, std::abs(xs(n)));
    // Accept only points that are interior for the unshifted blocks too, so
    // a marginally negative s cannot hand phase II a boundary point.
    std::vector<Block> probe = cp.blocks;
    auto found = [n, &probe](const VectorXd& v) {
      if (!(v(n) < 0.0)) return false;
      for (auto& b : probe) {
        update_z(b, v);
        double phi = 0.0;
        if (!barrier_value(b.type, b.z, phi)) return false;
      }
      return true;
    };
    bool feasible = false;
    for (;;) {
      const CenterResult r = center(p1, xs, t, budget, found);
      res.phase1_steps = budget.used;
      if (r == CenterResult::early_exit) {
        feasible = true;
        break;
      }
      if (r == CenterResult::limit) return finish(StatusKind::iteration_limit, "phase I step limit");
      if (r == CenterResult::unbounded) return finish(StatusKind::numerical_failure, "phase I diverged");
      const double s = xs(n);
      if (opt.verbose) std::fprintf(stderr, "  phase I t=%.3e s=%.6e steps=%d\n", t, s, budget.used);
      if (r == CenterResult::stalled) {
        if (s - p1.nu / t > 0.0) return finish(StatusKind::infeasible, "phase I certificate");
        return finish(StatusKind::numerical_failure, "phase I stalled at s=" + std::to_string(s));
      }
      if (s - p1.nu / t > 0.0) return finish(StatusKind::infeasible, "phase I lower bound on s is positive");
      if (p1.nu / t < 1e-10) return finish(StatusKind::infeasible, "no strictly feasible point");
      t *= opt.barrier_growth;
    }
    if (!feasible) return finish(StatusKind::infeasible, "phase I failed");
    x = xs.head(n);
  }

  // Phase II: central path for the actual objective.
  Phase p2;
  p2.dim = n;
  p2.blocks = std::move(cp.blocks);
  p2.cost = cp.cost;
  p2.logs = cp.logs;
  p2.offset = cp.offset;
  p2.aeq = cp.aeq;
  p2.beq = cp.beq;
  p2.nu = total_nu(p2);
  build_pattern(p2);
  if (!evaluate_blocks(p2, x)) return finish(StatusKind::numerical_failure, "phase II start not interior");
  for (const auto& [j, w, c] : p2.logs)
    if (!(x(j) + c > 0.0)) return finish(StatusKind::numerical_failure, "log term argument not positive");

  auto unscaled = [&](const VectorXd& v) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = v(i) * cp.scale(i);
    return out;
  };

  const double nu = std::max(p2.nu, 1.0);
  double t = nu / std::max(1.0, std::abs(objective(p2, x)));
  for (;;) {
    const CenterResult r = center(p2, x, t, budget, nullptr);
    res.newton_steps = budget.used - res.phase1_steps;
    const double f = objective(p2, x);
    res.x = unscaled(x);
    res.objective_estimate = -f;
    if (opt.verbose)
      std::fprintf(stderr, "  phase II t=%.3e obj=%.9e gap=%.3e steps=%d\n", t, -f, nu / t, budget.used);
    if (r == CenterResult::limit) return finish(StatusKind::iteration_limit, "Newton step limit");
    if (r == CenterResult::unbounded || f < -1e15) return finish(StatusKind::unbounded, "objective diverged");
    if (r == CenterResult::stalled) {
      return finish(StatusKind::numerical_failure,
                    "centering stalled at gap " + std::to_string(nu / t) + " obj " + std::to_string(-f));
    }
    if (nu / t <= opt.tol_gap * std::max(1.0, std::abs(f))) break;
    t *= opt.barrier_growth;
  }

  res.status.objective = program.objective_value(res.x);
  std::vector<double> duals(program.linear_constraints().size(), 0.0);
  for (const auto& b : p2.blocks)
    if (b.source >= 0) duals[b.source] = 1.0 / (t * b.z(0) * b.row_norm);
  res.status.duals = std::move(duals);
  return finish(StatusKind::optimal, "");
}

}  // namespace uavsec::conic
