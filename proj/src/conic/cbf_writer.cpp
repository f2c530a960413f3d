#include "uavsec/conic/cbf_writer.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace uavsec::conic {

namespace {

struct Entry {
  int row;
  int col;
  double value;
};

struct Rows {
  std::vector<Entry> a;
  std::vector<std::pair<int, double>> b;
  std::vector<std::pair<std::string, int>> cones;
  int count = 0;

  void push(const AffineExpr& e) {
    for (const auto& [idx, c] : e.terms()) a.push_back({count, idx, c});
    if (e.constant() != 0.0) b.emplace_back(count, e.constant());
    ++count;
  }
  void cone(const std::string& kind, int dim) {
    if (!cones.empty() && cones.back().first == kind && (kind == "L+" || kind == "L="))
      cones.back().second += dim;
    else
      cones.emplace_back(kind, dim);
  }
};

}  // namespace

void write_cbf(const ConicProgram& program, std::ostream& out) {
  out.precision(17);
  const int n = program.num_variables();
  const int n_log = static_cast<int>(program.log_terms().size());
  const int n_total = n + n_log;

  Rows rows;
  for (int i = 0; i < n; ++i) {
    const auto& v = program.variables()[i];
    if (std::isfinite(v.lower)) {
      rows.push(AffineExpr(Var{i}) - v.lower);
      rows.cone("L+", 1);
    }
    if (std::isfinite(v.upper)) {
      rows.push(AffineExpr(v.upper) - AffineExpr(Var{i}));
      rows.cone("L+", 1);
    }
  }
  for (const auto& l : program.linear_constraints()) {
    rows.push(l.expr);
    rows.cone(l.relation == Relation::equal_zero ? "L=" : "L+", 1);
  }
  for (const auto& s : program.soc_blocks()) {
    rows.push(s.bound);
    for (const auto& e : s.entries) rows.push(e);
    rows.cone("Q", s.dimension());
  }
  for (const auto& r : program.rotated_soc_blocks()) {
    rows.push(r.u);
    rows.push(r.v);
    for (const auto& e : r.entries) rows.push(e);
    rows.cone("QR", 2 + static_cast<int>(r.entries.size()));
  }
  for (int j = 0; j < n_log; ++j) {
    // (x, 1, r) in EXP:  x >= exp(r)
    rows.push(AffineExpr(program.log_terms()[j].var) + program.log_terms()[j].offset);
    rows.push(AffineExpr(1.0));
    rows.push(AffineExpr(Var{n + j}));
    rows.cone("EXP", 3);
  }

  out << "VER\n3\n\nOBJSENSE\nMAX\n\n";
  out << "VAR\n" << n_total << " 1\nF " << n_total << "\n\n";
  out << "CON\n" << rows.count << " " << rows.cones.size() << "\n";
  for (const auto& [kind, dim] : rows.cones) out << kind << " " << dim << "\n";
  out << "\n";

  const auto& psd = program.psd_blocks();
  if (!psd.empty()) {
    out << "PSDCON\n" << psd.size() << "\n";
    for (std::size_t i = 0; i < psd.size(); ++i) out << "3\n";
    out << "\n";
  }

  std::vector<std::pair<int, double>> obj;
  for (const auto& [idx, c] : program.linear_objective().terms()) obj.emplace_back(idx, c);
  for (int j = 0; j < n_log; ++j) obj.emplace_back(n + j, program.log_terms()[j].weight / std::numbers::ln2);
  out << "OBJACOORD\n" << obj.size() << "\n";
  for (const auto& [j, c] : obj) out << j << " " << c << "\n";
  out << "\n";
  if (program.linear_objective().constant() != 0.0)
    out << "OBJBCOORD\n" << program.linear_objective().constant() << "\n\n";

  out << "ACOORD\n" << rows.a.size() << "\n";
  for (const auto& e : rows.a) out << e.row << " " << e.col << " " << e.value << "\n";
  out << "\nBCOORD\n" << rows.b.size() << "\n";
  for (const auto& [r, v] : rows.b) out << r << " " << v << "\n";
  out << "\n";

  if (!psd.empty()) {
    std::ostringstream h, d;
    h.precision(17);
    d.precision(17);
    int nh = 0, nd = 0;
    for (std::size_t k = 0; k < psd.size(); ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j <= i; ++j) {
          const AffineExpr& e = psd[k].matrix(i, j);
          for (const auto& [idx, c] : e.terms()) {
            h << k << " " << idx << " " << i << " " << j << " " << c << "\n";
            ++nh;
          }
          if (e.constant() != 0.0) {
            d << k << " " << i << " " << j << " " << e.constant() << "\n";
            ++nd;
          }
        }
    out << "HCOORD\n" << nh << "\n" << h.str() << "\n";
    out << "DCOORD\n" << nd << "\n" << d.str() << "\n";
  }
}

void write_cbf_file(const ConicProgram& program, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  write_cbf(program, f);
}

}  // namespace uavsec::conic
