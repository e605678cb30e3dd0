#pragma once

/// Level-n graphs, their weighted energy forms, and Schur-complement traces.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gasket/conductance.hpp"
#include "gasket/error.hpp"
#include "gasket/format.hpp"
#include "gasket/lattice.hpp"

namespace gasket {

/// Edge {F_w(p_i), F_w(p_j)} of cell w; label is the opposite corner k, {i,j,k} = {0,1,2}.
struct Edge {
  std::size_t u;
  std::size_t v;
  std::size_t cell;
  int label;
};

struct LevelGraph {
  Variant variant = Variant::standard;
  int level = 0;
  VertexIndex vertices{0};
  /// cells[w][k] is the id of F_w(p_k).
  std::vector<std::array<std::size_t, 3>> cells;
  std::vector<Edge> edges;

  std::size_t size() const { return vertices.size(); }
  const std::array<std::size_t, 3>& boundary() const { return vertices.boundary(); }

  /// Ids of V_m (m <= level) in V_m's own id order.
  std::vector<std::size_t> coarse_ids(const VertexIndex& coarse) const {
    std::vector<std::size_t> out;
    out.reserve(coarse.size());
    for (const auto& p : coarse.points()) out.push_back(vertices.id(p));
    return out;
  }
};

inline LevelGraph build_graph(Variant variant, int n, int guard = kDefaultLevelGuard) {
  LevelGraph g;
  g.variant = variant;
  g.level = n;
  g.vertices = VertexIndex(n);
  const auto corners = cell_corners(ifs(variant), n, guard);
  g.cells.reserve(corners.size());
  g.edges.reserve(3 * corners.size());
  for (std::size_t w = 0; w < corners.size(); ++w) {
    std::array<std::size_t, 3> ids{};
    for (std::size_t k = 0; k < 3; ++k) ids[k] = g.vertices.insert(corners[w][k]);
    g.cells.push_back(ids);
    g.edges.push_back({ids[1], ids[2], w, 0});
    g.edges.push_back({ids[0], ids[2], w, 1});
    g.edges.push_back({ids[0], ids[1], w, 2});
  }
  g.vertices.set_boundary();
  return g;
}

/// E(u) = u^T L u, with L the weighted graph Laplacian. Each unordered edge
/// contributes c (u(p) - u(q))^2 once.
struct EnergyForm {
  Eigen::SparseMatrix<double> laplacian;

  std::size_t size() const { return static_cast<std::size_t>(laplacian.rows()); }

  double energy(const Eigen::VectorXd& u) const {
    if (static_cast<std::size_t>(u.size()) != size()) {
      throw std::invalid_argument("EnergyForm::energy: dimension mismatch");
    }
    return u.dot(laplacian * u);
  }

  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(laplacian); }
};

/// Stamps conductance t[label] on every edge. Parallel edges add.
inline EnergyForm assemble_energy(const LevelGraph& g, const ConductanceTriple& t) {
  std::vector<Eigen::Triplet<double>> stamps;
  stamps.reserve(4 * g.edges.size());
  for (const Edge& e : g.edges) {
    const double c = t[static_cast<std::size_t>(e.label)];
    const auto u = static_cast<Eigen::Index>(e.u);
    const auto v = static_cast<Eigen::Index>(e.v);
    stamps.emplace_back(u, u, c);
    stamps.emplace_back(v, v, c);
    stamps.emplace_back(u, v, -c);
    stamps.emplace_back(v, u, -c);
  }
  const auto n = static_cast<Eigen::Index>(g.size());
  EnergyForm f;
  f.laplacian.resize(n, n);
  f.laplacian.setFromTriplets(stamps.begin(), stamps.end());
  f.laplacian.makeCompressed();
  return f;
}

namespace detail {

struct Partition {
  std::vector<std::size_t> keep;
  std::vector<std::size_t> interior;
  std::vector<Eigen::Index> slot;  // position within keep (>=0) or interior (-1 - pos)
};

inline Partition partition(std::size_t n, std::span<const std::size_t> keep) {
  Partition p;
  p.slot.assign(n, 0);
  std::vector<bool> kept(n, false);
  for (std::size_t id : keep) {
    if (id >= n) throw std::out_of_range("trace: vertex id out of range");
    if (kept[id]) throw std::invalid_argument("trace: duplicate vertex id");
    kept[id] = true;
    p.slot[id] = static_cast<Eigen::Index>(p.keep.size());
    p.keep.push_back(id);
  }
  for (std::size_t id = 0; id < n; ++id) {
    if (!kept[id]) {
      p.slot[id] = -1 - static_cast<Eigen::Index>(p.interior.size());
      p.interior.push_back(id);
    }
  }
  return p;
}

struct Blocks {
  Eigen::SparseMatrix<double> ii;
  Eigen::SparseMatrix<double> ik;
  Eigen::MatrixXd kk;
};

inline Blocks split(const Eigen::SparseMatrix<double>& L, const Partition& p) {
  const auto ni = static_cast<Eigen::Index>(p.interior.size());
  const auto nk = static_cast<Eigen::Index>(p.keep.size());
  std::vector<Eigen::Triplet<double>> ii, ik;
  Blocks b;
  b.kk = Eigen::MatrixXd::Zero(nk, nk);
  for (Eigen::Index col = 0; col < L.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(L, col); it; ++it) {
      const Eigen::Index r = p.slot[static_cast<std::size_t>(it.row())];
      const Eigen::Index c = p.slot[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) {
        b.kk(r, c) += it.value();
      } else if (r < 0 && c < 0) {
        ii.emplace_back(-1 - r, -1 - c, it.value());
      } else if (r < 0) {
        ik.emplace_back(-1 - r, c, it.value());
      }
    }
  }
  b.ii.resize(ni, ni);
  b.ii.setFromTriplets(ii.begin(), ii.end());
  b.ik.resize(ni, nk);
  b.ik.setFromTriplets(ik.begin(), ik.end());
  return b;
}

using InteriorSolver = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

inline void factor_interior(InteriorSolver& solver, const Eigen::SparseMatrix<double>& ii) {
  solver.compute(ii);
  if (solver.info() != Eigen::Success) throw SingularInterior("interior factorization failed");
  const Eigen::VectorXd d = solver.vectorD();
  const double top = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    if (!(d[k] > 1e-13 * top)) {
      throw SingularInterior("interior block is not positive definite (disconnected input?)");
    }
  }
}

}  // namespace detail

/// Schur complement onto `keep` (rows/cols in the order given):
/// L_kk - L_ki L_ii^{-1} L_ik. Its quadratic form is the minimum of the
/// original form over all extensions into the complement.
inline EnergyForm trace_to_subset(const EnergyForm& f, std::span<const std::size_t> keep) {
  if (keep.empty()) throw std::invalid_argument("trace_to_subset: keep set is empty");
  const auto p = detail::partition(f.size(), keep);
  const auto blocks = detail::split(f.laplacian, p);
  Eigen::MatrixXd schur = blocks.kk;
  if (!p.interior.empty()) {
    detail::InteriorSolver solver;
    detail::factor_interior(solver, blocks.ii);
    const Eigen::MatrixXd rhs = Eigen::MatrixXd(blocks.ik);
    const Eigen::MatrixXd x = solver.solve(rhs);
    schur.noalias() -= blocks.ik.transpose() * x;
  }
  // Symmetrize away round-off.
  schur = 0.5 * (schur + schur.transpose()).eval();
  EnergyForm out;
  out.laplacian = schur.sparseView(1.0, 0.0);
  out.laplacian.makeCompressed();
  return out;
}

/// Energy-minimizing extension of boundary values (boundary ids may be any subset).
inline Eigen::VectorXd harmonic_extension(const EnergyForm& f,
                                          std::span<const std::size_t> boundary,
                                          std::span<const double> values) {
  if (boundary.empty()) throw std::invalid_argument("harmonic_extension: no boundary ids");
  if (boundary.size() != values.size()) {
    throw std::invalid_argument("harmonic_extension: ids and values differ in length");
  }
  const auto p = detail::partition(f.size(), boundary);
  Eigen::VectorXd u(static_cast<Eigen::Index>(f.size()));
  Eigen::VectorXd ub(static_cast<Eigen::Index>(boundary.size()));
  for (std::size_t k = 0; k < boundary.size(); ++k) {
    ub[static_cast<Eigen::Index>(k)] = values[k];
    u[static_cast<Eigen::Index>(boundary[k])] = values[k];
  }
  if (p.interior.empty()) return u;
  const auto blocks = detail::split(f.laplacian, p);
  detail::InteriorSolver solver;
  detail::factor_interior(solver, blocks.ii);
  const Eigen::VectorXd ui = solver.solve(-(blocks.ik * ub));
  for (std::size_t k = 0; k < p.interior.size(); ++k) {
    u[static_cast<Eigen::Index>(p.interior[k])] = ui[static_cast<Eigen::Index>(k)];
  }
  return u;
}

/// Extends a function on V_m to V_n (n >= m) harmonically for the form f on V_n.
inline Eigen::VectorXd extend_from_coarse(const EnergyForm& fine, const LevelGraph& fine_graph,
                                          const VertexIndex& coarse,
                                          std::span<const double> coarse_values) {
  const auto ids = fine_graph.coarse_ids(coarse);
  return harmonic_extension(fine, ids, coarse_values);
}

/// 2^n sum_w [ (u_w(p2) - u_w(p3))^2 + (3/4)^n ((u_w(p1) - u_w(p2))^2 + (u_w(p1) - u_w(p3))^2) ],
/// the level-n term of the two-scale energy equivalent.
inline double two_scale_estimate(const LevelGraph& g, const Eigen::VectorXd& u) {
  if (static_cast<std::size_t>(u.size()) != g.size()) {
    throw std::invalid_argument("two_scale_estimate: dimension mismatch");
  }
  double strong = 0.0, weak = 0.0;
  for (const auto& cell : g.cells) {
    const double u1 = u[static_cast<Eigen::Index>(cell[0])];
    const double u2 = u[static_cast<Eigen::Index>(cell[1])];
    const double u3 = u[static_cast<Eigen::Index>(cell[2])];
    strong += (u2 - u3) * (u2 - u3);
    weak += (u1 - u2) * (u1 - u2) + (u1 - u3) * (u1 - u3);
  }
  return std::ldexp(1.0, g.level) * (strong + std::pow(0.75, g.level) * weak);
}

/// Deviation of `actual` from `expected`: max relative error over entries that
/// are nonzero in `expected`, and max absolute value over the rest.
struct FormDeviation {
  double max_relative = 0.0;
  double max_absolute_on_zeros = 0.0;
};

inline FormDeviation compare_forms(const EnergyForm& expected, const EnergyForm& actual) {
  if (expected.size() != actual.size()) throw std::invalid_argument("compare_forms: size mismatch");
  const Eigen::MatrixXd e = expected.dense();
  const Eigen::MatrixXd a = actual.dense();
  FormDeviation d;
  for (Eigen::Index j = 0; j < e.cols(); ++j) {
    for (Eigen::Index i = 0; i < e.rows(); ++i) {
      if (e(i, j) != 0.0) {
        d.max_relative = std::max(d.max_relative, std::abs(a(i, j) - e(i, j)) / std::abs(e(i, j)));
      } else {
        d.max_absolute_on_zeros = std::max(d.max_absolute_on_zeros, std::abs(a(i, j)));
      }
    }
  }
  return d;
}

/// Trace of the level-n form onto V_{n-1} against the assembled level-(n-1) form.
struct TraceCheck {
  int level;
  FormDeviation deviation;
};

inline TraceCheck trace_check(const SequenceReport& seq, int n, int guard = kDefaultLevelGuard) {
  if (n < 1) throw std::invalid_argument("trace_check: need n >= 1");
  const LevelGraph fine = build_graph(seq.variant, n, guard);
  const LevelGraph coarse = build_graph(seq.variant, n - 1, guard);
  const EnergyForm fine_form = assemble_energy(fine, seq.conductance(n));
  const EnergyForm coarse_form = assemble_energy(coarse, seq.conductance(n - 1));
  const auto keep = fine.coarse_ids(coarse.vertices);
  return {n, compare_forms(coarse_form, trace_to_subset(fine_form, keep))};
}

/// Harmonic extension of the boundary data (1, 0, 0) to level n.
struct HarmonicReport {
  Variant variant = Variant::standard;
  int level = 0;
  ConductanceTriple level1{1.0, 1.0, 1.0};
  /// u at the level-1 junctions p12, p13, p23.
  std::array<double, 3> junctions{};
  /// Closed form (a1+b1, a1+b1, b1)/(3 a1 + 2 b1); standard variant with b1 = c1 only.
  std::optional<std::array<double, 3>> predicted;
  double energy = 0.0;       ///< E_n of the extension
  double boundary_energy = 0.0;  ///< E_0 of the boundary data
  LevelGraph graph;
  Eigen::VectorXd values;
};

inline HarmonicReport harmonic_probe(const SequenceReport& seq, int n) {
  if (n < 1) throw std::invalid_argument("harmonic_probe: need n >= 1");
  HarmonicReport r;
  r.variant = seq.variant;
  r.level = n;
  r.level1 = seq.conductance(1);
  r.graph = build_graph(seq.variant, n);
  const EnergyForm f = assemble_energy(r.graph, seq.conductance(n));
  const auto b = r.graph.boundary();
  const std::array<std::size_t, 3> ids{b[0], b[1], b[2]};
  const std::array<double, 3> vals{1.0, 0.0, 0.0};
  r.values = harmonic_extension(f, ids, vals);
  r.energy = f.energy(r.values);
  const ConductanceTriple& t0 = seq.conductance(0);
  r.boundary_energy = t0.b() + t0.c();
  const std::array<LatticePoint, 3> mid{LatticePoint{1, 0, 1}, LatticePoint{0, 1, 1},
                                        LatticePoint{1, 1, 1}};
  for (int k = 0; k < 3; ++k) {
    r.junctions[k] = r.values(static_cast<Eigen::Index>(r.graph.vertices.id(mid[k])));
  }
  const double a1 = r.level1.a(), b1 = r.level1.b(), c1 = r.level1.c();
  if (seq.variant == Variant::standard && std::abs(b1 - c1) <= 1e-12 * std::max(b1, c1)) {
    const double d = 3.0 * a1 + 2.0 * b1;
    r.predicted = std::array<double, 3>{(a1 + b1) / d, (a1 + b1) / d, b1 / d};
  }
  return r;
}

/// "row col value" per line, 0-based ids, column-major order, 17 significant digits.
inline void write_coordinate(std::ostream& os, const EnergyForm& f) {
  for (Eigen::Index col = 0; col < f.laplacian.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(f.laplacian, col); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
    }
  }
}

}  // namespace gasket
