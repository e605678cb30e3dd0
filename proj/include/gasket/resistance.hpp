#pragma once

/// Effective resistances on the level graphs and the metric-scaling probes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gasket/conductance.hpp"
#include "gasket/error.hpp"
#include "gasket/graphform.hpp"
#include "gasket/lattice.hpp"

namespace gasket {

/// R(x,y) = 1/g where the trace of f onto {x,y} is g (u(x) - u(y))^2.
inline double effective_resistance(const EnergyForm& f, std::size_t x, std::size_t y) {
  if (x == y) throw std::invalid_argument("effective_resistance: need x != y");
  const std::array<std::size_t, 2> keep{x, y};
  const EnergyForm two = trace_to_subset(f, keep);
  const double g = -two.dense()(0, 1);
  if (!(g > 0.0)) throw SingularInterior("effective_resistance: nonpositive traced conductance");
  return 1.0 / g;
}

/// Same quantity by one grounded solve: L with y removed, L v = e_x, R = v_x.
inline double effective_resistance_solve(const EnergyForm& f, std::size_t x, std::size_t y) {
  if (x == y) throw std::invalid_argument("effective_resistance: need x != y");
  const std::array<std::size_t, 1> ground{y};
  const auto p = detail::partition(f.size(), ground);
  const auto blocks = detail::split(f.laplacian, p);
  detail::InteriorSolver solver;
  detail::factor_interior(solver, blocks.ii);
  const auto slot = static_cast<Eigen::Index>(-1 - p.slot[x]);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(blocks.ii.rows());
  e[slot] = 1.0;
  return solver.solve(e)[slot];
}

/// All-pairs effective resistance from one factorization: the Green matrix of
/// the Laplacian grounded at vertex 0. Immutable after construction.
class ResistanceOracle {
 public:
  explicit ResistanceOracle(const EnergyForm& f, std::size_t guard = 6000) : n_(f.size()) {
    if (n_ > guard) throw DimensionGuard(n_, guard);
    green_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    if (n_ < 2) return;
    const std::array<std::size_t, 1> ground{0};
    const auto p = detail::partition(n_, ground);
    const auto blocks = detail::split(f.laplacian, p);
    detail::InteriorSolver solver;
    detail::factor_interior(solver, blocks.ii);
    const auto m = blocks.ii.rows();
    const Eigen::MatrixXd inv = solver.solve(Eigen::MatrixXd::Identity(m, m));
    // Interior ordering is ids 1..n-1 in order.
    green_.bottomRightCorner(m, m) = inv;
  }

  std::size_t size() const { return n_; }

  double operator()(std::size_t x, std::size_t y) const {
    if (x >= n_ || y >= n_) throw std::out_of_range("ResistanceOracle: id out of range");
    if (x == y) return 0.0;
    const auto i = static_cast<Eigen::Index>(x);
    const auto j = static_cast<Eigen::Index>(y);
    return green_(i, i) + green_(j, j) - 2.0 * green_(i, j);
  }

 private:
  std::size_t n_;
  Eigen::MatrixXd green_;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = slope x + intercept.
inline LinearFit least_squares(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw InsufficientData("least_squares: need at least two points");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientData("least_squares: degenerate abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx, xs.size()};
}

enum class PairFamily { strong, weak };

inline const char* to_string(PairFamily f) { return f == PairFamily::strong ? "strong" : "weak"; }

struct ResistanceRow {
  int scale;  ///< the pair is an edge of a scale-level cell
  PairFamily family;
  std::size_t u;
  std::size_t v;
  LatticePoint pu;
  LatticePoint pv;
  double distance;
  double resistance;
};

/// min/max of R * 2^scale for one family at one scale.
struct ScaleBracket {
  int scale;
  PairFamily family;
  double min_scaled;
  double max_scaled;
};

struct ResistanceTable {
  Variant variant = Variant::standard;
  int level = 0;
  ConductanceTriple data{1.0, 1.0, 1.0};
  std::vector<ResistanceRow> rows;
  std::vector<ScaleBracket> brackets;
  /// max over scales of max(R 2^n) / min over scales of min(R 2^n), per family.
  double strong_bracket_ratio = 0.0;
  double weak_bracket_ratio = 0.0;
  /// min over all rows of R 2^scale: the constant c in R >= c 2^{-n}.
  double lower_constant = 0.0;
  LinearFit slope_all;
  LinearFit slope_strong;
  LinearFit slope_weak;
};

inline constexpr std::size_t kPairsPerScale = 64;

/// Effective resistance across edges of n-cells, n = 0..n_max, evaluated in the
/// level-n_max graph. Up to kPairsPerScale pairs per (scale, family), in id order.
inline ResistanceTable resistance_scaling(Variant variant, const ConductanceTriple& t0, int n_max,
                                          std::size_t pairs_per_scale = kPairsPerScale) {
  const SequenceReport seq = conductance_sequence(t0, n_max, variant);
  if (seq.classification == DataClass::incompatible) {
    throw std::invalid_argument("resistance_scaling: initial data admits no compatible sequence");
  }
  const LevelGraph top = build_graph(variant, n_max);
  const ResistanceOracle R(assemble_energy(top, seq.conductance(n_max)));
  const std::size_t strong = classify(t0.values()).strong;

  ResistanceTable table;
  table.variant = variant;
  table.level = n_max;
  table.data = t0;
  table.lower_constant = std::numeric_limits<double>::infinity();

  std::array<double, 2> lo{std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
  std::array<double, 2> hi{0.0, 0.0};
  std::array<std::vector<double>, 3> lx, ly;

  for (int n = 0; n <= n_max; ++n) {
    const LevelGraph g = build_graph(variant, n);
    std::array<std::vector<std::pair<std::size_t, std::size_t>>, 2> pairs;
    for (const Edge& e : g.edges) {
      const bool is_strong = static_cast<std::size_t>(e.label) == strong &&
                             seq.classification == DataClass::asymmetric;
      const auto u = top.vertices.id(g.vertices.point(e.u));
      const auto v = top.vertices.id(g.vertices.point(e.v));
      pairs[is_strong ? 0 : 1].emplace_back(std::min(u, v), std::max(u, v));
    }
    for (int fam = 0; fam < 2; ++fam) {
      auto& list = pairs[static_cast<std::size_t>(fam)];
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
      if (list.size() > pairs_per_scale) list.resize(pairs_per_scale);
      if (list.empty()) continue;
      double bmin = std::numeric_limits<double>::infinity(), bmax = 0.0;
      const double scale = std::ldexp(1.0, n);
      for (const auto& [u, v] : list) {
        const LatticePoint pu = top.vertices.point(u);
        const LatticePoint pv = top.vertices.point(v);
        const double r = R(u, v);
        const double d = distance(pu, pv);
        const auto family = fam == 0 ? PairFamily::strong : PairFamily::weak;
        table.rows.push_back({n, family, u, v, pu, pv, d, r});
        bmin = std::min(bmin, r * scale);
        bmax = std::max(bmax, r * scale);
        for (int s : {2, fam}) {
          lx[static_cast<std::size_t>(s)].push_back(std::log(d));
          ly[static_cast<std::size_t>(s)].push_back(std::log(r));
        }
      }
      const auto family = fam == 0 ? PairFamily::strong : PairFamily::weak;
      table.brackets.push_back({n, family, bmin, bmax});
      lo[static_cast<std::size_t>(fam)] = std::min(lo[static_cast<std::size_t>(fam)], bmin);
      hi[static_cast<std::size_t>(fam)] = std::max(hi[static_cast<std::size_t>(fam)], bmax);
      table.lower_constant = std::min(table.lower_constant, bmin);
    }
  }
  table.strong_bracket_ratio = lo[0] < std::numeric_limits<double>::infinity() ? hi[0] / lo[0] : 0.0;
  table.weak_bracket_ratio = hi[1] / lo[1];
  table.slope_all = least_squares(lx[2], ly[2]);
  if (lx[0].size() >= 2) table.slope_strong = least_squares(lx[0], ly[0]);
  table.slope_weak = least_squares(lx[1], ly[1]);
  return table;
}

struct DiameterReport {
  std::vector<double> weak_conductance;  ///< b_k, k = 0..n_max
  std::vector<double> partial_sums;      ///< sum_{j<=k} 1/b_j
  std::vector<double> ratios;            ///< b_{k-1}/b_k, k = 1..n_max
  double max_ratio = 0.0;
  double limit = 0.0;                    ///< last partial sum
  double bound = 0.0;                    ///< b_0^{-1} / (1 - 13/15)
};

/// Chain bound on sup R(x, p1): sum of the weak cell resistances 1/b_k.
inline DiameterReport diameter_bound(const ConductanceTriple& t0, int n_max) {
  const Classification cls = classify(t0.values());
  if (cls.kind != DataClass::asymmetric) {
    throw std::invalid_argument("diameter_bound: needs asymmetric data (one strong, two equal weak)");
  }
  const SequenceReport seq = conductance_sequence(t0, n_max, Variant::standard);
  const std::size_t weak = (cls.strong + 1) % 3;
  DiameterReport rep;
  double sum = 0.0;
  for (int k = 0; k <= n_max; ++k) {
    const double b = seq.conductance(k)[weak];
    rep.weak_conductance.push_back(b);
    sum += 1.0 / b;
    rep.partial_sums.push_back(sum);
    if (k > 0) {
      const double r = rep.weak_conductance[static_cast<std::size_t>(k - 1)] / b;
      rep.ratios.push_back(r);
      rep.max_ratio = std::max(rep.max_ratio, r);
    }
  }
  rep.limit = sum;
  rep.bound = (1.0 / rep.weak_conductance.front()) / (1.0 - 13.0 / 15.0);
  return rep;
}

/// Per-level id sets, in a fixed level-N graph, of U_n = {F_w(p2), F_w(p3)} and
/// the cut points W_n = {F_w(p1)} over words |w| = n.
struct CutPointSet {
  std::vector<std::vector<std::size_t>> u;
  std::vector<std::vector<std::size_t>> w;
  std::vector<std::size_t> w_raw_count;  ///< 3^n images before deduplication
};

inline CutPointSet build_cut_points(const LevelGraph& top) {
  CutPointSet s;
  const Ifs maps = ifs(top.variant);
  for (int n = 0; n <= top.level; ++n) {
    std::set<std::size_t> u, w;
    const auto cells = cell_corners(maps, n);
    for (const auto& c : cells) {
      w.insert(top.vertices.id(c[0]));
      u.insert(top.vertices.id(c[1]));
      u.insert(top.vertices.id(c[2]));
    }
    s.u.emplace_back(u.begin(), u.end());
    s.w.emplace_back(w.begin(), w.end());
    s.w_raw_count.push_back(cells.size());
  }
  return s;
}

struct CutPointLevel {
  int level;
  std::size_t cut_points;
  double min_cut_pair;    ///< min R over distinct pairs of W_n
  double min_cut_to_u;    ///< min R between W_n and U_n (distinct vertices)
};

/// Resistance across a level-k cut point between its two flanking k-cells.
struct FlankRow {
  int level;              ///< k
  std::size_t cut_point;
  std::size_t pairs;
  double min_resistance;
  double max_resistance;
};

struct FlankScaling {
  int level;              ///< k
  std::size_t cut_points;
  double min_scaled;      ///< min R 3^k
  double max_scaled;      ///< max R 3^k
};

/// Flanking pairs around the midpoint of p2p3 at resolution n, relative to R(p2,p3).
struct MidpointFlank {
  int level;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> ratios;
};

struct TwistedTopologyReport {
  int level = 0;
  ConductanceTriple data{1.0, 1.0, 1.0};
  double r_p2p3 = 0.0;
  std::vector<CutPointLevel> cut_levels;
  std::vector<FlankRow> flanks;
  std::vector<FlankScaling> flank_scaling;
  std::vector<MidpointFlank> midpoint;
  /// Strong-edge pairs (two U-corners of one k-cell), k = 1..N.
  std::vector<ResistanceRow> u_pairs;
  LinearFit u_slope;
};

namespace detail {

// Neighbours of `q` in graph g through edges of cells whose length-`prefix_len`
// prefix is `prefix`, restricted to ids in `allowed` (ids of g).
inline std::vector<std::size_t> neighbours_in_cell(const LevelGraph& g, std::size_t q,
                                                   std::size_t prefix, int prefix_len,
                                                   const std::set<std::size_t>& allowed) {
  std::size_t div = 1;
  for (int k = 0; k < g.level - prefix_len; ++k) div *= 3;
  std::set<std::size_t> out;
  for (const Edge& e : g.edges) {
    if (e.cell / div != prefix) continue;
    if (e.u == q && allowed.count(e.v)) out.insert(e.v);
    if (e.v == q && allowed.count(e.u)) out.insert(e.u);
  }
  return {out.begin(), out.end()};
}

// Prefixes (length k) of the cells of g containing q.
inline std::vector<std::size_t> cells_containing(const LevelGraph& g, std::size_t q, int k) {
  std::size_t div = 1;
  for (int j = 0; j < g.level - k; ++j) div *= 3;
  std::set<std::size_t> out;
  for (std::size_t w = 0; w < g.cells.size(); ++w) {
    const auto& c = g.cells[w];
    if (c[0] == q || c[1] == q || c[2] == q) out.insert(w / div);
  }
  return {out.begin(), out.end()};
}

}  // namespace detail

/// Resistance geometry of the twisted gasket for data a0 > b0 = c0.
inline TwistedTopologyReport twisted_topology_probe(const ConductanceTriple& t0, int n_max) {
  const Classification cls = classify(t0.values());
  if (cls.kind != DataClass::asymmetric || cls.strong != 0) {
    throw std::invalid_argument("twisted_topology_probe: needs a0 > b0 = c0");
  }
  if (n_max < 1) throw std::invalid_argument("twisted_topology_probe: need n_max >= 1");
  const Variant variant = Variant::twisted;
  const SequenceReport seq = conductance_sequence(t0, n_max, variant);
  const LevelGraph top = build_graph(variant, n_max);
  const ResistanceOracle R(assemble_energy(top, seq.conductance(n_max)));
  const CutPointSet cuts = build_cut_points(top);

  TwistedTopologyReport rep;
  rep.level = n_max;
  rep.data = t0;
  const auto& bnd = top.boundary();
  rep.r_p2p3 = R(bnd[1], bnd[2]);

  // Cut points: pairwise and to the U side.
  for (int n = 1; n <= n_max; ++n) {
    const auto& w = cuts.w[static_cast<std::size_t>(n)];
    const auto& u = cuts.u[static_cast<std::size_t>(n)];
    CutPointLevel row{n, w.size(), std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};
    for (std::size_t a = 0; a < w.size(); ++a) {
      for (std::size_t b = a + 1; b < w.size(); ++b) {
        row.min_cut_pair = std::min(row.min_cut_pair, R(w[a], w[b]));
      }
      for (std::size_t x : u) {
        if (x != w[a]) row.min_cut_to_u = std::min(row.min_cut_to_u, R(w[a], x));
      }
    }
    rep.cut_levels.push_back(row);
  }

  // Flanking resistance across every cut point of W_k \ W_{k-1}, at resolution N.
  const std::set<std::size_t> u_top(cuts.u.back().begin(), cuts.u.back().end());
  for (int k = 1; k < n_max; ++k) {
    const auto& wk = cuts.w[static_cast<std::size_t>(k)];
    const auto& wprev = cuts.w[static_cast<std::size_t>(k - 1)];
    FlankScaling sc{k, 0, std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t q : wk) {
      if (std::binary_search(wprev.begin(), wprev.end(), q)) continue;
      const auto owners = detail::cells_containing(top, q, k);
      if (owners.size() != 2) continue;
      const auto left = detail::neighbours_in_cell(top, q, owners[0], k, u_top);
      const auto right = detail::neighbours_in_cell(top, q, owners[1], k, u_top);
      FlankRow fr{k, q, 0, std::numeric_limits<double>::infinity(), 0.0};
      for (std::size_t x : left) {
        for (std::size_t y : right) {
          const double r = R(x, y);
          fr.min_resistance = std::min(fr.min_resistance, r);
          fr.max_resistance = std::max(fr.max_resistance, r);
          ++fr.pairs;
        }
      }
      if (fr.pairs == 0) continue;
      rep.flanks.push_back(fr);
      const double s = std::pow(3.0, k);
      sc.min_scaled = std::min(sc.min_scaled, fr.min_resistance * s);
      sc.max_scaled = std::max(sc.max_scaled, fr.max_resistance * s);
      ++sc.cut_points;
    }
    if (sc.cut_points) rep.flank_scaling.push_back(sc);
  }

  // Midpoint of p2p3: neighbours at resolution n inside F_2(K) and F_3(K).
  for (int n = 1; n <= n_max; ++n) {
    const LevelGraph g = build_graph(variant, n);
    const CutPointSet local = build_cut_points(g);
    const std::set<std::size_t> un(local.u.back().begin(), local.u.back().end());
    const std::size_t q = g.vertices.id(LatticePoint{1, 1, 1});
    const auto left = detail::neighbours_in_cell(g, q, 1, 1, un);
    const auto right = detail::neighbours_in_cell(g, q, 2, 1, un);
    MidpointFlank mf{n, {}, {}};
    for (std::size_t x : left) {
      for (std::size_t y : right) {
        const auto tx = top.vertices.id(g.vertices.point(x));
        const auto ty = top.vertices.id(g.vertices.point(y));
        mf.pairs.emplace_back(tx, ty);
        mf.ratios.push_back(R(tx, ty) / rep.r_p2p3);
      }
    }
    rep.midpoint.push_back(std::move(mf));
  }

  // U side: strong edges of k-cells.
  std::vector<double> lx, ly;
  for (int k = 1; k <= n_max; ++k) {
    const LevelGraph g = build_graph(variant, k);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const Edge& e : g.edges) {
      if (e.label != 0) continue;
      const auto u = top.vertices.id(g.vertices.point(e.u));
      const auto v = top.vertices.id(g.vertices.point(e.v));
      pairs.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    if (pairs.size() > kPairsPerScale) pairs.resize(kPairsPerScale);
    for (const auto& [u, v] : pairs) {
      const LatticePoint pu = top.vertices.point(u);
      const LatticePoint pv = top.vertices.point(v);
      const double r = R(u, v);
      const double d = distance(pu, pv);
      rep.u_pairs.push_back({k, PairFamily::strong, u, v, pu, pv, d, r});
      lx.push_back(std::log(d));
      ly.push_back(std::log(r));
    }
  }
  rep.u_slope = least_squares(lx, ly);
  return rep;
}

}  // namespace gasket
