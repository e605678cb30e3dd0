#pragma once

/// Discrete Laplacian spectra L u = lambda M u on the level graphs, eigenvalue
/// counting functions, and the growth-exponent and decimation experiments.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "gasket/conductance.hpp"
#include "gasket/error.hpp"
#include "gasket/graphform.hpp"
#include "gasket/lattice.hpp"
#include "gasket/resistance.hpp"

namespace gasket {

enum class BoundaryCondition { dirichlet, neumann };

inline const char* to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::dirichlet ? "dirichlet" : "neumann";
}

inline BoundaryCondition parse_boundary_condition(const std::string& s) {
  if (s == "dirichlet") return BoundaryCondition::dirichlet;
  if (s == "neumann") return BoundaryCondition::neumann;
  throw std::invalid_argument("unknown boundary condition '" + s + "' (expected dirichlet|neumann)");
}

/// mu_n(x) = (number of n-cells containing x) / 3^{n+1}. Kept as integer counts.
class DiscreteMeasure {
 public:
  explicit DiscreteMeasure(const LevelGraph& g) : level_(g.level), counts_(g.size(), 0) {
    for (const auto& cell : g.cells) {
      for (std::size_t id : cell) ++counts_[id];
    }
    denominator_ = 1;
    for (int k = 0; k <= level_; ++k) denominator_ *= 3;
  }

  std::size_t size() const { return counts_.size(); }
  std::uint64_t incident_cells(std::size_t id) const { return counts_.at(id); }
  std::uint64_t denominator() const { return denominator_; }
  double mass(std::size_t id) const {
    return static_cast<double>(counts_.at(id)) / static_cast<double>(denominator_);
  }

  /// Sum of incident-cell counts; equals denominator() exactly.
  std::uint64_t total_count() const {
    std::uint64_t s = 0;
    for (auto c : counts_) s += c;
    return s;
  }

 private:
  int level_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t denominator_ = 1;
};

/// Symmetric matrix M^{-1/2} L M^{-1/2} on the free vertices.
struct EigenProblem {
  BoundaryCondition bc = BoundaryCondition::neumann;
  std::vector<std::size_t> dofs;  ///< vertex id of each row
  Eigen::MatrixXd matrix;

  std::size_t size() const { return dofs.size(); }
};

/// Pins the given ids to zero and symmetrizes the rest.
inline EigenProblem assemble_operator_pinned(const EnergyForm& f, const DiscreteMeasure& m,
                                             std::span<const std::size_t> pinned,
                                             BoundaryCondition bc) {
  if (f.size() != m.size()) throw std::invalid_argument("assemble_operator: size mismatch");
  std::vector<bool> is_pinned(f.size(), false);
  for (std::size_t id : pinned) is_pinned.at(id) = true;
  EigenProblem p;
  p.bc = bc;
  std::vector<Eigen::Index> row(f.size(), -1);
  for (std::size_t id = 0; id < f.size(); ++id) {
    if (!is_pinned[id]) {
      row[id] = static_cast<Eigen::Index>(p.dofs.size());
      p.dofs.push_back(id);
    }
  }
  const auto n = static_cast<Eigen::Index>(p.dofs.size());
  p.matrix = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index col = 0; col < f.laplacian.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(f.laplacian, col); it; ++it) {
      const auto r = row[static_cast<std::size_t>(it.row())];
      const auto c = row[static_cast<std::size_t>(it.col())];
      if (r < 0 || c < 0) continue;
      p.matrix(r, c) += it.value() / std::sqrt(m.mass(static_cast<std::size_t>(it.row())) *
                                               m.mass(static_cast<std::size_t>(it.col())));
    }
  }
  return p;
}

inline EigenProblem assemble_operator(const EnergyForm& f, const DiscreteMeasure& m,
                                      BoundaryCondition bc,
                                      const std::array<std::size_t, 3>& boundary) {
  if (bc == BoundaryCondition::dirichlet) {
    return assemble_operator_pinned(f, m, boundary, bc);
  }
  return assemble_operator_pinned(f, m, {}, bc);
}

inline constexpr std::size_t kDefaultDimensionGuard = 4000;

/// All eigenvalues, ascending.
inline std::vector<double> full_spectrum(const EigenProblem& p,
                                         std::size_t guard = kDefaultDimensionGuard) {
  if (p.size() > guard) throw DimensionGuard(p.size(), guard);
  if (p.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(p.matrix, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("EigenSolverFailure", "eigensolver did not converge");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

struct EigenSystem {
  std::vector<double> values;
  Eigen::MatrixXd vectors;  ///< columns, matching values
};

inline EigenSystem full_eigensystem(const EigenProblem& p,
                                    std::size_t guard = kDefaultDimensionGuard) {
  if (p.size() > guard) throw DimensionGuard(p.size(), guard);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(p.matrix);
  if (solver.info() != Eigen::Success) throw Error("EigenSolverFailure", "eigensolver did not converge");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return {{ev.data(), ev.data() + ev.size()}, solver.eigenvectors()};
}

/// #{lambda <= t}; eigs must be sorted ascending.
inline std::size_t counting_function(std::span<const double> eigs, double t) {
  return static_cast<std::size_t>(std::upper_bound(eigs.begin(), eigs.end(), t) - eigs.begin());
}

/// 1-based inclusive index window [first, last] of the fit.
struct FitWindow {
  std::size_t first = 0;
  std::size_t last = 0;
};

/// Indices max(16, 1% of count) through 40% of count.
inline FitWindow default_window(std::size_t count) {
  return {std::max<std::size_t>(16, (count + 99) / 100), (count * 2) / 5};
}

struct SpectralFit {
  double slope = 0.0;
  double intercept = 0.0;
  FitWindow window;
  std::size_t points = 0;
};

inline constexpr std::size_t kMinFitPoints = 50;

/// Least-squares slope of log rho(lambda_k) against log lambda_k over the window.
inline SpectralFit spectral_exponent(std::span<const double> eigs,
                                     std::optional<FitWindow> window = std::nullopt) {
  const FitWindow w = window.value_or(default_window(eigs.size()));
  if (w.first < 1 || w.last > eigs.size() || w.last < w.first) {
    throw InsufficientData("spectral_exponent: window outside the spectrum");
  }
  std::vector<double> xs, ys;
  for (std::size_t k = w.first; k <= w.last; ++k) {
    const double lambda = eigs[k - 1];
    if (!(lambda > 0.0)) continue;
    xs.push_back(std::log(lambda));
    ys.push_back(std::log(static_cast<double>(counting_function(eigs, lambda))));
  }
  if (xs.size() < kMinFitPoints) {
    throw InsufficientData("spectral_exponent: fewer than 50 positive eigenvalues in window");
  }
  const LinearFit fit = least_squares(xs, ys);
  return {fit.slope, fit.intercept, w, xs.size()};
}

/// Points strictly between clusters of the merged spectra (gap > rel_gap * max |lambda|),
/// plus one point below and one above. Both counting functions are constant
/// between consecutive clusters, so these samples cover every t.
inline std::vector<double> cluster_gap_samples(std::span<const double> a, std::span<const double> b,
                                               double rel_gap = 1e-9) {
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  if (all.empty()) return {0.0};
  const double scale = std::max(std::abs(all.front()), std::abs(all.back()));
  std::vector<double> t{all.front() - 1.0 - scale};
  for (std::size_t k = 0; k + 1 < all.size(); ++k) {
    if (all[k + 1] - all[k] > rel_gap * scale) t.push_back(0.5 * (all[k] + all[k + 1]));
  }
  t.push_back(all.back() + 1.0 + scale);
  return t;
}

struct LevelProblem {
  LevelGraph graph;
  EnergyForm form;
  DiscreteMeasure measure;
};

inline LevelProblem level_problem(Variant variant, const ConductanceTriple& t0, int n) {
  const SequenceReport seq = conductance_sequence(t0, n, variant);
  if (seq.classification == DataClass::incompatible) {
    throw std::invalid_argument("initial data admits no compatible sequence");
  }
  LevelGraph g = build_graph(variant, n);
  EnergyForm f = assemble_energy(g, seq.conductance(n));
  DiscreteMeasure m(g);
  return {std::move(g), std::move(f), std::move(m)};
}

inline std::vector<double> level_spectrum(Variant variant, const ConductanceTriple& t0, int n,
                                          BoundaryCondition bc) {
  const LevelProblem lp = level_problem(variant, t0, n);
  return full_spectrum(assemble_operator(lp.form, lp.measure, bc, lp.graph.boundary()));
}

struct CountSample {
  double t;
  std::size_t count;
};

struct SpectralReport {
  Variant variant = Variant::standard;
  ConductanceTriple data{1.0, 1.0, 1.0};
  int level = 0;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  std::vector<double> eigenvalues;
  std::vector<CountSample> samples;
  std::optional<SpectralFit> fit;
  double runtime_ms = 0.0;
};

/// Full spectrum, geometric samples of rho(t), and the fitted growth exponent.
inline SpectralReport spectral_report(Variant variant, const ConductanceTriple& t0, int n,
                                      BoundaryCondition bc, std::size_t n_samples = 32) {
  const auto start = std::chrono::steady_clock::now();
  SpectralReport rep;
  rep.variant = variant;
  rep.data = t0;
  rep.level = n;
  rep.bc = bc;
  rep.eigenvalues = level_spectrum(variant, t0, n, bc);

  std::vector<double> positive;
  for (double l : rep.eigenvalues) {
    if (l > 0.0) positive.push_back(l);
  }
  if (positive.size() >= 2 && n_samples >= 2) {
    const double lo = std::log(positive.front());
    const double hi = std::log(positive.back());
    for (std::size_t k = 0; k < n_samples; ++k) {
      // Endpoints exact so the first and last samples count lambda_min and lambda_max.
      const double t = k == 0              ? positive.front()
                       : k + 1 == n_samples ? positive.back()
                                            : std::exp(lo + (hi - lo) * static_cast<double>(k) /
                                                                static_cast<double>(n_samples - 1));
      rep.samples.push_back({t, counting_function(rep.eigenvalues, t)});
    }
  }
  try {
    rep.fit = spectral_exponent(rep.eigenvalues);
  } catch (const InsufficientData&) {
    rep.fit.reset();
  }
  rep.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

struct WeylCheck {
  int level;
  std::size_t samples;
  long min_difference;  ///< min over t of rho_N(t) - rho_D(t)
  long max_difference;
};

/// rho_N(t) - rho_D(t) over every t (sampled between eigenvalue clusters).
inline WeylCheck weyl_bracket(std::span<const double> dirichlet, std::span<const double> neumann,
                              int level) {
  WeylCheck w{level, 0, std::numeric_limits<long>::max(), std::numeric_limits<long>::min()};
  for (double t : cluster_gap_samples(dirichlet, neumann)) {
    const long d = static_cast<long>(counting_function(neumann, t)) -
                   static_cast<long>(counting_function(dirichlet, t));
    w.min_difference = std::min(w.min_difference, d);
    w.max_difference = std::max(w.max_difference, d);
    ++w.samples;
  }
  return w;
}

struct Lambda1Row {
  double a0;
  double b0;
  double lambda1;
  double lambda2;
  double ratio;  ///< lambda1 / b0
};

struct Lambda1Table {
  int level = 0;
  std::vector<Lambda1Row> rows;
  double bracket = 0.0;  ///< max / min of lambda1 / b0
};

/// Dirichlet lambda_1 for data (r b0, b0, b0) over the grid ratios x b0s.
inline Lambda1Table lambda1_scaling(Variant variant, std::span<const double> ratios,
                                    std::span<const double> b0s, int n) {
  Lambda1Table t;
  t.level = n;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double b0 : b0s) {
    for (double r : ratios) {
      if (!(r > 1.0)) throw std::invalid_argument("lambda1_scaling: need a0 > b0");
      const auto eigs =
          level_spectrum(variant, ConductanceTriple(r * b0, b0, b0), n, BoundaryCondition::dirichlet);
      if (eigs.size() < 2) throw InsufficientData("lambda1_scaling: level too small");
      const double q = eigs[0] / b0;
      t.rows.push_back({r * b0, b0, eigs[0], eigs[1], q});
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
  }
  t.bracket = hi / lo;
  return t;
}

struct DecimationReport {
  int level = 0;
  std::size_t count = 0;
  double max_relative_deviation = 0.0;
  /// Whether rho_n(t) >= 3 rho^{(a1,b1)}_{n-1}(t/3) at every sampled t.
  bool dominance_holds = true;
  std::size_t dominance_samples = 0;
  std::vector<double> restricted;    ///< level n, pinned on V_1
  std::vector<double> decimated;     ///< 3 x level n-1 (data a1,b1), triplicated
};

/// The level-n problem pinned on V_1 against three copies of the level-(n-1)
/// Dirichlet problem with the level-1 conductances, each eigenvalue times 3.
inline DecimationReport decimation_identity_check(Variant variant, const ConductanceTriple& t0,
                                                  int n) {
  if (n < 2) throw std::invalid_argument("decimation_identity_check: need n >= 2");
  const SequenceReport seq = conductance_sequence(t0, 1, variant);
  if (seq.classification == DataClass::incompatible) {
    throw std::invalid_argument("initial data admits no compatible sequence");
  }
  DecimationReport rep;
  rep.level = n;

  const LevelProblem fine = level_problem(variant, t0, n);
  const VertexIndex v1 = build_vertices(ifs(variant), 1);
  const auto pinned = fine.graph.coarse_ids(v1);
  rep.restricted = full_spectrum(
      assemble_operator_pinned(fine.form, fine.measure, pinned, BoundaryCondition::dirichlet));

  const auto coarse =
      level_spectrum(variant, seq.conductance(1), n - 1, BoundaryCondition::dirichlet);
  for (int copy = 0; copy < 3; ++copy) {
    for (double l : coarse) rep.decimated.push_back(3.0 * l);
  }
  std::sort(rep.decimated.begin(), rep.decimated.end());
  rep.count = rep.restricted.size();
  if (rep.restricted.size() != rep.decimated.size()) {
    rep.max_relative_deviation = std::numeric_limits<double>::infinity();
  } else {
    for (std::size_t k = 0; k < rep.count; ++k) {
      const double scale = std::max(std::abs(rep.decimated[k]), std::numeric_limits<double>::min());
      rep.max_relative_deviation = std::max(
          rep.max_relative_deviation, std::abs(rep.restricted[k] - rep.decimated[k]) / scale);
    }
  }

  const auto full = level_spectrum(variant, t0, n, BoundaryCondition::dirichlet);
  for (double t : cluster_gap_samples(full, rep.decimated)) {
    ++rep.dominance_samples;
    if (counting_function(full, t) < counting_function(rep.decimated, t)) rep.dominance_holds = false;
  }
  return rep;
}

/// log 3 / log(9/2): growth exponent of rho for asymmetric data.
inline double asymmetric_exponent() { return std::log(3.0) / std::log(4.5); }
/// log 3 / log 5: growth exponent of rho for symmetric data.
inline double symmetric_exponent() { return std::log(3.0) / std::log(5.0); }
/// Spectral dimension log 9 / log(9/2) and walk dimension log 9 / log 2 - 1 (asymmetric data).
inline double spectral_dimension() { return std::log(9.0) / std::log(4.5); }
inline double walk_dimension() { return std::log(9.0) / std::log(2.0) - 1.0; }

}  // namespace gasket
