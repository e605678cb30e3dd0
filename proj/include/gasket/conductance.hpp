#pragma once

/// Delta-Y transforms and the level recursions for the cell conductances.
///
/// Level-n cells carry conductances (a, b, c) on the edges opposite p1, p2, p3.
/// The equivalent Y network has branch resistances (x, y, z) toward p1, p2, p3.
/// Compatibility between consecutive levels is a condition on the Y data:
/// coarsen(v_n) == v_{n-1}.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gasket/lattice.hpp"

namespace gasket {

namespace detail {
inline void require_positive(std::array<double, 3> v, const char* what) {
  for (double c : v) {
    if (!std::isfinite(c) || !(c > 0.0)) {
      throw std::domain_error(std::string(what) + ": components must be positive and finite");
    }
  }
}
}  // namespace detail

class ConductanceTriple {
 public:
  ConductanceTriple(double a, double b, double c) : v_{a, b, c} {
    detail::require_positive(v_, "ConductanceTriple");
  }
  explicit ConductanceTriple(std::array<double, 3> v) : ConductanceTriple(v[0], v[1], v[2]) {}

  double a() const { return v_[0]; }
  double b() const { return v_[1]; }
  double c() const { return v_[2]; }
  /// Conductance of the edge opposite corner k (0-based).
  double operator[](std::size_t k) const { return v_.at(k); }
  const std::array<double, 3>& values() const { return v_; }

  ConductanceTriple scaled(double s) const { return {s * v_[0], s * v_[1], s * v_[2]}; }

 private:
  std::array<double, 3> v_;
};

class YTriple {
 public:
  YTriple(double x, double y, double z) : v_{x, y, z} { detail::require_positive(v_, "YTriple"); }
  explicit YTriple(std::array<double, 3> v) : YTriple(v[0], v[1], v[2]) {}

  double x() const { return v_[0]; }
  double y() const { return v_[1]; }
  double z() const { return v_[2]; }
  double operator[](std::size_t k) const { return v_.at(k); }
  const std::array<double, 3>& values() const { return v_; }

 private:
  std::array<double, 3> v_;
};

/// Direction probabilities of the decimated random walk.
class ProbTriple {
 public:
  ProbTriple(double a1, double a2, double a3) : v_{a1, a2, a3} {
    for (double p : v_) {
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw std::domain_error("ProbTriple: components must lie in [0,1]");
      }
    }
    if (std::abs(v_[0] + v_[1] + v_[2] - 1.0) > 1e-12) {
      throw std::domain_error("ProbTriple: components must sum to 1");
    }
  }

  double operator[](std::size_t k) const { return v_.at(k); }
  const std::array<double, 3>& values() const { return v_; }

 private:
  std::array<double, 3> v_;
};

/// x = a/eta, y = b/eta, z = c/eta with eta = ab + bc + ca.
inline YTriple delta_to_y(const ConductanceTriple& t) {
  const double eta = t.a() * t.b() + t.b() * t.c() + t.c() * t.a();
  return {t.a() / eta, t.b() / eta, t.c() / eta};
}

/// a = x/r, b = y/r, c = z/r with r = xy + yz + zx.
inline ConductanceTriple y_to_delta(const YTriple& v) {
  const double r = v.x() * v.y() + v.y() * v.z() + v.z() * v.x();
  return {v.x() / r, v.y() / r, v.z() / r};
}

namespace detail {

// Correction term g(p; q, r) added to component p when coarsening.
inline double correction(Variant variant, double p, double q, double r) {
  const double s = p + q + r;
  if (variant == Variant::standard) return (p + q) * (p + r) / (2.0 * s);
  return 2.0 * q * r / s;
}

// Partial derivatives of g(p; q, r) with respect to (p, q, r).
inline std::array<double, 3> correction_gradient(Variant variant, double p, double q, double r) {
  const double s = p + q + r;
  const double s2 = s * s;
  if (variant == Variant::standard) {
    return {((2.0 * p + q + r) * s - (p + q) * (p + r)) / (2.0 * s2),
            (p + r) * r / (2.0 * s2), (p + q) * q / (2.0 * s2)};
  }
  return {-2.0 * q * r / s2, 2.0 * r * (p + r) / s2, 2.0 * q * (p + q) / s2};
}

inline std::array<double, 3> coarsen_raw(Variant variant, const std::array<double, 3>& v) {
  const auto [x, y, z] = v;
  return {x + correction(variant, x, y, z), y + correction(variant, y, z, x),
          z + correction(variant, z, x, y)};
}

inline Eigen::Matrix3d coarsen_jacobian(Variant variant, const std::array<double, 3>& v) {
  Eigen::Matrix3d jac = Eigen::Matrix3d::Identity();
  // Row k is component k; its arguments are (v[k], v[k+1], v[k+2]) cyclically.
  for (int k = 0; k < 3; ++k) {
    const int p = k, q = (k + 1) % 3, r = (k + 2) % 3;
    const auto g = correction_gradient(variant, v[p], v[q], v[r]);
    jac(k, p) += g[0];
    jac(k, q) += g[1];
    jac(k, r) += g[2];
  }
  return jac;
}

}  // namespace detail

/// One level coarser: v_{n-1} from v_n. Exact (no solve).
inline YTriple coarsen(const YTriple& v, Variant variant) {
  return YTriple(detail::coarsen_raw(variant, v.values()));
}

struct SymmetricPair {
  double x;
  double y;
};

/// Closed-form refinement for data with y = z. Requires x >= y > 0.
inline SymmetricPair refine_symmetric(double x, double y, Variant variant) {
  if (!(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
    throw std::domain_error("refine_symmetric: need positive finite data");
  }
  if (x < y) throw std::domain_error("refine_symmetric: need x >= y (no compatible refinement)");
  if (variant == Variant::standard) {
    const double s = std::sqrt(4.0 * x * x + 6.0 * x * y + 6.0 * y * y);
    // -2x + s rewritten as (6xy + 6y^2) / (s + 2x) to avoid cancellation.
    return {(14.0 * x + 3.0 * y - 2.0 * s) / 15.0,
            (y + 6.0 * y * (x + y) / (s + 2.0 * x)) / 5.0};
  }
  const double s = std::sqrt(9.0 * x * x - 4.0 * x * y - 4.0 * y * y);
  // 3x - s rewritten as (4xy + 4y^2) / (3x + s).
  return {(x + 2.0 * y + 3.0 * s) / 10.0, (y + 4.0 * y * (x + y) / (3.0 * x + s)) / 5.0};
}

enum class RefineStatus { ok, no_positive_solution, iteration_limit };

inline const char* to_string(RefineStatus s) {
  switch (s) {
    case RefineStatus::ok: return "ok";
    case RefineStatus::no_positive_solution: return "NoPositiveSolution";
    case RefineStatus::iteration_limit: return "IterationLimit";
  }
  return "?";
}

struct RefineOptions {
  double residual_tol = 1e-12;
  int max_iterations = 100;
  /// A component below margin * (its value one level coarser) counts as leaving the positive orthant.
  double positivity_margin = 1e-9;
  int polish_iterations = 10;
};

struct RefineResult {
  RefineStatus status = RefineStatus::iteration_limit;
  std::array<double, 3> iterate{};
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();

  bool ok() const { return status == RefineStatus::ok; }
  YTriple solution() const {
    if (!ok()) throw std::logic_error("RefineResult::solution on failed refinement");
    return YTriple(iterate);
  }
};

/// Solves coarsen(v) == prev for v by Newton's method.
inline RefineResult refine_general(const YTriple& prev, Variant variant,
                                   const RefineOptions& opts = {}) {
  const auto& target = prev.values();
  const double scale = *std::max_element(target.begin(), target.end());

  // Start from the closed form for (largest, mean of the other two).
  const auto big = static_cast<std::size_t>(
      std::max_element(target.begin(), target.end()) - target.begin());
  const double rest = (target[(big + 1) % 3] + target[(big + 2) % 3]) / 2.0;
  const SymmetricPair start = refine_symmetric(target[big], rest, variant);
  std::array<double, 3> v{start.y, start.y, start.y};
  v[big] = start.x;

  auto residual_of = [&](const std::array<double, 3>& w) {
    const auto c = detail::coarsen_raw(variant, w);
    double r = 0.0;
    for (int k = 0; k < 3; ++k) r = std::max(r, std::abs(c[k] - target[k]));
    return r / scale;
  };
  // Each component is measured against its own coarse value: a compatible
  // refinement shrinks every branch by a bounded factor, while the strong and
  // weak branches may drift apart by many orders of magnitude over the levels.
  auto below_margin = [&](const std::array<double, 3>& w) {
    for (int k = 0; k < 3; ++k) {
      if (w[k] < opts.positivity_margin * target[k]) return true;
    }
    return false;
  };
  auto finite = [](const std::array<double, 3>& w) {
    return std::all_of(w.begin(), w.end(), [](double c) { return std::isfinite(c); });
  };
  auto newton_step = [&](std::array<double, 3>& w) {
    const auto c = detail::coarsen_raw(variant, w);
    const Eigen::Vector3d f(c[0] - target[0], c[1] - target[1], c[2] - target[2]);
    const Eigen::Vector3d dv = detail::coarsen_jacobian(variant, w).partialPivLu().solve(f);
    for (int k = 0; k < 3; ++k) w[k] -= dv[k];
  };

  RefineResult result;
  int strikes = 0;
  for (int it = 0; it <= opts.max_iterations; ++it) {
    result.iterate = v;
    result.iterations = it;
    if (!finite(v)) {
      result.status = RefineStatus::no_positive_solution;
      return result;
    }
    result.residual = residual_of(v);
    if (result.residual <= opts.residual_tol) {
      result.status = below_margin(v) ? RefineStatus::no_positive_solution : RefineStatus::ok;
      return result;
    }
    strikes = below_margin(v) ? strikes + 1 : 0;
    if (strikes >= 2) {
      // Polish: let Newton settle wherever it is heading, then judge the limit.
      for (int p = 0; p < opts.polish_iterations && finite(v); ++p) {
        newton_step(v);
        if (finite(v) && residual_of(v) <= opts.residual_tol) break;
      }
      result.iterate = v;
      result.residual = finite(v) ? residual_of(v) : std::numeric_limits<double>::infinity();
      result.status = (finite(v) && result.residual <= opts.residual_tol && !below_margin(v))
                          ? RefineStatus::ok
                          : RefineStatus::no_positive_solution;
      return result;
    }
    if (it == opts.max_iterations) break;
    newton_step(v);
  }
  result.status = RefineStatus::iteration_limit;
  return result;
}

enum class DataClass { standard, asymmetric, incompatible };

inline const char* to_string(DataClass c) {
  switch (c) {
    case DataClass::standard: return "standard";
    case DataClass::asymmetric: return "asymmetric";
    case DataClass::incompatible: return "incompatible";
  }
  return "?";
}

struct Classification {
  DataClass kind = DataClass::incompatible;
  /// Position (0..2) of the distinguished component for asymmetric data.
  std::size_t strong = 0;
};

/// Standard if all three agree, asymmetric if one component exceeds two equal
/// others, incompatible otherwise. Equality is relative to rel_tol.
inline Classification classify(const std::array<double, 3>& v, double rel_tol = 1e-12) {
  auto eq = [&](double p, double q) {
    return std::abs(p - q) <= rel_tol * std::max(std::abs(p), std::abs(q));
  };
  if (eq(v[0], v[1]) && eq(v[1], v[2])) return {DataClass::standard, 0};
  for (std::size_t k = 0; k < 3; ++k) {
    const double p = v[k], q = v[(k + 1) % 3], r = v[(k + 2) % 3];
    if (eq(q, r) && p > q) return {DataClass::asymmetric, k};
  }
  return {DataClass::incompatible, 0};
}

struct SequenceLevel {
  int level;
  YTriple y;
  ConductanceTriple conductance;
};

struct SequenceReport {
  Variant variant = Variant::standard;
  std::vector<SequenceLevel> levels;
  DataClass classification = DataClass::standard;
  /// First level with no positive solution (incompatible data only).
  std::optional<int> failing_level;
  RefineStatus failure = RefineStatus::ok;

  const ConductanceTriple& conductance(int level) const {
    return levels.at(static_cast<std::size_t>(level)).conductance;
  }
  const YTriple& y(int level) const { return levels.at(static_cast<std::size_t>(level)).y; }
};

namespace detail {

inline SequenceReport y_sequence(const YTriple& y0, int n_max, Variant variant,
                                 const RefineOptions& opts) {
  if (n_max < 0) throw std::invalid_argument("n_max must be nonnegative");
  SequenceReport report;
  report.variant = variant;
  report.levels.push_back({0, y0, y_to_delta(y0)});

  const Classification cls = classify(y0.values());
  report.classification = cls.kind;
  if (cls.kind != DataClass::incompatible) {
    // Symmetric closed form on the canonical ordering; the two equal
    // components stay equal at every level.
    const std::size_t k = cls.strong;
    std::array<double, 3> v = y0.values();
    const bool symmetric = cls.kind == DataClass::standard;
    for (int level = 1; level <= n_max; ++level) {
      // Equal components may differ in the last bit; refine their mean.
      const double weak = (v[(k + 1) % 3] + v[(k + 2) % 3]) / 2.0;
      const double strong = symmetric ? (v[k] + 2.0 * weak) / 3.0 : v[k];
      const SymmetricPair next = refine_symmetric(strong, symmetric ? strong : weak, variant);
      v = {next.y, next.y, next.y};
      v[k] = symmetric ? next.y : next.x;
      const YTriple y(v);
      report.levels.push_back({level, y, y_to_delta(y)});
    }
    return report;
  }

  YTriple current = y0;
  for (int level = 1; level <= n_max; ++level) {
    const RefineResult r = refine_general(current, variant, opts);
    if (!r.ok()) {
      report.failing_level = level;
      report.failure = r.status;
      return report;
    }
    current = r.solution();
    report.levels.push_back({level, current, y_to_delta(current)});
  }
  return report;
}

}  // namespace detail

/// Conductances and Y data for levels 0..n_max from the level-0 conductances.
/// Incompatible data is reported through classification/failing_level.
inline SequenceReport conductance_sequence(const ConductanceTriple& t0, int n_max, Variant variant,
                                           const RefineOptions& opts = {}) {
  SequenceReport r = detail::y_sequence(delta_to_y(t0), n_max, variant, opts);
  if (!r.levels.empty()) r.levels.front().conductance = t0;  // exact input, not a round trip
  return r;
}

/// Same recursion started from Y data, refined through the general Newton
/// solver at every level (no closed-form shortcut). Used to probe which
/// initial data admit a compatible sequence.
struct DichotomyReport {
  Variant variant = Variant::standard;
  DataClass classification = DataClass::incompatible;
  int levels_reached = 0;
  std::optional<int> failing_level;
  RefineStatus failure = RefineStatus::ok;
  std::vector<YTriple> levels;
};

inline DichotomyReport dichotomy_probe(const YTriple& y0, int n_max, Variant variant,
                                       const RefineOptions& opts = {}) {
  DichotomyReport report;
  report.variant = variant;
  report.levels.push_back(y0);
  YTriple current = y0;
  for (int level = 1; level <= n_max; ++level) {
    const RefineResult r = refine_general(current, variant, opts);
    if (!r.ok()) {
      report.failing_level = level;
      report.failure = r.status;
      break;
    }
    current = r.solution();
    report.levels.push_back(current);
    report.levels_reached = level;
  }
  // Data that survives n_max levels without matching a symmetric class is
  // still reported incompatible; failing_level stays empty in that case.
  report.classification =
      report.failing_level ? DataClass::incompatible : classify(y0.values()).kind;
  return report;
}

/// One step of the renormalization map of the walk's direction probabilities.
inline ProbTriple hattori_T(const ProbTriple& alpha) {
  const auto& a = alpha.values();
  std::array<double, 3> t{a[0] + a[1] * a[2] / 3.0, a[1] + a[2] * a[0] / 3.0,
                          a[2] + a[0] * a[1] / 3.0};
  const double sum = t[0] + t[1] + t[2];
  return {t[0] / sum, t[1] / sum, t[2] / sum};
}

/// w_n from w_{n-1}; the weak/strong ratio of the walk (equals y_n / x_n).
inline double w_step(double w) {
  if (!(w > 0.0) || w > 1.0) throw std::domain_error("w_step: need 0 < w <= 1");
  const double s = std::sqrt(4.0 + 6.0 * w + 6.0 * w * w);
  // -2 + s rewritten as (6w + 6w^2) / (s + 2).
  return (3.0 * w + 6.0 * w * (1.0 + w) / (s + 2.0)) / (6.0 - w);
}

}  // namespace gasket
