#pragma once

// Reference computations that share no code with the library: plain loops on
// std::vector, complex arithmetic for the maps, textbook elimination.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;
using Complex = std::complex<double>;

inline Matrix zeros(std::size_t n) { return Matrix(n, std::vector<double>(n, 0.0)); }

/// Gaussian elimination with partial pivoting; solves A x = b.
inline std::vector<double> solve(Matrix a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

/// Star-mesh elimination: removes every vertex outside `keep` one at a time.
inline Matrix star_mesh_trace(Matrix l, const std::vector<std::size_t>& keep) {
  const std::size_t n = l.size();
  std::vector<bool> kept(n, false);
  for (auto k : keep) kept[k] = true;
  for (std::size_t v = 0; v < n; ++v) {
    if (kept[v]) continue;
    const double d = l[v][v];
    for (std::size_t i = 0; i < n; ++i) {
      if (i == v || l[i][v] == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == v) continue;
        l[i][j] -= l[i][v] * l[v][j] / d;
      }
    }
    for (std::size_t i = 0; i < n; ++i) l[i][v] = l[v][i] = 0.0;
  }
  Matrix out = zeros(keep.size());
  for (std::size_t a = 0; a < keep.size(); ++a) {
    for (std::size_t b = 0; b < keep.size(); ++b) out[a][b] = l[keep[a]][keep[b]];
  }
  return out;
}

/// Cyclic Jacobi rotations; eigenvalues ascending.
inline std::vector<double> jacobi_eigenvalues(Matrix a, int sweeps = 100) {
  const std::size_t n = a.size();
  for (int s = 0; s < sweeps; ++s) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - sn * akq;
          a[k][q] = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - sn * aqk;
          a[q][k] = sn * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t k = 0; k < n; ++k) ev[k] = a[k][k];
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Roots of det(A - t I) for a symmetric 3x3 matrix, by the trigonometric cubic formula.
inline std::array<double, 3> symmetric3_eigenvalues(const Matrix& a) {
  const double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
  const double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
  const double p2 = (a[0][0] - q) * (a[0][0] - q) + (a[1][1] - q) * (a[1][1] - q) +
                    (a[2][2] - q) * (a[2][2] - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  if (p == 0.0) return {q, q, q};
  Matrix b = zeros(3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) b[i][j] = (a[i][j] - (i == j ? q : 0.0)) / p;
  }
  const double det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                     b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                     b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
  const double r = std::clamp(det / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  std::array<double, 3> ev{e1, 3.0 * q - e1 - e3, e3};
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Central-difference Jacobian of a map R^3 -> R^3.
template <class F>
std::array<std::array<double, 3>, 3> fd_jacobian(F f, std::array<double, 3> x, double h = 1e-6) {
  std::array<std::array<double, 3>, 3> j{};
  for (int c = 0; c < 3; ++c) {
    auto up = x, dn = x;
    const double step = h * std::max(1.0, std::abs(x[c]));
    up[c] += step;
    dn[c] -= step;
    const auto fu = f(up), fd = f(dn);
    for (int r = 0; r < 3; ++r) j[r][c] = (fu[r] - fd[r]) / (2.0 * step);
  }
  return j;
}

inline const Complex kP3 = std::polar(1.0, std::numbers::pi / 3.0);
inline const std::array<Complex, 3> kCorners{Complex(0.0, 0.0), Complex(1.0, 0.0), kP3};

/// The contractions as complex affine maps.
inline Complex standard_map(int i, Complex z) { return 0.5 * (z - kCorners[i]) + kCorners[i]; }

inline Complex twisted_map(int i, Complex z) {
  switch (i) {
    case 0:
      return std::conj(z) * kP3 / 2.0;
    case 1:
      return std::conj(z - 1.0) * std::conj(kP3) / 2.0 + 1.0;
    default:
      return -std::conj(z - kP3) / 2.0 + kP3;
  }
}

inline Complex apply(bool twisted, const std::vector<int>& word, Complex z) {
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    z = twisted ? twisted_map(*it, z) : standard_map(*it, z);
  }
  return z;
}

/// Distinct corner images over all words of length n, deduplicated by distance.
inline std::vector<Complex> brute_force_vertices(bool twisted, int n, double tol = 1e-9) {
  std::vector<Complex> pts;
  std::size_t words = 1;
  for (int k = 0; k < n; ++k) words *= 3;
  for (std::size_t w = 0; w < words; ++w) {
    std::vector<int> word(static_cast<std::size_t>(n));
    std::size_t c = w;
    for (int k = n - 1; k >= 0; --k) {
      word[static_cast<std::size_t>(k)] = static_cast<int>(c % 3);
      c /= 3;
    }
    for (const auto& corner : kCorners) {
      const Complex z = apply(twisted, word, corner);
      bool seen = false;
      for (const auto& q : pts) {
        if (std::abs(q - z) < tol) {
          seen = true;
          break;
        }
      }
      if (!seen) pts.push_back(z);
    }
  }
  return pts;
}

}  // namespace oracle
