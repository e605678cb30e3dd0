#pragma once

/// Exact geometry of the level-n Sierpinski gasket graphs.
///
/// Every vertex of every level lives on the oblique integer lattice spanned by
/// p2 = (1,0) and p3 = (1/2, sqrt(3)/2), scaled by 2^level. All identity tests
/// are done on integer coordinates; floating point only appears in
/// LatticePoint::euclidean().

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gasket/error.hpp"

namespace gasket {

/// Which iterated function system generates the cells.
enum class Variant { standard, twisted };

inline const char* to_string(Variant v) { return v == Variant::standard ? "standard" : "twisted"; }

inline Variant parse_variant(const std::string& s) {
  if (s == "standard") return Variant::standard;
  if (s == "twisted") return Variant::twisted;
  throw std::invalid_argument("unknown variant '" + s + "' (expected standard|twisted)");
}

/// The point (i*p2 + j*p3) / 2^level.
struct LatticePoint {
  std::int64_t i = 0;
  std::int64_t j = 0;
  int level = 0;

  /// Same point expressed at a finer level.
  LatticePoint at_level(int finer) const {
    if (finer < level) throw std::invalid_argument("LatticePoint::at_level: cannot coarsen");
    const int shift = finer - level;
    return {i << shift, j << shift, finer};
  }

  bool in_triangle() const {
    return i >= 0 && j >= 0 && i + j <= (std::int64_t{1} << level);
  }

  std::array<double, 2> euclidean() const {
    const double scale = std::ldexp(1.0, -level);
    return {(static_cast<double>(i) + 0.5 * static_cast<double>(j)) * scale,
            0.5 * std::sqrt(3.0) * static_cast<double>(j) * scale};
  }

  friend bool operator==(const LatticePoint& p, const LatticePoint& q) {
    const int l = std::max(p.level, q.level);
    const LatticePoint a = p.at_level(l);
    const LatticePoint b = q.at_level(l);
    return a.i == b.i && a.j == b.j;
  }
};

inline double distance(const LatticePoint& p, const LatticePoint& q) {
  const auto a = p.euclidean();
  const auto b = q.euclidean();
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

/// Corners p1, p2, p3 at level 0 (index 0 is p1).
inline constexpr std::array<LatticePoint, 3> kCorners{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}};

/// x -> (m x + 2^level t) / 2, i.e. one contraction of ratio 1/2. Raises level by one.
struct AffineLatticeMap {
  std::array<std::array<int, 2>, 2> m{};
  std::array<int, 2> t{};

  int det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

  LatticePoint operator()(const LatticePoint& p) const {
    const std::int64_t scale = std::int64_t{1} << p.level;
    return {m[0][0] * p.i + m[0][1] * p.j + scale * t[0],
            m[1][0] * p.i + m[1][1] * p.j + scale * t[1], p.level + 1};
  }
};

using Ifs = std::array<AffineLatticeMap, 3>;

/// F_i(x) = (x + p_i) / 2.
inline Ifs standard_ifs() {
  return {{{{{{1, 0}, {0, 1}}}, {0, 0}},
           {{{{1, 0}, {0, 1}}}, {1, 0}},
           {{{{1, 0}, {0, 1}}}, {0, 1}}}};
}

/// Each F_i contracts toward p_i and reflects across the angle bisector at p_i.
///   F_1(x) = conj(x) e^{i pi/3} / 2
///   F_2(x) = conj(x - 1) e^{-i pi/3} / 2 + 1
///   F_3(x) = -conj(x - p3) / 2 + p3
inline Ifs twisted_ifs() {
  return {{{{{{0, 1}, {1, 0}}}, {0, 0}},
           {{{{1, 0}, {-1, -1}}}, {1, 1}},
           {{{{-1, -1}, {0, 1}}}, {1, 1}}}};
}

inline Ifs ifs(Variant v) { return v == Variant::standard ? standard_ifs() : twisted_ifs(); }

/// F_w(start) with F_w = F_{w_1} o ... o F_{w_n}; letters are 0-based map indices.
inline LatticePoint apply_word(const Ifs& maps, std::span<const int> word, LatticePoint start) {
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    if (*it < 0 || *it > 2) throw std::invalid_argument("apply_word: letter out of range");
    start = maps[static_cast<std::size_t>(*it)](start);
  }
  return start;
}

inline LatticePoint apply_word(const Ifs& maps, std::span<const int> word, int corner) {
  if (corner < 0 || corner > 2) throw std::invalid_argument("apply_word: corner out of range");
  return apply_word(maps, word, kCorners[static_cast<std::size_t>(corner)]);
}

inline constexpr int kDefaultLevelGuard = 12;

inline void check_level(int n, int guard) {
  if (n < 0) throw std::invalid_argument("level must be nonnegative");
  if (n > guard) throw LevelGuard(n, guard);
}

/// Deduplicated vertex set V_n with dense ids (first-seen order over words in
/// lexicographic order, corners in order p1, p2, p3).
class VertexIndex {
 public:
  explicit VertexIndex(int level) : level_(level) {}

  int level() const { return level_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<LatticePoint>& points() const { return points_; }
  const LatticePoint& point(std::size_t id) const { return points_.at(id); }

  /// Ids of p1, p2, p3.
  const std::array<std::size_t, 3>& boundary() const { return boundary_; }

  std::optional<std::size_t> find(const LatticePoint& p) const {
    if (p.level > level_) {
      const int shift = p.level - level_;
      const std::int64_t mask = (std::int64_t{1} << shift) - 1;
      if ((p.i & mask) != 0 || (p.j & mask) != 0) return std::nullopt;
      return find({p.i >> shift, p.j >> shift, level_});
    }
    const LatticePoint q = p.at_level(level_);
    const auto it = lookup_.find(key(q));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t id(const LatticePoint& p) const {
    if (auto found = find(p)) return *found;
    throw std::out_of_range("VertexIndex: point not in V_n");
  }

  /// Inserts if absent; returns the id.
  std::size_t insert(const LatticePoint& p) {
    const LatticePoint q = p.at_level(level_);
    const auto [it, inserted] = lookup_.try_emplace(key(q), points_.size());
    if (inserted) points_.push_back(q);
    return it->second;
  }

  void set_boundary() {
    for (std::size_t k = 0; k < 3; ++k) boundary_[k] = id(kCorners[k]);
  }

 private:
  static std::uint64_t key(const LatticePoint& p) {
    return (static_cast<std::uint64_t>(p.i) << 32) | static_cast<std::uint64_t>(p.j);
  }

  int level_;
  std::vector<LatticePoint> points_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
  std::array<std::size_t, 3> boundary_{};
};

/// Corner images of every length-n word. Cell c corresponds to the word whose
/// base-3 digits (most significant first) are the map indices.
inline std::vector<std::array<LatticePoint, 3>> cell_corners(const Ifs& maps, int n,
                                                             int guard = kDefaultLevelGuard) {
  check_level(n, guard);
  std::vector<std::array<LatticePoint, 3>> cells{kCorners};
  for (int level = 1; level <= n; ++level) {
    std::vector<std::array<LatticePoint, 3>> next;
    next.reserve(cells.size() * 3);
    for (const auto& f : maps) {
      for (const auto& cell : cells) next.push_back({f(cell[0]), f(cell[1]), f(cell[2])});
    }
    cells = std::move(next);
  }
  return cells;
}

inline VertexIndex build_vertices(const Ifs& maps, int n, int guard = kDefaultLevelGuard) {
  VertexIndex index(n);
  for (const auto& cell : cell_corners(maps, n, guard)) {
    for (const auto& p : cell) index.insert(p);
  }
  index.set_boundary();
  return index;
}

/// (3^{n+1} + 3) / 2
inline std::size_t expected_vertex_count(int n) {
  std::size_t p = 3;
  for (int k = 0; k < n; ++k) p *= 3;
  return (p + 3) / 2;
}

/// Base-3 digits of a cell index, most significant first.
inline std::vector<int> word_of(std::size_t cell, int n) {
  std::vector<int> word(static_cast<std::size_t>(n));
  for (int k = n - 1; k >= 0; --k) {
    word[static_cast<std::size_t>(k)] = static_cast<int>(cell % 3);
    cell /= 3;
  }
  return word;
}

}  // namespace gasket
