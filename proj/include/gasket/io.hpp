#pragma once

/// CSV tables and JSON documents for the experiment reports. Output depends
/// only on the report contents: doubles in CSV use 17 significant digits,
/// JSON numbers use the shortest round-trip form, keys keep insertion order.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gasket/conductance.hpp"
#include "gasket/format.hpp"
#include "gasket/graphform.hpp"
#include "gasket/lattice.hpp"
#include "gasket/resistance.hpp"
#include "gasket/spectra.hpp"

namespace gasket::io {

using Json = nlohmann::ordered_json;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::string cell(double v) { return format_double(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(long v) { return std::to_string(v); }
inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(const char* s) { return s; }
inline std::string cell(const std::string& s) { return s; }

inline void write_csv(std::ostream& os, const Table& t) {
  auto line = [&os](const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) os << ',';
      os << fields[k];
    }
    os << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

/// A JSON output document: {"config": ..., "results": ..., "paper_refs": ...}.
struct Document {
  Json config = Json::object();
  Json results = Json::object();
  Json refs = Json::object();
};

inline void write_json(std::ostream& os, const Document& doc) {
  Json j = Json::object();
  j["config"] = doc.config;
  j["results"] = doc.results;
  j["paper_refs"] = doc.refs;
  os << j.dump(2) << '\n';
}

inline Json triple(const std::array<double, 3>& v) { return Json::array({v[0], v[1], v[2]}); }

inline Json optional_level(const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json point(const LatticePoint& p) { return Json::array({p.i, p.j, p.level}); }

inline Json fit(const LinearFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"points", f.points}};
}

// --- conductance ------------------------------------------------------------

inline Json to_json(const SequenceReport& r) {
  Json levels = Json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"level", l.level},
                      {"y", triple(l.y.values())},
                      {"conductance", triple(l.conductance.values())}});
  }
  return {{"variant", to_string(r.variant)},
          {"classification", to_string(r.classification)},
          {"failing_level", optional_level(r.failing_level)},
          {"failure", to_string(r.failure)},
          {"levels", std::move(levels)}};
}

/// level,x,y,z,a,b,c and, when ratios is set, a_ratio,b_ratio,c_ratio
/// (each entry over its predecessor; empty at level 0).
inline Table to_table(const SequenceReport& r, bool ratios = true) {
  Table t{{"level", "x", "y", "z", "a", "b", "c"}, {}};
  if (ratios) t.header.insert(t.header.end(), {"a_ratio", "b_ratio", "c_ratio"});
  for (std::size_t k = 0; k < r.levels.size(); ++k) {
    const auto& l = r.levels[k];
    std::vector<std::string> row{cell(l.level)};
    for (double v : l.y.values()) row.push_back(cell(v));
    for (double v : l.conductance.values()) row.push_back(cell(v));
    if (ratios) {
      for (int c = 0; c < 3; ++c) {
        row.push_back(k == 0 ? std::string{}
                             : cell(l.conductance[c] / r.levels[k - 1].conductance[c]));
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Json to_json(const DichotomyReport& r) {
  Json levels = Json::array();
  for (const auto& y : r.levels) levels.push_back(triple(y.values()));
  return {{"variant", to_string(r.variant)},
          {"classification", to_string(r.classification)},
          {"levels_reached", r.levels_reached},
          {"failing_level", optional_level(r.failing_level)},
          {"failure", to_string(r.failure)},
          {"levels", std::move(levels)}};
}

inline Table to_table(const DichotomyReport& r) {
  Table t{{"level", "x", "y", "z"}, {}};
  for (std::size_t k = 0; k < r.levels.size(); ++k) {
    const auto& v = r.levels[k].values();
    t.rows.push_back({cell(k), cell(v[0]), cell(v[1]), cell(v[2])});
  }
  return t;
}

struct HattoriRow {
  int n;
  double w;
  double ratio;  ///< y_n / x_n from the symmetric refinement
  std::array<double, 3> alpha;
};

/// w_n against y_n / x_n starting from (x0, y0) = (1, w0).
inline std::vector<HattoriRow> hattori_rows(double w0, int n_max, Variant variant = Variant::standard) {
  std::vector<HattoriRow> rows;
  double w = w0;
  double x = 1.0, y = w0;
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) {
      w = w_step(w);
      const SymmetricPair next = refine_symmetric(x, y, variant);
      x = next.x;
      y = next.y;
    }
    const double norm = 1.0 + 2.0 * w;
    rows.push_back({n, w, y / x, {1.0 / norm, w / norm, w / norm}});
  }
  return rows;
}

inline Json to_json(const std::vector<HattoriRow>& rows) {
  Json out = Json::array();
  double worst = 0.0;
  for (const auto& r : rows) {
    worst = std::max(worst, std::abs(r.w - r.ratio));
    out.push_back({{"n", r.n}, {"w", r.w}, {"y_over_x", r.ratio}, {"alpha", triple(r.alpha)}});
  }
  return {{"max_abs_difference", worst}, {"rows", std::move(out)}};
}

inline Table to_table(const std::vector<HattoriRow>& rows) {
  Table t{{"n", "w", "y_over_x", "abs_difference", "alpha1", "alpha2", "alpha3"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({cell(r.n), cell(r.w), cell(r.ratio), cell(std::abs(r.w - r.ratio)),
                      cell(r.alpha[0]), cell(r.alpha[1]), cell(r.alpha[2])});
  }
  return t;
}

// --- graphform --------------------------------------------------------------

inline Json to_json(const std::vector<TraceCheck>& checks) {
  Json rows = Json::array();
  double worst = 0.0;
  for (const auto& c : checks) {
    worst = std::max(worst, c.deviation.max_relative);
    rows.push_back({{"level", c.level},
                    {"max_relative_residual", c.deviation.max_relative},
                    {"max_absolute_on_zeros", c.deviation.max_absolute_on_zeros}});
  }
  return {{"max_relative_residual", worst}, {"levels", std::move(rows)}};
}

inline Table to_table(const std::vector<TraceCheck>& checks) {
  Table t{{"level", "max_relative_residual", "max_absolute_on_zeros"}, {}};
  for (const auto& c : checks) {
    t.rows.push_back({cell(c.level), cell(c.deviation.max_relative),
                      cell(c.deviation.max_absolute_on_zeros)});
  }
  return t;
}

// --- resistance -------------------------------------------------------------

inline Json to_json(const ResistanceTable& r) {
  Json brackets = Json::array();
  for (const auto& b : r.brackets) {
    brackets.push_back({{"scale", b.scale},
                        {"family", to_string(b.family)},
                        {"min_scaled", b.min_scaled},
                        {"max_scaled", b.max_scaled}});
  }
  return {{"variant", to_string(r.variant)},
          {"level", r.level},
          {"data", triple(r.data.values())},
          {"pairs", r.rows.size()},
          {"strong_bracket_ratio", r.strong_bracket_ratio},
          {"weak_bracket_ratio", r.weak_bracket_ratio},
          {"lower_constant", r.lower_constant},
          {"slope_all", fit(r.slope_all)},
          {"slope_strong", fit(r.slope_strong)},
          {"slope_weak", fit(r.slope_weak)},
          {"brackets", std::move(brackets)}};
}

inline Table resistance_rows_table(const std::vector<ResistanceRow>& rows) {
  Table t{{"scale", "family", "u", "v", "u_i", "u_j", "v_i", "v_j", "coord_level", "distance",
           "resistance"},
          {}};
  for (const auto& r : rows) {
    const int level = std::max(r.pu.level, r.pv.level);
    const LatticePoint a = r.pu.at_level(level), b = r.pv.at_level(level);
    t.rows.push_back({cell(r.scale), cell(to_string(r.family)), cell(r.u), cell(r.v),
                      cell(static_cast<long>(a.i)), cell(static_cast<long>(a.j)),
                      cell(static_cast<long>(b.i)), cell(static_cast<long>(b.j)), cell(level),
                      cell(r.distance), cell(r.resistance)});
  }
  return t;
}

inline Table to_table(const ResistanceTable& r) { return resistance_rows_table(r.rows); }

inline Json to_json(const DiameterReport& r) {
  return {{"weak_conductance", r.weak_conductance},
          {"partial_sums", r.partial_sums},
          {"ratios", r.ratios},
          {"max_ratio", r.max_ratio},
          {"limit", r.limit},
          {"bound", r.bound}};
}

inline Table to_table(const DiameterReport& r) {
  Table t{{"level", "b", "partial_sum", "ratio"}, {}};
  for (std::size_t k = 0; k < r.weak_conductance.size(); ++k) {
    t.rows.push_back({cell(k), cell(r.weak_conductance[k]), cell(r.partial_sums[k]),
                      k == 0 ? std::string{} : cell(r.ratios[k - 1])});
  }
  return t;
}

inline Json to_json(const TwistedTopologyReport& r) {
  Json cuts = Json::array();
  for (const auto& c : r.cut_levels) {
    cuts.push_back({{"level", c.level},
                    {"cut_points", c.cut_points},
                    {"min_cut_pair", c.min_cut_pair},
                    {"min_cut_to_u", c.min_cut_to_u}});
  }
  Json scaling = Json::array();
  for (const auto& f : r.flank_scaling) {
    scaling.push_back({{"level", f.level},
                       {"cut_points", f.cut_points},
                       {"min_scaled", f.min_scaled},
                       {"max_scaled", f.max_scaled}});
  }
  Json mid = Json::array();
  for (const auto& m : r.midpoint) {
    Json pairs = Json::array();
    for (const auto& [u, v] : m.pairs) pairs.push_back(Json::array({u, v}));
    mid.push_back({{"level", m.level}, {"pairs", std::move(pairs)}, {"ratios", m.ratios}});
  }
  return {{"level", r.level},
          {"data", triple(r.data.values())},
          {"r_p2p3", r.r_p2p3},
          {"cut_levels", std::move(cuts)},
          {"flank_scaling", std::move(scaling)},
          {"midpoint", std::move(mid)},
          {"u_pairs", r.u_pairs.size()},
          {"u_slope", fit(r.u_slope)}};
}

/// One row per (section, level) with a count and a min/max pair.
inline Table to_table(const TwistedTopologyReport& r) {
  Table t{{"section", "level", "count", "min", "max"}, {}};
  for (const auto& c : r.cut_levels) {
    t.rows.push_back({"cut_pair", cell(c.level), cell(c.cut_points), cell(c.min_cut_pair), ""});
    t.rows.push_back({"cut_to_u", cell(c.level), cell(c.cut_points), cell(c.min_cut_to_u), ""});
  }
  for (const auto& f : r.flank_scaling) {
    t.rows.push_back({"flank_scaled", cell(f.level), cell(f.cut_points), cell(f.min_scaled),
                      cell(f.max_scaled)});
  }
  for (const auto& m : r.midpoint) {
    if (m.ratios.empty()) continue;
    const auto [lo, hi] = std::minmax_element(m.ratios.begin(), m.ratios.end());
    t.rows.push_back(
        {"midpoint_ratio", cell(m.level), cell(m.ratios.size()), cell(*lo), cell(*hi)});
  }
  return t;
}

// --- spectra ----------------------------------------------------------------

/// Eigenvalue lists longer than this are left out of JSON unless forced.
inline constexpr std::size_t kEigenvalueElision = 2000;

inline Json to_json(const SpectralReport& r, bool include_runtime = false,
                    std::size_t elide_above = kEigenvalueElision) {
  Json j = {{"variant", to_string(r.variant)},
            {"data", triple(r.data.values())},
            {"level", r.level},
            {"boundary_condition", to_string(r.bc)},
            {"count", r.eigenvalues.size()}};
  if (r.eigenvalues.size() <= elide_above) {
    j["eigenvalues"] = r.eigenvalues;
  } else {
    j["eigenvalues"] = nullptr;
  }
  Json samples = Json::array();
  for (const auto& s : r.samples) samples.push_back({{"t", s.t}, {"rho", s.count}});
  j["samples"] = std::move(samples);
  if (r.fit) {
    j["fit"] = {{"slope", r.fit->slope},
                {"intercept", r.fit->intercept},
                {"window_first", r.fit->window.first},
                {"window_last", r.fit->window.last},
                {"points", r.fit->points}};
  } else {
    j["fit"] = nullptr;
  }
  j["asymmetric_exponent"] = asymmetric_exponent();
  j["symmetric_exponent"] = symmetric_exponent();
  j["spectral_dimension"] = spectral_dimension();
  j["walk_dimension"] = walk_dimension();
  if (include_runtime) j["runtime_ms"] = r.runtime_ms;
  return j;
}

inline Table to_table(const SpectralReport& r) {
  Table t{{"k", "lambda"}, {}};
  for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) {
    t.rows.push_back({cell(k + 1), cell(r.eigenvalues[k])});
  }
  return t;
}

inline Json to_json(const WeylCheck& w) {
  return {{"level", w.level},
          {"samples", w.samples},
          {"min_difference", w.min_difference},
          {"max_difference", w.max_difference}};
}

inline Json to_json(const DecimationReport& r) {
  return {{"level", r.level},
          {"count", r.count},
          {"max_relative_deviation", r.max_relative_deviation},
          {"dominance_holds", r.dominance_holds},
          {"dominance_samples", r.dominance_samples}};
}

inline Table to_table(const DecimationReport& r) {
  Table t{{"k", "restricted", "decimated", "relative_deviation"}, {}};
  const std::size_t n = std::min(r.restricted.size(), r.decimated.size());
  for (std::size_t k = 0; k < n; ++k) {
    const double d = r.decimated[k];
    t.rows.push_back({cell(k + 1), cell(r.restricted[k]), cell(d),
                      cell(std::abs(r.restricted[k] - d) / std::abs(d))});
  }
  return t;
}

inline Json to_json(const Lambda1Table& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"a0", r.a0},
                    {"b0", r.b0},
                    {"lambda1", r.lambda1},
                    {"lambda2", r.lambda2},
                    {"lambda1_over_b0", r.ratio}});
  }
  return {{"level", t.level}, {"bracket", t.bracket}, {"rows", std::move(rows)}};
}

}  // namespace gasket::io
