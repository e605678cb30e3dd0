#pragma once

// Batch driver: one subcommand per experiment, CSV or JSON on stdout or --out.
// Exit status 0 on success, 2 when the result is a negative finding
// (incompatible data, a failed check), 1 on errors.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gasket/conductance.hpp"
#include "gasket/error.hpp"
#include "gasket/graphform.hpp"
#include "gasket/io.hpp"
#include "gasket/lattice.hpp"
#include "gasket/resistance.hpp"
#include "gasket/spectra.hpp"

namespace gasket::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFinding = 2;

/// Runs f(0..count-1) with at most `jobs` tasks in flight; results keep index order.
template <class T>
std::vector<T> parallel_map(std::size_t count, int jobs, const std::function<T(std::size_t)>& f) {
  std::vector<T> out;
  out.reserve(count);
  const auto width = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t start = 0; start < count; start += width) {
    std::vector<std::future<T>> batch;
    const std::size_t stop = std::min(count, start + width);
    for (std::size_t k = start; k < stop; ++k) {
      batch.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async, f, k));
    }
    for (auto& fut : batch) out.push_back(fut.get());
  }
  return out;
}

struct Options {
  std::string variant = "standard";
  double a0 = 2.0;
  double b0 = 1.0;
  double c0 = -1.0;  ///< negative: copy b0
  double x0 = 1.0;
  double y0 = 1.0;
  double z0 = 1.0;
  double w0 = 0.5;
  int n = -1;  ///< negative: subcommand default
  std::string format;
  std::string out;
  int jobs = 1;
  unsigned long long seed = 0;
  std::size_t pairs = kPairsPerScale;
  std::string bc = "both";
  std::size_t samples = 32;
  bool timing = false;
  std::size_t elide = io::kEigenvalueElision;
  int triangle_triples = 1000;
};

struct Output {
  io::Document doc;
  io::Table table;
  bool finding = false;
};

inline ConductanceTriple data_of(const Options& o) {
  return {o.a0, o.b0, o.c0 < 0.0 ? o.b0 : o.c0};
}

inline io::Json data_config(const Options& o) {
  const ConductanceTriple t = data_of(o);
  return {{"variant", o.variant}, {"a0", t.a()}, {"b0", t.b()}, {"c0", t.c()}, {"n", o.n}};
}

inline Output run_sequence(const Options& o) {
  const SequenceReport r = conductance_sequence(data_of(o), o.n, parse_variant(o.variant));
  Output out;
  out.doc.config = data_config(o);
  out.doc.results = io::to_json(r);
  out.doc.refs = {{"recursion", "level-n conductances obtained by inverting the coarsening map"},
                  {"asymmetric_limits",
                   "standard: a ratio -> 2, b ratio -> 3/2; twisted: a ratio -> 3, b ratio -> 1"},
                  {"symmetric", "x_n = (3/5)^n x_0 on both variants"}};
  out.table = io::to_table(r);
  out.finding = r.failing_level.has_value() || r.classification == DataClass::incompatible;
  return out;
}

inline Output run_dichotomy(const Options& o) {
  const DichotomyReport r =
      dichotomy_probe(YTriple(o.x0, o.y0, o.z0), o.n, parse_variant(o.variant));
  Output out;
  out.doc.config = {{"variant", o.variant}, {"x0", o.x0}, {"y0", o.y0}, {"z0", o.z0}, {"n", o.n}};
  out.doc.results = io::to_json(r);
  out.doc.refs = {{"dichotomy",
                   "only fully symmetric data or one strong and two equal weak components "
                   "admit a positive compatible sequence"}};
  out.table = io::to_table(r);
  out.finding = r.classification == DataClass::incompatible;
  return out;
}

inline Output run_trace_check(const Options& o) {
  const Variant v = parse_variant(o.variant);
  const SequenceReport seq = conductance_sequence(data_of(o), o.n, v);
  if (seq.failing_level) throw std::invalid_argument("initial data admits no compatible sequence");
  const auto checks = parallel_map<TraceCheck>(
      static_cast<std::size_t>(o.n), o.jobs,
      [&](std::size_t k) { return trace_check(seq, static_cast<int>(k) + 1); });
  Output out;
  out.doc.config = data_config(o);
  out.doc.results = io::to_json(checks);
  out.doc.refs = {{"compatibility",
                   "the trace of the level-n form on V_{n-1} equals the level-(n-1) form"}};
  out.table = io::to_table(checks);
  return out;
}

inline Output run_harmonic(const Options& o) {
  const Variant v = parse_variant(o.variant);
  const SequenceReport seq = conductance_sequence(data_of(o), std::max(o.n, 1), v);
  if (seq.failing_level) throw std::invalid_argument("initial data admits no compatible sequence");
  const HarmonicReport r = harmonic_probe(seq, o.n);
  Output out;
  out.doc.config = data_config(o);
  out.doc.results = {{"level1_conductance", io::triple(r.level1.values())},
                     {"junctions", io::triple(r.junctions)},
                     {"predicted", r.predicted ? io::triple(*r.predicted) : io::Json(nullptr)},
                     {"energy", r.energy},
                     {"boundary_energy", r.boundary_energy}};
  out.doc.refs = {{"harmonic_values",
                   "u(p12) = u(p13) = (a1+b1)/(3a1+2b1), u(p23) = b1/(3a1+2b1); "
                   "2/5 and 1/5 when a1 = b1"}};
  out.table = {{"id", "i", "j", "coord_level", "value"}, {}};
  for (std::size_t id = 0; id < r.graph.size(); ++id) {
    const LatticePoint& p = r.graph.vertices.point(id);
    out.table.rows.push_back({io::cell(id), io::cell(static_cast<long>(p.i)),
                              io::cell(static_cast<long>(p.j)), io::cell(p.level),
                              io::cell(r.values(static_cast<Eigen::Index>(id)))});
  }
  return out;
}

inline Output run_resistance(const Options& o) {
  const Variant v = parse_variant(o.variant);
  const ConductanceTriple t0 = data_of(o);
  const ResistanceTable table = resistance_scaling(v, t0, o.n, o.pairs);

  // Triangle-inequality spot check on random vertex triples.
  const SequenceReport seq = conductance_sequence(t0, o.n, v);
  const LevelGraph g = build_graph(v, o.n);
  const ResistanceOracle oracle(assemble_energy(g, seq.conductance(o.n)));
  std::mt19937_64 rng(o.seed);
  std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
  int violations = 0;
  double worst = 0.0;
  for (int k = 0; k < o.triangle_triples; ++k) {
    const std::size_t x = pick(rng), y = pick(rng), z = pick(rng);
    const double excess = oracle(x, z) - oracle(x, y) - oracle(y, z);
    worst = std::max(worst, excess);
    if (excess > 1e-12 * std::max(1.0, oracle(x, z))) ++violations;
  }

  Output out;
  out.doc.config = data_config(o);
  out.doc.config["pairs_per_scale"] = o.pairs;
  out.doc.config["seed"] = o.seed;
  out.doc.results = io::to_json(table);
  out.doc.results["triangle_check"] = {
      {"triples", o.triangle_triples}, {"violations", violations}, {"max_excess", worst}};
  out.doc.refs = {{"metric", "effective resistance is a metric on V_n"},
                  {"asymmetric_scaling", "R across strong edges of n-cells is comparable to 2^-n"},
                  {"symmetric_scaling", "R across n-cell edges scales like (3/5)^n"}};
  out.table = io::to_table(table);
  out.finding = violations > 0;
  return out;
}

inline Output run_diameter(const Options& o) {
  const DiameterReport r = diameter_bound(data_of(o), o.n);
  Output out;
  out.doc.config = data_config(o);
  out.doc.results = io::to_json(r);
  out.doc.refs = {{"diameter", "sup R(x, p1) is bounded by a geometric series in 1/b_k"}};
  out.table = io::to_table(r);
  return out;
}

inline Output run_twisted_topology(const Options& o) {
  const TwistedTopologyReport r = twisted_topology_probe(data_of(o), o.n);
  Output out;
  out.doc.config = data_config(o);
  out.doc.config["variant"] = "twisted";
  out.doc.results = io::to_json(r);
  out.doc.refs = {{"cut_points", "cut points stay at positive mutual resistance"},
                  {"flanks", "flanking resistance lies within [R(p2,p3)/3, R(p2,p3)]"},
                  {"u_side", "strong-edge resistance scales with exponent log3/log2"}};
  out.table = io::to_table(r);
  return out;
}

inline Output run_spectra(const Options& o) {
  const Variant v = parse_variant(o.variant);
  const ConductanceTriple t0 = data_of(o);
  std::vector<BoundaryCondition> bcs;
  if (o.bc == "both") {
    bcs = {BoundaryCondition::dirichlet, BoundaryCondition::neumann};
  } else {
    bcs = {parse_boundary_condition(o.bc)};
  }
  const auto reports = parallel_map<SpectralReport>(bcs.size(), o.jobs, [&](std::size_t k) {
    return spectral_report(v, t0, o.n, bcs[k], o.samples);
  });
  Output out;
  out.doc.config = data_config(o);
  out.doc.config["bc"] = o.bc;
  out.doc.config["samples"] = o.samples;
  io::Json runs = io::Json::array();
  for (const auto& r : reports) runs.push_back(io::to_json(r, o.timing, o.elide));
  out.doc.results["spectra"] = std::move(runs);
  if (reports.size() == 2) {
    const WeylCheck w = weyl_bracket(reports[0].eigenvalues, reports[1].eigenvalues, o.n);
    out.doc.results["weyl_bracket"] = io::to_json(w);
    out.finding = w.min_difference < 0 || w.max_difference > 3;
  }
  out.doc.refs = {{"asymmetric_exponent", "rho(t) grows like t^(log3/log(9/2))"},
                  {"symmetric_exponent", "rho(t) grows like t^(log3/log5)"},
                  {"weyl_bracket", "0 <= rho_N(t) - rho_D(t) <= 3"}};
  out.table = {{"bc", "k", "lambda"}, {}};
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) {
      out.table.rows.push_back({to_string(r.bc), io::cell(k + 1), io::cell(r.eigenvalues[k])});
    }
  }
  return out;
}

inline Output run_decimation(const Options& o) {
  const DecimationReport r =
      decimation_identity_check(parse_variant(o.variant), data_of(o), o.n);
  Output out;
  out.doc.config = data_config(o);
  out.doc.results = io::to_json(r);
  out.doc.refs = {{"decimation",
                   "pinned on V_1 the level-n spectrum is three copies of 3 x the level-(n-1) "
                   "Dirichlet spectrum for data (a1,b1)"},
                  {"dominance", "rho_n(t) >= 3 rho_{n-1}(t/3)"}};
  out.table = io::to_table(r);
  out.finding = !(r.max_relative_deviation <= 1e-7) || !r.dominance_holds;
  return out;
}

inline Output run_hattori(const Options& o) {
  const auto rows = io::hattori_rows(o.w0, o.n);
  Output out;
  out.doc.config = {{"w0", o.w0}, {"n", o.n}};
  out.doc.results = io::to_json(rows);
  out.doc.refs = {{"hattori", "the walk's weak/strong ratio w_n equals y_n/x_n"}};
  out.table = io::to_table(rows);
  return out;
}

struct Subcommand {
  const char* name;
  const char* help;
  int default_n;
  const char* default_format;
  Output (*run)(const Options&);
};

inline const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> list{
      {"sequence",
       "Conductance sequence (x,y,z,a,b,c per level). Checks the symmetric (3/5)^n law and the "
       "asymmetric limits of a_{n+1}/a_n and b_{n+1}/b_n.",
       20, "csv", run_sequence},
      {"dichotomy",
       "Newton refinement from Y-side data (x0,y0,z0). Data that is neither symmetric nor "
       "one-strong-two-equal fails at a finite level (exit 2).",
       50, "json", run_dichotomy},
      {"trace-check",
       "Traces each level-n form onto V_{n-1} and reports the relative residual against the "
       "assembled level-(n-1) form.",
       5, "json", run_trace_check},
      {"harmonic",
       "Harmonic extension of boundary data (1,0,0); level-1 junction values against the closed "
       "form, and energy against the boundary energy.",
       1, "json", run_harmonic},
      {"resistance",
       "Effective resistance across cell edges at every scale; brackets of R 2^n, fitted slopes, "
       "and a seeded triangle-inequality spot check.",
       5, "json", run_resistance},
      {"diameter",
       "Chain bound on sup R(x,p1) for asymmetric data: partial sums of 1/b_k and successive "
       "ratios b_{k-1}/b_k.",
       30, "json", run_diameter},
      {"twisted-topology",
       "Twisted gasket with a0 > b0 = c0: cut-point resistances, flanking bracket "
       "[R(p2,p3)/3, R(p2,p3)], and the U-side slope.",
       5, "json", run_twisted_topology},
      {"spectra",
       "Dirichlet and Neumann spectra of L u = lambda M u; counting-function exponent fit and the "
       "Weyl bracket 0 <= rho_N - rho_D <= 3.",
       5, "json", run_spectra},
      {"decimation",
       "Spectrum pinned on V_1 against 3 x three copies of the level-(n-1) Dirichlet spectrum with "
       "data (a1,b1); checks rho_n(t) >= 3 rho_{n-1}(t/3).",
       3, "json", run_decimation},
      {"hattori",
       "Renormalized walk ratio w_n against y_n/x_n of the symmetric refinement, from w0.", 30,
       "json", run_hattori},
  };
  return list;
}

inline void emit(const Output& result, const Options& o, std::ostream& os) {
  if (o.format == "csv") {
    io::write_csv(os, result.table);
  } else {
    io::write_json(os, result.doc);
  }
}

/// Parses argv, runs the selected experiment, writes its output.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Compatible energy forms on the standard and twisted gaskets", "gasket-cli"};
  app.require_subcommand(1);
  Options o;
  const Subcommand* chosen = nullptr;

  for (const auto& sc : subcommands()) {
    CLI::App* sub = app.add_subcommand(sc.name, sc.help);
    sub->add_option("--n", o.n, "Level (default " + std::to_string(sc.default_n) + ")");
    sub->add_option("--format", o.format, std::string("csv|json (default ") + sc.default_format + ")")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", o.out, "Output file (default stdout)");
    sub->add_option("--jobs", o.jobs, "Parallel tasks")->check(CLI::PositiveNumber);
    const std::string name = sc.name;
    if (name == "dichotomy") {
      sub->add_option("--variant", o.variant)->check(CLI::IsMember({"standard", "twisted"}));
      sub->add_option("--x0", o.x0, "Y-side x0")->check(CLI::PositiveNumber);
      sub->add_option("--y0", o.y0, "Y-side y0")->check(CLI::PositiveNumber);
      sub->add_option("--z0", o.z0, "Y-side z0")->check(CLI::PositiveNumber);
    } else if (name == "hattori") {
      sub->add_option("--w0", o.w0, "Initial ratio in (0,1]")->check(CLI::Range(0.0, 1.0));
    } else {
      if (name != "twisted-topology" && name != "diameter") {
        sub->add_option("--variant", o.variant)->check(CLI::IsMember({"standard", "twisted"}));
      }
      sub->add_option("--a0", o.a0, "Conductance opposite p1")->check(CLI::PositiveNumber);
      sub->add_option("--b0", o.b0, "Conductance opposite p2")->check(CLI::PositiveNumber);
      sub->add_option("--c0", o.c0, "Conductance opposite p3 (default b0)")
          ->check(CLI::PositiveNumber);
    }
    if (name == "resistance") {
      sub->add_option("--pairs", o.pairs, "Pairs per scale and family");
      sub->add_option("--seed", o.seed, "Seed of the triangle-inequality spot check");
      sub->add_option("--triples", o.triangle_triples, "Spot-check triples");
    }
    if (name == "spectra") {
      sub->add_option("--bc", o.bc, "dirichlet|neumann|both")
          ->check(CLI::IsMember({"dirichlet", "neumann", "both"}));
      sub->add_option("--samples", o.samples, "Counting-function samples");
      sub->add_flag("--timing", o.timing, "Include solve times (output no longer reproducible)");
      sub->add_option("--elide", o.elide, "Omit eigenvalue lists longer than this from JSON");
    }
    sub->callback([&chosen, &sc] { chosen = &sc; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::ostringstream help;
      app.exit(e, help, help);
      out << help.str();
      return kExitOk;
    }
    std::ostringstream msg;
    app.exit(e, msg, msg);
    err << msg.str();
    return kExitError;
  }

  if (o.n < 0) o.n = chosen->default_n;
  if (o.format.empty()) o.format = chosen->default_format;
  if (std::string(chosen->name) == "twisted-topology") o.variant = "twisted";
  if (std::string(chosen->name) == "diameter") o.variant = "standard";

  try {
    const Output result = chosen->run(o);
    if (o.out.empty()) {
      emit(result, o, out);
    } else {
      std::ofstream file(o.out, std::ios::binary);
      if (!file) throw std::runtime_error("cannot open " + o.out);
      emit(result, o, file);
    }
    return result.finding ? kExitFinding : kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.name() << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace gasket::cli
