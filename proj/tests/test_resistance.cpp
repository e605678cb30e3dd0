#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gasket/resistance.hpp"
#include "oracles.hpp"

using namespace gasket;

namespace {

struct Setup {
  LevelGraph graph;
  EnergyForm form;
};

Setup level_form(Variant v, const ConductanceTriple& t0, int n) {
  const SequenceReport seq = conductance_sequence(t0, n, v);
  Setup s{build_graph(v, n), {}};
  s.form = assemble_energy(s.graph, seq.conductance(n));
  return s;
}

// Grounded solve on a dense copy of the Laplacian.
double oracle_resistance(const EnergyForm& f, std::size_t x, std::size_t y) {
  const Eigen::MatrixXd l = f.dense();
  const std::size_t n = f.size();
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < n; ++k) {
    if (k != y) keep.push_back(k);
  }
  oracle::Matrix a = oracle::zeros(keep.size());
  std::vector<double> b(keep.size(), 0.0);
  std::size_t slot = 0;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    if (keep[r] == x) slot = r;
    for (std::size_t c = 0; c < keep.size(); ++c) {
      a[r][c] = l(static_cast<Eigen::Index>(keep[r]), static_cast<Eigen::Index>(keep[c]));
    }
  }
  b[slot] = 1.0;
  return oracle::solve(a, b)[slot];
}

}  // namespace

TEST(EffectiveResistance, LevelZeroClosedForms) {
  const auto sym = level_form(Variant::standard, {1.0, 1.0, 1.0}, 0);
  EXPECT_NEAR(effective_resistance(sym.form, 0, 1), 2.0 / 3.0, 1e-14);
  const auto asym = level_form(Variant::standard, {2.0, 1.0, 1.0}, 0);
  EXPECT_NEAR(effective_resistance(asym.form, 1, 2), 2.0 / 5.0, 1e-14);
  EXPECT_NEAR(effective_resistance(asym.form, 0, 1), 1.0 / (1.0 + 1.0 / (1.0 + 0.5)), 1e-14);
}

TEST(EffectiveResistance, SymmetricBoundaryValueHoldsAtEveryLevel) {
  for (Variant v : {Variant::standard, Variant::twisted}) {
    for (int n = 0; n <= 6; ++n) {
      const auto s = level_form(v, {1.0, 1.0, 1.0}, n);
      const auto& b = s.graph.boundary();
      EXPECT_NEAR(effective_resistance(s.form, b[0], b[1]), 2.0 / 3.0, 1e-10) << n;
    }
  }
}

TEST(EffectiveResistance, BoundaryValuesAreLevelInvariant) {
  for (Variant v : {Variant::standard, Variant::twisted}) {
    const ConductanceTriple t0{4.0, 1.0, 1.0};
    const auto base = level_form(v, t0, 0);
    for (int n = 1; n <= 5; ++n) {
      const auto s = level_form(v, t0, n);
      const auto& b = s.graph.boundary();
      for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
          EXPECT_NEAR(effective_resistance(s.form, b[i], b[j]),
                      effective_resistance(base.form, static_cast<std::size_t>(i),
                                           static_cast<std::size_t>(j)),
                      1e-10);
        }
      }
    }
  }
}

TEST(EffectiveResistance, TraceSolveOracleAndDenseAgree) {
  const auto s = level_form(Variant::twisted, {3.0, 1.0, 1.0}, 3);
  const ResistanceOracle R(s.form);
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> pick(0, s.form.size() - 1);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t x = pick(rng), y = pick(rng);
    if (x == y) continue;
    const double r = effective_resistance(s.form, x, y);
    EXPECT_NEAR(effective_resistance_solve(s.form, x, y), r, 1e-10);
    EXPECT_NEAR(R(x, y), r, 1e-10);
    EXPECT_NEAR(oracle_resistance(s.form, x, y), r, 1e-10);
  }
}

TEST(EffectiveResistance, RejectsCoincidentPoints) {
  const auto s = level_form(Variant::standard, {1.0, 1.0, 1.0}, 1);
  EXPECT_THROW(effective_resistance(s.form, 2, 2), std::invalid_argument);
  EXPECT_THROW(effective_resistance_solve(s.form, 2, 2), std::invalid_argument);
  const ResistanceOracle R(s.form);
  EXPECT_EQ(R(2, 2), 0.0);
  EXPECT_THROW(R(0, 99), std::out_of_range);
}

TEST(ResistanceOracle, DimensionGuard) {
  const auto s = level_form(Variant::standard, {1.0, 1.0, 1.0}, 3);
  EXPECT_THROW(ResistanceOracle(s.form, 10), DimensionGuard);
}

TEST(ResistanceOracle, IsAMetric) {
  for (Variant v : {Variant::standard, Variant::twisted}) {
    const auto s = level_form(v, {5.0, 2.0, 2.0}, 4);
    const ResistanceOracle R(s.form);
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> pick(0, s.form.size() - 1);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t x = pick(rng), y = pick(rng), z = pick(rng);
      EXPECT_NEAR(R(x, y), R(y, x), 1e-12);
      if (x != y) EXPECT_GT(R(x, y), 0.0);
      EXPECT_LE(R(x, z), R(x, y) + R(y, z) + 1e-12);
    }
  }
}

TEST(ResistanceOracle, RayleighMonotonicity) {
  const auto s = level_form(Variant::standard, {2.0, 1.0, 1.0}, 3);
  const ResistanceOracle base(s.form);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> edge(0, s.graph.edges.size() - 1);
  std::uniform_int_distribution<std::size_t> pick(0, s.form.size() - 1);
  for (int trial = 0; trial < 20; ++trial) {
    const Edge& e = s.graph.edges[edge(rng)];
    EnergyForm f = s.form;
    const auto u = static_cast<Eigen::Index>(e.u), v = static_cast<Eigen::Index>(e.v);
    f.laplacian.coeffRef(u, u) += 0.7;
    f.laplacian.coeffRef(v, v) += 0.7;
    f.laplacian.coeffRef(u, v) -= 0.7;
    f.laplacian.coeffRef(v, u) -= 0.7;
    const ResistanceOracle stronger(f);
    EXPECT_LT(stronger(e.u, e.v), base(e.u, e.v));
    for (int k = 0; k < 10; ++k) {
      const std::size_t x = pick(rng), y = pick(rng);
      EXPECT_LE(stronger(x, y), base(x, y) + 1e-12);
    }
  }
}

TEST(LeastSquares, ExactLineAndErrors) {
  const std::vector<double> xs{0.0, 1.0, 2.0, 3.0}, ys{1.0, 3.0, 5.0, 7.0};
  const LinearFit fit = least_squares(xs, ys);
  EXPECT_NEAR(fit.slope, 2.0, 1e-14);
  EXPECT_NEAR(fit.intercept, 1.0, 1e-14);
  EXPECT_EQ(fit.points, 4u);
  const std::vector<double> one{1.0};
  EXPECT_THROW(least_squares(one, one), InsufficientData);
  const std::vector<double> flat{2.0, 2.0, 2.0}, three{1.0, 2.0, 3.0};
  EXPECT_THROW(least_squares(flat, three), InsufficientData);
  EXPECT_THROW(least_squares(xs, three), InsufficientData);
}

TEST(ResistanceScaling, SymmetricDataScalesLikeTheCells) {
  const ResistanceTable t = resistance_scaling(Variant::standard, {1.0, 1.0, 1.0}, 4);
  EXPECT_EQ(t.strong_bracket_ratio, 0.0);
  EXPECT_GT(t.lower_constant, 0.0);
  EXPECT_LT(t.weak_bracket_ratio, 20.0);
  for (const auto& row : t.rows) EXPECT_EQ(row.family, PairFamily::weak);
  EXPECT_GT(t.slope_all.slope, 0.5);
  EXPECT_LT(t.slope_all.slope, 1.0);
}

TEST(ResistanceScaling, AsymmetricBracketsStayBounded) {
  for (Variant v : {Variant::standard, Variant::twisted}) {
    const ResistanceTable t = resistance_scaling(v, {2.0, 1.0, 1.0}, 4);
    EXPECT_GT(t.strong_bracket_ratio, 0.0);
    EXPECT_LE(t.strong_bracket_ratio, 20.0);
    EXPECT_GT(t.lower_constant, 0.0);
    for (const auto& br : t.brackets) {
      EXPECT_LE(br.min_scaled, br.max_scaled);
      EXPECT_GE(br.scale, 0);
      EXPECT_LE(br.scale, 4);
    }
    for (const auto& row : t.rows) {
      EXPECT_GT(row.resistance, 0.0);
      EXPECT_NEAR(row.distance, distance(row.pu, row.pv), 1e-15);
    }
  }
}

TEST(ResistanceScaling, PairCapPerScale) {
  const ResistanceTable t = resistance_scaling(Variant::standard, {2.0, 1.0, 1.0}, 4, 5);
  for (int n = 0; n <= 4; ++n) {
    for (auto fam : {PairFamily::strong, PairFamily::weak}) {
      const auto count = std::count_if(t.rows.begin(), t.rows.end(), [&](const ResistanceRow& r) {
        return r.scale == n && r.family == fam;
      });
      EXPECT_LE(count, 5);
    }
  }
}

TEST(ResistanceScaling, RejectsIncompatibleData) {
  EXPECT_THROW(resistance_scaling(Variant::standard, {3.0, 2.0, 1.0}, 3), std::invalid_argument);
}

TEST(DiameterBound, RatiosBelowThirteenFifteenths) {
  const DiameterReport rep = diameter_bound({4.0, 1.0, 1.0}, 30);
  ASSERT_EQ(rep.ratios.size(), 30u);
  EXPECT_LE(rep.max_ratio, 13.0 / 15.0 + 1e-12);
  EXPECT_LE(rep.limit, rep.bound);
  for (std::size_t k = 1; k < rep.partial_sums.size(); ++k) {
    EXPECT_GT(rep.partial_sums[k], rep.partial_sums[k - 1]);
  }
}

TEST(DiameterBound, LimitShrinksWhenWeakConductanceGrows) {
  const DiameterReport a = diameter_bound({4.0, 1.0, 1.0}, 30);
  const DiameterReport b = diameter_bound({4.0, 2.0, 2.0}, 30);
  EXPECT_LT(b.limit, a.limit);
  EXPECT_NEAR(b.limit / a.limit, 0.5, 0.1);
}

TEST(DiameterBound, RejectsSymmetricData) {
  EXPECT_THROW(diameter_bound({1.0, 1.0, 1.0}, 5), std::invalid_argument);
}

TEST(CutPoints, CountsAndMembership) {
  const LevelGraph top = build_graph(Variant::twisted, 4);
  const CutPointSet cuts = build_cut_points(top);
  ASSERT_EQ(cuts.w.size(), 5u);
  for (int n = 0; n <= 4; ++n) {
    const auto k = static_cast<std::size_t>(n);
    EXPECT_EQ(cuts.w_raw_count[k], static_cast<std::size_t>(std::pow(3, n)));
    EXPECT_LE(cuts.w[k].size(), cuts.w_raw_count[k]);
    EXPECT_TRUE(std::is_sorted(cuts.w[k].begin(), cuts.w[k].end()));
  }
  EXPECT_EQ(cuts.w[0], std::vector<std::size_t>{top.boundary()[0]});
}

TEST(TwistedTopology, ProbeInvariants) {
  const TwistedTopologyReport rep = twisted_topology_probe({2.0, 1.0, 1.0}, 4);
  EXPECT_NEAR(rep.r_p2p3, 2.0 / 5.0, 1e-10);
  ASSERT_EQ(rep.cut_levels.size(), 4u);
  for (const auto& c : rep.cut_levels) {
    EXPECT_GT(c.min_cut_pair, 0.0);
    EXPECT_GT(c.min_cut_to_u, 0.0);
  }
  for (const auto& m : rep.midpoint) {
    for (double r : m.ratios) {
      EXPECT_GE(r, 1.0 / 3.0 - 1e-9);
      EXPECT_LE(r, 1.0 + 1e-9);
    }
  }
  for (const auto& f : rep.flanks) EXPECT_LE(f.min_resistance, f.max_resistance);
  EXPECT_GT(rep.u_slope.slope, 1.0);
}

TEST(TwistedTopology, RejectsWrongData) {
  EXPECT_THROW(twisted_topology_probe({1.0, 2.0, 2.0}, 3), std::invalid_argument);
  EXPECT_THROW(twisted_topology_probe({1.0, 1.0, 1.0}, 3), std::invalid_argument);
  EXPECT_THROW(twisted_topology_probe({2.0, 1.0, 1.0}, 0), std::invalid_argument);
}
