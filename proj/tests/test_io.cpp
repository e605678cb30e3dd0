#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "gasket/io.hpp"

using namespace gasket;

TEST(Csv, HeaderAndRows) {
  io::Table t{{"a", "b"}, {{"1", "2"}, {"3", ""}}};
  std::ostringstream os;
  io::write_csv(os, t);
  EXPECT_EQ(os.str(), "a,b\n1,2\n3,\n");
}

TEST(Csv, SequenceTableShape) {
  const SequenceReport seq = conductance_sequence({2.0, 1.0, 1.0}, 3, Variant::standard);
  const io::Table t = io::to_table(seq);
  ASSERT_EQ(t.header.size(), 10u);
  EXPECT_EQ(t.header.front(), "level");
  EXPECT_EQ(t.header.back(), "c_ratio");
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[0][4], "2");
  EXPECT_EQ(t.rows[0][7], "");
  for (const auto& r : t.rows) EXPECT_EQ(r.size(), t.header.size());
  EXPECT_EQ(io::to_table(seq, false).header.size(), 7u);
}

TEST(Format, RoundTripsDoubles) {
  for (double v : {0.1, 2.0 / 3.0, 1e-300, 12345.678901234567, -0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(2.0), "2");
}

TEST(Json, DocumentKeysInOrder) {
  io::Document doc;
  doc.config["n"] = 3;
  doc.results["x"] = 1.5;
  std::ostringstream os;
  io::write_json(os, doc);
  const auto j = io::Json::parse(os.str());
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"config", "results", "paper_refs"}));
  EXPECT_EQ(j["results"]["x"], 1.5);
}

TEST(Json, SequenceIsDeterministic) {
  const SequenceReport seq = conductance_sequence({4.0, 1.0, 1.0}, 10, Variant::twisted);
  const std::string a = io::to_json(seq).dump();
  const std::string b = io::to_json(conductance_sequence({4.0, 1.0, 1.0}, 10, Variant::twisted)).dump();
  EXPECT_EQ(a, b);
  const auto j = io::to_json(seq);
  EXPECT_EQ(j["variant"], "twisted");
  EXPECT_EQ(j["levels"].size(), 11u);
  EXPECT_TRUE(j["failing_level"].is_null());
}

TEST(Json, SpectralElisionAndRuntime) {
  const SpectralReport rep =
      spectral_report(Variant::standard, {2.0, 1.0, 1.0}, 3, BoundaryCondition::dirichlet, 4);
  const auto full = io::to_json(rep);
  EXPECT_EQ(full["eigenvalues"].size(), rep.eigenvalues.size());
  EXPECT_FALSE(full.contains("runtime_ms"));
  const auto elided = io::to_json(rep, true, 5);
  EXPECT_TRUE(elided["eigenvalues"].is_null());
  EXPECT_EQ(elided["count"], rep.eigenvalues.size());
  EXPECT_TRUE(elided.contains("runtime_ms"));
}

TEST(Hattori, RowsStartAtW0) {
  const auto rows = io::hattori_rows(0.5, 5);
  ASSERT_EQ(rows.size(), 6u);
  const auto j = io::to_json(rows);
  EXPECT_EQ(j["rows"].size(), 6u);
  EXPECT_LT(j["max_abs_difference"].get<double>(), 1e-12);
  EXPECT_EQ(rows[0].w, 0.5);
  EXPECT_EQ(io::to_table(rows).rows.size(), 6u);
}
