#include <gtest/gtest.h>

#include <sstream>

#include "angcorr/csv_io.hpp"

using namespace angcorr;

TEST(FormatDouble, RoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 12744.0}) {
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
  EXPECT_EQ(io::format_rounded(11.450000000000001), "11.45");
}

TEST(ReadTable, ParsesMetaAndRows) {
  std::istringstream in("# tool: x\n# seed: 4\ntheta_deg,C\n0,1.5\n\n1, 2e-3\n");
  const auto t = io::read_table(in, "mem");
  EXPECT_EQ(t.meta.at("seed"), "4");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.row_lines[1], 6u);
  EXPECT_DOUBLE_EQ(*t.rows[1][1], 2e-3);
}

TEST(ReadTable, EmptyFieldsAreMissing) {
  std::istringstream in("a,b\n1,\n");
  const auto t = io::read_table(in, "mem");
  EXPECT_FALSE(t.rows[0][1]);
}

TEST(ReadTable, ReportsLineOfBadField) {
  std::istringstream in("theta_deg,C\n0,1\n1,abc\n");
  try {
    io::read_table(in, "bad.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("bad.csv:3"), std::string::npos);
  }
}

TEST(ReadTable, WrongFieldCountAndNonFinite) {
  std::istringstream a("x,y\n1,2,3\n");
  EXPECT_THROW(io::read_table(a, "m"), ParseError);
  std::istringstream b("x,y\n1,nan\n");
  EXPECT_THROW(io::read_table(b, "m"), ParseError);
  std::istringstream c("# only comments\n");
  EXPECT_THROW(io::read_table(c, "m"), ParseError);
}

TEST(Correlation, WriteReadRoundTrip) {
  TabulatedCorrelation c;
  c.theta = {0.0, deg_to_rad(0.5), deg_to_rad(1.0)};
  c.values = {3.0, 1.0 / 7.0, -1e-9};
  c.sigma = std::vector<double>{0.1, 0.2, 0.3};
  std::stringstream ss;
  io::write_correlation(ss, c, {{"k", "v"}});
  const auto back = io::correlation_from_table(io::read_table(ss, "mem"), "mem");
  EXPECT_EQ(back.values, c.values);
  EXPECT_EQ(*back.sigma, *c.sigma);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(back.theta[i], c.theta[i], 1e-15);
}

TEST(Correlation, RejectsUnsortedAngles) {
  std::istringstream in("theta_deg,C\n1,1\n0.5,1\n");
  try {
    io::correlation_from_table(io::read_table(in, "m"), "m");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Spectrum, WriteReadRoundTrip) {
  PowerSpectrum s;
  s.grid = {0, 1, 2};
  s.values = {1e5, 0.25, -3.0};
  std::stringstream ss;
  io::write_spectrum(ss, s, {});
  const auto t = io::read_table(ss, "mem");
  EXPECT_EQ(t.meta.at("grid"), "multipole");
  const auto back = io::spectrum_from_table(t, "mem");
  EXPECT_EQ(back.values, s.values);
  EXPECT_EQ(back.kind, GridKind::Multipole);

  std::istringstream f("k,P_k\n0.5,1\n1.5,2\n");
  EXPECT_EQ(io::spectrum_from_table(io::read_table(f, "m"), "m").kind, GridKind::Frequency);
  std::istringstream g("x,y\n0,1\n");
  EXPECT_THROW(io::spectrum_from_table(io::read_table(g, "m"), "m"), ParseError);
}

TEST(Config, ParsesKeyValueLines) {
  std::istringstream in("# comment\nseed = 7\n  threads=2   # trailing\n\nmodel = c2\n");
  const auto c = io::read_config(in, "cfg");
  EXPECT_EQ(c.at("seed"), "7");
  EXPECT_EQ(c.at("threads"), "2");
  EXPECT_EQ(c.at("model"), "c2");
}

TEST(Config, Errors) {
  std::istringstream dup("a = 1\na = 2\n");
  try {
    io::read_config(dup, "cfg");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream noeq("a 1\n");
  EXPECT_THROW(io::read_config(noeq, "cfg"), ParseError);
  EXPECT_THROW(io::read_config_file("/nonexistent/file.cfg"), ParseError);
}
