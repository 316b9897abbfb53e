#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "scrambler/config.hpp"
#include "scrambler/errors.hpp"
#include "scrambler/experiments.hpp"
#include "scrambler/io.hpp"

using namespace scrambler;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("scrambler_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig small(const std::string& name, const std::string& text) {
  return make_experiment_config(name, Config::parse_string(text));
}

bool same_table(const Table& a, const Table& b) {
  if (a.columns != b.columns || a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    for (std::size_t j = 0; j < a.rows[i].size(); ++j) {
      const double x = a.rows[i][j], y = b.rows[i][j];
      if (!(x == y || (std::isnan(x) && std::isnan(y)))) return false;
    }
  return true;
}

}  // namespace

TEST(Config, ParsesCommentsListsAndTypes) {
  const auto c = Config::parse_string("# header\nL = 6  # inline\nLs = 4, 5 ,6\nflag = yes\n\nname=  a b \n");
  EXPECT_EQ(c.get_int("L", 0), 6);
  EXPECT_EQ(c.get_list("Ls", {}), (std::vector<std::string>{"4", "5", "6"}));
  EXPECT_TRUE(c.get_bool("flag", false));
  EXPECT_EQ(c.get_string("name", ""), "a b");
  EXPECT_EQ(c.get_double("missing", 2.5), 2.5);
  EXPECT_TRUE(c.unused_keys().empty());
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(Config::parse_string("L 6\n"), ValidationError);
  EXPECT_THROW(Config::parse_string("L = 6\nL = 7\n"), ValidationError);
  EXPECT_THROW(Config::parse_string(" = 3\n"), ValidationError);
  const auto c = Config::parse_string("L = 6.5\nx = abc\nb = maybe\n");
  EXPECT_THROW(c.get_int("L", 0), ValidationError);
  EXPECT_THROW(c.get_double("x", 0), ValidationError);
  EXPECT_THROW(c.get_bool("b", false), ValidationError);
  EXPECT_THROW(Config::load("/nonexistent/file.cfg"), ValidationError);
}

TEST(Config, AngleSyntax) {
  EXPECT_DOUBLE_EQ(parse_angle("x", "pi"), kPi);
  EXPECT_DOUBLE_EQ(parse_angle("x", "pi/5"), kPi / 5);
  EXPECT_DOUBLE_EQ(parse_angle("x", "3*pi/8"), 3 * kPi / 8);
  EXPECT_DOUBLE_EQ(parse_angle("x", " 0.25 "), 0.25);
  EXPECT_THROW(parse_angle("x", "pi/0"), ValidationError);
  EXPECT_THROW(parse_angle("x", "2pi"), ValidationError);
  EXPECT_THROW(parse_angle("x", "pi*2"), ValidationError);
}

TEST(ExperimentConfig, DefaultsPerExperiment) {
  const auto s = small("stability", "");
  EXPECT_EQ(s.L, 8);
  EXPECT_EQ(s.realizations, 50);
  ASSERT_EQ(s.taus.size(), 5u);
  EXPECT_DOUBLE_EQ(s.taus[4], kPi / 10);
  EXPECT_EQ(small("concentration", "").Ls, (std::vector<int>{4, 5, 6, 7, 8}));
  EXPECT_EQ(small("fig1c", "").L, 10);
  EXPECT_EQ(small("fig2b", "").bins, 1024);
  EXPECT_EQ(small("fig2a", "sweep_mode = independent").sweep_mode, SweepMode::independent);
}

TEST(ExperimentConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(small("fig1c", "Lx = 4"), ValidationError);
  EXPECT_THROW(small("fig1c", "realizations = 0"), ValidationError);
  EXPECT_THROW(small("fig1c", "boundary = open"), ValidationError);
  EXPECT_THROW(small("stability", "taus = "), ValidationError);
  EXPECT_THROW(small("fig2a", "method = fast"), DomainError);
  EXPECT_THROW(small("unknown", ""), ValidationError);
  EXPECT_THROW(small("concentration", "Ls = 1, 4"), ValidationError);
}

TEST(EnsembleStats, HandComputedValues) {
  const Series ref = {cplx(2.0), cplx(1e-9), cplx(-1.0)};
  const std::vector<Series> reals = {{cplx(1.0), cplx(0.0), cplx(-1.5)}, {cplx(3.0), cplx(0.0), cplx(-0.5)}};
  const auto s = ensemble_stats(reals, ref, 1e-6);
  EXPECT_DOUBLE_EQ(s.mean[0].real(), 2.0);
  EXPECT_DOUBLE_EQ(s.rel_dev[0], 0.5);
  EXPECT_DOUBLE_EQ(s.rel_var[0], 0.25);
  EXPECT_TRUE(s.masked[1]);
  EXPECT_TRUE(std::isnan(s.rel_dev[1]));
  EXPECT_DOUBLE_EQ(s.rel_dev[2], 0.5);
  EXPECT_DOUBLE_EQ(s.rel_var[2], 0.25);
  EXPECT_DOUBLE_EQ(window_mean(s.rel_dev, s.masked, 0, 2), 0.5);
  EXPECT_THROW(window_mean(s.rel_dev, s.masked, 1, 1), DomainError);
  EXPECT_THROW(ensemble_stats({{cplx(1.0)}}, ref, 1e-6), ShapeError);
}

TEST(Io, CsvRoundTripIsBitExact) {
  Table t;
  t.columns = {"a", "b"};
  t.add_row({0.1, -1.0 / 3});
  t.add_row({1e-300, std::numeric_limits<double>::quiet_NaN()});
  EXPECT_THROW(t.add_row({1.0}), ShapeError);
  const auto dir = scratch_dir("io");
  write_csv(dir / "t.csv", t);
  EXPECT_TRUE(same_table(read_csv(dir / "t.csv"), t));
  EXPECT_EQ(t.column("b")[0], -1.0 / 3);
  EXPECT_THROW(t.column("c"), DomainError);
}

TEST(Experiments, StabilityDeterministicAndThreadInvariant) {
  const std::string cfg = "L = 3\nrealizations = 4\nt_max = 8\ntaus = pi/4, pi/6\nwindow_lo = 2\nwindow_hi = 8\n";
  auto e1 = small("stability", cfg);
  auto e2 = small("stability", cfg + "threads = 2\n");
  const auto a = run_stability(e1), b = run_stability(e1), c = run_stability(e2);
  EXPECT_TRUE(same_table(a.series, b.series));
  EXPECT_TRUE(same_table(a.series, c.series));
  EXPECT_TRUE(same_table(a.realizations, c.realizations));
  EXPECT_EQ(a.series.rows.size(), 2u * 9u);
  EXPECT_EQ(a.realizations.rows.size(), 2u * 4u * 9u);
  EXPECT_EQ(a.meta.at("summary").size(), 2u);
  EXPECT_EQ(a.skipped, 0);
}

TEST(Experiments, EnsembleMeanRecomputableFromRealizations) {
  const auto rb = run_stability(small("stability", "L = 3\nrealizations = 3\nt_max = 5\ntaus = pi/5\n"));
  const auto c2 = rb.realizations.column("c2");
  const auto mean = rb.series.column("c2_mean");
  for (int t = 0; t <= 5; ++t) {
    double s = 0;
    for (int r = 0; r < 3; ++r) s += c2[r * 6 + t];
    EXPECT_NEAR(s / 3, mean[t], 1e-15);
  }
}

TEST(Experiments, ConcentrationSkipsOversizedBaths) {
  auto e = small("concentration", "Ls = 3, 11\nrealizations = 2\nt_max = 4\nt_report = 3\nmax_dim = 1024\n");
  const auto rb = run_concentration(e);
  EXPECT_EQ(rb.skipped, 2);
  EXPECT_EQ(rb.meta.at("summary")[1].at("skipped"), 2);
  auto all = small("concentration", "Ls = 11\nrealizations = 1\nt_max = 2\nmax_dim = 1024\n");
  EXPECT_THROW(run_concentration(all), CapacityError);
}

TEST(Experiments, DualUnitaryBathIsCloseToClosedFormAtSmallSize) {
  // exact at t <= 1 for every bath; finite-size deviations appear later
  const auto rb = run_stability(small("stability", "L = 4\nrealizations = 2\nt_max = 3\ntaus = pi/4\n"));
  const auto dev = rb.series.column("rel_dev");
  EXPECT_LT(dev[0], 1e-12);
  EXPECT_LT(dev[1], 1e-12);
  EXPECT_TRUE(rb.meta.at("summary")[0].at("mean_rel_dev").is_null());
}

TEST(Experiments, AllDriversWriteTheirFiles) {
  const auto dir = scratch_dir("drivers");
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"fig1c", "L = 3\nt_max = 4\nrealizations = 2\n"},
      {"fig2a", "L = 3\nt_max = 4\n"},
      {"fig2b", "L = 3\nbins = 32\n"},
      {"stability", "L = 3\nrealizations = 2\nt_max = 6\ntaus = pi/4, pi/8\nwindow_lo = 0\nwindow_hi = 6\n"},
      {"concentration", "Ls = 2, 3\nrealizations = 2\nt_max = 6\nt_report = 2\n"}};
  for (auto& [name, text] : runs) {
    auto e = small(name, text);
    e.out_dir = dir;
    const auto rb = run_experiment(e);
    ASSERT_TRUE(fs::exists(dir / (name + "_series.csv"))) << name;
    ASSERT_TRUE(fs::exists(dir / (name + "_meta.json"))) << name;
    EXPECT_TRUE(same_table(read_csv(dir / (name + "_series.csv")), rb.series)) << name;
    std::ifstream is(dir / (name + "_meta.json"));
    const auto meta = nlohmann::json::parse(is);
    EXPECT_EQ(meta.at("config").at("name"), name);
    EXPECT_TRUE(meta.contains("lambda"));
  }
  EXPECT_TRUE(fs::exists(dir / "stability_realizations.csv"));
}

TEST(Experiments, Fig2aMomentMatchesDirectSimulation) {
  const auto rb = run_fig2a(small("fig2a", "L = 4\nt_max = 6\n"));
  const auto m = rb.series.column("c2_eth_moment"), d = rb.series.column("c2_direct");
  for (std::size_t t = 0; t < m.size(); ++t) EXPECT_NEAR(m[t], d[t], 1e-10);
}

TEST(Experiments, Fig1cAnalyticColumnsSatisfyMomentCumulant) {
  const auto rb = run_fig1c(small("fig1c", "L = 3\nt_max = 10\n"));
  const auto c2 = rb.series.column("c2_analytic"), k4 = rb.series.column("k4_analytic"),
             k2sq = rb.series.column("two_k2sq_analytic");
  for (std::size_t t = 0; t < c2.size(); ++t) EXPECT_NEAR(c2[t], k4[t] + k2sq[t], 1e-13);
}
