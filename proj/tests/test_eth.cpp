#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "scrambler/channel.hpp"
#include "scrambler/circuit.hpp"
#include "scrambler/errors.hpp"
#include "scrambler/eth.hpp"
#include "scrambler/rng.hpp"

using namespace scrambler;

namespace {

Mat random_matrix(std::int64_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  Mat m(n, n);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j) m(i, j) = cplx(rng.normal(), rng.normal());
  return m;
}

struct Setup {
  CircuitSpec spec;
  ClosedFormConstants c;
  SpectralData sd;
};

Setup make_setup(int L, std::uint64_t seed) {
  const auto pg = paper_boundary_gate();
  Setup s{cartan_bath_spec(L, pg.gate, seed, SweepMode::shared), closed_form_constants(pg.gate), {}};
  s.sd = diagonalize(build_floquet(s.spec), s.c.a, s.c.b);
  return s;
}

}  // namespace

TEST(Diagonalize, ReconstructsFloquetOperator) {
  const auto s = make_setup(4, 3);
  EXPECT_EQ(s.sd.D, 32);
  EXPECT_LT(s.sd.reconstruction_residual, 1e-12);
  EXPECT_LT(s.sd.basis_residual, 1e-12);
  for (Eigen::Index i = 0; i < s.sd.phases.size(); ++i) {
    EXPECT_GT(s.sd.phases(i), -kPi);
    EXPECT_LE(s.sd.phases(i), kPi);
  }
  // matrix elements preserve the trace and Frobenius norm of the lifted observable
  const Mat lifted = lift_observable(s.c.a, 32);
  EXPECT_NEAR(std::abs(s.sd.elem_a.trace() - lifted.trace()), 0.0, 1e-12);
  EXPECT_NEAR(s.sd.elem_a.norm(), lifted.norm(), 1e-12);
}

TEST(Diagonalize, Guards) {
  const auto pg = paper_boundary_gate();
  const auto c = closed_form_constants(pg.gate);
  const auto fl = build_floquet(cartan_bath_spec(4, pg.gate, 1, SweepMode::shared));
  EXPECT_THROW(diagonalize(fl, c.a, c.b, 16), CapacityError);
  EXPECT_THROW(lift_observable(Mat::Identity(3, 3), 32), ShapeError);
}

TEST(DistinctCycleSum, MatchesNaiveOnRandomMatrices) {
  for (std::int64_t n : {5, 9, 12}) {
    const Mat m1 = random_matrix(n, 1), m2 = random_matrix(n, 2), m3 = random_matrix(n, 3), m4 = random_matrix(n, 4);
    const cplx ie = distinct_cycle_sum(m1, m2, m3, m4, m1 * m2, m2 * m3, m3 * m4, m4 * m1);
    const cplx naive = distinct_cycle_sum_naive(m1, m2, m3, m4);
    EXPECT_LT(std::abs(ie - naive), 1e-10 * std::abs(naive)) << "n=" << n;
  }
}

TEST(DistinctCycleSum, NaiveIsThreadInvariant) {
  const Mat m = random_matrix(10, 7);
  EXPECT_EQ(distinct_cycle_sum_naive(m, m, m, m, 1), distinct_cycle_sum_naive(m, m, m, m, 3));
}

TEST(EthTime, NaiveEqualsInclusionExclusionAtD16) {
  const auto s = make_setup(3, 5);
  ASSERT_EQ(s.sd.D, 16);
  const auto ie = eth_cumulants_time(s.sd, 10, EthMethod::inclusion_exclusion);
  const auto naive = eth_cumulants_time(s.sd, 10, EthMethod::naive);
  for (int t = 0; t <= 10; ++t) {
    EXPECT_LT(std::abs(ie.k4[t] - naive.k4[t]), 1e-10) << "t=" << t;
    EXPECT_LT(std::abs(ie.k2[t] - naive.k2[t]), 1e-12) << "t=" << t;
  }
}

TEST(EthTime, MomentEqualsDirectOtoc) {
  for (int L : {3, 4}) {
    const auto s = make_setup(L, 8);
    const auto ts = eth_cumulants_time(s.sd, 8, EthMethod::inclusion_exclusion);
    const auto c2 = k_otoc_direct(s.spec, s.c.a, s.c.b, 2, 8);
    for (int t = 0; t <= 8; ++t) EXPECT_LT(std::abs(ts.moment[t] - c2[t]), 1e-10) << "L=" << L << " t=" << t;
  }
}

TEST(EthTime, SecondCumulantIsAutocorrelationWithoutDiagonal) {
  const auto s = make_setup(4, 9);
  const auto ts = eth_cumulants_time(s.sd, 6, EthMethod::inclusion_exclusion);
  const auto c1 = k_otoc_direct(s.spec, s.c.a, s.c.b, 1, 6);
  const cplx diag = (s.sd.elem_a.diagonal().array() * s.sd.elem_b.diagonal().array()).sum() / static_cast<double>(s.sd.D);
  for (int t = 0; t <= 6; ++t) EXPECT_LT(std::abs(ts.k2[t] + diag - c1[t]), 1e-10) << "t=" << t;
}

TEST(EthTime, ConjugateSymmetryForHermitianObservables) {
  const auto s = make_setup(4, 2);
  const auto ts = eth_cumulants_time(s.sd, std::vector<int>{-3, 3, -5, 5}, EthMethod::inclusion_exclusion);
  EXPECT_LT(std::abs(ts.k4[0] - std::conj(ts.k4[1])), 1e-12);
  EXPECT_LT(std::abs(ts.k4[2] - std::conj(ts.k4[3])), 1e-12);
  EXPECT_LT(std::abs(ts.k2[0] - std::conj(ts.k2[1])), 1e-12);
}

TEST(EthTime, Guards) {
  const auto s = make_setup(7, 1);
  EXPECT_THROW(eth_cumulants_time(s.sd, 2, EthMethod::naive), CapacityError);
  EXPECT_THROW(eth_cumulants_time(s.sd, -1, EthMethod::inclusion_exclusion), BoundsError);
  EXPECT_THROW(eth_method_from_string("fast"), DomainError);
  EXPECT_EQ(eth_method_from_string(to_string(EthMethod::naive)), EthMethod::naive);
}

TEST(PeriodicGaussian, NormalizedAndPeriodic) {
  for (double nu : {0.5, 20.0, 200.0}) {
    const int n = 4000;
    double s = 0;
    for (int i = 0; i < n; ++i) s += periodic_gaussian(-kPi + 2 * kPi * i / n, nu);
    EXPECT_NEAR(s / n, 1.0 / (2 * kPi), 1e-12) << "nu=" << nu;
    EXPECT_NEAR(periodic_gaussian(0.3, nu), periodic_gaussian(0.3 + 2 * kPi, nu), 1e-12);
  }
  EXPECT_THROW(periodic_gaussian(0, 0), DomainError);
}

TEST(OmegaGrid, UniformEndingAtPi) {
  const auto g = uniform_omega_grid(8);
  EXPECT_DOUBLE_EQ(g.back(), kPi);
  EXPECT_NEAR(g[1] - g[0], kPi / 4, 1e-15);
  EXPECT_GT(g.front(), -kPi);
  EXPECT_THROW(uniform_omega_grid(0), DomainError);
}

TEST(EthFrequency, SumRulesRecoverTimeZero) {
  const auto s = make_setup(4, 4);
  const auto grid = uniform_omega_grid(512);
  const auto fr = eth_cumulants_freq(s.sd, grid);
  const auto ts = eth_cumulants_time(s.sd, 0, EthMethod::inclusion_exclusion);
  cplx m2 = 0, m4 = 0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    m2 += fr.k2[n];
    m4 += fr.k4[n];
  }
  m2 /= static_cast<double>(grid.size());
  m4 /= static_cast<double>(grid.size());
  EXPECT_LT(std::abs(m2 - ts.k2[0]), 1e-10);
  EXPECT_LT(std::abs(m4 - ts.k4[0]), 1e-10);
}

TEST(EthFrequency, RealForHermitianObservablesAndThreadInvariant) {
  const auto s = make_setup(4, 6);
  const auto grid = uniform_omega_grid(64);
  FrequencyOptions one, two;
  two.threads = 2;
  const auto a = eth_cumulants_freq(s.sd, grid, one), b = eth_cumulants_freq(s.sd, grid, two);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    EXPECT_EQ(a.k2[n], b.k2[n]);
    EXPECT_EQ(a.k4[n], b.k4[n]);
    EXPECT_LT(std::abs(a.k2[n].imag()), 1e-12);
    EXPECT_LT(std::abs(a.k4[n].imag()), 1e-12);
  }
}

TEST(EthFrequency, SecondCumulantMatchesGaussianWeightedTransform) {
  // comb smoothing of k2 equals the Gaussian-weighted transform of k2(t)
  const auto s = make_setup(3, 12);
  const auto grid = uniform_omega_grid(32);
  const double nu = 5;
  FrequencyOptions opt;
  opt.nu = nu;
  opt.compute_k4 = false;
  const auto fr = eth_cumulants_freq(s.sd, grid, opt);
  EXPECT_TRUE(fr.k4.empty());
  const int T = smoothing_window(nu);
  std::vector<int> times;
  for (int t = -T; t <= T; ++t) times.push_back(t);
  const auto ts = eth_cumulants_time(s.sd, times, EthMethod::inclusion_exclusion);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    cplx acc = 0;
    for (std::size_t m = 0; m < times.size(); ++m)
      acc += std::exp(-0.5 * times[m] * times[m] / nu) * ts.k2[m] * std::polar(1.0, -grid[n] * times[m]);
    EXPECT_LT(std::abs(acc - fr.k2[n]), 1e-10) << "n=" << n;
  }
}

TEST(EthFrequency, Guards) {
  const auto s = make_setup(4, 1);
  FrequencyOptions opt;
  opt.max_dim_k4 = 16;
  EXPECT_THROW(eth_cumulants_freq(s.sd, uniform_omega_grid(8), opt), CapacityError);
  opt.compute_k4 = false;
  EXPECT_NO_THROW(eth_cumulants_freq(s.sd, uniform_omega_grid(8), opt));
  opt.nu = -1;
  EXPECT_THROW(eth_cumulants_freq(s.sd, uniform_omega_grid(8), opt), DomainError);
  EXPECT_THROW(eth_cumulants_freq(s.sd, {}, {}), DomainError);
}
