#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "scrambler/channel.hpp"
#include "scrambler/circuit.hpp"
#include "scrambler/errors.hpp"
#include "scrambler/rng.hpp"

using namespace scrambler;

namespace {

CircuitSpec identity_spec(int L) {
  CircuitSpec s;
  s.L = L;
  s.boundary_gate = Gate::identity(2);
  s.bulk_gates.assign(L - 1, Gate::identity(2));
  return s;
}

// Embeds a two-site gate on (site, site+1) of n sites.
Mat embed(const Mat& g, int site, int n) {
  const std::int64_t left = ipow(2, site), right = ipow(2, n - site - 2);
  return kron(kron(Mat::Identity(left, left), g), Mat::Identity(right, right));
}

Mat hermitian_traceless(std::uint64_t seed) {
  CounterRng rng(seed);
  Mat m(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = cplx(rng.normal(), rng.normal());
  m = (m + m.adjoint()).eval();
  m -= m.trace() / 2.0 * Mat::Identity(2, 2);
  return m;
}

}  // namespace

TEST(Floquet, IdentityGatesGiveIdentity) {
  const auto f = build_floquet(identity_spec(3));
  EXPECT_EQ(f.D, 16);
  EXPECT_LT(max_abs(f.matrix - Mat::Identity(16, 16)), 1e-15);
}

TEST(Floquet, MatchesProductOfEmbeddedGates) {
  for (auto mode : {SweepMode::shared, SweepMode::independent}) {
    const auto spec = cartan_bath_spec(4, random_unitary_gate(1), 7, mode);
    const int n = 5;
    Mat u = embed(spec.boundary_gate.matrix(), 0, n);
    for (int i = 1; i <= 3; ++i) u = embed(spec.bulk_gates[i - 1].matrix(), i, n) * u;
    const auto& left = mode == SweepMode::shared ? spec.bulk_gates : spec.bulk_gates_left;
    for (int i = 3; i >= 1; --i) u = embed(left[i - 1].matrix(), i, n) * u;
    EXPECT_LT(max_abs(build_floquet(spec).matrix - u), 1e-13);
  }
}

TEST(Floquet, SmallestChainIsUnitary) {
  const auto spec = cartan_bath_spec(2, paper_gate(), 3, SweepMode::shared);
  const auto f = build_floquet(spec);
  EXPECT_EQ(f.D, 8);
  EXPECT_LT(unitarity_residual(f.matrix), 1e-12);
}

TEST(Floquet, GuardsAndValidation) {
  EXPECT_THROW(build_floquet(cartan_bath_spec(12, paper_gate(), 1, SweepMode::shared)), CapacityError);
  auto s = identity_spec(3);
  s.bulk_gates.pop_back();
  EXPECT_THROW(s.validate(), ShapeError);
  s = identity_spec(3);
  s.L = 1;
  EXPECT_THROW(s.validate(), DomainError);
  EXPECT_THROW(sweep_mode_from_string("both"), DomainError);
}

TEST(Floquet, EigenphasesNondegenerateAtL4) {
  const auto f = build_floquet(cartan_bath_spec(4, paper_gate(), 5, SweepMode::shared));
  Eigen::ComplexEigenSolver<Mat> es(f.matrix);
  std::vector<double> ph;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) ph.push_back(std::arg(es.eigenvalues()(i)));
  std::sort(ph.begin(), ph.end());
  double min_gap = 2 * kPi + ph.front() - ph.back();
  for (std::size_t i = 1; i < ph.size(); ++i) min_gap = std::min(min_gap, ph[i] - ph[i - 1]);
  EXPECT_GT(min_gap, 1e-8);
}

TEST(Evolver, PreservesTraceAndFrobenius) {
  const auto spec = cartan_bath_spec(5, paper_gate(), 2, SweepMode::independent);
  const Mat a = hermitian_traceless(0) + 0.3 * Mat::Identity(2, 2);
  HeisenbergEvolver ev(spec, a);
  const cplx tr0 = ev.trace();
  const double f0 = ev.frobenius();
  for (int t = 0; t < 6; ++t) ev.step();
  EXPECT_LT(std::abs(ev.trace() - tr0), 1e-9);
  EXPECT_LT(std::abs(ev.frobenius() - f0), 1e-9);
}

TEST(Evolver, MatchesDenseConjugation) {
  const auto spec = cartan_bath_spec(3, random_unitary_gate(4), 9, SweepMode::shared);
  const Mat a = hermitian_traceless(1);
  const Mat u = build_floquet(spec).matrix;
  HeisenbergEvolver ev(spec, a);
  Mat at = lift_site0(a, 2, 3);
  for (int t = 0; t < 4; ++t) {
    ev.step();
    at = u * at * u.adjoint();
  }
  EXPECT_LT(max_abs(ev.matrix() - at), 1e-13);
}

TEST(KOtoc, InitialValueIsSingleSiteTrace) {
  const auto spec = cartan_bath_spec(3, paper_gate(), 1, SweepMode::shared);
  const Mat a = hermitian_traceless(2), b = hermitian_traceless(3);
  for (int k = 1; k <= 4; ++k) {
    const auto c = k_otoc_direct(spec, a, b, k, 0);
    Mat p = Mat::Identity(2, 2);
    for (int i = 0; i < k; ++i) p = p * a * b;
    EXPECT_LT(std::abs(c[0] - p.trace() / 2.0), 1e-13) << "k=" << k;
  }
}

TEST(KOtoc, MatchesFullMatrixPowers) {
  const auto spec = cartan_bath_spec(4, random_unitary_gate(2), 3, SweepMode::independent);
  const Mat a = hermitian_traceless(4), b = hermitian_traceless(5);
  const Mat u = build_floquet(spec).matrix;
  const Mat B = lift_site0(b, 2, 4);
  for (int k = 1; k <= 4; ++k) {
    const auto c = k_otoc_direct(spec, a, b, k, 5);
    Mat at = lift_site0(a, 2, 4);
    for (int t = 0; t <= 5; ++t) {
      if (t > 0) at = u * at * u.adjoint();
      Mat p = Mat::Identity(32, 32);
      for (int i = 0; i < k; ++i) p = p * at * B;
      EXPECT_LT(std::abs(c[t] - p.trace() / 32.0), 1e-10) << "k=" << k << " t=" << t;
    }
  }
}

TEST(KOtoc, RealForHermitianBoundaryAndEqualObservables) {
  const auto pg = paper_boundary_gate();
  const auto cons = closed_form_constants(pg.gate);
  const auto spec = cartan_bath_spec(5, pg.gate, 4, SweepMode::shared);
  for (int k = 1; k <= 3; ++k)
    for (auto& v : k_otoc_direct(spec, cons.a, cons.a, k, 8)) EXPECT_LT(std::abs(v.imag()), 1e-9);
}

TEST(KOtoc, AutocorrelationApproachesChannelPrediction) {
  const auto pg = paper_boundary_gate();
  const auto c = closed_form_constants(pg.gate);
  // deviation from lambda^t at fixed t shrinks with the bath size
  std::vector<double> dev;
  for (int L : {4, 6, 8}) {
    double mean = 0;
    for (int r = 0; r < 4; ++r) {
      const auto spec = cartan_bath_spec(L, pg.gate, derive_seed(77, r), SweepMode::shared);
      const auto c1 = k_otoc_direct(spec, c.a, c.b, 1, 3);
      mean += std::abs(c1[3] - std::pow(c.lambda, 3) * c.k2_ab);
    }
    dev.push_back(mean / 4);
  }
  EXPECT_GT(dev[0], dev[1]);
  EXPECT_GT(dev[1], dev[2]);
}

TEST(KOtoc, GuardsAndArguments) {
  const auto spec = cartan_bath_spec(10, paper_gate(), 1, SweepMode::shared);
  const Mat a = hermitian_traceless(6);
  EXPECT_THROW(k_otoc_direct(spec, a, a, 3, 1), CapacityError);
  EXPECT_THROW(k_otoc_direct(spec, a, a, 2, 1, 1024), CapacityError);
  EXPECT_THROW(k_otoc_direct(spec, a, a, 0, 1), BoundsError);
  EXPECT_THROW(k_otoc_direct(spec, a, a, 1, -1), BoundsError);
  EXPECT_THROW(HeisenbergEvolver(spec, Mat::Identity(3, 3)), ShapeError);
}

TEST(CircuitSpec, JsonRecordsSweepMode) {
  const auto spec = cartan_bath_spec(3, paper_gate(), 1, SweepMode::independent);
  const auto j = spec_to_json(spec);
  EXPECT_EQ(j.at("sweep_mode"), "independent");
  EXPECT_EQ(j.at("bulk_gates").size(), 2u);
  EXPECT_EQ(j.at("bulk_gates_left").size(), 2u);
}
