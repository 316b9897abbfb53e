#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "scrambler/channel.hpp"
#include "scrambler/circuit.hpp"
#include "scrambler/errors.hpp"
#include "scrambler/spacetime.hpp"

using namespace scrambler;

namespace {

double max_abs_vec(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Relative residual of (nu|T|I) against (nu|cup) over every multichain nu.
double cup_overlap_residual(const Gate& right, const Gate& left, int t, int k) {
  const NCLattice lat(k);
  const auto im = influence_matrix(t, 2, k);
  const auto ti = transfer_apply(column_gates(right, left, t - 1), im.dense);
  const auto cup = cup_state(t, 2, k);
  double worst = 0;
  for (auto& nu : multichains(lat, 2 * (t - 1))) {
    const cplx lhs = overlap_multichain(ti, nu, lat);
    const cplx rhs = overlap_multichain(cup, nu, lat);
    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
  }
  return worst;
}

}  // namespace

TEST(PermutationState, RejectsCrossing) {
  EXPECT_THROW(permutation_state(Permutation::from_cycles("(13)(24)"), 2), DomainError);
  EXPECT_EQ(permutation_state(Permutation::cyclic(3), 2).vector.size(), 64);
}

TEST(InfluenceMatrix, EqualsProjectedCupForTwoReplicas) {
  for (int t = 2; t <= 4; ++t) {
    const auto im = influence_matrix(t, 2, 2);
    const auto p = project_multichain(cup_state(t, 2, 2));
    EXPECT_LT(max_abs_vec(p.state.data - im.dense.data), 1e-9) << "t=" << t;
    EXPECT_EQ(static_cast<int>(im.chains.size()), 2 * (t - 1) + 1);
  }
}

TEST(InfluenceMatrix, EqualsProjectedCupForThreeReplicas) {
  const auto im = influence_matrix(2, 2, 3);
  const auto p = project_multichain(cup_state(2, 2, 3));
  EXPECT_LT(max_abs_vec(p.state.data - im.dense.data), 1e-9);
  EXPECT_EQ(im.chains.size(), 12u);
}

TEST(InfluenceMatrix, NormalizedDomainWallOverlaps) {
  for (int d : {2, 3})
    for (int t = 2; t <= (d == 2 ? 4 : 2); ++t) {
      const auto im = influence_matrix(t, d, 2);
      const int m = 2 * (t - 1);
      for (int j = 0; j <= m; ++j) {
        const cplx v = pair(domain_wall_state(m, j, d, true).data, im.dense.data);
        EXPECT_NEAR(v.real(), j % 2 == 0 ? 1.0 : 1.0 / d, 1e-12) << "d=" << d << " t=" << t << " j=" << j;
        EXPECT_NEAR(v.imag(), 0.0, 1e-12);
      }
    }
}

TEST(InfluenceMatrix, MpsExpansionEqualsDenseSum) {
  for (int k = 2; k <= 3; ++k)
    for (int t = 2; t <= (k == 2 ? 4 : 2); ++t) {
      const NCLattice lat(k);
      const auto im = influence_matrix(t, 2, k);
      EXPECT_LT(max_abs_vec(expand_mps(im.mps, lat, 2).data - im.dense.data), 1e-12) << "k=" << k << " t=" << t;
      EXPECT_EQ(im.mps.tensors.front().rows(), catalan(k));
    }
}

TEST(InfluenceMatrix, MultichainsAreUnitEigenstatesForDualUnitaryGates) {
  const Gate g = random_du_gate(21), h = random_du_gate(22);
  const NCLattice lat(2);
  for (auto& chain : multichains(lat, 4)) {
    const auto s = multichain_state(chain, lat, 2);
    EXPECT_LT(max_abs_vec(transfer_apply(column_gates(g, h, 2), s).data - s.data), 1e-12);
  }
}

TEST(InfluenceMatrix, Guards) {
  EXPECT_THROW(influence_matrix(1, 2, 2), DomainError);
  EXPECT_THROW(influence_matrix(2, 2, 4), BoundsError);
  EXPECT_THROW(cup_state(8, 2, 3), CapacityError);
  EXPECT_THROW(domain_wall_chain(4, 5), BoundsError);
  const NCLattice lat(2);
  EXPECT_THROW(multichain_state({1, 0}, lat, 2), DomainError);
}

TEST(InfluenceMatrix, JsonHasLabelsAndTensors) {
  const auto j = im_to_json(influence_matrix(3, 2, 2, false));
  EXPECT_EQ(j.at("labels").size(), 2u);
  EXPECT_EQ(j.at("mps").at("tensors").size(), 4u);
  EXPECT_EQ(j.at("multichains").size(), 5u);
}

TEST(TransferFixedPoint, TransferOfImMatchesCupAwayFromDualUnitarity) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Gate r = random_cartan_gate(100 + s, kPi / 6), l = random_cartan_gate(200 + s, kPi / 6);
    EXPECT_LT(cup_overlap_residual(r, l, 2, 2), 1e-9);
    EXPECT_LT(cup_overlap_residual(r, l, 3, 2), 1e-9);
    EXPECT_LT(cup_overlap_residual(r, l, 2, 3), 1e-9);
  }
}

TEST(TransferFixedPoint, HoldsForGenericUnitaries) {
  EXPECT_LT(cup_overlap_residual(random_unitary_gate(5), random_unitary_gate(6), 3, 2), 1e-9);
}

TEST(TransferFixedPoint, ProjectedTransferFixesIm) {
  const Gate r = random_cartan_gate(31, kPi / 6), l = random_cartan_gate(32, kPi / 6);
  for (auto [t, k] : {std::pair{2, 2}, std::pair{3, 2}, std::pair{2, 3}}) {
    const auto im = influence_matrix(t, 2, k);
    const auto ti = transfer_apply(column_gates(r, l, t - 1), im.dense);
    const auto p = project_multichain(ti);
    EXPECT_LT(max_abs_vec(p.state.data - im.dense.data), 1e-9) << "t=" << t << " k=" << k;
    // T|I) itself leaves the multichain space
    EXPECT_GT(max_abs_vec(ti.data - im.dense.data), 1e-4);
  }
}

TEST(BCoefficients, PowersOfInverseDimensionForDualUnitaryGates) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Gate g = random_du_gate(s);
    const auto b = b_coefficients(g, 6), bm = b_coefficients_mirrored(g, 6);
    for (int n = 0; n <= 6; ++n) {
      EXPECT_NEAR(std::abs(b[n] - std::pow(0.5, n)), 0.0, 1e-12);
      EXPECT_NEAR(std::abs(bm[n] - std::pow(0.5, n)), 0.0, 1e-12);
    }
  }
}

TEST(BCoefficients, PredictDomainWallTransferElements) {
  for (bool shared : {true, false}) {
    const Gate r = random_cartan_gate(5, kPi / 6), l = shared ? r : random_cartan_gate(9, kPi / 6);
    const auto b = b_coefficients(r, l, 6), bm = b_coefficients_mirrored(r, l, 6);
    const int m = 4;
    const auto col = column_gates(r, l, m / 2);
    for (int i = 0; i <= m; ++i) {
      const auto ti = transfer_apply(col, domain_wall_state(m, i, 2, true));
      for (int j = 0; j <= m; ++j)
        EXPECT_LT(std::abs(pair(domain_wall_state(m, j, 2, true).data, ti.data) - domain_wall_element(b, bm, 2, j, i)), 1e-12)
            << "shared=" << shared << " I=" << i << " J=" << j;
    }
  }
}

TEST(Boundary, FiniteBathContractionMatchesDirectSimulation) {
  const auto pg = paper_boundary_gate();
  const auto c = closed_form_constants(pg.gate);
  for (auto [k, t] : {std::pair{2, 2}, std::pair{2, 3}, std::pair{3, 2}})
    for (int L = 2; L <= 4; ++L) {
      const auto spec = cartan_bath_spec(L, pg.gate, 11, SweepMode::independent);
      const auto direct = k_otoc_direct(spec, c.a, c.b, k, t);
      auto st = cup_state(t, 2, k);
      for (int bond = L - 1; bond >= 1; --bond)
        st = transfer_apply(column_gates(spec.bulk_gates[bond - 1], spec.bulk_gates_left[bond - 1], t - 1), st);
      EXPECT_LT(std::abs(boundary_contract_dense(pg.gate, c.a, c.b, st) - direct[t]), 1e-12) << "k=" << k << " t=" << t << " L=" << L;
    }
}

TEST(Boundary, ImSeriesMatchesChainSumAndSemigroup) {
  const auto pg = paper_boundary_gate();
  const auto c = closed_form_constants(pg.gate);
  const auto series = otoc_from_im_series(pg.gate, c.a, c.b, 2, 12);
  const auto sg = c2_semigroup(pg.gate, c.a, c.b, 12);
  for (int t = 0; t <= 12; ++t) EXPECT_LT(std::abs(series[t] - sg[t]), 1e-12) << "t=" << t;
  for (int t = 2; t <= 4; ++t) EXPECT_LT(std::abs(otoc_from_im_chains(pg.gate, c.a, c.b, t, 2) - series[t]), 1e-12);
  const auto s3 = otoc_from_im_series(pg.gate, c.a, c.b, 3, 3);
  EXPECT_LT(std::abs(otoc_from_im_chains(pg.gate, c.a, c.b, 2, 3) - s3[2]), 1e-12);
  EXPECT_LT(std::abs(boundary_contract_dense(pg.gate, c.a, c.b, influence_matrix(3, 2, 3).dense) - s3[3]), 1e-12);
}

TEST(Boundary, FirstOrderMatchesChannelEigenvalue) {
  const auto pg = paper_boundary_gate();
  const auto c = closed_form_constants(pg.gate);
  const auto s1 = otoc_from_im_series(pg.gate, c.a, c.b, 1, 10);
  for (int t = 0; t <= 10; ++t) EXPECT_LT(std::abs(s1[t] - std::pow(c.lambda, t) * c.k2_ab), 1e-12) << "t=" << t;
}
