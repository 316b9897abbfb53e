#pragma once

// Temporal-lattice states, the spatial transfer matrix T (matrix-free), the influence matrix and
// the left boundary contraction.
//
// Geometry for t periods, tau = t - 1. A bath column carries 2 tau folded legs r_1..r_{2tau} on its
// right and l_1..l_{2tau} on its left, site 1 earliest. Going up the column the gates alternate
// R_1, L_1, ..., R_tau, L_tau (right sweep gate, left sweep gate of period p), chained by an
// internal leg c that starts as (circle| at the bottom and is closed by |square) at the top:
//   R_p: in (l_{2p-1}, c_{2p-2}) -> out (e_p, r_{2p-1})
//   L_p: in (e_p, r_{2p})        -> out (l_{2p}, c_{2p})
// T carries a prefactor 1/d. The cup state pairs legs (2i-1, 2i). The boundary gate U acts t
// times on site 0 (dressed ket of a at the start, dressed bra of b at the end) and the leftmost bath
// site, taking l_{2p-2} in and l_{2p-1} out; its prefactor is 1/d^2.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <json.hpp>

#include "scrambler/errors.hpp"
#include "scrambler/folded.hpp"
#include "scrambler/gates.hpp"
#include "scrambler/ncperm.hpp"
#include "scrambler/types.hpp"

namespace scrambler {

struct PermutationState {
  int d = 0;
  int k = 0;
  Permutation sigma;
  Vec vector;
};

inline PermutationState permutation_state(const Permutation& sigma, int d) {
  if (!is_noncrossing(sigma)) throw DomainError("permutation_state: crossing permutation " + sigma.str());
  return {d, sigma.size(), sigma, permutation_vector(sigma, d)};
}

/// Dense state on m folded legs, leg 0 most significant.
struct TemporalState {
  int d = 0;
  int k = 0;
  int m = 0;
  Vec data;

  std::int64_t leg_dim() const { return ipow(d, 2 * k); }
};

inline std::int64_t temporal_size(int d, int k, int m) { return ipow(ipow(d, 2 * k), m); }

inline void check_temporal_capacity(int d, int k, int m, std::int64_t max_entries) {
  const double log2n = 2.0 * k * m * std::log2(static_cast<double>(d));
  if (log2n > std::log2(static_cast<double>(max_entries)) + 1e-9)
    throw CapacityError("temporal state of " + std::to_string(m) + " legs exceeds the entry guard");
}

inline constexpr std::int64_t kDefaultTemporalGuard = std::int64_t{1} << 24;

/// Tensor product of the given leg vectors.
inline TemporalState product_state(const std::vector<Vec>& legs, int d, int k,
                                   std::int64_t max_entries = kDefaultTemporalGuard) {
  const int m = static_cast<int>(legs.size());
  check_temporal_capacity(d, k, m, max_entries);
  Vec v = Vec::Ones(1);
  for (auto& leg : legs) {
    Vec next(v.size() * leg.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) next.segment(i * leg.size(), leg.size()) = v(i) * leg;
    v = std::move(next);
  }
  return {d, k, m, std::move(v)};
}

inline TemporalState multichain_state(const Multichain& chain, const NCLattice& lat, int d,
                                      std::int64_t max_entries = kDefaultTemporalGuard) {
  std::vector<Vec> legs;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i > 0 && !lat.leq(chain[i - 1], chain[i])) throw DomainError("multichain_state: chain is not increasing");
    legs.push_back(permutation_vector(lat[chain[i]], d));
  }
  return product_state(legs, d, lat.k(), max_entries);
}

/// (nu-chain|sigma-chain) = prod_i d^{|nu_i^-1 sigma_i|}.
inline double multichain_overlap(const Multichain& nu, const Multichain& sigma, const NCLattice& lat, int d) {
  double v = 1.0;
  for (std::size_t i = 0; i < nu.size(); ++i) v *= std::pow(d, lat.overlap_exponent(nu[i], sigma[i]));
  return v;
}

inline TemporalState cup_state(int t, int d, int k, std::int64_t max_entries = kDefaultTemporalGuard) {
  if (t < 2) throw DomainError("cup_state: t must be at least 2");
  const int tau = t - 1;
  check_temporal_capacity(d, k, 2 * tau, max_entries);
  const std::int64_t q = ipow(d, 2 * k);
  Vec bell = Vec::Zero(q * q);
  for (std::int64_t x = 0; x < q; ++x) bell(x * q + x) = 1.0;
  std::vector<Vec> pairs(tau, bell);
  TemporalState s = product_state(pairs, d, k, std::numeric_limits<std::int64_t>::max());
  s.m = 2 * tau;
  return s;
}

/// Contraction of a dense state with a product of leg vectors (bilinear).
inline cplx overlap_product(const TemporalState& s, const std::vector<Vec>& legs) {
  if (static_cast<int>(legs.size()) != s.m) throw ShapeError("overlap_product: leg count");
  const std::int64_t q = s.leg_dim();
  Vec cur = s.data;
  for (int i = s.m - 1; i >= 0; --i) {
    const std::int64_t rows = cur.size() / q;
    Vec next(rows);
    for (std::int64_t r = 0; r < rows; ++r) next(r) = (cur.segment(r * q, q).array() * legs[i].array()).sum();
    cur = std::move(next);
  }
  return cur(0);
}

inline cplx overlap_multichain(const TemporalState& s, const Multichain& chain, const NCLattice& lat) {
  std::vector<Vec> legs;
  for (int c : chain) legs.push_back(permutation_vector(lat[c], s.d));
  return overlap_product(s, legs);
}

/// Unnormalized k = 2 domain wall: circle on the first j legs, square on the remaining 2 tau - j.
inline Multichain domain_wall_chain(int sites, int j) {
  if (j < 0 || j > sites) throw BoundsError("domain wall position out of range");
  Multichain c(sites, 1);
  for (int i = 0; i < j; ++i) c[i] = 0;
  return c;
}

inline TemporalState domain_wall_state(int sites, int j, int d, bool normalized) {
  static const NCLattice lat2(2);
  TemporalState s = multichain_state(domain_wall_chain(sites, j), lat2, d);
  if (normalized) s.data /= std::pow(static_cast<double>(d), sites);
  return s;
}

// ---------------------------------------------------------------------------------------------
// Transfer matrix

/// Gates of one bath column in the order R_1, L_1, ..., R_tau, L_tau.
struct ColumnGates {
  std::vector<Mat> gates;
  int d = 2;

  int tau() const { return static_cast<int>(gates.size()) / 2; }
};

inline ColumnGates column_gates(const Gate& right, const Gate& left, int tau) {
  if (right.d() != left.d()) throw ShapeError("column_gates: gates of different d");
  ColumnGates c;
  c.d = right.d();
  for (int p = 0; p < tau; ++p) {
    c.gates.push_back(right.matrix());
    c.gates.push_back(left.matrix());
  }
  return c;
}

inline ColumnGates column_gates(const Gate& g, int tau) { return column_gates(g, g, tau); }

namespace detail {

/// M[(l, e), (c, r)] = V[(e, r), (l, c)]: the R-type gate read from (c, r) to (l, e).
inline Mat r_orientation(const Mat& v, int d) {
  Mat m(d * d, d * d);
  for (int l = 0; l < d; ++l)
    for (int e = 0; e < d; ++e)
      for (int c = 0; c < d; ++c)
        for (int r = 0; r < d; ++r) m(l * d + e, c * d + r) = v(e * d + r, l * d + c);
  return m;
}

}  // namespace detail

inline constexpr std::int64_t kTransferGuard = std::int64_t{1} << 25;

/// Applies T to a state on the 2 tau right legs, returning the state on the left legs.
inline TemporalState transfer_apply(const ColumnGates& col, const TemporalState& s,
                                    std::int64_t max_entries = kTransferGuard) {
  const int tau = col.tau();
  const int d = col.d;
  if (static_cast<int>(col.gates.size()) != 2 * tau || tau < 1) throw ShapeError("transfer_apply: need 2 tau gates");
  if (s.m != 2 * tau || s.d != d) throw ShapeError("transfer_apply: state does not match the column");
  const int k = s.k;
  const std::int64_t q = s.leg_dim();
  check_temporal_capacity(d, k, 2 * tau + 1, max_entries);
  const int n_legs = 2 * tau + 1;
  const int n_digits = n_legs * 2 * k;
  const Vec circ = permutation_vector(Permutation::identity(k), d);
  const Vec sq = permutation_vector(Permutation::cyclic(k), d);

  Vec x(q * s.data.size());
  for (std::int64_t i = 0; i < q; ++i) x.segment(i * s.data.size(), s.data.size()) = circ(i) * s.data;
  for (int p = 1; p <= tau; ++p) {
    apply_replicas(x.data(), n_digits, d, k, 2 * p - 2, 2 * p - 1, detail::r_orientation(col.gates[2 * p - 2], d));
    apply_replicas(x.data(), n_digits, d, k, 2 * p - 1, 2 * p, col.gates[2 * p - 1]);
  }
  const std::int64_t rows = x.size() / q;
  Vec out(rows);
  for (std::int64_t r = 0; r < rows; ++r) out(r) = (x.segment(r * q, q).array() * sq.array()).sum() / static_cast<double>(d);
  return {d, k, 2 * tau, std::move(out)};
}

// ---------------------------------------------------------------------------------------------
// Influence matrix

/// Weight of a multichain: prod_i mu(s_{2i-1}, s_{2i}) d^{|s_{2i}| - |s_{2i-1}| - k}.
inline double multichain_weight(const Multichain& chain, const NCLattice& lat, int d) {
  double w = 1.0;
  for (std::size_t i = 0; i + 1 < chain.size(); i += 2) {
    const int a = chain[i], b = chain[i + 1];
    w *= static_cast<double>(lat.moebius(a, b)) * std::pow(d, lat.cycle_count(b) - lat.cycle_count(a) - lat.k());
  }
  return w;
}

/// Matrix product state with scalar site tensors: site s maps an incoming label alpha to an outgoing
/// label beta with weight T_s(alpha, beta) and emits the permutation state |beta). Odd sites (1, 3,
/// ...) carry delta(alpha <= beta); even sites carry mu(alpha, beta) d^{-l(alpha,beta)-k}
/// delta(alpha <= beta).
struct ImMps {
  int k = 0;
  int sites = 0;
  std::vector<Mat> tensors;  // C_k x C_k real weights, one per site
  Vec left;                  // weights on the label entering site 1
  Vec right;                 // weights on the label leaving the last site
};

struct InfluenceMatrix {
  int t = 0;
  int d = 0;
  int k = 0;
  std::vector<Multichain> chains;
  std::vector<double> weights;
  TemporalState dense;  // empty data when not materialized
  ImMps mps;
};

inline ImMps im_mps(int t, int d, const NCLattice& lat) {
  const int sites = 2 * (t - 1);
  const int n = lat.size();
  ImMps mps;
  mps.k = lat.k();
  mps.sites = sites;
  Mat odd = Mat::Zero(n, n), even = Mat::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (lat.leq(a, b)) {
        odd(a, b) = 1.0;
        even(a, b) = static_cast<double>(lat.moebius(a, b)) * std::pow(d, -lat.distance(a, b) - lat.k());
      }
  for (int s = 1; s <= sites; ++s) mps.tensors.push_back(s % 2 ? odd : even);
  // The chain starts anywhere above the identity and ends anywhere.
  mps.left = Vec::Zero(n);
  mps.left(lat.identity_index()) = 1.0;
  mps.right = Vec::Ones(n);
  return mps;
}

/// Dense expansion of the MPS, site by site.
inline TemporalState expand_mps(const ImMps& mps, const NCLattice& lat, int d,
                                std::int64_t max_entries = kDefaultTemporalGuard) {
  check_temporal_capacity(d, mps.k, mps.sites, max_entries);
  const int n = lat.size();
  std::vector<Vec> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = permutation_vector(lat[i], d);
  std::vector<Vec> acc(n);
  for (int a = 0; a < n; ++a) acc[a] = Vec::Constant(1, mps.left(a));
  for (int s = 0; s < mps.sites; ++s) {
    std::vector<Vec> next(n);
    for (int b = 0; b < n; ++b) {
      Vec sum = Vec::Zero(acc[0].size());
      for (int a = 0; a < n; ++a)
        if (mps.tensors[s](a, b) != cplx(0)) sum += mps.tensors[s](a, b) * acc[a];
      Vec v(sum.size() * perm[b].size());
      for (Eigen::Index i = 0; i < sum.size(); ++i) v.segment(i * perm[b].size(), perm[b].size()) = sum(i) * perm[b];
      next[b] = std::move(v);
    }
    acc = std::move(next);
  }
  Vec out = Vec::Zero(acc[0].size());
  for (int b = 0; b < n; ++b) out += mps.right(b) * acc[b];
  return {d, mps.k, mps.sites, std::move(out)};
}

inline InfluenceMatrix influence_matrix(int t, int d, int k, bool dense = true,
                                        std::int64_t max_entries = kDefaultTemporalGuard) {
  if (t < 2) throw DomainError("influence_matrix: t must be at least 2");
  if (k < 1 || k > 3) throw BoundsError("influence_matrix: k must lie in 1..3");
  const NCLattice lat(k);
  InfluenceMatrix im;
  im.t = t;
  im.d = d;
  im.k = k;
  im.chains = multichains(lat, 2 * (t - 1));
  for (auto& c : im.chains) im.weights.push_back(multichain_weight(c, lat, d));
  im.mps = im_mps(t, d, lat);
  if (dense) {
    check_temporal_capacity(d, k, 2 * (t - 1), max_entries);
    TemporalState s{d, k, 2 * (t - 1), Vec::Zero(temporal_size(d, k, 2 * (t - 1)))};
    for (std::size_t i = 0; i < im.chains.size(); ++i)
      if (im.weights[i] != 0.0) s.data += im.weights[i] * multichain_state(im.chains[i], lat, d, max_entries).data;
    im.dense = std::move(s);
  }
  return im;
}

inline nlohmann::json im_to_json(const InfluenceMatrix& im) {
  const NCLattice lat(im.k);
  nlohmann::json j = {{"t", im.t}, {"d", im.d}, {"k", im.k}};
  j["labels"] = nlohmann::json::array();
  for (auto& p : lat.elements()) j["labels"].push_back(p.str());
  j["multichains"] = nlohmann::json::array();
  for (std::size_t i = 0; i < im.chains.size(); ++i) j["multichains"].push_back({{"chain", im.chains[i]}, {"weight", im.weights[i]}});
  nlohmann::json mps = {{"sites", im.mps.sites}};
  mps["tensors"] = nlohmann::json::array();
  for (auto& t : im.mps.tensors) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index a = 0; a < t.rows(); ++a) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index b = 0; b < t.cols(); ++b) row.push_back(t(a, b).real());
      rows.push_back(row);
    }
    mps["tensors"].push_back(rows);
  }
  for (const char* side : {"left", "right"}) {
    const Vec& v = std::string(side) == "left" ? im.mps.left : im.mps.right;
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index a = 0; a < v.size(); ++a) arr.push_back(v(a).real());
    mps[side] = arr;
  }
  j["mps"] = mps;
  return j;
}

// ---------------------------------------------------------------------------------------------
// Projection onto multichains

struct Projection {
  std::vector<Multichain> chains;
  Vec coefficients;
  TemporalState state;
  double condition = 0;
};

inline Projection project_multichain(const TemporalState& s, double max_condition = 1e12) {
  const NCLattice lat(s.k);
  Projection p;
  p.chains = multichains(lat, s.m);
  const Eigen::Index n = static_cast<Eigen::Index>(p.chains.size());
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) gram(i, j) = multichain_overlap(p.chains[i], p.chains[j], lat, s.d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
  p.condition = svd.singularValues()(0) / svd.singularValues()(n - 1);
  if (!(p.condition < max_condition))
    throw NumericalError("project_multichain: Gram matrix condition number " + std::to_string(p.condition));
  Vec c(n);
  for (Eigen::Index i = 0; i < n; ++i) c(i) = overlap_multichain(s, p.chains[i], lat);
  p.coefficients = gram.cast<cplx>().fullPivLu().solve(c);
  p.state = {s.d, s.k, s.m, Vec::Zero(s.data.size())};
  for (Eigen::Index i = 0; i < n; ++i) p.state.data += p.coefficients(i) * multichain_state(p.chains[i], lat, s.d).data;
  return p;
}

// ---------------------------------------------------------------------------------------------
// Left boundary

namespace detail {

/// Applies U on (site 0, leftmost bath leg) to s (x) in_right and contracts the output bath leg.
inline Vec boundary_step(const Mat& u, int d, int k, const Vec& s, const Vec& in_right, const Vec& out_right) {
  const std::int64_t q = s.size();
  Vec state(q * q);
  for (std::int64_t i = 0; i < q; ++i) state.segment(i * q, q) = s(i) * in_right;
  apply_replicas(state.data(), 4 * k, d, k, 0, 1, u);
  Vec out(q);
  for (std::int64_t i = 0; i < q; ++i) out(i) = (state.segment(i * q, q).array() * out_right.array()).sum();
  return out;
}

}  // namespace detail

/// (B| applied to a product state on the 2 tau left legs.
inline cplx boundary_contract_product(const Gate& u, const Mat& a, const Mat& b, int k, const std::vector<Vec>& legs) {
  const int d = u.d();
  const int tau = static_cast<int>(legs.size()) / 2;
  const Vec circ = permutation_vector(Permutation::identity(k), d);
  const Vec sq = permutation_vector(Permutation::cyclic(k), d);
  Vec s = dressed_ket(a, Permutation::identity(k));
  for (int p = 1; p <= tau + 1; ++p) {
    const Vec& in = p == 1 ? circ : legs[2 * p - 3];
    const Vec& out = p <= tau ? legs[2 * p - 2] : sq;
    s = detail::boundary_step(u.matrix(), d, k, s, in, out);
  }
  return pair(dressed_bra(b, Permutation::cyclic(k)), s) / static_cast<double>(d * d);
}

/// (B| applied to a dense state on the 2 tau left legs.
inline cplx boundary_contract_dense(const Gate& u, const Mat& a, const Mat& b, const TemporalState& psi) {
  const int d = u.d(), k = psi.k;
  const int tau = psi.m / 2;
  const std::int64_t q = psi.leg_dim();
  const Vec circ = permutation_vector(Permutation::identity(k), d);
  const Vec sq = permutation_vector(Permutation::cyclic(k), d);
  const Vec ket = dressed_ket(a, Permutation::identity(k));
  const Vec bra = dressed_bra(b, Permutation::cyclic(k));
  // First gate: g1[(s', o)] from (ket (x) circle); then Y(s', l_2..) = sum_o g1(s', o) psi(o, l_2..).
  Vec g1(q * q);
  for (std::int64_t i = 0; i < q; ++i) g1.segment(i * q, q) = ket(i) * circ;
  apply_replicas(g1.data(), 4 * k, d, k, 0, 1, u.matrix());
  const std::int64_t rest = psi.data.size() / q;
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> pm(psi.data.data(), q, rest);
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gm(g1.data(), q, q);
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> y = gm * pm;
  Vec cur = Eigen::Map<const Vec>(y.data(), y.size());
  // Remaining legs: (s, l_{2p-2}, l_{2p-1}, rest).
  for (int p = 2; p <= tau; ++p) {
    const int legs = 2 * tau - 2 * p + 4;
    apply_replicas(cur.data(), legs * 2 * k, d, k, 0, 1, u.matrix());
    const std::int64_t r = cur.size() / (q * q * q);
    Vec next = Vec::Zero(q * r);
    for (std::int64_t s = 0; s < q; ++s)
      for (std::int64_t x = 0; x < q; ++x) next.segment(s * r, r) += cur.segment(((s * q + x) * q + x) * r, r);
    cur = std::move(next);
  }
  // Final gate on (s, l_{2tau}), output bath leg closed by the square.
  apply_replicas(cur.data(), 4 * k, d, k, 0, 1, u.matrix());
  Vec fin(q);
  for (std::int64_t i = 0; i < q; ++i) fin(i) = (cur.segment(i * q, q).array() * sq.array()).sum();
  return pair(bra, fin) / static_cast<double>(d * d);
}

/// (B|I) summed chain by chain.
inline cplx otoc_from_im_chains(const Gate& u, const Mat& a, const Mat& b, int t, int k) {
  const int d = u.d();
  const NCLattice lat(k);
  std::vector<Vec> perm;
  for (auto& p : lat.elements()) perm.push_back(permutation_vector(p, d));
  cplx sum = 0;
  for (auto& chain : multichains(lat, 2 * (t - 1))) {
    const double w = multichain_weight(chain, lat, d);
    if (w == 0.0) continue;
    std::vector<Vec> legs;
    for (int c : chain) legs.push_back(perm[c]);
    sum += w * boundary_contract_product(u, a, b, k, legs);
  }
  return sum;
}

/// C_k(t) in the thermodynamic limit, (B|I), by transfer over the MPS labels. Cost linear in t.
inline Series otoc_from_im_series(const Gate& u, const Mat& a, const Mat& b, int k, int t_max) {
  const int d = u.d();
  const NCLattice lat(k);
  const int n = lat.size();
  std::vector<Vec> perm;
  for (auto& p : lat.elements()) perm.push_back(permutation_vector(p, d));
  const Vec circ = perm[lat.identity_index()];
  const Vec sq = perm[lat.cyclic_index()];
  const Vec ket = dressed_ket(a, Permutation::identity(k));
  const Vec bra = dressed_bra(b, Permutation::cyclic(k));
  const double norm = 1.0 / (d * d);
  Series out;
  Mat ab = Mat::Identity(d, d);
  for (int i = 0; i < k; ++i) ab = ab * a * b;
  out.push_back(ab.trace() / static_cast<double>(d));
  if (t_max < 1) return out;
  // f[beta]: site-0 state whose next boundary input leg is labelled beta (an even IM site).
  std::vector<Vec> f(n, Vec::Zero(ket.size()));
  {
    out.push_back(pair(bra, detail::boundary_step(u.matrix(), d, k, ket, circ, sq)) * norm);
    std::vector<Vec> s(n);
    for (int o = 0; o < n; ++o) s[o] = detail::boundary_step(u.matrix(), d, k, ket, circ, perm[o]);
    for (int e = 0; e < n; ++e)
      for (int o = 0; o < n; ++o)
        if (lat.leq(o, e)) f[e] += (static_cast<double>(lat.moebius(o, e)) * std::pow(d, -lat.distance(o, e) - k)) * s[o];
  }
  for (int t = 2; t <= t_max; ++t) {
    cplx c = 0;
    for (int e = 0; e < n; ++e) c += pair(bra, detail::boundary_step(u.matrix(), d, k, f[e], perm[e], sq));
    out.push_back(c * norm);
    if (t == t_max) break;
    std::vector<Vec> s(n, Vec::Zero(ket.size()));
    for (int e = 0; e < n; ++e)
      for (int o = 0; o < n; ++o)
        if (lat.leq(e, o)) s[o] += detail::boundary_step(u.matrix(), d, k, f[e], perm[e], perm[o]);
    std::vector<Vec> g(n, Vec::Zero(ket.size()));
    for (int e = 0; e < n; ++e)
      for (int o = 0; o < n; ++o)
        if (lat.leq(o, e)) g[e] += (static_cast<double>(lat.moebius(o, e)) * std::pow(d, -lat.distance(o, e) - k)) * s[o];
    f = std::move(g);
  }
  return out;
}

inline cplx otoc_from_im(const Gate& u, const Mat& a, const Mat& b, int t, int k) {
  return otoc_from_im_series(u, a, b, k, t).back();
}

// ---------------------------------------------------------------------------------------------
// B coefficients (k = 2)
//
// Between two normalized domain walls the transfer-matrix element reduces to a chain of gates whose
// left legs are fixed to one permutation and right legs to the other. B_n uses circle on the left
// and square on the right, starting with an L-type gate; the mirrored B'_n uses square on the left,
// circle on the right, starting with an R-type gate. Both equal d^{-n} for dual-unitary gates.

struct BCoefficientMaps {
  Mat l_type;  // M[c', e] = sum W_L[(l, c'), (e, r)] left(l) right(r)
  Mat r_type;  // M[e, c]  = sum W_R[(e, r), (l, c)] left(l) right(r)
};

inline BCoefficientMaps b_maps(const Mat& right_gate, const Mat& left_gate, int d, const Vec& left_leg, const Vec& right_leg) {
  const int k = 2;
  const std::int64_t q = ipow(d, 2 * k);
  BCoefficientMaps m{Mat(q, q), Mat(q, q)};
  Vec state(q * q);
  for (std::int64_t e = 0; e < q; ++e) {
    state.setZero();
    state.segment(e * q, q) = right_leg;
    apply_replicas(state.data(), 4 * k, d, k, 0, 1, left_gate);
    for (std::int64_t c = 0; c < q; ++c) {
      cplx acc = 0;
      for (std::int64_t l = 0; l < q; ++l) acc += left_leg(l) * state(l * q + c);
      m.l_type(c, e) = acc;
    }
  }
  for (std::int64_t c = 0; c < q; ++c) {
    state.setZero();
    for (std::int64_t l = 0; l < q; ++l) state(l * q + c) = left_leg(l);
    apply_replicas(state.data(), 4 * k, d, k, 0, 1, right_gate);
    for (std::int64_t e = 0; e < q; ++e) m.r_type(e, c) = (state.segment(e * q, q).array() * right_leg.array()).sum();
  }
  return m;
}

namespace detail {

inline std::vector<cplx> b_chain(const Gate& right, const Gate& left, int i_max, bool mirrored) {
  if (i_max < 0 || i_max > 6) throw CapacityError("b_coefficients: i_max must lie in 0..6");
  if (right.d() != left.d()) throw ShapeError("b_coefficients: gates of different d");
  const int d = right.d();
  const Vec circ = permutation_vector(Permutation::identity(2), d);
  const Vec sq = permutation_vector(Permutation::cyclic(2), d);
  const auto maps = mirrored ? b_maps(right.matrix(), left.matrix(), d, sq, circ) : b_maps(right.matrix(), left.matrix(), d, circ, sq);
  std::vector<cplx> out;
  Vec v = circ;
  for (int n = 0; n <= i_max; ++n) {
    if (n > 0) v = ((n % 2 == 1) != mirrored ? maps.l_type : maps.r_type) * v;
    out.push_back(pair(sq, v) / std::pow(d, 2 * n + 1));
  }
  return out;
}

}  // namespace detail

/// B_n = d^{-(2n+1)} (square| M_n ... M_1 |circle), B_0 = 1.
inline std::vector<cplx> b_coefficients(const Gate& right, const Gate& left, int i_max) {
  return detail::b_chain(right, left, i_max, false);
}

inline std::vector<cplx> b_coefficients(const Gate& g, int i_max) { return b_coefficients(g, g, i_max); }

inline std::vector<cplx> b_coefficients_mirrored(const Gate& right, const Gate& left, int i_max) {
  return detail::b_chain(right, left, i_max, true);
}

inline std::vector<cplx> b_coefficients_mirrored(const Gate& g, int i_max) { return b_coefficients_mirrored(g, g, i_max); }

/// (2tau, J| T |2tau, I) between normalized domain walls predicted from the B coefficients:
/// 1 for I = J, otherwise X_{|J-I| - e} / d^e with e = 1 for even I and X = B (J > I) or B' (J < I).
inline cplx domain_wall_element(const std::vector<cplx>& b, const std::vector<cplx>& b_mirrored, int d, int j_bra, int i_ket) {
  if (j_bra == i_ket) return 1.0;
  const int e = i_ket % 2 == 0 ? 1 : 0;
  const int n = std::abs(j_bra - i_ket) - e;
  const auto& x = j_bra > i_ket ? b : b_mirrored;
  if (n >= static_cast<int>(x.size())) throw BoundsError("domain_wall_element: not enough B coefficients");
  return x[n] / std::pow(d, e);
}

}  // namespace scrambler
