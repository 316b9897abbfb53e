#pragma once

// Permutation states on folded legs and replica contractions of a gate.
//
// With leg digits (i_1, i_1', ..., i_k, i_k') (forward, backward per replica):
//   (i|sigma)       = prod_j delta(i_j', i_{sigma(j)})
//   dressed ket     = prod_j a[i_{sigma(j)}, i_j']         (identity: vec(a)^{(x)k})
//   dressed bra     = prod_j b[i_j', i_{sigma(j)}]
// All pairings between states are bilinear, no complex conjugation.

#include <cstdint>
#include <vector>

#include "scrambler/errors.hpp"
#include "scrambler/gates.hpp"
#include "scrambler/ncperm.hpp"
#include "scrambler/types.hpp"

namespace scrambler {

namespace detail {

/// Digits (i_1, i_1', ..., i_k, i_k') of a leg index x.
inline std::vector<int> leg_digits(std::int64_t x, int d, int k) {
  std::vector<int> dig(2 * k);
  for (int p = 2 * k - 1; p >= 0; --p) {
    dig[p] = static_cast<int>(x % d);
    x /= d;
  }
  return dig;
}

}  // namespace detail

inline Vec permutation_vector(const Permutation& sigma, int d) {
  const int k = sigma.size();
  const std::int64_t q = ipow(d, 2 * k);
  Vec v = Vec::Zero(q);
  for (std::int64_t x = 0; x < q; ++x) {
    auto dig = detail::leg_digits(x, d, k);
    bool ok = true;
    for (int j = 0; j < k && ok; ++j) ok = dig[2 * j + 1] == dig[2 * sigma(j)];
    if (ok) v(x) = 1.0;
  }
  return v;
}

inline Vec dressed_ket(const Mat& a, const Permutation& sigma) {
  const int d = static_cast<int>(a.rows());
  const int k = sigma.size();
  const std::int64_t q = ipow(d, 2 * k);
  Vec v(q);
  for (std::int64_t x = 0; x < q; ++x) {
    auto dig = detail::leg_digits(x, d, k);
    cplx p = 1.0;
    for (int j = 0; j < k; ++j) p *= a(dig[2 * sigma(j)], dig[2 * j + 1]);
    v(x) = p;
  }
  return v;
}

inline Vec dressed_bra(const Mat& b, const Permutation& sigma) {
  const int d = static_cast<int>(b.rows());
  const int k = sigma.size();
  const std::int64_t q = ipow(d, 2 * k);
  Vec v(q);
  for (std::int64_t x = 0; x < q; ++x) {
    auto dig = detail::leg_digits(x, d, k);
    cplx p = 1.0;
    for (int j = 0; j < k; ++j) p *= b(dig[2 * j + 1], dig[2 * sigma(j)]);
    v(x) = p;
  }
  return v;
}

/// Bilinear pairing (u|v) = sum_x u(x) v(x).
inline cplx pair(const Vec& u, const Vec& v) { return (u.array() * v.array()).sum(); }

/// Raw replica block: R[s', s] = sum_{x,y} W[(s', y), (s, x)] out_right(y) in_right(x), where W is the
/// k-fold folded gate. No normalization prefactor.
inline Mat replica_block(const Mat& g, int d, int k, const Vec& out_right, const Vec& in_right) {
  const std::int64_t q = ipow(d, 2 * k);
  if (out_right.size() != q || in_right.size() != q) throw ShapeError("replica_block: boundary vector size");
  Mat out(q, q);
  Vec state(q * q);
  for (std::int64_t s = 0; s < q; ++s) {
    state.setZero();
    state.segment(s * q, q) = in_right;
    apply_replicas(state.data(), 4 * k, d, k, 0, 1, g);
    for (std::int64_t sp = 0; sp < q; ++sp) out(sp, s) = (state.segment(sp * q, q).array() * out_right.array()).sum();
  }
  return out;
}

}  // namespace scrambler
