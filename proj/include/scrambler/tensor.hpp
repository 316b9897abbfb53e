#pragma once

// Strided application of small matrices to digits of a row-major tensor whose digits all have
// dimension d. Digit 0 is the most significant.

#include <array>
#include <cstdint>
#include <vector>

#include "scrambler/errors.hpp"
#include "scrambler/types.hpp"

namespace scrambler {

inline std::int64_t digit_stride(int n_digits, int d, int pos) { return ipow(d, n_digits - 1 - pos); }

/// Applies m (d x d) to digit p: x[.., o, ..] <- sum_i m(o, i) x[.., i, ..].
inline void apply_single(cplx* data, int n_digits, int d, int p, const Mat& m) {
  if (m.rows() != d || m.cols() != d) throw ShapeError("apply_single: matrix is not d x d");
  const std::int64_t total = ipow(d, n_digits);
  const std::int64_t s = digit_stride(n_digits, d, p);
  std::vector<cplx> buf(d);
  for (std::int64_t a = 0; a < total; a += s * d) {
    for (std::int64_t c = 0; c < s; ++c) {
      cplx* x = data + a + c;
      for (int i = 0; i < d; ++i) buf[i] = x[i * s];
      for (int o = 0; o < d; ++o) {
        cplx acc = 0;
        for (int i = 0; i < d; ++i) acc += m(o, i) * buf[i];
        x[o * s] = acc;
      }
    }
  }
}

/// Applies m (d^2 x d^2, indexed (digit p1, digit p2)) to the digit pair (p1, p2), p1 != p2.
inline void apply_pair(cplx* data, int n_digits, int d, int p1, int p2, const Mat& m) {
  if (p1 == p2) throw ShapeError("apply_pair: identical digits");
  if (m.rows() != d * d || m.cols() != d * d) throw ShapeError("apply_pair: matrix is not d^2 x d^2");
  const std::int64_t total = ipow(d, n_digits);
  const std::int64_t s1 = digit_stride(n_digits, d, p1);
  const std::int64_t s2 = digit_stride(n_digits, d, p2);
  const std::int64_t hi = std::max(s1, s2), lo = std::min(s1, s2);
  if (d == 2) {
    std::array<cplx, 16> g;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) g[r * 4 + c] = m(r, c);
    const std::array<std::int64_t, 4> off = {0, s2, s1, s1 + s2};
    for (std::int64_t a = 0; a < total; a += 2 * hi)
      for (std::int64_t b = 0; b < hi; b += 2 * lo)
        for (std::int64_t c = 0; c < lo; ++c) {
          cplx* x = data + a + b + c;
          const cplx x0 = x[off[0]], x1 = x[off[1]], x2 = x[off[2]], x3 = x[off[3]];
          for (int o = 0; o < 4; ++o)
            x[off[o]] = g[o * 4] * x0 + g[o * 4 + 1] * x1 + g[o * 4 + 2] * x2 + g[o * 4 + 3] * x3;
        }
    return;
  }
  const int q = d * d;
  std::vector<std::int64_t> off(q);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) off[i * d + j] = i * s1 + j * s2;
  std::vector<cplx> buf(q);
  for (std::int64_t a = 0; a < total; a += d * hi)
    for (std::int64_t b = 0; b < hi; b += d * lo)
      for (std::int64_t c = 0; c < lo; ++c) {
        cplx* x = data + a + b + c;
        for (int i = 0; i < q; ++i) buf[i] = x[off[i]];
        for (int o = 0; o < q; ++o) {
          cplx acc = 0;
          for (int i = 0; i < q; ++i) acc += m(o, i) * buf[i];
          x[off[o]] = acc;
        }
      }
}

/// Kronecker product, row-major convention: (a (x) b)[(i,k),(j,l)] = a(i,j) b(k,l).
inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Row-major vectorization: vec(X)[i*n + j] = X(i, j).
inline Vec vec_rowmajor(const Mat& x) {
  Vec v(x.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) v(i * x.cols() + j) = x(i, j);
  return v;
}

inline Mat unvec_rowmajor(const Vec& v, Eigen::Index rows) {
  const Eigen::Index cols = v.size() / rows;
  Mat x(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = v(i * cols + j);
  return x;
}

}  // namespace scrambler
