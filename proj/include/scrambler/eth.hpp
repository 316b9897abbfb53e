#pragma once

// Exact diagonalization of the Floquet operator and full-ETH free cumulants
//   k2(t) = (1/D) sum_{i != j} A_ij B_ji e^{i w_ij t}
//   k4(t) = (1/D) sum_{i,j,k,l distinct} A_ij B_jk A_kl B_li e^{i (w_ij + w_kl) t}
// with w_ij = phi_i - phi_j. Frequency series use k(w) = sum_t k(t) e^{-i w t}, so that
// int k(w) dw / 2pi = k(t = 0).

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "scrambler/circuit.hpp"
#include "scrambler/errors.hpp"
#include "scrambler/parallel.hpp"
#include "scrambler/types.hpp"

namespace scrambler {

struct SpectralData {
  std::int64_t D = 0;
  RealVec phases;  // in (-pi, pi]
  Mat basis;       // columns are eigenvectors
  Mat elem_a, elem_b;
  double reconstruction_residual = 0;
  double basis_residual = 0;
};

inline constexpr std::int64_t kDiagonalizeGuard = std::int64_t{1} << 11;

/// Lifts a d x d observable to o (x) 1 on a D-dimensional chain; D x D input is used as is.
inline Mat lift_observable(const Mat& o, std::int64_t D) {
  if (o.rows() != o.cols()) throw ShapeError("observable is not square");
  if (o.rows() == D) return o;
  if (o.rows() == 0 || D % o.rows() != 0) throw ShapeError("observable dimension does not divide D");
  const std::int64_t rest = D / o.rows();
  return kron(o, Mat::Identity(rest, rest));
}

inline SpectralData diagonalize(const FloquetOperator& fl, const Mat& a, const Mat& b,
                                std::int64_t max_dim = kDiagonalizeGuard) {
  const std::int64_t D = fl.matrix.rows();
  if (D > max_dim) throw CapacityError("diagonalize: D exceeds the dense guard");
  if (fl.matrix.cols() != D) throw ShapeError("diagonalize: operator is not square");
  Eigen::ComplexSchur<Mat> schur(fl.matrix);
  if (schur.info() != Eigen::Success) throw NumericalError("diagonalize: Schur decomposition failed");
  SpectralData sd;
  sd.D = D;
  sd.basis = schur.matrixU();
  sd.phases.resize(D);
  Vec diag(D);
  for (std::int64_t i = 0; i < D; ++i) {
    sd.phases(i) = std::arg(schur.matrixT()(i, i));
    if (sd.phases(i) <= -kPi) sd.phases(i) += 2 * kPi;
    diag(i) = std::polar(1.0, sd.phases(i));
  }
  sd.basis_residual = unitarity_residual(sd.basis);
  sd.reconstruction_residual = max_abs(sd.basis * diag.asDiagonal() * sd.basis.adjoint() - fl.matrix);
  if (sd.reconstruction_residual > 1e-8)
    throw NumericalError("diagonalize: reconstruction residual " + std::to_string(sd.reconstruction_residual));
  sd.elem_a = sd.basis.adjoint() * lift_observable(a, D) * sd.basis;
  sd.elem_b = sd.basis.adjoint() * lift_observable(b, D) * sd.basis;
  return sd;
}

enum class CumulantDomain { time, frequency };
enum class EthMethod { naive, inclusion_exclusion };

inline std::string to_string(EthMethod m) { return m == EthMethod::naive ? "naive" : "inclusion_exclusion"; }

inline EthMethod eth_method_from_string(const std::string& s) {
  if (s == "naive") return EthMethod::naive;
  if (s == "inclusion_exclusion") return EthMethod::inclusion_exclusion;
  throw DomainError("unknown ETH method: " + s);
}

struct CumulantSeries {
  CumulantDomain domain = CumulantDomain::time;
  std::vector<double> grid;  // times or frequencies
  Series k2, k4;
  Series moment;  // time domain only: unrestricted (1/D) tr((A(t) B)^2) = C2(t)
  EthMethod method = EthMethod::inclusion_exclusion;
};

inline constexpr std::int64_t kNaiveGuard = 160;

namespace detail {

/// A(t)_ij = A_ij e^{i w_ij t}
inline Mat evolve_elements(const SpectralData& sd, double t) {
  Vec z(sd.D);
  for (std::int64_t i = 0; i < sd.D; ++i) z(i) = std::polar(1.0, sd.phases(i) * t);
  return z.asDiagonal() * sd.elem_a * z.conjugate().asDiagonal();
}

/// sum_j X_ij Y_ji for every i.
inline Vec product_diagonal(const Mat& x, const Mat& y) { return x.cwiseProduct(y.transpose()).rowwise().sum(); }

inline cplx dot(const Vec& u, const Vec& v) { return (u.array() * v.array()).sum(); }

}  // namespace detail

/// sum over pairwise distinct (i,j,k,l) of M1_ij M2_jk M3_kl M4_li, given the products
/// P12 = M1 M2, P23 = M2 M3, P34 = M3 M4, P41 = M4 M1. Inclusion-exclusion over the partitions of
/// {i,j,k,l}: sign (-1)^{|b|-1}(|b|-1)! per block.
inline cplx distinct_cycle_sum(const Mat& m1, const Mat& m2, const Mat& m3, const Mat& m4, const Mat& p12,
                               const Mat& p23, const Mat& p34, const Mat& p41) {
  using detail::dot;
  using detail::product_diagonal;
  const Vec d1 = m1.diagonal(), d2 = m2.diagonal(), d3 = m3.diagonal(), d4 = m4.diagonal();
  const Vec q12 = p12.diagonal(), q23 = p23.diagonal(), q34 = p34.diagonal(), q41 = p41.diagonal();

  const cplx all_free = p12.cwiseProduct(p34.transpose()).sum();

  const cplx pairs = dot(d1, product_diagonal(m2, p34)) + dot(d2, product_diagonal(m3, p41)) +
                     dot(d3, product_diagonal(m4, p12)) + dot(d4, product_diagonal(m1, p23)) + dot(q12, q34) +
                     dot(q23, q41);

  const cplx double_pairs = dot(d1, m2.cwiseProduct(m4.transpose()) * d3) +
                            dot(d4, m1.cwiseProduct(m3.transpose()) * d2) +
                            m1.cwiseProduct(m3).cwiseProduct(m2.cwiseProduct(m4).transpose()).sum();

  const cplx triples = (d1.array() * d2.array() * q34.array()).sum() + (d2.array() * d3.array() * q41.array()).sum() +
                       (d3.array() * d4.array() * q12.array()).sum() + (d4.array() * d1.array() * q23.array()).sum();

  const cplx quadruple = (d1.array() * d2.array() * d3.array() * d4.array()).sum();

  return all_free - pairs + double_pairs + 2.0 * triples - 6.0 * quadruple;
}

/// Quadruple loop over distinct indices; the oracle for distinct_cycle_sum.
inline cplx distinct_cycle_sum_naive(const Mat& m1, const Mat& m2, const Mat& m3, const Mat& m4, int threads = 1) {
  const std::int64_t D = m1.rows();
  if (D > kNaiveGuard) throw CapacityError("naive quadruple sum: D exceeds 160");
  std::vector<cplx> partial(D, 0.0);
  parallel_for(D, threads, [&](std::int64_t i) {
    cplx acc = 0;
    for (std::int64_t j = 0; j < D; ++j) {
      if (j == i) continue;
      for (std::int64_t k = 0; k < D; ++k) {
        if (k == i || k == j) continue;
        const cplx ijk = m1(i, j) * m2(j, k);
        for (std::int64_t l = 0; l < D; ++l) {
          if (l == i || l == j || l == k) continue;
          acc += ijk * m3(k, l) * m4(l, i);
        }
      }
    }
    partial[i] = acc;
  });
  cplx s = 0;
  for (auto& p : partial) s += p;
  return s;
}

/// ETH cumulants at the listed (possibly negative) times.
inline CumulantSeries eth_cumulants_time(const SpectralData& sd, const std::vector<int>& times, EthMethod method,
                                         int threads = 1) {
  if (method == EthMethod::naive && sd.D > kNaiveGuard) throw CapacityError("eth_cumulants_time: naive needs D <= 160");
  if (sd.D > kDiagonalizeGuard) throw CapacityError("eth_cumulants_time: D exceeds 2^11");
  CumulantSeries out;
  out.domain = CumulantDomain::time;
  out.method = method;
  const double D = static_cast<double>(sd.D);
  const Mat& b = sd.elem_b;
  const cplx diag_ab = (sd.elem_a.diagonal().array() * b.diagonal().array()).sum();
  for (int t : times) {
    const Mat at = detail::evolve_elements(sd, t);
    const Mat p = at * b;
    const cplx k2 = (p.trace() - diag_ab) / D;
    cplx k4;
    if (method == EthMethod::naive) {
      k4 = distinct_cycle_sum_naive(at, b, at, b, threads) / D;
    } else {
      const Mat q = b * at;
      k4 = distinct_cycle_sum(at, b, at, b, p, q, p, q) / D;
    }
    out.grid.push_back(t);
    out.k2.push_back(k2);
    out.k4.push_back(k4);
    out.moment.push_back(p.cwiseProduct(p.transpose()).sum() / D);
  }
  return out;
}

inline CumulantSeries eth_cumulants_time(const SpectralData& sd, int t_max, EthMethod method, int threads = 1) {
  if (t_max < 0) throw BoundsError("eth_cumulants_time: negative t_max");
  std::vector<int> times(t_max + 1);
  for (int t = 0; t <= t_max; ++t) times[t] = t;
  return eth_cumulants_time(sd, times, method, threads);
}

// ---------------------------------------------------------------------------------------------
// Frequency domain

/// `bins` uniform points on (-pi, pi], the last one at pi.
inline std::vector<double> uniform_omega_grid(int bins) {
  if (bins < 1) throw DomainError("omega grid: need at least one bin");
  std::vector<double> g(bins);
  for (int n = 0; n < bins; ++n) g[n] = -kPi + 2 * kPi * (n + 1) / bins;
  return g;
}

inline double wrap_phase(double x) {
  x = std::remainder(x, 2 * kPi);
  return x <= -kPi ? x + 2 * kPi : x;
}

/// 2pi-periodic Gaussian of variance 1/nu, normalized to unit integral over one period.
inline double periodic_gaussian(double x, double nu) {
  if (nu <= 0) throw DomainError("periodic_gaussian: nu must be positive");
  x = wrap_phase(x);
  const double norm = std::sqrt(nu / (2 * kPi));
  const int images = 1 + static_cast<int>(std::ceil(std::sqrt(80.0 / nu) / (2 * kPi)));
  double s = 0;
  for (int n = -images; n <= images; ++n) {
    const double y = x + 2 * kPi * n;
    s += std::exp(-0.5 * nu * y * y);
  }
  return norm * s;
}

/// Half-width of the time window whose Gaussian weight e^{-t^2/(2 nu)} drops below e^{-40}.
inline int smoothing_window(double nu) { return static_cast<int>(std::ceil(std::sqrt(80.0 * nu))); }

struct FrequencyOptions {
  double nu = 20;
  int threads = 1;
  bool compute_k4 = true;
  std::int64_t max_dim_k4 = 1024;
};

/// k2(w) from the smoothed comb over the pairs (i != j); k4(w) from the exact distinct-index k4(t)
/// weighted by e^{-t^2/(2 nu)}, which equals comb smoothing with the periodic Gaussian.
inline CumulantSeries eth_cumulants_freq(const SpectralData& sd, const std::vector<double>& omega_grid,
                                         const FrequencyOptions& opt = {}) {
  if (omega_grid.empty()) throw DomainError("eth_cumulants_freq: empty grid");
  if (opt.nu <= 0) throw DomainError("eth_cumulants_freq: nu must be positive");
  if (opt.compute_k4 && sd.D > opt.max_dim_k4) throw CapacityError("eth_cumulants_freq: D exceeds the k4 budget");
  const std::int64_t D = sd.D;
  const std::size_t nw = omega_grid.size();
  CumulantSeries out;
  out.domain = CumulantDomain::frequency;
  out.method = EthMethod::inclusion_exclusion;
  out.grid = omega_grid;

  // k2: per-row accumulation, merged in row order.
  const double cutoff = 12.0 / std::sqrt(opt.nu);
  std::vector<Series> rows(D, Series(nw, 0.0));
  parallel_for(D, opt.threads, [&](std::int64_t i) {
    Series& acc = rows[i];
    for (std::int64_t j = 0; j < D; ++j) {
      if (j == i) continue;
      const cplx w = sd.elem_a(i, j) * sd.elem_b(j, i);
      const double wij = sd.phases(i) - sd.phases(j);
      for (std::size_t n = 0; n < nw; ++n) {
        const double x = wrap_phase(omega_grid[n] - wij);
        if (std::abs(x) > cutoff && 2 * kPi - std::abs(x) > cutoff) continue;
        acc[n] += w * periodic_gaussian(x, opt.nu);
      }
    }
  });
  out.k2.assign(nw, 0.0);
  for (std::int64_t i = 0; i < D; ++i)
    for (std::size_t n = 0; n < nw; ++n) out.k2[n] += rows[i][n];
  for (auto& v : out.k2) v *= 2 * kPi / static_cast<double>(D);

  if (!opt.compute_k4) return out;
  const int T = smoothing_window(opt.nu);
  std::vector<int> times;
  for (int t = -T; t <= T; ++t) times.push_back(t);
  const auto ts = eth_cumulants_time(sd, times, EthMethod::inclusion_exclusion);
  out.k4.assign(nw, 0.0);
  for (std::size_t n = 0; n < nw; ++n) {
    cplx s = 0;
    for (std::size_t m = 0; m < times.size(); ++m) {
      const double t = times[m];
      s += std::exp(-t * t / (2 * opt.nu)) * ts.k4[m] * std::polar(1.0, -omega_grid[n] * t);
    }
    out.k4[n] = s;
  }
  return out;
}

}  // namespace scrambler
