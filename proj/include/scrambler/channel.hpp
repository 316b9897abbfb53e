#pragma once

// Single-site channel M(a) = tr_2[U (a (x) 1) U^dagger]/d, the two-replica blocks, the semigroup
// generator G and closed-form predictions for C1, C2, k2, k4.
//
// Operators are vectorized row-major, vec(X)[i*d + j] = X(i, j). A left eigenoperator b acts as
// (b|X) = tr(b X).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "scrambler/errors.hpp"
#include "scrambler/folded.hpp"
#include "scrambler/gates.hpp"
#include "scrambler/ncperm.hpp"
#include "scrambler/tensor.hpp"
#include "scrambler/types.hpp"

namespace scrambler {

struct Channel {
  int d = 0;
  Mat superoperator;  // d^2 x d^2

  Mat apply(const Mat& a) const { return unvec_rowmajor(superoperator * vec_rowmajor(a), d); }
};

inline Channel channel_from_gate(const Gate& g) {
  const int d = g.d();
  const Mat& u = g.matrix();
  Mat s = Mat::Zero(d * d, d * d);
  for (int sf = 0; sf < d; ++sf)
    for (int sb = 0; sb < d; ++sb)
      for (int of = 0; of < d; ++of)
        for (int ob = 0; ob < d; ++ob) {
          cplx acc = 0;
          for (int x = 0; x < d; ++x)
            for (int y = 0; y < d; ++y) acc += u(of * d + y, sf * d + x) * std::conj(u(ob * d + y, sb * d + x));
          s(of * d + ob, sf * d + sb) = acc / static_cast<double>(d);
        }
  return {d, std::move(s)};
}

/// Smallest eigenvalue of the Choi matrix sum_{ij} |i)(j| (x) M(|i)(j|) (Hermitian part).
inline double choi_min_eigenvalue(const Channel& c) {
  const int d = c.d;
  Mat choi = Mat::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Mat e = Mat::Zero(d, d);
      e(i, j) = 1.0;
      Mat m = c.apply(e);
      for (int r = 0; r < d; ++r)
        for (int s = 0; s < d; ++s) choi(i * d + r, j * d + s) = m(r, s);
    }
  Mat h = (choi + choi.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  return es.eigenvalues().minCoeff();
}

struct EigenOperatorPair {
  Mat a;  // right eigenoperator, M(a) = lambda a
  Mat b;  // left eigenoperator, tr(b M(X)) = lambda tr(b X)
  cplx lambda;
};

struct ChannelSpectrum {
  std::vector<cplx> eigenvalues;  // sorted by decreasing modulus
  EigenOperatorPair mode;         // leading nontrivial mode
};

inline std::vector<cplx> sort_by_modulus(const Eigen::VectorXcd& ev) {
  std::vector<cplx> v(ev.data(), ev.data() + ev.size());
  std::stable_sort(v.begin(), v.end(), [](cplx x, cplx y) {
    if (std::abs(std::abs(x) - std::abs(y)) > 1e-13) return std::abs(x) > std::abs(y);
    return x.real() > y.real();
  });
  return v;
}

inline std::vector<cplx> channel_eigenvalues(const Channel& c) {
  Eigen::ComplexEigenSolver<Mat> es(c.superoperator, false);
  return sort_by_modulus(es.eigenvalues());
}

namespace detail {

/// Fixes the phase: tr(a^2)/d = 1 when possible, first significant entry with positive real part.
inline Mat normalize_eigenoperator(Mat a) {
  const int d = static_cast<int>(a.rows());
  const cplx t2 = (a * a).trace();
  if (std::abs(t2) > 1e-12) {
    a *= std::sqrt(static_cast<double>(d) / t2);
  } else {
    a /= std::sqrt((a.adjoint() * a).trace().real() / d);
  }
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const cplx x = a(i / a.cols(), i % a.cols());
    if (std::abs(x) < 1e-9) continue;
    if (x.real() < -1e-12 || (std::abs(x.real()) <= 1e-12 && x.imag() < 0)) a = -a;
    break;
  }
  return a;
}

}  // namespace detail

inline ChannelSpectrum channel_spectrum(const Channel& c, double gap_tol = 1e-8) {
  const int d = c.d;
  Eigen::ComplexEigenSolver<Mat> right(c.superoperator);
  Eigen::ComplexEigenSolver<Mat> left(c.superoperator.transpose().eval());
  ChannelSpectrum out;
  out.eigenvalues = sort_by_modulus(right.eigenvalues());
  const auto& ev = out.eigenvalues;
  if (ev.size() < 2) throw DegeneracyError("channel_spectrum: no nontrivial mode", 0.0);
  const double gap_unit = std::abs(ev[1] - cplx(1.0));
  const double gap_next = ev.size() > 2 ? std::abs(ev[1]) - std::abs(ev[2]) : 1.0;
  const double gap = std::min(gap_unit, gap_next);
  if (!(gap > gap_tol)) throw DegeneracyError("channel_spectrum: degenerate leading nontrivial mode", gap);
  const cplx lam = ev[1];

  auto pick = [&](const Eigen::ComplexEigenSolver<Mat>& es) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
      if (std::abs(es.eigenvalues()(i) - lam) < std::abs(es.eigenvalues()(best) - lam)) best = i;
    return Vec(es.eigenvectors().col(best));
  };
  Mat a = detail::normalize_eigenoperator(unvec_rowmajor(pick(right), d));
  // w^T S = lam w^T with w = vec(b^T), so b = unvec(w)^T.
  Mat b = unvec_rowmajor(pick(left), d).transpose();
  const cplx tab = (a * b).trace();
  if (std::abs(tab) < 1e-12) throw NumericalError("channel_spectrum: left and right eigenoperators are orthogonal");
  b *= static_cast<double>(d) / tab;
  out.mode = {std::move(a), std::move(b), lam};
  return out;
}

// ---------------------------------------------------------------------------------------------
// Two replicas

struct ReplicaChannels {
  int d = 0;
  Mat m_ss, m_oo, m_so;  // M_{sigma nu}: sigma on the later (output) boundary, nu on the earlier (input)
};

inline ReplicaChannels replica_channels(const Gate& g) {
  const int d = g.d();
  const Vec circ = permutation_vector(Permutation::identity(2), d);
  const Vec sq = permutation_vector(Permutation::cyclic(2), d);
  const double norm = 1.0 / (d * d);
  return {d, replica_block(g.matrix(), d, 2, sq, sq) * norm, replica_block(g.matrix(), d, 2, circ, circ) * norm,
          replica_block(g.matrix(), d, 2, sq, circ) * norm};
}

/// Swaps the backward copies of the two replicas: (f1, b1, f2, b2) -> (f1, b2, f2, b1).
inline Mat replica_swap_b(int d) {
  const std::int64_t q = ipow(d, 4);
  Mat p = Mat::Zero(q, q);
  for (int f1 = 0; f1 < d; ++f1)
    for (int b1 = 0; b1 < d; ++b1)
      for (int f2 = 0; f2 < d; ++f2)
        for (int b2 = 0; b2 < d; ++b2) {
          const std::int64_t x = ((f1 * d + b1) * d + f2) * d + b2;
          const std::int64_t y = ((f1 * d + b2) * d + f2) * d + b1;
          p(y, x) = 1.0;
        }
  return p;
}

struct Generator {
  int d = 0;
  ReplicaChannels blocks;
  Mat matrix;  // 2d^4 x 2d^4, block order (square, circle)
};

inline Generator generator(const Gate& g) {
  Generator gen;
  gen.d = g.d();
  gen.blocks = replica_channels(g);
  const auto& b = gen.blocks;
  const Eigen::Index q = b.m_ss.rows();
  gen.matrix = Mat::Zero(2 * q, 2 * q);
  gen.matrix.topLeftCorner(q, q) = b.m_ss;
  gen.matrix.topRightCorner(q, q) = b.m_so - b.m_ss / static_cast<double>(gen.d);
  gen.matrix.bottomRightCorner(q, q) = b.m_oo;
  return gen;
}

struct BoundaryVectors {
  Vec psi_a;  // (d |a_circ) ; d^2 |a_circ))
  Vec psi_b;  // ((b_sq| / d^2, 0)
};

inline BoundaryVectors semigroup_boundaries(const Mat& a, const Mat& b) {
  const int d = static_cast<int>(a.rows());
  const Vec ket = dressed_ket(a, Permutation::identity(2));
  const Vec bra = dressed_bra(b, Permutation::cyclic(2));
  const Eigen::Index q = ket.size();
  BoundaryVectors bv{Vec::Zero(2 * q), Vec::Zero(2 * q)};
  bv.psi_a.head(q) = static_cast<double>(d) * ket;
  bv.psi_a.tail(q) = static_cast<double>(d * d) * ket;
  bv.psi_b.head(q) = bra / static_cast<double>(d * d);
  return bv;
}

/// C2(t) = (psi_b| G^t |psi_a), t = 0..t_max, for arbitrary single-site a, b.
inline Series c2_semigroup(const Gate& g, const Mat& a, const Mat& b, int t_max) {
  const Generator gen = generator(g);
  const auto bv = semigroup_boundaries(a, b);
  Series out;
  Vec v = bv.psi_a;
  for (int t = 0; t <= t_max; ++t) {
    if (t > 0) v = gen.matrix * v;
    out.push_back(pair(bv.psi_b, v));
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Closed forms

/// Static free cumulants of traceless a, b.
inline cplx k2_static(const Mat& a, const Mat& b) { return (a * b).trace() / static_cast<double>(a.rows()); }

inline cplx k4_static(const Mat& a, const Mat& b) {
  const double d = static_cast<double>(a.rows());
  const cplx k2 = k2_static(a, b);
  return (a * b * a * b).trace() / d - 2.0 * k2 * k2;
}

/// Observable normalization for the closed forms.
enum class ObservableNorm {
  per_dimension,   // tr(a^2)/d = 1, tr(ab) = d
  hilbert_schmidt  // tr(a^2) = 1, tr(ab) = 1
};

struct ClosedFormConstants {
  int d = 0;
  cplx lambda;
  double gamma = 0;         // -ln|lambda|
  bool complex_lambda = false;
  cplx x;                   // (b_sq| M_{sq circ} |a_circ)
  cplx y;                   // (b_sq|a_circ) = tr(abab)
  cplx k2_ab, k4_abab;
  Mat a, b;
};

inline ClosedFormConstants closed_form_constants(const Gate& g, ObservableNorm norm = ObservableNorm::per_dimension) {
  const auto spec = channel_spectrum(channel_from_gate(g));
  ClosedFormConstants c;
  c.d = g.d();
  c.lambda = spec.mode.lambda;
  c.gamma = -std::log(std::abs(c.lambda));
  c.complex_lambda = std::abs(c.lambda.imag()) > 1e-12 || c.lambda.real() < 0;
  c.a = spec.mode.a;
  c.b = spec.mode.b;
  if (norm == ObservableNorm::hilbert_schmidt) {
    const double s = 1.0 / std::sqrt(static_cast<double>(c.d));
    c.a *= s;
    c.b *= s;
  }
  const auto rc = replica_channels(g);
  const Vec ket = dressed_ket(c.a, Permutation::identity(2));
  const Vec bra = dressed_bra(c.b, Permutation::cyclic(2));
  c.x = pair(bra, rc.m_so * ket);
  c.y = pair(bra, ket);
  c.k2_ab = k2_static(c.a, c.b);
  c.k4_abab = k4_static(c.a, c.b);
  return c;
}

/// Closed-form C2(t) for eigenoperators: lambda^{2t-2} t X - lambda^{2t} (t-1) Y / d.
inline cplx c2_closed_form(const ClosedFormConstants& c, int t) {
  const cplx l2t = std::pow(c.lambda, 2 * t);
  const cplx l2tm2 = t == 0 ? cplx(0) : std::pow(c.lambda, 2 * t - 2);
  return l2tm2 * static_cast<double>(t) * c.x - l2t * static_cast<double>(t - 1) * c.y / static_cast<double>(c.d);
}

struct AnalyticCumulants {
  ClosedFormConstants constants;
  Series c1, c2, k2, k4;
};

inline AnalyticCumulants analytic_cumulants(const Gate& g, int t_max, ObservableNorm norm = ObservableNorm::per_dimension) {
  AnalyticCumulants out;
  out.constants = closed_form_constants(g, norm);
  const auto& c = out.constants;
  const double d = c.d;
  for (int t = 0; t <= t_max; ++t) {
    const cplx k2 = c.k2_ab * std::pow(c.lambda, t);
    const cplx l2tm2 = t == 0 ? cplx(0) : std::pow(c.lambda, 2 * t - 2);
    const cplx k4 = c.k4_abab * std::pow(c.lambda, 2 * t) +
                    static_cast<double>(t) * l2tm2 * (c.x - c.lambda * c.lambda * c.y / d);
    out.k2.push_back(k2);
    out.k4.push_back(k4);
    out.c1.push_back(k2);
    out.c2.push_back(k4 + 2.0 * k2 * k2);
  }
  return out;
}

/// The re-unitarized reference gate and its nontrivial channel eigenvalue.
struct PaperBoundaryGate {
  Gate gate;
  cplx lambda;
};

inline PaperBoundaryGate paper_boundary_gate() {
  Gate g = paper_gate();
  return {g, channel_spectrum(channel_from_gate(g)).mode.lambda};
}

// ---------------------------------------------------------------------------------------------
// Jordan block of G at lambda^2

struct JordanReport {
  bool has_structure = false;
  std::string note;
  cplx lambda;
  cplx alpha_sq, alpha_circ, beta_sq, beta_circ;
  double residual_r0 = 0, residual_l0 = 0;  // (G - l^2) R0, L0 (G - l^2)
  double residual_r1 = 0, residual_l1 = 0;  // (G - l^2) R1 - R0, L1 (G - l^2) - L0
  double biorthogonality = 0;               // max |(L_i|R_j) - (1 - delta_ij)|
  double power_deviation = 0;               // max_t |G^t P - J^t| / max|J^t|
  double c2_deviation = 0;                  // max_t |(psi_b|J^t|psi_a) - closed form|
  int t_max = 0;
};

inline JordanReport jordan_check(const Gate& g, int t_max = 30) {
  JordanReport rep;
  rep.t_max = t_max;
  const auto c = closed_form_constants(g);
  rep.lambda = c.lambda;
  const double d = c.d;
  const cplx l2 = c.lambda * c.lambda;
  if (std::abs(c.lambda) < 1e-10) {
    rep.note = "lambda = 0: no Jordan block";
    return rep;
  }
  const Generator gen = generator(g);
  const auto& bl = gen.blocks;
  const Vec a_circ = dressed_ket(c.a, Permutation::identity(2));
  const Vec a_sq = dressed_ket(c.a, Permutation::cyclic(2));
  const Vec b_circ = dressed_bra(c.b, Permutation::identity(2));
  const Vec b_sq = dressed_bra(c.b, Permutation::cyclic(2));
  const Eigen::Index q = a_circ.size();
  const Mat xop = bl.m_so - bl.m_ss / d;
  const cplx xp = pair(b_sq, xop * a_circ);
  if (std::abs(xp) < 1e-12) {
    rep.note = "(b_sq|M_so - M_ss/d|a_circ) = 0: Jordan block decouples";
    return rep;
  }
  rep.alpha_circ = 1.0;
  rep.alpha_sq = rep.alpha_circ * xp / (d * d);
  rep.beta_circ = d * d / rep.alpha_circ;
  rep.beta_sq = rep.beta_circ / (d * d * xp);

  const Mat id = Mat::Identity(q, q);
  // (M_ss - l2) r1 = alpha_sq a_sq - alpha_circ X a_circ, with (b_sq|r1) = 0.
  Vec rhs_r = rep.alpha_sq * a_sq - rep.alpha_circ * (xop * a_circ);
  Vec r1 = (bl.m_ss - l2 * id).completeOrthogonalDecomposition().solve(rhs_r);
  r1 -= a_sq * (pair(b_sq, r1) / pair(b_sq, a_sq));
  // l1^T (M_oo - l2) = beta_circ b_circ / d^4 - beta_sq b_sq^T X, with (l1|a_circ) = 0.
  Vec rhs_l = rep.beta_circ * b_circ / std::pow(d, 4) - rep.beta_sq * (xop.transpose() * b_sq);
  Vec l1 = (bl.m_oo - l2 * id).transpose().completeOrthogonalDecomposition().solve(rhs_l);
  l1 -= b_circ * (pair(l1, a_circ) / pair(b_circ, a_circ));

  Vec R0 = Vec::Zero(2 * q), R1 = Vec::Zero(2 * q), L0 = Vec::Zero(2 * q), L1 = Vec::Zero(2 * q);
  R0.head(q) = rep.alpha_sq * a_sq;
  R1.head(q) = r1;
  R1.tail(q) = rep.alpha_circ * a_circ;
  L0.tail(q) = rep.beta_circ * b_circ / std::pow(d, 4);
  L1.head(q) = rep.beta_sq * b_sq;
  L1.tail(q) = l1;

  const Mat& G = gen.matrix;
  const Mat Gm = G - l2 * Mat::Identity(2 * q, 2 * q);
  auto vmax = [](const Vec& v) { return v.cwiseAbs().maxCoeff(); };
  rep.residual_r0 = vmax(Gm * R0) / vmax(R0);
  rep.residual_l0 = vmax(Gm.transpose() * L0) / vmax(L0);
  rep.residual_r1 = vmax(Gm * R1 - R0) / vmax(R0);
  rep.residual_l1 = vmax(Gm.transpose() * L1 - L0) / vmax(L0);
  const Vec* Ls[2] = {&L0, &L1};
  const Vec* Rs[2] = {&R0, &R1};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      rep.biorthogonality = std::max(rep.biorthogonality, std::abs(pair(*Ls[i], *Rs[j]) - (i == j ? 0.0 : 1.0)));

  const Mat P = R0 * L1.transpose() + R1 * L0.transpose();
  const Mat N = R0 * L0.transpose();
  const auto bv = semigroup_boundaries(c.a, c.b);
  Mat Gt = Mat::Identity(2 * q, 2 * q);
  for (int t = 0; t <= t_max; ++t) {
    if (t > 0) Gt = G * Gt;
    const cplx l2t = std::pow(c.lambda, 2 * t);
    const cplx l2tm2 = t == 0 ? cplx(0) : std::pow(c.lambda, 2 * t - 2);
    const Mat Jt = l2t * P + static_cast<double>(t) * l2tm2 * N;
    const double scale = std::max(max_abs(Jt), 1e-300);
    rep.power_deviation = std::max(rep.power_deviation, max_abs(Gt * P - Jt) / scale);
    rep.c2_deviation = std::max(rep.c2_deviation, std::abs(pair(bv.psi_b, Jt * bv.psi_a) - c2_closed_form(c, t)));
  }
  rep.has_structure = true;
  return rep;
}

}  // namespace scrambler
