#pragma once

// Two-qudit gates, the dual-unitary Cartan family, the fixed Hermitian boundary gate and replica
// folding.
//
// Folding convention. A folded leg carries k replicas of a site, each as a (forward, backward) pair:
// the leg index is (f_1, b_1, f_2, b_2, ..., f_k, b_k) with f_1 most significant, dimension d^{2k}.
// Forward copies carry G, backward copies carry conj(G). A folded two-leg operator is indexed
// [(out_left, out_right), (in_left, in_right)], left leg most significant. For k = 1 this is the
// row-major vectorization vec(G X G^dagger) = (G (x) conj(G)) vec(X) with the left and right sites
// interleaved.

#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/SVD>
#include <json.hpp>

#include "scrambler/errors.hpp"
#include "scrambler/rng.hpp"
#include "scrambler/tensor.hpp"
#include "scrambler/types.hpp"

namespace scrambler {

/// A unitary on two sites of dimension d, row-major over (left site, right site).
class Gate {
 public:
  Gate() = default;
  Gate(int d, Mat matrix, double tol = 1e-12) : d_(d), m_(std::move(matrix)) {
    if (d < 2) throw ShapeError("gate: d must be at least 2");
    if (m_.rows() != d * d || m_.cols() != d * d) throw ShapeError("gate: matrix is not d^2 x d^2");
    const double r = unitarity_residual(m_);
    if (!(r < tol)) throw ValidationError("gate: unitarity residual " + std::to_string(r));
  }

  static Gate identity(int d) { return Gate(d, Mat::Identity(d * d, d * d)); }

  static Gate swap(int d) {
    Mat m = Mat::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(j * d + i, i * d + j) = 1.0;
    return Gate(d, std::move(m));
  }

  int d() const { return d_; }
  const Mat& matrix() const { return m_; }

  /// Composition: (g * h) applies h first.
  Gate operator*(const Gate& h) const {
    if (h.d_ != d_) throw ShapeError("gate: composing gates of different d");
    return Gate(d_, m_ * h.m_, 1e-10);
  }

 private:
  int d_ = 0;
  Mat m_;
};

/// The matrix with one input and one output leg exchanged: R[(o1,i1),(o2,i2)] = G[(o1,o2),(i1,i2)].
inline Mat reshuffle(const Mat& g, int d) {
  Mat r(d * d, d * d);
  for (int o1 = 0; o1 < d; ++o1)
    for (int o2 = 0; o2 < d; ++o2)
      for (int i1 = 0; i1 < d; ++i1)
        for (int i2 = 0; i2 < d; ++i2) r(o1 * d + i1, o2 * d + i2) = g(o1 * d + o2, i1 * d + i2);
  return r;
}

struct DualUnitarity {
  bool flag;
  double residual;
};

inline DualUnitarity is_dual_unitary(const Gate& g, double tol = 1e-10) {
  const double r = unitarity_residual(reshuffle(g.matrix(), g.d()));
  return {r < tol, r};
}

// ---------------------------------------------------------------------------------------------
// Cartan family (qubits)

struct CartanParams {
  double tau = kPi / 4;
  double jz = 0.0;
  Mat u_plus = Mat::Identity(2, 2), u_minus = Mat::Identity(2, 2);
  Mat v_plus = Mat::Identity(2, 2), v_minus = Mat::Identity(2, 2);
};

inline void validate_su2(const Mat& u, const char* name) {
  if (u.rows() != 2 || u.cols() != 2) throw ValidationError(std::string(name) + ": local factor is not 2x2");
  const double ur = unitarity_residual(u);
  const double dr = std::abs(u.determinant() - cplx(1.0));
  if (!(ur < 1e-12) || !(dr < 1e-12))
    throw ValidationError(std::string(name) + ": local factor not special unitary (residuals " + std::to_string(ur) +
                          ", " + std::to_string(dr) + ")");
}

/// exp(-i tau (XX + YY + jz ZZ)) in closed form.
inline Mat xxz_propagator(double tau, double jz) {
  using namespace std::complex_literals;
  Mat e = Mat::Zero(4, 4);
  const cplx outer = std::exp(-1i * tau * jz);
  const cplx inner = std::exp(1i * tau * jz);
  e(0, 0) = e(3, 3) = outer;
  e(1, 1) = e(2, 2) = inner * std::cos(2 * tau);
  e(1, 2) = e(2, 1) = -1i * inner * std::sin(2 * tau);
  return e;
}

/// V = (v+ (x) v-) exp(-i tau (XX+YY+Jz ZZ)) (u+ (x) u-).
inline Gate cartan_gate(const CartanParams& p) {
  validate_su2(p.u_plus, "u_plus");
  validate_su2(p.u_minus, "u_minus");
  validate_su2(p.v_plus, "v_plus");
  validate_su2(p.v_minus, "v_minus");
  Mat m = kron(p.v_plus, p.v_minus) * xxz_propagator(p.tau, p.jz) * kron(p.u_plus, p.u_minus);
  return Gate(2, std::move(m));
}

/// Haar-random SU(2) element from a normalized 4-vector of Gaussians.
inline Mat random_su2(CounterRng& rng) {
  double q[4];
  double n2 = 0;
  do {
    n2 = 0;
    for (double& x : q) {
      x = rng.normal();
      n2 += x * x;
    }
  } while (n2 < 1e-300);
  const double n = std::sqrt(n2);
  const cplx a(q[0] / n, q[1] / n), b(q[2] / n, q[3] / n);
  Mat u(2, 2);
  u << a, b, -std::conj(b), std::conj(a);
  return u;
}

struct JzRange {
  double lo = 0.0;
  double hi = 1.0;
};

/// Random Cartan parameters: jz uniform in range, then u+, u-, v+, v- Haar.
inline CartanParams random_cartan_params(std::uint64_t seed, double tau, JzRange jz = {}) {
  CounterRng rng(seed);
  CartanParams p;
  p.tau = tau;
  p.jz = rng.uniform(jz.lo, jz.hi);
  p.u_plus = random_su2(rng);
  p.u_minus = random_su2(rng);
  p.v_plus = random_su2(rng);
  p.v_minus = random_su2(rng);
  return p;
}

inline Gate random_cartan_gate(std::uint64_t seed, double tau, JzRange jz = {}) {
  return cartan_gate(random_cartan_params(seed, tau, jz));
}

inline Gate random_du_gate(std::uint64_t seed, JzRange jz = {}) { return random_cartan_gate(seed, kPi / 4, jz); }

/// Haar-random unitary on two qudits (QR of a Ginibre matrix with phase fix).
inline Gate random_unitary_gate(std::uint64_t seed, int d = 2) {
  CounterRng rng(seed);
  const int n = d * d;
  Mat z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = cplx(rng.normal(), rng.normal()) / std::sqrt(2.0);
  Eigen::HouseholderQR<Mat> qr(z);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const cplx ph = r(j, j) / std::abs(r(j, j));
    q.col(j) *= ph;
  }
  return Gate(d, std::move(q));
}

// ---------------------------------------------------------------------------------------------
// Fixed boundary gate

/// Reference 4x4 boundary gate given to four decimals, hence not exactly unitary.
inline Mat boundary_gate_rounded() {
  using namespace std::complex_literals;
  Mat u(4, 4);
  u << 0.7214, 0.3618 - 0.0674i, -0.4365 - 0.1884i, 0.2964 + 0.1740i,  //
      0.3618 + 0.0674i, 0.5139, 0.5213 + 0.3501i, -0.3428 - 0.2977i,   //
      -0.4365 + 0.1884i, 0.5213 - 0.3501i, 0.1888, 0.5821 + 0.0723i,   //
      0.2964 - 0.1740i, -0.3428 + 0.2977i, 0.5821 - 0.0723i, 0.5759;
  return u;
}

/// Unitary polar factor W V^dagger of M = W S V^dagger.
inline Mat polar_unitary(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// The rounded gate re-unitarized by its polar factor. Stays Hermitian.
inline Gate paper_gate() { return Gate(2, polar_unitary(boundary_gate_rounded())); }

// ---------------------------------------------------------------------------------------------
// Folding

/// Applies g to the digit pair (p_left, p_right) on every forward copy and conj(g) on every backward
/// copy of two folded legs. Leg l occupies digits [l*2k, (l+1)*2k).
inline void apply_replicas(cplx* data, int n_digits, int d, int k, int leg_left, int leg_right, const Mat& g) {
  const Mat gc = g.conjugate();
  for (int m = 0; m < 2 * k; ++m)
    apply_pair(data, n_digits, d, leg_left * 2 * k + m, leg_right * 2 * k + m, m % 2 == 0 ? g : gc);
}

struct FoldedOperator {
  int d = 0;
  int k = 0;
  Mat matrix;  // d^{4k} x d^{4k}
};

inline FoldedOperator fold(const Gate& g, int k, std::int64_t max_entries = std::int64_t{1} << 24) {
  if (k < 1) throw BoundsError("fold: k must be positive");
  const int d = g.d();
  const std::int64_t dim = ipow(d, 4 * k);
  if (dim * dim > max_entries) throw CapacityError("fold: folded operator exceeds the entry guard");
  Mat out = Mat::Identity(dim, dim);
  const int n = 4 * k;
  for (Eigen::Index c = 0; c < dim; ++c) apply_replicas(out.col(c).data(), n, d, k, 0, 1, g.matrix());
  return {d, k, std::move(out)};
}

// ---------------------------------------------------------------------------------------------
// JSON

inline nlohmann::json gate_to_json(const Gate& g) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < g.matrix().rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < g.matrix().cols(); ++j) row.push_back({g.matrix()(i, j).real(), g.matrix()(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return {{"d", g.d()}, {"rows", std::move(rows)}};
}

inline Gate gate_from_json(const nlohmann::json& j) {
  const int d = j.at("d").get<int>();
  const auto& rows = j.at("rows");
  const int n = d * d;
  if (static_cast<int>(rows.size()) != n) throw ShapeError("gate json: wrong row count");
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) throw ShapeError("gate json: wrong column count");
    for (int c = 0; c < n; ++c) m(i, c) = cplx(rows[i][c].at(0).get<double>(), rows[i][c].at(1).get<double>());
  }
  return Gate(d, std::move(m));
}

}  // namespace scrambler
