#pragma once

// Exact simulation of the boundary-scrambling Floquet circuit. Site 0 is the subsystem, sites
// 1..L form the bath. One period applies U on (0,1), then V_{1,2} ... V_{L-1,L}, then
// V_{L-1,L} ... V_{1,2}.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scrambler/errors.hpp"
#include "scrambler/gates.hpp"
#include "scrambler/rng.hpp"
#include "scrambler/tensor.hpp"
#include "scrambler/types.hpp"

namespace scrambler {

enum class SweepMode { shared, independent };

inline std::string to_string(SweepMode m) { return m == SweepMode::shared ? "shared" : "independent"; }

inline SweepMode sweep_mode_from_string(const std::string& s) {
  if (s == "shared") return SweepMode::shared;
  if (s == "independent") return SweepMode::independent;
  throw DomainError("unknown sweep mode: " + s);
}

struct CircuitSpec {
  int L = 2;
  int d = 2;
  Gate boundary_gate;
  std::vector<Gate> bulk_gates;       // V_{i,i+1}, i = 1..L-1, right sweep
  std::vector<Gate> bulk_gates_left;  // left sweep, only in independent mode
  SweepMode sweep_mode = SweepMode::shared;
  std::uint64_t seed = 0;

  void validate() const {
    if (L < 2) throw DomainError("circuit: L must be at least 2");
    if (boundary_gate.d() != d) throw ShapeError("circuit: boundary gate has wrong d");
    if (static_cast<int>(bulk_gates.size()) != L - 1) throw ShapeError("circuit: need L-1 bulk gates");
    if (sweep_mode == SweepMode::independent && static_cast<int>(bulk_gates_left.size()) != L - 1)
      throw ShapeError("circuit: independent mode needs L-1 left-sweep gates");
    for (auto& g : bulk_gates)
      if (g.d() != d) throw ShapeError("circuit: bulk gate has wrong d");
    for (auto& g : bulk_gates_left)
      if (g.d() != d) throw ShapeError("circuit: bulk gate has wrong d");
  }

  std::int64_t dim() const { return ipow(d, L + 1); }

  /// Gates in the order they act, each paired with the left site it touches.
  std::vector<std::pair<int, const Gate*>> sequence() const {
    validate();
    std::vector<std::pair<int, const Gate*>> seq;
    seq.emplace_back(0, &boundary_gate);
    for (int i = 1; i <= L - 1; ++i) seq.emplace_back(i, &bulk_gates[i - 1]);
    const auto& left = sweep_mode == SweepMode::shared ? bulk_gates : bulk_gates_left;
    for (int i = L - 1; i >= 1; --i) seq.emplace_back(i, &left[i - 1]);
    return seq;
  }
};

/// Bulk of Cartan gates at Trotter step tau with random locals and jz; tau = pi/4 gives a
/// dual-unitary bath. Bond i of the right sweep uses stream (seed, 0, i), the left sweep (seed, 1, i).
inline CircuitSpec cartan_bath_spec(int L, const Gate& boundary, std::uint64_t seed, SweepMode mode,
                                    double tau = kPi / 4, JzRange jz = {}) {
  CircuitSpec s;
  s.L = L;
  s.d = 2;
  s.boundary_gate = boundary;
  s.sweep_mode = mode;
  s.seed = seed;
  for (int i = 0; i < L - 1; ++i) s.bulk_gates.push_back(random_cartan_gate(derive_seed(derive_seed(seed, 0), i), tau, jz));
  if (mode == SweepMode::independent)
    for (int i = 0; i < L - 1; ++i)
      s.bulk_gates_left.push_back(random_cartan_gate(derive_seed(derive_seed(seed, 1), i), tau, jz));
  s.validate();
  return s;
}

inline nlohmann::json spec_to_json(const CircuitSpec& s, bool with_gates = true) {
  nlohmann::json j = {{"L", s.L}, {"d", s.d}, {"sweep_mode", to_string(s.sweep_mode)}, {"seed", s.seed}};
  if (with_gates) {
    j["boundary_gate"] = gate_to_json(s.boundary_gate);
    j["bulk_gates"] = nlohmann::json::array();
    for (auto& g : s.bulk_gates) j["bulk_gates"].push_back(gate_to_json(g));
    if (!s.bulk_gates_left.empty()) {
      j["bulk_gates_left"] = nlohmann::json::array();
      for (auto& g : s.bulk_gates_left) j["bulk_gates_left"].push_back(gate_to_json(g));
    }
  }
  return j;
}

// ---------------------------------------------------------------------------------------------

struct FloquetOperator {
  std::int64_t D = 0;
  Mat matrix;
};

inline FloquetOperator build_floquet(const CircuitSpec& spec, std::int64_t max_dim = 1 << 12) {
  spec.validate();
  const std::int64_t D = spec.dim();
  if (D > max_dim) throw CapacityError("build_floquet: D exceeds the dense guard");
  const int n = spec.L + 1;
  // Column-major storage of U equals row-major storage of U^T, so work on the row-major buffer of U
  // directly: digits [0, n) are row digits.
  std::vector<cplx> buf(D * D, 0.0);
  for (std::int64_t i = 0; i < D; ++i) buf[i * D + i] = 1.0;
  for (auto& [site, g] : spec.sequence()) apply_pair(buf.data(), 2 * n, spec.d, site, site + 1, g->matrix());
  Mat u(D, D);
  for (std::int64_t r = 0; r < D; ++r)
    for (std::int64_t c = 0; c < D; ++c) u(r, c) = buf[r * D + c];
  return {D, std::move(u)};
}

/// o (x) 1 on L+1 sites as a dense matrix.
inline Mat lift_site0(const Mat& o, int d, int L) {
  const std::int64_t rest = ipow(d, L);
  return kron(o, Mat::Identity(rest, rest));
}

/// Row-major operator buffer evolved in the Heisenberg picture, A <- U A U^dagger per period.
class HeisenbergEvolver {
 public:
  HeisenbergEvolver(const CircuitSpec& spec, const Mat& a0) : spec_(spec), seq_(spec_.sequence()) {
    const int d = spec_.d;
    if (a0.rows() != d || a0.cols() != d) throw ShapeError("evolver: observable is not d x d");
    D_ = spec_.dim();
    rest_ = ipow(d, spec_.L);
    data_.assign(D_ * D_, 0.0);
    for (int r0 = 0; r0 < d; ++r0)
      for (int c0 = 0; c0 < d; ++c0)
        for (std::int64_t x = 0; x < rest_; ++x) data_[(r0 * rest_ + x) * D_ + c0 * rest_ + x] = a0(r0, c0);
    conj_.reserve(seq_.size());
    for (auto& [site, g] : seq_) conj_.push_back(g->matrix().conjugate());
  }

  void step() {
    const int n = spec_.L + 1;
    for (std::size_t i = 0; i < seq_.size(); ++i) {
      const int site = seq_[i].first;
      apply_pair(data_.data(), 2 * n, spec_.d, site, site + 1, seq_[i].second->matrix());
      apply_pair(data_.data(), 2 * n, spec_.d, n + site, n + site + 1, conj_[i]);
    }
  }

  std::int64_t dim() const { return D_; }
  const std::vector<cplx>& data() const { return data_; }

  Mat matrix() const {
    Mat m(D_, D_);
    for (std::int64_t r = 0; r < D_; ++r)
      for (std::int64_t c = 0; c < D_; ++c) m(r, c) = data_[r * D_ + c];
    return m;
  }

  cplx trace() const {
    cplx t = 0;
    for (std::int64_t i = 0; i < D_; ++i) t += data_[i * D_ + i];
    return t;
  }

  double frobenius() const {
    double s = 0;
    for (auto& x : data_) s += std::norm(x);
    return std::sqrt(s);
  }

  /// tr((A(t) B)^k) / D with B = b (x) 1.
  cplx otoc(const Mat& b, int k) const {
    const int d = spec_.d;
    std::vector<cplx> p(data_.size());
    // (A B)[r, (c0, x)] = sum_c0' A[r, (c0', x)] b(c0', c0)
    for (std::int64_t r = 0; r < D_; ++r) {
      const cplx* a = data_.data() + r * D_;
      cplx* out = p.data() + r * D_;
      for (int c0 = 0; c0 < d; ++c0)
        for (std::int64_t x = 0; x < rest_; ++x) {
          cplx acc = 0;
          for (int cp = 0; cp < d; ++cp) acc += a[cp * rest_ + x] * b(cp, c0);
          out[c0 * rest_ + x] = acc;
        }
    }
    cplx tr = 0;
    if (k == 1) {
      for (std::int64_t i = 0; i < D_; ++i) tr += p[i * D_ + i];
    } else if (k == 2) {
      for (std::int64_t r = 0; r < D_; ++r)
        for (std::int64_t c = 0; c < D_; ++c) tr += p[r * D_ + c] * p[c * D_ + r];
    } else {
      using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
      Eigen::Map<const RowMat> pm(p.data(), D_, D_);
      RowMat acc = pm;
      for (int i = 2; i < k; ++i) acc = acc * pm;
      tr = (acc.cwiseProduct(pm.transpose())).sum();
    }
    return tr / static_cast<double>(D_);
  }

 private:
  CircuitSpec spec_;
  std::vector<std::pair<int, const Gate*>> seq_;
  std::vector<Mat> conj_;
  std::int64_t D_ = 0, rest_ = 0;
  std::vector<cplx> data_;
};

/// C_k(t) = tr((A(t)B)^k)/D for t = 0..t_max. For k >= 3 each step costs O(k D^3) and D is capped by
/// max_dim; for k <= 2 the cost is O(D^2 L) per step.
inline Series k_otoc_direct(const CircuitSpec& spec, const Mat& a, const Mat& b, int k, int t_max,
                            std::int64_t max_dim = 1 << 12) {
  if (k < 1) throw BoundsError("k_otoc_direct: k must be positive");
  if (t_max < 0) throw BoundsError("k_otoc_direct: negative t_max");
  const std::int64_t D = spec.dim();
  if (D > max_dim) throw CapacityError("k_otoc_direct: D exceeds the runtime budget");
  if (k >= 3 && D > 1024) throw CapacityError("k_otoc_direct: k >= 3 needs dense powers, D > 1024");
  HeisenbergEvolver ev(spec, a);
  Series out;
  out.reserve(t_max + 1);
  for (int t = 0; t <= t_max; ++t) {
    if (t > 0) ev.step();
    out.push_back(ev.otoc(b, k));
  }
  return out;
}

}  // namespace scrambler
