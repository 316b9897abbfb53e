#pragma once

// Noncrossing permutations NC(k): enumeration, order, Moebius function, Kreweras complement
// and multichains.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "scrambler/errors.hpp"

namespace scrambler {

/// A permutation of {0..k-1}; images[j] = sigma(j).
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> images) : images_(std::move(images)) {
    std::vector<char> seen(images_.size(), 0);
    for (int v : images_) {
      if (v < 0 || v >= size() || seen[v]) throw DomainError("permutation images are not a bijection");
      seen[v] = 1;
    }
  }

  static Permutation identity(int k) {
    std::vector<int> im(k);
    std::iota(im.begin(), im.end(), 0);
    return Permutation(std::move(im));
  }

  /// The full cycle j -> j+1 mod k.
  static Permutation cyclic(int k) {
    std::vector<int> im(k);
    for (int j = 0; j < k; ++j) im[j] = (j + 1) % k;
    return Permutation(std::move(im));
  }

  /// Parses 1-based cycle notation such as "(1)(23)(4)(56)" or "(1 2 3)".
  /// Elements above 9 need spaces or commas between them. Fixed points may be omitted if k is given.
  static Permutation from_cycles(const std::string& text, int k = -1) {
    std::vector<std::vector<int>> cycles;
    std::vector<int> cur;
    bool open = false;
    bool spaced = text.find_first_of(" ,") != std::string::npos;
    std::string num;
    auto flush_num = [&] {
      if (!num.empty()) {
        cur.push_back(std::stoi(num) - 1);
        num.clear();
      }
    };
    for (char ch : text) {
      if (ch == '(') {
        if (open) throw DomainError("nested '(' in cycle notation");
        open = true;
        cur.clear();
      } else if (ch == ')') {
        if (!open) throw DomainError("unbalanced ')' in cycle notation");
        flush_num();
        cycles.push_back(cur);
        open = false;
      } else if (ch >= '0' && ch <= '9') {
        num.push_back(ch);
        if (!spaced) flush_num();
      } else if (ch == ' ' || ch == ',') {
        flush_num();
      } else {
        throw DomainError(std::string("unexpected character in cycle notation: ") + ch);
      }
    }
    if (open) throw DomainError("unterminated cycle");
    int maxel = -1;
    for (auto& c : cycles)
      for (int v : c) maxel = std::max(maxel, v);
    if (k < 0) k = maxel + 1;
    if (maxel >= k) throw DomainError("cycle element exceeds k");
    std::vector<int> im(k);
    std::iota(im.begin(), im.end(), 0);
    std::vector<char> used(k, 0);
    for (auto& c : cycles) {
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (used[c[i]]) throw DomainError("element repeated in cycle notation");
        used[c[i]] = 1;
        im[c[i]] = c[(i + 1) % c.size()];
      }
    }
    return Permutation(std::move(im));
  }

  int size() const { return static_cast<int>(images_.size()); }
  int operator()(int j) const { return images_[j]; }
  const std::vector<int>& images() const { return images_; }

  Permutation inverse() const {
    std::vector<int> inv(images_.size());
    for (int j = 0; j < size(); ++j) inv[images_[j]] = j;
    return Permutation(std::move(inv));
  }

  /// (this * other)(j) = this(other(j)).
  Permutation operator*(const Permutation& other) const {
    if (other.size() != size()) throw ShapeError("composing permutations of different k");
    std::vector<int> im(images_.size());
    for (int j = 0; j < size(); ++j) im[j] = images_[other.images_[j]];
    return Permutation(std::move(im));
  }

  bool operator==(const Permutation& o) const { return images_ == o.images_; }
  bool operator<(const Permutation& o) const { return images_ < o.images_; }

  /// Cycles in canonical order: each cycle starts at its minimum, cycles sorted by minimum.
  std::vector<std::vector<int>> cycles() const {
    std::vector<std::vector<int>> out;
    std::vector<char> seen(images_.size(), 0);
    for (int j = 0; j < size(); ++j) {
      if (seen[j]) continue;
      std::vector<int> c;
      for (int x = j; !seen[x]; x = images_[x]) {
        seen[x] = 1;
        c.push_back(x);
      }
      out.push_back(std::move(c));
    }
    return out;
  }

  /// |sigma|: number of cycles, fixed points included.
  int cycle_count() const {
    int n = 0;
    std::vector<char> seen(images_.size(), 0);
    for (int j = 0; j < size(); ++j) {
      if (seen[j]) continue;
      ++n;
      for (int x = j; !seen[x]; x = images_[x]) seen[x] = 1;
    }
    return n;
  }

  /// 1-based cycle notation, e.g. "(1)(23)(4)(56)".
  std::string str() const {
    std::ostringstream os;
    bool wide = size() > 9;
    for (auto& c : cycles()) {
      os << '(';
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (wide && i) os << ' ';
        os << c[i] + 1;
      }
      os << ')';
    }
    return os.str();
  }

 private:
  std::vector<int> images_;
};

/// Catalan number C_n, n <= 30.
inline std::int64_t catalan(int n) {
  if (n < 0) throw DomainError("catalan: negative argument");
  if (n > 30) throw BoundsError("catalan: n > 30 overflows the guarded range");
  std::vector<std::int64_t> c(n + 1, 0);
  c[0] = 1;
  for (int m = 1; m <= n; ++m)
    for (int r = 1; r <= m; ++r) c[m] += c[r - 1] * c[m - r];
  return c[n];
}

/// Metric distance l(sigma, nu) = k - |sigma^-1 nu|.
inline int distance(const Permutation& sigma, const Permutation& nu) {
  if (sigma.size() != nu.size()) throw ShapeError("distance: permutations of different k");
  return sigma.size() - (sigma.inverse() * nu).cycle_count();
}

/// Geodesic condition l(id, sigma) + l(sigma, cyc) = k - 1.
inline bool is_noncrossing(const Permutation& sigma) {
  const int k = sigma.size();
  if (k == 0) return true;
  return distance(Permutation::identity(k), sigma) + distance(sigma, Permutation::cyclic(k)) == k - 1;
}

struct Comparison {
  bool leq;
  int distance;
};

/// leq: every cycle of sigma lies inside a cycle of nu.
inline Comparison compare(const Permutation& sigma, const Permutation& nu) {
  if (sigma.size() != nu.size()) throw ShapeError("compare: permutations of different k");
  std::vector<int> block(nu.size());
  auto cs = nu.cycles();
  for (std::size_t b = 0; b < cs.size(); ++b)
    for (int x : cs[b]) block[x] = static_cast<int>(b);
  bool leq = true;
  for (auto& c : sigma.cycles())
    for (int x : c)
      if (block[x] != block[c.front()]) leq = false;
  return {leq, distance(sigma, nu)};
}

/// mu(sigma, nu) = prod over cycles V of sigma^-1 nu of (-1)^{|V|-1} C_{|V|-1}.
inline std::int64_t moebius(const Permutation& sigma, const Permutation& nu) {
  if (!compare(sigma, nu).leq) throw OrderError("moebius: sigma is not below nu (" + sigma.str() + ", " + nu.str() + ")");
  std::int64_t mu = 1;
  for (auto& c : (sigma.inverse() * nu).cycles()) {
    int n = static_cast<int>(c.size()) - 1;
    mu *= (n % 2 ? -1 : 1) * catalan(n);
  }
  return mu;
}

/// sigma* = sigma^-1 * cyc.
inline Permutation kreweras(const Permutation& sigma) {
  if (!is_noncrossing(sigma)) throw DomainError("kreweras: crossing permutation " + sigma.str());
  return sigma.inverse() * Permutation::cyclic(sigma.size());
}

/// All noncrossing permutations of k elements, filtered from S_k by the geodesic condition.
/// Ordered by decreasing cycle count, then lexicographically: index 0 is the identity and the last is
/// the full cycle.
inline std::vector<Permutation> enumerate_nc(int k) {
  if (k < 1 || k > 6) throw BoundsError("enumerate_nc: k must lie in 1..6");
  std::vector<int> im(k);
  std::iota(im.begin(), im.end(), 0);
  std::vector<Permutation> out;
  do {
    Permutation p(im);
    if (is_noncrossing(p)) out.push_back(std::move(p));
  } while (std::next_permutation(im.begin(), im.end()));
  std::stable_sort(out.begin(), out.end(), [](const Permutation& a, const Permutation& b) {
    int ca = a.cycle_count(), cb = b.cycle_count();
    return ca != cb ? ca > cb : a < b;
  });
  return out;
}

using Multichain = std::vector<int>;

/// NC(k) with precomputed order, distance, Moebius and Kreweras tables.
class NCLattice {
 public:
  explicit NCLattice(int k) : k_(k), elements_(enumerate_nc(k)) {
    const int n = size();
    leq_.assign(n * n, 0);
    dist_.assign(n * n, 0);
    overlap_exp_.assign(n * n, 0);
    moebius_.assign(n * n, 0);
    kreweras_.assign(n, -1);
    for (int i = 0; i < n; ++i) index_[elements_[i].images()] = i;
    for (int i = 0; i < n; ++i) {
      cycles_.push_back(elements_[i].cycle_count());
      for (int j = 0; j < n; ++j) {
        auto c = compare(elements_[i], elements_[j]);
        leq_[i * n + j] = c.leq;
        dist_[i * n + j] = c.distance;
        overlap_exp_[i * n + j] = k - c.distance;
        if (c.leq) moebius_[i * n + j] = scrambler::moebius(elements_[i], elements_[j]);
      }
      kreweras_[i] = index_of(scrambler::kreweras(elements_[i]));
    }
  }

  int k() const { return k_; }
  int size() const { return static_cast<int>(elements_.size()); }
  const std::vector<Permutation>& elements() const { return elements_; }
  const Permutation& operator[](int i) const { return elements_[i]; }
  int identity_index() const { return 0; }
  int cyclic_index() const { return size() - 1; }

  int index_of(const Permutation& p) const {
    auto it = index_.find(p.images());
    if (it == index_.end()) throw DomainError("permutation " + p.str() + " is not in NC(k)");
    return it->second;
  }

  bool leq(int i, int j) const { return leq_[i * size() + j]; }
  int distance(int i, int j) const { return dist_[i * size() + j]; }
  /// |sigma_i^-1 sigma_j|, the exponent of d in the overlap of permutation states.
  int overlap_exponent(int i, int j) const { return overlap_exp_[i * size() + j]; }
  int cycle_count(int i) const { return cycles_[i]; }
  int kreweras(int i) const { return kreweras_[i]; }

  std::int64_t moebius(int i, int j) const {
    if (!leq(i, j)) throw OrderError("moebius: pair is not ordered");
    return moebius_[i * size() + j];
  }

  /// Number of multichains of length m, without enumerating them.
  std::int64_t multichain_count(int m) const {
    if (m <= 0) return m == 0 ? 1 : 0;
    std::vector<std::int64_t> cnt(size(), 1);
    for (int step = 1; step < m; ++step) {
      std::vector<std::int64_t> next(size(), 0);
      for (int j = 0; j < size(); ++j)
        for (int i = 0; i < size(); ++i)
          if (leq(i, j)) next[j] += cnt[i];
      cnt = std::move(next);
    }
    return std::accumulate(cnt.begin(), cnt.end(), std::int64_t{0});
  }

 private:
  int k_;
  std::vector<Permutation> elements_;
  std::map<std::vector<int>, int> index_;
  std::vector<char> leq_;
  std::vector<int> dist_, overlap_exp_, cycles_, kreweras_;
  std::vector<std::int64_t> moebius_;
};

/// All multichains sigma_1 <= ... <= sigma_m in a lattice, in lexicographic index order.
inline std::vector<Multichain> multichains(const NCLattice& lat, int m, std::int64_t max_count = 1'000'000) {
  if (m < 1) throw BoundsError("multichains: m must be positive");
  if (lat.multichain_count(m) > max_count) throw CapacityError("multichains: result count exceeds guard");
  std::vector<Multichain> out;
  Multichain cur;
  auto rec = [&](auto&& self, int lo) -> void {
    if (static_cast<int>(cur.size()) == m) {
      out.push_back(cur);
      return;
    }
    for (int j = 0; j < lat.size(); ++j) {
      if (!cur.empty() && !lat.leq(lo, j)) continue;
      cur.push_back(j);
      self(self, j);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

inline std::vector<Multichain> multichains(int k, int m) {
  if (k > 4) throw BoundsError("multichains: k > 4");
  return multichains(NCLattice(k), m);
}

}  // namespace scrambler
