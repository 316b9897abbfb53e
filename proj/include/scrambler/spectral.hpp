#pragma once

// Frequency kernels and discrete-time Fourier transforms of even-in-t series.
//   J1_g(w) = sum_t e^{-g|t| + i w t}   = sinh g / (cosh g - cos w)
//   J2_g(w) = sum_t |t| e^{-g|t| + i w t} = (cos w cosh g - 1) / (cos w - cosh g)^2

#include <cmath>
#include <vector>

#include "scrambler/channel.hpp"
#include "scrambler/errors.hpp"
#include "scrambler/types.hpp"

namespace scrambler {

inline double j1(double gamma, double omega) {
  if (!(gamma > 0)) throw DomainError("j1: gamma must be positive");
  return std::sinh(gamma) / (std::cosh(gamma) - std::cos(omega));
}

inline double j2(double gamma, double omega) {
  if (!(gamma > 0)) throw DomainError("j2: gamma must be positive");
  const double c = std::cos(omega), ch = std::cosh(gamma);
  return (c * ch - 1) / ((c - ch) * (c - ch));
}

/// sum_{t=-T}^{T} w(t) s(|t|) e^{i w t} with T = s.size() - 1; the even extension s(-t) = s(t) is
/// the caller's responsibility.
inline Series dtft_even(const Series& s, const std::vector<double>& omega_grid, const std::vector<double>& weights = {}) {
  if (s.empty()) throw DomainError("dtft: empty series");
  if (!weights.empty() && weights.size() < s.size()) throw ShapeError("dtft: weight window too short");
  Series out(omega_grid.size());
  for (std::size_t n = 0; n < omega_grid.size(); ++n) {
    cplx acc = weights.empty() ? s[0] : weights[0] * s[0];
    for (std::size_t t = 1; t < s.size(); ++t) {
      const double w = weights.empty() ? 1.0 : weights[t];
      acc += 2.0 * w * s[t] * std::cos(omega_grid[n] * static_cast<double>(t));
    }
    out[n] = acc;
  }
  return out;
}

inline Series dtft(const Series& s, const std::vector<double>& omega_grid) { return dtft_even(s, omega_grid); }

/// DTFT with Gaussian weights e^{-t^2/(2 nu)}: the even series convolved with a periodic Gaussian of
/// variance 1/nu in frequency.
inline Series smoothed_dtft(const Series& s, const std::vector<double>& omega_grid, double nu) {
  if (!(nu > 0)) throw DomainError("smoothed_dtft: nu must be positive");
  std::vector<double> w(s.size());
  for (std::size_t t = 0; t < s.size(); ++t) w[t] = std::exp(-static_cast<double>(t * t) / (2 * nu));
  return dtft_even(s, omega_grid, w);
}

struct FrequencyCumulants {
  std::vector<double> omega;
  Series k2, k4;
  double gamma = 0;
};

/// k2(w) = k2(a,b) J1_g(w),  k4(w) = k4(a,b,a,b) J1_2g(w) + J2_2g(w) [X / lambda^2 - Y / d].
inline FrequencyCumulants analytic_freq_cumulants(const ClosedFormConstants& c, const std::vector<double>& omega_grid) {
  FrequencyCumulants f;
  f.omega = omega_grid;
  f.gamma = c.gamma;
  const cplx slope = c.x / (c.lambda * c.lambda) - c.y / static_cast<double>(c.d);
  for (double w : omega_grid) {
    f.k2.push_back(c.k2_ab * j1(c.gamma, w));
    f.k4.push_back(c.k4_abab * j1(2 * c.gamma, w) + slope * j2(2 * c.gamma, w));
  }
  return f;
}

inline FrequencyCumulants analytic_freq_cumulants(const Gate& g, const std::vector<double>& omega_grid,
                                                  ObservableNorm norm = ObservableNorm::per_dimension) {
  return analytic_freq_cumulants(closed_form_constants(g, norm), omega_grid);
}

}  // namespace scrambler
