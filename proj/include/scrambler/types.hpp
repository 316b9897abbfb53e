#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace scrambler {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;

/// A complex time series indexed by integer time steps 0..size()-1.
using Series = std::vector<cplx>;

inline constexpr double kPi = std::numbers::pi;

/// Integer power with exact arithmetic for small exponents.
constexpr std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// max |M^dagger M - 1|
inline double unitarity_residual(const Mat& m) {
  return max_abs(m.adjoint() * m - Mat::Identity(m.cols(), m.cols()));
}

}  // namespace scrambler
