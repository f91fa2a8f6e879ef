#pragma once

#include "gjm/gjm.hpp"

#include <numbers>
#include <random>
#include <vector>

namespace gjm::testing {

inline constexpr double kPi = std::numbers::pi;

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(0x5eed1234ULL);
  return g;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline CplxMat random_matrix(int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  CplxMat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = cplx(n(rng()), n(rng()));
  }
  return m;
}

inline HermMat random_hermitian(int d) {
  const CplxMat a = random_matrix(d, d);
  return HermMat(a + a.adjoint());
}

// PSD with the given rank.
inline HermMat random_psd(int d, int rank) {
  const CplxMat a = random_matrix(d, rank);
  return HermMat(a * a.adjoint());
}

inline HermMat random_state(int d) {
  HermMat r = random_psd(d, d);
  return (1.0 / r.trace()) * r;
}

inline BlochVec random_unit() {
  std::normal_distribution<double> n(0.0, 1.0);
  return BlochVec{n(rng()), n(rng()), n(rng())}.normalized();
}

inline std::vector<BlochVec> pair_axes(double theta) { return {xz_axis(0.0), xz_axis(theta)}; }

inline std::vector<BlochVec> cone_axes(double theta) {
  return {BlochVec{0, 0, 1}, BlochVec{std::sin(theta), 0, std::cos(theta)},
          BlochVec{-std::sin(theta), 0, std::cos(theta)}};
}

inline double prob(const HermMat& rho, const HermMat& effect) {
  return (rho.mat() * effect.mat()).trace().real();
}

}  // namespace gjm::testing
