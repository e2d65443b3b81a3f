#pragma once

#include <doctest.h>

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "wigner/fock.hpp"

namespace testing {

using wigner::cplx;
using wigner::PhasePoint;

inline PhasePoint random_point(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  PhasePoint p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = cplx(g(rng), g(rng));
  return p;
}

inline PhasePoint unit_ball_point(std::mt19937_64& rng, std::size_t n, double radius = 1.0) {
  PhasePoint p = random_point(rng, n);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  const double s = radius * u(rng) / std::sqrt(p.norm2());
  return s * p;
}

/// Projector columns: indices of basis states with total <= max_total.
inline Eigen::Index low_columns(const wigner::FockSpace& s, int max_total) {
  return static_cast<Eigen::Index>(s.count_upto(max_total));
}

/// Independent matrix exponential (Eigen's Pade-based implementation).
inline Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) { return a.exp(); }

inline double spectral_norm(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  return svd.singularValues()(0);
}

}  // namespace testing
