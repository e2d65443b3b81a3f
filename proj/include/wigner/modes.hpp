#pragma once

#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "wigner/types.hpp"

namespace wigner {

/// Complex amplitudes of a classical field configuration, one per mode.
///
/// Coordinates refer to the L2-orthonormal mode basis e_j. The classical norm
/// q(z) = sum_j m_j^2 |z_j|^2 is supplied by the ModeSpace; the q-orthonormal
/// coordinates of the same point are y_j = m_j z_j.
class PhasePoint {
 public:
  PhasePoint() = default;
  explicit PhasePoint(std::size_t n) : amps_(n) {}
  PhasePoint(std::initializer_list<cplx> values) : amps_(values) {}
  explicit PhasePoint(std::vector<cplx> values) : amps_(std::move(values)) {}

  static PhasePoint unit(std::size_t n, std::size_t j, cplx value = 1.0);

  std::size_t size() const noexcept { return amps_.size(); }
  cplx& operator[](std::size_t j) { return amps_[j]; }
  const cplx& operator[](std::size_t j) const { return amps_[j]; }
  std::span<const cplx> values() const noexcept { return amps_; }
  auto begin() const noexcept { return amps_.begin(); }
  auto end() const noexcept { return amps_.end(); }

  /// First `count` amplitudes (projection onto the leading modes).
  PhasePoint head(std::size_t count) const;
  /// Zero-pads (or truncates) to `count` modes.
  PhasePoint resized(std::size_t count) const;
  bool is_finite() const noexcept;
  double norm2() const noexcept;

  PhasePoint& operator+=(const PhasePoint& other);
  PhasePoint& operator-=(const PhasePoint& other);
  PhasePoint& operator*=(cplx scale);

  friend PhasePoint operator+(PhasePoint a, const PhasePoint& b) { return a += b; }
  friend PhasePoint operator-(PhasePoint a, const PhasePoint& b) { return a -= b; }
  friend PhasePoint operator*(cplx s, PhasePoint a) { return a *= s; }
  friend PhasePoint operator*(PhasePoint a, cplx s) { return a *= s; }
  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;

 private:
  std::vector<cplx> amps_;
};

/// Standard Hermitian product, antilinear in the first argument.
cplx inner(const PhasePoint& x, const PhasePoint& y);

/// Finite one-particle model: diagonal multiplier m (tying the Fock field to
/// the target norm q) and a diagonal dispersion omega. Immutable.
class ModeSpace {
 public:
  ModeSpace(std::vector<double> m_weights, std::vector<double> omega_weights,
            std::vector<double> k_values = {}, std::vector<std::string> labels = {});

  /// Unit multiplier and unit dispersion on n modes.
  static ModeSpace unit(std::size_t n_modes);
  /// m_j = |k_j|^s, omega_j = |k_j| (massless field, homogeneous Sobolev norm).
  static ModeSpace homogeneous_sobolev(std::vector<double> k_values, double s);
  /// m_j = (1 + k_j^2)^r with r < 0, omega_j = sqrt(1 + k_j^2).
  static ModeSpace inhomogeneous_sobolev(std::vector<double> k_values, double r);

  std::size_t n_modes() const noexcept { return m_.size(); }
  std::span<const double> m_weights() const noexcept { return m_; }
  std::span<const double> omega_weights() const noexcept { return omega_; }
  std::span<const double> k_values() const noexcept { return k_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  double m(std::size_t j) const { return m_.at(j); }
  double omega(std::size_t j) const { return omega_.at(j); }

  /// Same mode space with the dispersion replaced.
  ModeSpace with_omega(std::vector<double> omega_weights) const;

  /// Componentwise m * z.
  PhasePoint apply_m(const PhasePoint& z) const;
  /// m_j^2 for the first `count` modes (weights of q on a quotient).
  std::vector<double> q_weights(std::size_t count) const;
  std::vector<double> m_squared() const { return q_weights(n_modes()); }

 private:
  std::vector<double> m_;
  std::vector<double> omega_;
  std::vector<double> k_;
  std::vector<std::string> labels_;
};

/// sigma(xi, zeta) = Im <xi, zeta>.
double symplectic_form(const PhasePoint& xi, const PhasePoint& zeta);

/// t(x, y) = <m x, m y>.
cplx hermitian_t(const ModeSpace& modes, const PhasePoint& x, const PhasePoint& y);

/// q(z) = t(z, z) = sum_j m_j^2 |z_j|^2. Points shorter than the mode space
/// are read as living on the leading modes.
double quadratic_q(const ModeSpace& modes, const PhasePoint& z);

/// q restricted to explicit weights (used on quotients).
double quadratic_q(std::span<const double> q_weights, const PhasePoint& z);

/// z_j -> exp(i t omega_j) z_j.
PhasePoint classical_flow(const ModeSpace& modes, double t, const PhasePoint& z);

}  // namespace wigner
