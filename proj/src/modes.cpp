#include "wigner/modes.hpp"

#include <algorithm>
#include <cmath>

namespace wigner {

namespace {

void require_same_size(const PhasePoint& a, const PhasePoint& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": points have " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " modes");
  }
}

}  // namespace

PhasePoint PhasePoint::unit(std::size_t n, std::size_t j, cplx value) {
  if (j >= n) throw DimensionError("PhasePoint::unit: mode index out of range");
  PhasePoint p(n);
  p[j] = value;
  return p;
}

PhasePoint PhasePoint::head(std::size_t count) const {
  if (count > size()) throw DimensionError("PhasePoint::head: count exceeds mode count");
  return PhasePoint(std::vector<cplx>(amps_.begin(), amps_.begin() + static_cast<std::ptrdiff_t>(count)));
}

PhasePoint PhasePoint::resized(std::size_t count) const {
  auto copy = amps_;
  copy.resize(count);
  return PhasePoint(std::move(copy));
}

bool PhasePoint::is_finite() const noexcept {
  return std::all_of(amps_.begin(), amps_.end(),
                     [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

double PhasePoint::norm2() const noexcept {
  double s = 0.0;
  for (auto z : amps_) s += std::norm(z);
  return s;
}

PhasePoint& PhasePoint::operator+=(const PhasePoint& other) {
  require_same_size(*this, other, "PhasePoint +");
  for (std::size_t j = 0; j < size(); ++j) amps_[j] += other.amps_[j];
  return *this;
}

PhasePoint& PhasePoint::operator-=(const PhasePoint& other) {
  require_same_size(*this, other, "PhasePoint -");
  for (std::size_t j = 0; j < size(); ++j) amps_[j] -= other.amps_[j];
  return *this;
}

PhasePoint& PhasePoint::operator*=(cplx scale) {
  for (auto& z : amps_) z *= scale;
  return *this;
}

cplx inner(const PhasePoint& x, const PhasePoint& y) {
  require_same_size(x, y, "inner");
  cplx s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += std::conj(x[j]) * y[j];
  return s;
}

ModeSpace::ModeSpace(std::vector<double> m_weights, std::vector<double> omega_weights,
                     std::vector<double> k_values, std::vector<std::string> labels)
    : m_(std::move(m_weights)),
      omega_(std::move(omega_weights)),
      k_(std::move(k_values)),
      labels_(std::move(labels)) {
  if (m_.empty()) throw DomainError("ModeSpace: at least one mode is required");
  if (omega_.size() != m_.size()) throw DimensionError("ModeSpace: omega length differs from m length");
  if (!k_.empty() && k_.size() != m_.size()) throw DimensionError("ModeSpace: k length differs from m length");
  for (double m : m_) {
    if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("ModeSpace: multiplier weights must be finite and positive");
  }
  for (double w : omega_) {
    if (!std::isfinite(w)) throw DomainError("ModeSpace: dispersion weights must be finite");
  }
  if (labels_.empty()) {
    for (std::size_t j = 0; j < m_.size(); ++j) labels_.push_back("e" + std::to_string(j));
  } else if (labels_.size() != m_.size()) {
    throw DimensionError("ModeSpace: label count differs from mode count");
  }
}

ModeSpace ModeSpace::unit(std::size_t n_modes) {
  return ModeSpace(std::vector<double>(n_modes, 1.0), std::vector<double>(n_modes, 1.0));
}

ModeSpace ModeSpace::homogeneous_sobolev(std::vector<double> k_values, double s) {
  std::vector<double> m, omega;
  for (double k : k_values) {
    if (k == 0.0) throw DomainError("homogeneous_sobolev: k = 0 gives a vanishing multiplier");
    m.push_back(std::pow(std::abs(k), s));
    omega.push_back(std::abs(k));
  }
  return ModeSpace(std::move(m), std::move(omega), std::move(k_values));
}

ModeSpace ModeSpace::inhomogeneous_sobolev(std::vector<double> k_values, double r) {
  if (!(r < 0.0)) throw DomainError("inhomogeneous_sobolev: exponent r must be negative");
  std::vector<double> m, omega;
  for (double k : k_values) {
    m.push_back(std::pow(1.0 + k * k, r));
    omega.push_back(std::sqrt(1.0 + k * k));
  }
  return ModeSpace(std::move(m), std::move(omega), std::move(k_values));
}

ModeSpace ModeSpace::with_omega(std::vector<double> omega_weights) const {
  return ModeSpace(m_, std::move(omega_weights), k_, labels_);
}

PhasePoint ModeSpace::apply_m(const PhasePoint& z) const {
  if (z.size() > n_modes()) throw DimensionError("apply_m: point has more modes than the space");
  PhasePoint out = z;
  for (std::size_t j = 0; j < z.size(); ++j) out[j] *= m_[j];
  return out;
}

std::vector<double> ModeSpace::q_weights(std::size_t count) const {
  if (count > n_modes()) throw DimensionError("q_weights: count exceeds mode count");
  std::vector<double> w(count);
  for (std::size_t j = 0; j < count; ++j) w[j] = m_[j] * m_[j];
  return w;
}

double symplectic_form(const PhasePoint& xi, const PhasePoint& zeta) { return inner(xi, zeta).imag(); }

cplx hermitian_t(const ModeSpace& modes, const PhasePoint& x, const PhasePoint& y) {
  if (x.size() != modes.n_modes() || y.size() != modes.n_modes()) {
    throw DimensionError("hermitian_t: points must match the mode space");
  }
  return inner(modes.apply_m(x), modes.apply_m(y));
}

double quadratic_q(const ModeSpace& modes, const PhasePoint& z) {
  if (z.size() > modes.n_modes()) throw DimensionError("quadratic_q: point has more modes than the space");
  double s = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) s += modes.m(j) * modes.m(j) * std::norm(z[j]);
  return s;
}

double quadratic_q(std::span<const double> q_weights, const PhasePoint& z) {
  if (z.size() != q_weights.size()) throw DimensionError("quadratic_q: weight count differs from point size");
  double s = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) s += q_weights[j] * std::norm(z[j]);
  return s;
}

PhasePoint classical_flow(const ModeSpace& modes, double t, const PhasePoint& z) {
  if (z.size() > modes.n_modes()) throw DimensionError("classical_flow: point has more modes than the space");
  PhasePoint out = z;
  for (std::size_t j = 0; j < z.size(); ++j) out[j] *= std::polar(1.0, t * modes.omega(j));
  return out;
}

}  // namespace wigner
