#include "wigner/states.hpp"

#include <algorithm>
#include <cmath>

namespace wigner {

Eigen::VectorXcd coherent_amplitudes(cplx alpha, int n_max) {
  if (n_max < 0) throw DomainError("coherent_amplitudes: negative n_max");
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n_max + 1);
  const double r = std::abs(alpha);
  if (r == 0.0) {
    c[0] = 1.0;
    return c;
  }
  const double log_r = std::log(r);
  const double theta = std::arg(alpha);
  for (int n = 0; n <= n_max; ++n) {
    const double log_mag = -0.5 * r * r + n * log_r - 0.5 * std::lgamma(n + 1.0);
    c[n] = std::polar(std::exp(log_mag), n * theta);
  }
  return c;
}

ProductState ProductState::coherent(const PhasePoint& f, double h, double threshold) {
  check_h(h);
  if (f.size() == 0) throw DomainError("ProductState::coherent: no modes");
  ProductState s;
  s.h = h;
  const double per_mode = threshold / static_cast<double>(f.size());
  double kept = 1.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const int n = poisson_cutoff(std::norm(f[j]) / h, per_mode);
    s.factors.push_back(coherent_amplitudes(f[j] / std::sqrt(h), n));
    kept *= s.factors.back().squaredNorm();
  }
  s.leak = std::max(0.0, 1.0 - kept);
  return s;
}

ProductState ProductState::coherent_fixed(const PhasePoint& f, double h, int n_max) {
  check_h(h);
  if (f.size() == 0) throw DomainError("ProductState::coherent_fixed: no modes");
  if (n_max < 0) throw DomainError("ProductState::coherent_fixed: negative cutoff");
  ProductState s;
  s.h = h;
  double kept = 1.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    s.factors.push_back(coherent_amplitudes(f[j] / std::sqrt(h), n_max));
    kept *= s.factors.back().squaredNorm();
  }
  s.leak = std::max(0.0, 1.0 - kept);
  return s;
}

double ProductState::norm2() const {
  double p = 1.0;
  for (const auto& v : factors) p *= v.squaredNorm();
  return p;
}

FockVector ProductState::to_fock(const FockSpacePtr& space) const {
  if (space->n_modes() != n_modes()) throw DimensionError("ProductState::to_fock: mode count differs");
  FockVector v{space, h, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space->dim())), 0.0};
  for (std::size_t i = 0; i < space->dim(); ++i) {
    auto occ = space->occupation(i);
    cplx c = 1.0;
    for (std::size_t j = 0; j < n_modes() && c != 0.0; ++j) {
      c = occ[j] < factors[j].size() ? c * factors[j][occ[j]] : cplx{};
    }
    v.coeffs[static_cast<Eigen::Index>(i)] = c;
  }
  v.leak = std::max(0.0, 1.0 - v.coeffs.squaredNorm());
  return v;
}

double state_h(const QuantumState& s) {
  return std::visit([](const auto& x) { return x.h; }, s);
}

double state_leak(const QuantumState& s) {
  return std::visit([](const auto& x) { return x.leak; }, s);
}

double state_norm2(const QuantumState& s) {
  if (auto f = std::get_if<FockVector>(&s)) return f->coeffs.squaredNorm();
  return std::get<ProductState>(s).norm2();
}

std::size_t state_modes(const QuantumState& s) {
  if (auto f = std::get_if<FockVector>(&s)) return f->space->n_modes();
  return std::get<ProductState>(s).n_modes();
}

FockVector coherent_state(const FockSpacePtr& space, const PhasePoint& f, double h, double threshold) {
  check_h(h);
  if (f.size() != space->n_modes()) throw DimensionError("coherent_state: amplitude has wrong mode count");
  const double lambda = f.norm2() / h;
  const double tail = poisson_tail(lambda, space->cutoff());
  if (tail > threshold) {
    const int need = poisson_cutoff(lambda, threshold);
    throw TruncationError("coherent_state: cutoff " + std::to_string(space->cutoff()) + " leaks " +
                              std::to_string(tail) + "; cutoff " + std::to_string(need) + " is required",
                          tail, static_cast<std::size_t>(need));
  }
  std::vector<Eigen::VectorXcd> amps;
  for (std::size_t j = 0; j < f.size(); ++j) amps.push_back(coherent_amplitudes(f[j] / std::sqrt(h), space->cutoff()));
  FockVector v{space, h, Eigen::VectorXcd(static_cast<Eigen::Index>(space->dim())), 0.0};
  for (std::size_t i = 0; i < space->dim(); ++i) {
    auto occ = space->occupation(i);
    cplx c = 1.0;
    for (std::size_t j = 0; j < f.size(); ++j) c *= amps[j][occ[j]];
    v.coeffs[static_cast<Eigen::Index>(i)] = c;
  }
  v.leak = std::max(0.0, 1.0 - v.coeffs.squaredNorm());
  return v;
}

GeneratingFunctional::GeneratingFunctional(QuantumState state, const ModeSpace& modes, bool use_m, ExecPolicy policy)
    : state_(std::move(state)), modes_(modes), use_m_(use_m) {
  if (state_modes(state_) != modes_.n_modes()) throw DimensionError("GeneratingFunctional: state and modes differ");
  if (auto p = std::get_if<ProductState>(&state_)) {
    for (const auto& v : p->factors) single_.emplace_back(v, p->h, policy);
  }
}

void GeneratingFunctional::prepare(double reach) {
  for (std::size_t j = 0; j < single_.size(); ++j) {
    const double r = use_m_ ? reach * modes_.m(j) : reach;
    // Large padded bases are cheaper through the Taylor path.
    if (single_[j].required_cutoff(r) <= 3000) single_[j].prepare(r);
  }
}

GFValue GeneratingFunctional::operator()(const PhasePoint& xi) const {
  if (xi.size() > modes_.n_modes()) throw DimensionError("generating_functional: argument has too many modes");
  PhasePoint zeta = xi.resized(modes_.n_modes());
  if (use_m_) zeta = modes_.apply_m(zeta);
  if (auto f = std::get_if<FockVector>(&state_)) {
    const auto r = weyl_apply(*f->space, zeta, f->h, f->coeffs);
    return {f->coeffs.dot(r.vector), r.leak * f->coeffs.norm() + f->leak};
  }
  const auto& p = std::get<ProductState>(state_);
  cplx value = 1.0;
  double leak = 0.0;
  for (std::size_t j = 0; j < single_.size(); ++j) {
    if (zeta[j] == 0.0) {
      value *= single_[j].norm2();
      continue;
    }
    const GFValue g = single_[j].expectation(zeta[j]);
    value *= g.value;
    leak += g.leak;
  }
  return {value, leak + p.leak};
}

GFValue generating_functional(const QuantumState& psi, const PhasePoint& xi, const ModeSpace& modes, bool use_m) {
  return GeneratingFunctional(psi, modes, use_m)(xi);
}

MomentOperator MomentOperator::m_number(const ModeSpace& modes, std::size_t R) {
  if (R > modes.n_modes()) throw DomainError("MomentOperator::m_number: R exceeds the mode count");
  std::vector<double> w(modes.n_modes(), 0.0);
  for (std::size_t j = 0; j < R; ++j) w[j] = modes.m(j) * modes.m(j);
  return {std::move(w)};
}

namespace {

// Distribution of S = sum_j w_j n_j for independent per-mode laws, as sorted
// (value, probability) pairs with near-equal values merged.
std::vector<std::pair<double, double>> convolve(const std::vector<std::pair<double, double>>& dist,
                                                const Eigen::VectorXcd& factor, double w) {
  std::vector<std::pair<double, double>> out;
  double total = 0.0;
  for (const auto& [v, p] : dist) total += p;
  const double floor = 1e-20 * std::max(total, 1e-300) * std::max(1.0, factor.squaredNorm());
  for (Eigen::Index n = 0; n < factor.size(); ++n) {
    const double pn = std::norm(factor[n]);
    if (pn == 0.0) continue;
    for (const auto& [v, p] : dist) {
      if (p * pn < floor) continue;
      out.emplace_back(v + w * static_cast<double>(n), p * pn);
    }
  }
  if (out.size() > 50'000'000) throw ResourceError("moment: distribution support too large", static_cast<double>(out.size()));
  std::sort(out.begin(), out.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& e : out) {
    if (!merged.empty() && std::abs(e.first - merged.back().first) <= 1e-12 * std::max(1.0, std::abs(e.first))) {
      merged.back().second += e.second;
    } else {
      merged.push_back(e);
    }
  }
  return merged;
}

}  // namespace

double moment(const QuantumState& psi, const MomentOperator& op, double delta) {
  if (!(delta > 0.0)) throw DomainError("moment: delta must be positive");
  if (op.weights.size() != state_modes(psi)) throw DimensionError("moment: weight count differs from mode count");
  for (double w : op.weights) {
    if (w < 0.0) throw NumericalError("moment: dGamma weights must be nonnegative");
  }
  const double h = state_h(psi);
  if (auto f = std::get_if<FockVector>(&psi)) {
    return fractional_moment(*f, dgamma(f->space, op.weights, h), delta);
  }
  const auto& p = std::get<ProductState>(psi);
  std::vector<double> norms;
  for (const auto& v : p.factors) norms.push_back(v.squaredNorm());
  if (delta == 1.0) {
    double total = 0.0;
    for (std::size_t j = 0; j < p.n_modes(); ++j) {
      if (op.weights[j] == 0.0) continue;
      double mean = 0.0;
      for (Eigen::Index n = 0; n < p.factors[j].size(); ++n) mean += static_cast<double>(n) * std::norm(p.factors[j][n]);
      double others = 1.0;
      for (std::size_t k = 0; k < p.n_modes(); ++k) {
        if (k != j) others *= norms[k];
      }
      total += h * op.weights[j] * mean * others;
    }
    return total;
  }
  std::vector<std::pair<double, double>> dist{{0.0, 1.0}};
  for (std::size_t j = 0; j < p.n_modes(); ++j) {
    if (op.weights[j] == 0.0) {
      for (auto& e : dist) e.second *= norms[j];
    } else {
      dist = convolve(dist, p.factors[j], op.weights[j]);
    }
  }
  double total = 0.0;
  for (const auto& [v, prob] : dist) total += prob * std::pow(h * v, delta);
  return total;
}

StateFamily::StateFamily(Kind kind, ModeSpace modes, std::vector<double> h_grid)
    : kind_(kind), modes_(std::move(modes)), h_grid_(std::move(h_grid)), f_(modes_.n_modes()) {
  if (h_grid_.empty()) throw DomainError("StateFamily: empty h grid");
  for (std::size_t i = 0; i < h_grid_.size(); ++i) {
    check_h(h_grid_[i]);
    if (i > 0 && !(h_grid_[i] < h_grid_[i - 1])) throw DomainError("StateFamily: h grid must be strictly decreasing");
  }
}

StateFamily StateFamily::vacuum(ModeSpace modes, std::vector<double> h_grid) {
  return StateFamily(Kind::vacuum, std::move(modes), std::move(h_grid));
}

StateFamily StateFamily::coherent(ModeSpace modes, PhasePoint f, std::vector<double> h_grid) {
  if (f.size() != modes.n_modes()) throw DimensionError("StateFamily::coherent: amplitude mode count");
  if (!f.is_finite()) throw DomainError("StateFamily::coherent: amplitude must be finite");
  StateFamily s(Kind::coherent, std::move(modes), std::move(h_grid));
  s.f_ = std::move(f);
  return s;
}

StateFamily StateFamily::divergent(ModeSpace modes, PhasePoint f, std::size_t mode, double eps,
                                   std::vector<double> h_grid) {
  if (f.size() != modes.n_modes()) throw DimensionError("StateFamily::divergent: amplitude mode count");
  if (mode >= modes.n_modes()) throw DomainError("StateFamily::divergent: divergence mode out of range");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("StateFamily::divergent: epsilon must lie in (0,1)");
  StateFamily s(Kind::divergent, std::move(modes), std::move(h_grid));
  s.f_ = std::move(f);
  s.mode_ = mode;
  s.eps_ = eps;
  return s;
}

StateFamily StateFamily::explicit_list(ModeSpace modes, std::vector<FockVector> states) {
  std::vector<double> hs;
  for (const auto& v : states) {
    if (v.space->n_modes() != modes.n_modes()) throw DimensionError("StateFamily::explicit_list: mode count");
    hs.push_back(v.h);
  }
  StateFamily s(Kind::explicit_list, std::move(modes), std::move(hs));
  s.explicit_ = std::move(states);
  for (const auto& v : s.explicit_) {
    if (std::abs(v.coeffs.norm() - 1.0) > 1e-10 + v.leak) throw DomainError("StateFamily::explicit_list: vector not normalized");
  }
  return s;
}

PhasePoint StateFamily::amplitude(double h) const {
  switch (kind_) {
    case Kind::vacuum:
      return PhasePoint(modes_.n_modes());
    case Kind::coherent:
      return f_;
    case Kind::divergent: {
      PhasePoint g = f_;
      g[*mode_] += std::pow(h, (eps_ - 1.0) / 2.0);
      return g;
    }
    case Kind::explicit_list:
      break;
  }
  throw DomainError("StateFamily::amplitude: explicit families carry no amplitude");
}

void StateFamily::set_truncation(double threshold, std::optional<int> n_max) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw DomainError("StateFamily: threshold must lie in (0, 1)");
  if (n_max && *n_max < 0) throw DomainError("StateFamily: negative cutoff");
  threshold_ = threshold;
  n_max_ = n_max;
}

QuantumState StateFamily::materialize(std::size_t i) const {
  if (i >= h_grid_.size()) throw DomainError("StateFamily::materialize: index out of range");
  if (kind_ == Kind::explicit_list) return explicit_[i];
  if (n_max_) return ProductState::coherent_fixed(amplitude(h_grid_[i]), h_grid_[i], *n_max_);
  return ProductState::coherent(amplitude(h_grid_[i]), h_grid_[i], threshold_);
}

MomentTable moment_table(const StateFamily& family, const MomentOperator& op, double delta, ExecPolicy policy) {
  MomentTable t;
  t.h = family.h_grid();
  kernels::map_indexed(policy, family.size(), t.moment,
                       [&](std::size_t i) { return moment(family.materialize(i), op, delta); });
  t.sup = *std::max_element(t.moment.begin(), t.moment.end());
  return t;
}

}  // namespace wigner
