#include "wigner/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace wigner {

FockVector evolve_quantum(const FockVector& psi, const ModeSpace& modes, double t) {
  if (psi.space->n_modes() != modes.n_modes()) throw DimensionError("evolve_quantum: state and modes differ");
  FockVector out = psi;
  for (std::size_t i = 0; i < psi.space->dim(); ++i) {
    const auto occ = psi.space->occupation(i);
    double phase = 0.0;
    for (std::size_t j = 0; j < occ.size(); ++j) phase += occ[j] * modes.omega(j);
    out.coeffs[static_cast<Eigen::Index>(i)] *= std::polar(1.0, t * phase);
  }
  return out;
}

ProductState evolve_quantum(const ProductState& psi, const ModeSpace& modes, double t) {
  if (psi.n_modes() != modes.n_modes()) throw DimensionError("evolve_quantum: state and modes differ");
  ProductState out = psi;
  for (std::size_t j = 0; j < psi.n_modes(); ++j) {
    auto& f = out.factors[j];
    for (Eigen::Index n = 0; n < f.size(); ++n) f[n] *= std::polar(1.0, t * static_cast<double>(n) * modes.omega(j));
  }
  return out;
}

QuantumState evolve_quantum(const QuantumState& psi, const ModeSpace& modes, double t) {
  return std::visit([&](const auto& s) -> QuantumState { return evolve_quantum(s, modes, t); }, psi);
}

namespace {

std::vector<PhasePoint> test_grid(std::size_t count) {
  std::vector<PhasePoint> out;
  for (int k = 0; k < 9; ++k) {
    PhasePoint xi(count);
    xi[static_cast<std::size_t>(k) % count] = std::polar(0.3 + 0.2 * k, 2.0 * kPi * k / 9.0);
    out.push_back(xi);
  }
  return out;
}

PhasePoint rotate_back(const ModeSpace& modes, double t, const PhasePoint& xi) {
  return classical_flow(modes, -t, xi.resized(modes.n_modes()));
}

/// Smallest axis-aligned grid with the given resolution containing both.
GridSpec bounding_grid(const GridSpec& a, const GridSpec& b) {
  GridSpec g;
  for (std::size_t k = 0; k < a.axes.size(); ++k) {
    const int pts = std::max(a.axes[k].points, b.axes[k].points);
    g.axes.push_back({std::min(a.axes[k].lo, b.axes[k].lo), std::max(a.axes[k].hi, b.axes[k].hi), pts});
  }
  return g;
}

}  // namespace

PushforwardReport pushforward_check(const StateFamily& family, double t, std::size_t count,
                                    const PushforwardOptions& opts, ExecPolicy policy) {
  const ModeSpace& modes = family.modes();
  if (count == 0 || count > modes.n_modes()) throw DomainError("pushforward_check: invalid quotient size");
  if (!std::isfinite(t)) throw DomainError("pushforward_check: t must be finite");
  PushforwardReport rep;
  rep.t = t;
  rep.test_frequencies = test_grid(count);
  const MomentOperator op = opts.moment_op ? *opts.moment_op : MomentOperator::m_number(modes, modes.n_modes());

  for (std::size_t i = 0; i < family.size(); ++i) {
    const QuantumState psi = family.materialize(i);
    const QuantumState psit = evolve_quantum(psi, modes, t);
    GeneratingFunctional G0(psi, modes, false, policy);
    GeneratingFunctional Gt(psit, modes, false, policy);
    double reach = 0.0;
    for (const auto& xi : rep.test_frequencies) reach = std::max(reach, std::sqrt(xi.norm2()));
    G0.prepare(reach);
    Gt.prepare(reach);
    for (const auto& xi : rep.test_frequencies) {
      const GFValue a = Gt(xi);
      const GFValue b = G0(rotate_back(modes, t, xi));
      rep.covariance_residual = std::max(rep.covariance_residual, std::abs(a.value - b.value));
      rep.leak = std::max({rep.leak, a.leak, b.leak});
    }
    rep.moment_residual =
        std::max(rep.moment_residual, std::abs(moment(psit, op, opts.delta) - moment(psi, op, opts.delta)));
  }

  const std::size_t last = family.size() - 1;
  rep.h = family.h_grid()[last];
  const QuantumState psi = family.materialize(last);
  const QuantumState psit = evolve_quantum(psi, modes, t);
  const GridOptions& g = opts.grid;
  const GridSpec grid = g.grid ? *g.grid
                               : bounding_grid(auto_grid(psi, count, g.points, g.n_sigma),
                                               auto_grid(psit, count, g.points, g.n_sigma));
  const FiniteMeasure mu0 = husimi_measure(psi, count, grid, modes, policy, g.max_deficit).measure;
  const FiniteMeasure mut = husimi_measure(psit, count, grid, modes, policy, g.max_deficit).measure;
  for (const auto& xi : rep.test_frequencies) {
    const PhasePoint back = rotate_back(modes, t, xi).head(count);
    rep.fourier_sup = std::max(rep.fourier_sup,
                               std::abs(fourier_transform(mut, xi, policy) - fourier_transform(mu0, back, policy)));
  }
  std::vector<double> angles(count);
  for (std::size_t j = 0; j < count; ++j) angles[j] = t * modes.omega(j);
  rep.tv = tv_distance(mut, pushforward(mu0, angles));
  if (family.kind() != StateFamily::Kind::explicit_list) {
    rep.atom = atom_check(mut, classical_flow(modes, t, family.limit_amplitude()), rep.h);
  }
  return rep;
}

}  // namespace wigner
