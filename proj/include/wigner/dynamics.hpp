#pragma once

#include "wigner/extract.hpp"

namespace wigner {

/// Free evolution Gamma(exp(i t omega)): basis vector n picks up the phase
/// exp(i t sum_j n_j omega_j). Matches z -> exp(i t omega) z on amplitudes.
FockVector evolve_quantum(const FockVector& psi, const ModeSpace& modes, double t);
ProductState evolve_quantum(const ProductState& psi, const ModeSpace& modes, double t);
QuantumState evolve_quantum(const QuantumState& psi, const ModeSpace& modes, double t);

struct PushforwardOptions {
  GridOptions grid;
  double delta = 1.0;
  std::optional<MomentOperator> moment_op;
};

struct PushforwardReport {
  double t = 0.0;
  double h = 0.0;
  std::vector<PhasePoint> test_frequencies;
  /// max_xi |mu_t-hat(xi) - mu_0-hat(exp(-i t omega) xi)| at the smallest h.
  double fourier_sup = 0.0;
  /// TV distance between mu_t and the pushforward of mu_0 on a shared grid.
  /// Cell-center transport limits it to roughly one cell of resolution.
  double tv = 0.0;
  /// max over h and xi of |G_{psi(t)}(xi) - G_psi(exp(-i t omega) xi)|.
  double covariance_residual = 0.0;
  /// Largest truncation bound among the generating-functional evaluations.
  double leak = 0.0;
  /// max over h of |moment(psi(t)) - moment(psi)|.
  double moment_residual = 0.0;
  std::optional<AtomCheck> atom;
  friend bool operator==(const PushforwardReport&, const PushforwardReport&) = default;
};

PushforwardReport pushforward_check(const StateFamily& family, double t, std::size_t count,
                                    const PushforwardOptions& opts = {}, ExecPolicy policy = ExecPolicy::serial);

}  // namespace wigner
