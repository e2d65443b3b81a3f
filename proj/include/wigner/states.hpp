#pragma once

#include <memory>
#include <optional>
#include <variant>

#include "wigner/fock.hpp"
#include "wigner/weyl.hpp"

namespace wigner {

/// c_n(alpha) = exp(-|alpha|^2/2) alpha^n / sqrt(n!) for n = 0..n_max,
/// evaluated in log space so large |alpha| does not overflow.
Eigen::VectorXcd coherent_amplitudes(cplx alpha, int n_max);

/// A pure state that factorizes over modes; each factor is a truncated
/// single-mode vector with its own cutoff. Coherent vectors with large
/// occupation live here: the joint Fock basis would be far too large.
struct ProductState {
  double h = 0.5;
  std::vector<Eigen::VectorXcd> factors;
  /// Mass lost to the per-mode truncations: 1 - prod ||factor_j||^2 for
  /// states that are normalized before truncation.
  double leak = 0.0;

  /// Coherent vector at amplitude f; every mode gets a Poisson cutoff with
  /// tail below threshold / n_modes.
  static ProductState coherent(const PhasePoint& f, double h, double threshold = 1e-10);
  /// Coherent vector cut at n_max quanta in every mode.
  static ProductState coherent_fixed(const PhasePoint& f, double h, int n_max);

  std::size_t n_modes() const noexcept { return factors.size(); }
  double norm2() const;
  /// Expansion in a joint truncated Fock space (for cross-checks).
  FockVector to_fock(const FockSpacePtr& space) const;
};

using QuantumState = std::variant<FockVector, ProductState>;

double state_h(const QuantumState& s);
double state_leak(const QuantumState& s);
double state_norm2(const QuantumState& s);
std::size_t state_modes(const QuantumState& s);

/// Coherent vector in a joint truncated space, from closed-form coefficients.
/// Throws TruncationError (with the required cutoff) when the Poisson tail of
/// mean |f|^2/h beyond the space cutoff exceeds threshold.
FockVector coherent_state(const FockSpacePtr& space, const PhasePoint& f, double h, double threshold = 1e-10);

/// Weyl expectations of a fixed state for many arguments. Per-mode caches are
/// built once for product states.
class GeneratingFunctional {
 public:
  GeneratingFunctional(QuantumState state, const ModeSpace& modes, bool use_m = false,
                       ExecPolicy policy = ExecPolicy::serial);
  /// Makes arguments with |zeta_j| <= reach (before m) use the cached path.
  void prepare(double reach);
  /// <psi, W_h(xi) psi> (W_h(m xi) with use_m); xi may cover only leading modes.
  GFValue operator()(const PhasePoint& xi) const;
  const QuantumState& state() const noexcept { return state_; }
  bool use_m() const noexcept { return use_m_; }

 private:
  QuantumState state_;
  ModeSpace modes_;
  bool use_m_;
  std::vector<SingleModeWeyl> single_;
};

GFValue generating_functional(const QuantumState& psi, const PhasePoint& xi, const ModeSpace& modes,
                              bool use_m = false);

/// Diagonal second quantization dGamma_h(A) used for moments.
struct MomentOperator {
  std::vector<double> weights;

  static MomentOperator dgamma(std::vector<double> w) { return {std::move(w)}; }
  /// m_j^2 on the first R modes, 0 beyond: the m-number operator.
  static MomentOperator m_number(const ModeSpace& modes, std::size_t R);
  /// Plain number operator N_h.
  static MomentOperator number(std::size_t n_modes) { return {std::vector<double>(n_modes, 1.0)}; }
};

/// <psi, dGamma_h(A)^delta psi>.
double moment(const QuantumState& psi, const MomentOperator& op, double delta);

/// h-indexed family of normalized states.
class StateFamily {
 public:
  enum class Kind { vacuum, coherent, divergent, explicit_list };

  static StateFamily vacuum(ModeSpace modes, std::vector<double> h_grid);
  static StateFamily coherent(ModeSpace modes, PhasePoint f, std::vector<double> h_grid);
  /// f_h = f + h^{(eps-1)/2} e_mode: |f_h|^2 grows like h^{eps-1} while q(f_h)
  /// stays bounded when m suppresses the divergence mode.
  static StateFamily divergent(ModeSpace modes, PhasePoint f, std::size_t mode, double eps, std::vector<double> h_grid);
  static StateFamily explicit_list(ModeSpace modes, std::vector<FockVector> states);

  Kind kind() const noexcept { return kind_; }
  const ModeSpace& modes() const noexcept { return modes_; }
  const std::vector<double>& h_grid() const noexcept { return h_grid_; }
  std::size_t size() const noexcept { return h_grid_.size(); }
  /// Classical amplitude f(h) (zero for the vacuum; undefined for explicit lists).
  PhasePoint amplitude(double h) const;
  /// Limit point of the amplitudes on the modes that stay bounded.
  PhasePoint limit_amplitude() const { return f_; }
  std::optional<std::size_t> divergence_mode() const { return mode_; }
  double epsilon() const noexcept { return eps_; }

  /// Per-mode truncation of closed-form members: Poisson tail threshold, or a
  /// fixed cutoff when n_max is set.
  void set_truncation(double threshold, std::optional<int> n_max = {});
  double threshold() const noexcept { return threshold_; }
  std::optional<int> fixed_cutoff() const noexcept { return n_max_; }

  QuantumState materialize(std::size_t i) const;

 private:
  StateFamily(Kind kind, ModeSpace modes, std::vector<double> h_grid);
  Kind kind_;
  ModeSpace modes_;
  std::vector<double> h_grid_;
  PhasePoint f_;
  std::optional<std::size_t> mode_;
  double eps_ = 0.0;
  double threshold_ = 1e-10;
  std::optional<int> n_max_;
  std::vector<FockVector> explicit_;
};

struct MomentTable {
  std::vector<double> h;
  std::vector<double> moment;
  double sup = 0.0;
  friend bool operator==(const MomentTable&, const MomentTable&) = default;
};

MomentTable moment_table(const StateFamily& family, const MomentOperator& op, double delta,
                         ExecPolicy policy = ExecPolicy::serial);

}  // namespace wigner
