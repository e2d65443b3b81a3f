#pragma once

#include <functional>
#include <limits>
#include <optional>

#include "wigner/fock.hpp"
#include "wigner/kernels.hpp"

namespace wigner {

/// Result of a truncated computation together with an a-posteriori bound on
/// its deviation from the untruncated value.
struct GFValue {
  cplx value;
  double leak;
};

struct WeylOptions {
  /// Quantize with m applied to the argument (m-ladder operators).
  bool use_m = false;
  /// Largest accepted leak bound; exceeded bounds raise TruncationError.
  double leak_threshold = 1e-10;
  /// Columns with total occupation <= exact_total form the subspace on which
  /// accuracy is certified. Negative selects cutoff / 2.
  int exact_total = -1;
  /// Sample points of the Duhamel integral used for the leak bound.
  int time_samples = 16;
};

/// W_h(xi) = exp(i phi(xi)) by Hermitian eigendecomposition of the truncated
/// field. The recorded leak bounds ||(W - W_trunc) e_n|| over basis vectors in
/// the certified subspace via the Duhamel formula.
FockOperator weyl_operator(const FockSpacePtr& space, const PhasePoint& xi, double h, const WeylOptions& opts = {});

/// Spectral norm of (W(xi) W(zeta) - exp(-i h sigma(xi,zeta)) W(xi + zeta)) P,
/// P the projector on the certified subspace.
double weyl_relation_residual(const FockSpacePtr& space, const PhasePoint& xi, const PhasePoint& zeta, double h,
                              const WeylOptions& opts = {});

/// Smallest cutoff for which every argument in `args` has a leak bound below
/// opts.leak_threshold; the certified subspace is cutoff / 2 unless
/// opts.exact_total is set.
int weyl_auto_cutoff(const ModeSpace& modes, const std::vector<PhasePoint>& args, double h, const WeylOptions& opts = {},
                     int max_cutoff = 200);

/// W_h(zeta) v without forming the matrix (Taylor series on a matrix-free
/// field); leak bounds the truncation error of the result.
struct WeylApplyResult {
  Eigen::VectorXcd vector;
  double leak;
};
WeylApplyResult weyl_apply(const FockSpace& space, const PhasePoint& zeta, double h, const Eigen::VectorXcd& v);

/// exp(i A) v for Hermitian A supplied as a matrix-free apply with a norm bound.
/// The callback sees the vector after every step; at least `min_steps` steps
/// are taken.
Eigen::VectorXcd expm_i_apply(const std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>& apply,
                              double norm_bound, const Eigen::VectorXcd& v,
                              const std::function<void(const Eigen::VectorXcd&)>& on_step = {}, int min_steps = 1);

/// Weyl expectations <psi, W_h(zeta) psi> for one mode. The untruncated vector
/// psi is zero-padded; one eigendecomposition of the padded b + b* serves all
/// zeta through W(r e^{i theta}) = U_theta exp(i r sqrt(h) X) U_theta^dagger.
class SingleModeWeyl {
 public:
  SingleModeWeyl(Eigen::VectorXcd psi, double h, ExecPolicy policy = ExecPolicy::serial);

  /// Grows the cached eigenbasis so that |zeta| <= reach is served from it.
  void prepare(double reach);
  /// Expectation with its Duhamel truncation bound. Falls back to a
  /// matrix-free Taylor evaluation when the cache is too small.
  GFValue expectation(cplx zeta) const;
  /// Cutoff of the padded space needed for |zeta| = reach.
  int required_cutoff(double reach) const;
  double norm2() const { return psi_.squaredNorm(); }
  const Eigen::VectorXcd& psi() const { return psi_; }

 private:
  GFValue taylor_expectation(cplx zeta) const;
  Eigen::VectorXcd psi_;
  double h_;
  ExecPolicy policy_;
  int support_ = 0;
  int cached_cutoff_ = -1;
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd values_;
};

/// Polynomial in (conj z_j, z_j). Each term is conj(z)^alpha z^beta * coeff.
struct PolynomialSymbol {
  struct Term {
    std::vector<int> zbar;
    std::vector<int> z;
    cplx coeff;
  };
  std::size_t n_modes = 0;
  std::vector<Term> terms;

  explicit PolynomialSymbol(std::size_t n) : n_modes(n) {}
  static PolynomialSymbol constant(std::size_t n, cplx c);
  /// sum_{j < R} w_j |z_j|^2 (w = 1 when empty).
  static PolynomialSymbol quadratic(std::size_t n, std::size_t R, std::span<const double> weights = {});

  PolynomialSymbol& add(std::vector<int> zbar, std::vector<int> z, cplx coeff);
  PolynomialSymbol& operator+=(const PolynomialSymbol& other);
  int degree() const;
  cplx evaluate(const PhasePoint& z) const;
  /// Real-valued symbol: term (alpha, beta, c) paired with (beta, alpha, conj c).
  bool is_real(double tol = 1e-14) const;
};

enum class Ordering { weyl, wick };

/// Substitutes z -> a_h(e_j) (or the m-ladder) and conj z -> its adjoint.
/// Wick ordering places creators left; Weyl ordering averages all orderings
/// of each monomial (degree <= 4). Real symbols yield exactly Hermitian
/// matrices.
FockOperator quantize_polynomial(const FockSpacePtr& space, const PolynomialSymbol& p, Ordering ordering, double h,
                                 bool use_m = false);

/// Fourier samples of a symbol on a midpoint grid over [-L, L]^{2n}; axes are
/// ordered (Re eta_0, Im eta_0, Re eta_1, ...), last axis fastest. The
/// convention is fhat(eta) = int exp(-2 pi i eta.x) f(x) dx.
class SampledSymbol {
 public:
  using Generator = std::function<cplx(std::span<const double>)>;

  SampledSymbol(std::size_t n_modes, double extent, int points, Generator fhat);

  static SampledSymbol from_fourier(std::size_t n_modes, double extent, int points, Generator fhat) {
    return SampledSymbol(n_modes, extent, points, std::move(fhat));
  }
  /// f(x) = g(|S (x - center)|) with g supported in [0, support] and S the
  /// diagonal scaling `scale` per complex mode. `breaks` lists interior
  /// points where g is not smooth. Transforms are cached by |eta|.
  static SampledSymbol from_radial(std::size_t n_modes, double extent, int points, std::function<double(double)> g,
                                   double support, std::vector<double> breaks = {}, const PhasePoint& center = {},
                                   std::vector<double> scale = {});

  std::size_t n_modes() const noexcept { return n_modes_; }
  double extent() const noexcept { return extent_; }
  int points() const noexcept { return points_; }
  double spacing() const noexcept { return 2.0 * extent_ / points_; }
  double cell_volume() const;
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<cplx>& values() const noexcept { return values_; }
  /// Real coordinates of sample k.
  std::vector<double> node(std::size_t k) const;
  /// Complex Weyl-side frequency eta_c = eta_re + i eta_im per mode.
  PhasePoint frequency(std::size_t k) const;
  double boundary_max() const;
  /// Same symbol on the grid with half as many points per axis.
  SampledSymbol half_resolution() const;
  const Generator& generator() const noexcept { return generator_; }

 private:
  std::size_t n_modes_;
  double extent_;
  int points_;
  Generator generator_;
  std::vector<cplx> values_;
};

/// Radial transform of x -> g(|x|) in R^{2n}:
/// 2 pi rho^{1-n} int_0^S g(s) J_{n-1}(2 pi rho s) s^n ds, by Gauss-Legendre
/// panels no longer than one period of the Bessel factor.
double radial_fourier(const std::function<double(double)>& g, double support, std::span<const double> breaks,
                      std::size_t n_modes, double rho);

struct IntegralOptions {
  bool use_m = false;
  double boundary_threshold = 1e-8;
  /// Raise QuadratureError when the half-resolution estimate exceeds this.
  double tolerance = std::numeric_limits<double>::infinity();
  ExecPolicy policy = ExecPolicy::serial;
  /// Refuse grids with more than this many (points x dim^3) work units.
  double max_work = 5e11;
};

struct IntegralQuantization {
  FockOperator op;
  double error_estimate;
  double boundary_max;
};

/// Op^h(f) = sum_k w_k fhat(eta_k) W_h(pi eta_k) (W_h(m pi eta_k) with use_m).
/// W_h(zeta) quantizes exp(2 i Re<zeta, z>), hence the factor pi.
IntegralQuantization quantize_integral(const FockSpacePtr& space, const SampledSymbol& s, double h,
                                       const IntegralOptions& opts = {});

struct IntegralExpectation {
  cplx value;
  double error_estimate;
  double boundary_max;
  double leak;
};

/// <psi, Op^h(f) psi> = sum_k w_k fhat(eta_k) G(pi eta_k) for a generating
/// functional G of the state (G already includes m when requested).
IntegralExpectation expect_integral(const SampledSymbol& s, const std::function<GFValue(const PhasePoint&)>& G,
                                    ExecPolicy policy = ExecPolicy::serial,
                                    double boundary_threshold = 1e-8);

/// Smooth radial cutoff: 0 for sqrt(q) <= inner, 1 for sqrt(q) >= outer,
/// quintic smoothstep 6s^5 - 15s^4 + 10s^3 in between.
struct RadialCutoff {
  double inner = 1.0;
  double outer = 2.0;
  double operator()(double sqrt_q) const;
  /// chi(r^{-1/2} z) as a function of q(z).
  double scaled(double q, double r) const { return (*this)(std::sqrt(std::max(q, 0.0) / r)); }
};

/// Op^h(chi(r^{-1/2} .)) on the leading `quotient` modes, realized as
/// I - Op^h(1 - chi_r) since 1 - chi_r has compact support. The symbol is
/// radial in q-orthonormal coordinates m z.
IntegralQuantization quantized_cutoff(const FockSpacePtr& space, std::size_t quotient, const RadialCutoff& chi,
                                      double r, double h, int points, const IntegralOptions& opts = {});

/// Grid for the Fourier side of 1 - chi_r paired with a state concentrated
/// within `state_radius` (q-norm) of the origin at parameter h.
struct CutoffGrid {
  double extent;
  int points;
};
CutoffGrid cutoff_grid(const RadialCutoff& chi, double r, double h, double state_radius);

/// Sampled transform of 1 - chi_r in the coordinates y = m z of `quotient`
/// modes.
SampledSymbol cutoff_complement_symbol(std::size_t quotient, const RadialCutoff& chi, double r, double extent,
                                       int points);

}  // namespace wigner
