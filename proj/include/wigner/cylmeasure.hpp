#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "wigner/modes.hpp"
#include "wigner/weyl.hpp"

namespace wigner {

/// Uniform partition of [lo, hi] into `points` cells, sampled at midpoints.
struct Axis {
  double lo = -1.0;
  double hi = 1.0;
  int points = 1;

  double width() const { return (hi - lo) / points; }
  double center(int i) const { return lo + (i + 0.5) * width(); }
  /// Cell containing x, or -1 outside [lo, hi).
  int locate(double x) const;
  friend bool operator==(const Axis&, const Axis&) = default;
};

/// Tensor grid over the 2n real coordinates (Re z_0, Im z_0, Re z_1, ...),
/// stored row-major with the last axis fastest.
struct GridSpec {
  std::vector<Axis> axes;

  /// Square grid [c - half, c + half]^2 per mode.
  static GridSpec centered(const PhasePoint& center, std::span<const double> half_widths, int points);
  static GridSpec uniform(std::size_t n_modes, double half_width, int points);

  std::size_t n_modes() const { return axes.size() / 2; }
  std::size_t cells() const;
  double cell_volume() const;
  /// Leading `count` modes of the grid.
  GridSpec head(std::size_t count) const;
  std::vector<std::vector<double>> centers() const;
  PhasePoint center_of(std::size_t cell) const;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct Atom {
  PhasePoint point;
  double weight;
};

/// Finite measure on a quotient of `n_modes` complex modes: atoms plus a
/// nonnegative density on a grid. q_weights are the m_j^2 of the quotient.
class FiniteMeasure {
 public:
  FiniteMeasure(std::vector<double> q_weights, std::vector<Atom> atoms, GridSpec grid, std::vector<double> density);
  static FiniteMeasure atomic(std::vector<double> q_weights, std::vector<Atom> atoms);
  /// Samples density(center) on every cell.
  static FiniteMeasure from_density(std::vector<double> q_weights, GridSpec grid,
                                    const std::function<double(const PhasePoint&)>& density);

  std::size_t n_modes() const noexcept { return q_weights_.size(); }
  const std::vector<double>& q_weights() const noexcept { return q_weights_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const GridSpec& grid() const noexcept { return grid_; }
  const std::vector<double>& density() const noexcept { return density_; }
  bool has_grid() const noexcept { return !density_.empty(); }
  /// Mass of every cell (density times cell volume).
  std::vector<double> cell_masses() const;
  double atom_mass() const;
  double grid_mass() const;
  double total_mass() const { return atom_mass() + grid_mass(); }
  double q(const PhasePoint& z) const { return quadratic_q(q_weights_, z); }

 private:
  std::vector<double> q_weights_;
  std::vector<Atom> atoms_;
  GridSpec grid_;
  std::vector<double> density_;
};

/// Members over nested quotients, sorted by strictly increasing mode count.
class CylindricalMeasureFamily {
 public:
  explicit CylindricalMeasureFamily(std::vector<FiniteMeasure> levels);
  const std::vector<FiniteMeasure>& levels() const noexcept { return levels_; }
  /// Member with exactly `n_modes` modes, or the smallest larger one.
  const FiniteMeasure& at_least(std::size_t n_modes) const;

 private:
  std::vector<FiniteMeasure> levels_;
};

/// mu-hat(xi) = int exp(i Re<xi, z>) dmu(z).
cplx fourier_transform(const FiniteMeasure& mu, const PhasePoint& xi, ExecPolicy policy = ExecPolicy::serial);

/// Function of the first `base` modes, optionally with its Fourier samples.
struct CylindricalSymbol {
  std::size_t base = 1;
  std::function<double(const PhasePoint&)> f;
  std::optional<SampledSymbol> fhat;
};

struct CylindricalIntegral {
  double direct;
  /// int fhat(eta) mu-hat(2 pi eta) d eta when fhat is present.
  std::optional<cplx> plancherel;
};

CylindricalIntegral cylindrical_integral(const CylindricalMeasureFamily& family, const CylindricalSymbol& f,
                                         ExecPolicy policy = ExecPolicy::serial);
CylindricalIntegral cylindrical_integral(const FiniteMeasure& mu, const CylindricalSymbol& f,
                                         ExecPolicy policy = ExecPolicy::serial);

/// Pushforward under truncation to the first `count` modes.
FiniteMeasure marginal(const FiniteMeasure& mu, std::size_t count);

/// mu({q >= r}); grid cells are counted by their center.
double tail_mass(const FiniteMeasure& mu, double r, ExecPolicy policy = ExecPolicy::serial);

/// int q^delta dmu.
double q_moment(const FiniteMeasure& mu, double delta, ExecPolicy policy = ExecPolicy::serial);

/// max over pairs of |mu-hat(m^2 g1) - mu-hat(m^2 g2)| / q(g1 - g2)^{delta/2}.
/// The functional z -> Re<m^2 g, z> = Re t(g, z) is the one the continuity
/// estimate controls; coincident pairs are skipped.
double holder_modulus(const FiniteMeasure& mu, double delta,
                      const std::vector<std::pair<PhasePoint, PhasePoint>>& pairs,
                      ExecPolicy policy = ExecPolicy::serial);

/// Deterministic Gaussian test pairs with standard deviation `scale`.
std::vector<std::pair<PhasePoint, PhasePoint>> random_pairs(std::size_t n_modes, std::size_t count,
                                                            std::uint64_t seed, double scale = 1.0);

/// Image under z_j -> exp(i angle_j) z_j. Atoms rotate; the mass of each grid
/// cell moves with its rotated center to the cell of the same grid that
/// contains it, or becomes an atom when it lands outside. Mass is preserved.
FiniteMeasure pushforward(const FiniteMeasure& mu, std::span<const double> angles);

/// Total variation 1/2 sum |mass difference| for measures on the same grid.
double tv_distance(const FiniteMeasure& a, const FiniteMeasure& b);

struct ConsistencyReport {
  std::vector<double> distances;  // between level i+1 marginal and level i
  double tolerance = 0.0;
  bool pass = true;
  std::optional<std::size_t> first_failure;
  friend bool operator==(const ConsistencyReport&, const ConsistencyReport&) = default;
};

ConsistencyReport check_consistency(const CylindricalMeasureFamily& family, double tol);

/// Versioned JSON layout "wigner.finite_measure" v1.
std::string measure_to_json(const FiniteMeasure& mu);
FiniteMeasure measure_from_json(const std::string& text);

}  // namespace wigner
