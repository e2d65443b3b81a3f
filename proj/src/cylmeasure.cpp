#include "wigner/cylmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <random>

#include "wigner/kernels.hpp"

namespace wigner {

using nlohmann::json;

int Axis::locate(double x) const {
  if (!(x >= lo && x < hi)) return -1;
  const int i = static_cast<int>(std::floor((x - lo) / width()));
  return std::clamp(i, 0, points - 1);
}

GridSpec GridSpec::centered(const PhasePoint& center, std::span<const double> half_widths, int points) {
  if (half_widths.size() != center.size()) throw DimensionError("GridSpec::centered: half-width count");
  if (points < 1) throw DomainError("GridSpec::centered: points must be positive");
  GridSpec g;
  for (std::size_t j = 0; j < center.size(); ++j) {
    if (!(half_widths[j] > 0.0)) throw DomainError("GridSpec::centered: half widths must be positive");
    g.axes.push_back({center[j].real() - half_widths[j], center[j].real() + half_widths[j], points});
    g.axes.push_back({center[j].imag() - half_widths[j], center[j].imag() + half_widths[j], points});
  }
  return g;
}

GridSpec GridSpec::uniform(std::size_t n_modes, double half_width, int points) {
  std::vector<double> hw(n_modes, half_width);
  return centered(PhasePoint(n_modes), hw, points);
}

std::size_t GridSpec::cells() const {
  if (axes.empty()) return 0;
  std::size_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(a.points);
  return n;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (const auto& a : axes) v *= a.width();
  return v;
}

GridSpec GridSpec::head(std::size_t count) const {
  if (2 * count > axes.size()) throw DimensionError("GridSpec::head: count exceeds grid modes");
  return GridSpec{std::vector<Axis>(axes.begin(), axes.begin() + static_cast<std::ptrdiff_t>(2 * count))};
}

std::vector<std::vector<double>> GridSpec::centers() const {
  std::vector<std::vector<double>> c;
  for (const auto& a : axes) {
    std::vector<double> v(static_cast<std::size_t>(a.points));
    for (int i = 0; i < a.points; ++i) v[static_cast<std::size_t>(i)] = a.center(i);
    c.push_back(std::move(v));
  }
  return c;
}

PhasePoint GridSpec::center_of(std::size_t cell) const {
  std::vector<double> x(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    const auto p = static_cast<std::size_t>(axes[a].points);
    x[a] = axes[a].center(static_cast<int>(cell % p));
    cell /= p;
  }
  PhasePoint z(n_modes());
  for (std::size_t j = 0; j < n_modes(); ++j) z[j] = cplx(x[2 * j], x[2 * j + 1]);
  return z;
}

FiniteMeasure::FiniteMeasure(std::vector<double> q_weights, std::vector<Atom> atoms, GridSpec grid,
                             std::vector<double> density)
    : q_weights_(std::move(q_weights)), atoms_(std::move(atoms)), grid_(std::move(grid)), density_(std::move(density)) {
  if (q_weights_.empty()) throw DomainError("FiniteMeasure: quotient must have at least one mode");
  for (const auto& a : atoms_) {
    if (a.point.size() != n_modes()) throw DimensionError("FiniteMeasure: atom has wrong mode count");
    if (!a.point.is_finite() || !(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw DomainError("FiniteMeasure: atoms need finite points and positive weights");
    }
  }
  if (!density_.empty()) {
    if (grid_.n_modes() != n_modes() || grid_.axes.size() != 2 * n_modes()) {
      throw DimensionError("FiniteMeasure: grid does not match the quotient");
    }
    if (grid_.cells() != density_.size()) throw DimensionError("FiniteMeasure: density size differs from grid cells");
    for (double d : density_) {
      if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("FiniteMeasure: density must be finite and nonnegative");
    }
  }
}

FiniteMeasure FiniteMeasure::atomic(std::vector<double> q_weights, std::vector<Atom> atoms) {
  return FiniteMeasure(std::move(q_weights), std::move(atoms), GridSpec{}, {});
}

FiniteMeasure FiniteMeasure::from_density(std::vector<double> q_weights, GridSpec grid,
                                          const std::function<double(const PhasePoint&)>& density) {
  std::vector<double> d(grid.cells());
  for (std::size_t c = 0; c < d.size(); ++c) d[c] = density(grid.center_of(c));
  return FiniteMeasure(std::move(q_weights), {}, std::move(grid), std::move(d));
}

std::vector<double> FiniteMeasure::cell_masses() const {
  std::vector<double> m = density_;
  const double vol = grid_.cell_volume();
  for (double& x : m) x *= vol;
  return m;
}

double FiniteMeasure::atom_mass() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight;
  return s;
}

double FiniteMeasure::grid_mass() const {
  if (density_.empty()) return 0.0;
  double s = 0.0;
  for (double d : density_) s += d;
  return s * grid_.cell_volume();
}

CylindricalMeasureFamily::CylindricalMeasureFamily(std::vector<FiniteMeasure> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw DomainError("CylindricalMeasureFamily: no levels");
  for (std::size_t i = 1; i < levels_.size(); ++i) {
    if (levels_[i].n_modes() <= levels_[i - 1].n_modes()) {
      throw DomainError("CylindricalMeasureFamily: quotients must be strictly nested");
    }
  }
}

const FiniteMeasure& CylindricalMeasureFamily::at_least(std::size_t n_modes) const {
  for (const auto& l : levels_) {
    if (l.n_modes() >= n_modes) return l;
  }
  throw DomainError("CylindricalMeasureFamily: no quotient with " + std::to_string(n_modes) + " modes");
}

cplx fourier_transform(const FiniteMeasure& mu, const PhasePoint& xi, ExecPolicy policy) {
  if (xi.size() != mu.n_modes()) throw DimensionError("fourier_transform: frequency has wrong mode count");
  cplx s = 0.0;
  for (const auto& a : mu.atoms()) s += a.weight * std::polar(1.0, inner(xi, a.point).real());
  if (!mu.has_grid()) return s;
  std::vector<std::vector<cplx>> phases;
  const auto& axes = mu.grid().axes;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const cplx x = xi[a / 2];
    const double k = (a % 2 == 0) ? x.real() : x.imag();
    std::vector<cplx> ph(static_cast<std::size_t>(axes[a].points));
    for (int i = 0; i < axes[a].points; ++i) ph[static_cast<std::size_t>(i)] = std::polar(1.0, k * axes[a].center(i));
    phases.push_back(std::move(ph));
  }
  const auto w = mu.cell_masses();
  return s + kernels::grid_fourier_sum(policy, phases, w);
}

CylindricalIntegral cylindrical_integral(const FiniteMeasure& mu, const CylindricalSymbol& f, ExecPolicy policy) {
  if (f.base == 0 || f.base > mu.n_modes()) throw DomainError("cylindrical_integral: symbol base exceeds the quotient");
  double direct = 0.0;
  for (const auto& a : mu.atoms()) direct += a.weight * f.f(a.point.head(f.base));
  if (mu.has_grid()) {
    const auto masses = mu.cell_masses();
    std::vector<double> vals;
    kernels::map_indexed(policy, masses.size(), vals, [&](std::size_t c) {
      return masses[c] == 0.0 ? 0.0 : masses[c] * f.f(mu.grid().center_of(c).head(f.base));
    });
    for (double v : vals) direct += v;
  }
  CylindricalIntegral out{direct, std::nullopt};
  if (f.fhat) {
    const SampledSymbol& s = *f.fhat;
    if (s.n_modes() != f.base) throw DimensionError("cylindrical_integral: Fourier samples have wrong mode count");
    const double vol = s.cell_volume();
    std::vector<cplx> terms;
    kernels::map_indexed(policy, s.size(), terms, [&](std::size_t k) {
      const cplx fk = s.values()[k];
      if (fk == 0.0) return cplx{};
      return vol * fk * fourier_transform(mu, (2.0 * kPi * s.frequency(k)).resized(mu.n_modes()));
    });
    cplx p = 0.0;
    for (const auto& t : terms) p += t;
    out.plancherel = p;
  }
  return out;
}

CylindricalIntegral cylindrical_integral(const CylindricalMeasureFamily& family, const CylindricalSymbol& f,
                                         ExecPolicy policy) {
  return cylindrical_integral(family.at_least(f.base), f, policy);
}

FiniteMeasure marginal(const FiniteMeasure& mu, std::size_t count) {
  if (count == 0 || count >= mu.n_modes()) throw DomainError("marginal: target quotient must be smaller and nonempty");
  std::vector<Atom> atoms;
  for (const auto& a : mu.atoms()) atoms.push_back({a.point.head(count), a.weight});
  std::vector<double> qw(mu.q_weights().begin(), mu.q_weights().begin() + static_cast<std::ptrdiff_t>(count));
  if (!mu.has_grid()) return FiniteMeasure::atomic(std::move(qw), std::move(atoms));
  GridSpec g = mu.grid().head(count);
  const std::size_t kept = g.cells();
  const std::size_t block = mu.density().size() / kept;
  double dropped_volume = 1.0;
  for (std::size_t a = 2 * count; a < mu.grid().axes.size(); ++a) dropped_volume *= mu.grid().axes[a].width();
  std::vector<double> d(kept, 0.0);
  for (std::size_t c = 0; c < kept; ++c) {
    double s = 0.0;
    const double* row = mu.density().data() + c * block;
    for (std::size_t i = 0; i < block; ++i) s += row[i];
    d[c] = s * dropped_volume;
  }
  return FiniteMeasure(std::move(qw), std::move(atoms), std::move(g), std::move(d));
}

namespace {

std::vector<double> axis_q_weights(const FiniteMeasure& mu) {
  std::vector<double> w;
  for (double q : mu.q_weights()) {
    w.push_back(q);
    w.push_back(q);
  }
  return w;
}

}  // namespace

double tail_mass(const FiniteMeasure& mu, double r, ExecPolicy policy) {
  double s = 0.0;
  for (const auto& a : mu.atoms()) {
    if (mu.q(a.point) >= r) s += a.weight;
  }
  if (!mu.has_grid()) return s;
  const auto qw = axis_q_weights(mu);
  const auto masses = mu.cell_masses();
  return s + kernels::grid_q_reduce(policy, mu.grid().centers(), qw, masses,
                                    [r](double q) { return q >= r ? 1.0 : 0.0; });
}

double q_moment(const FiniteMeasure& mu, double delta, ExecPolicy policy) {
  if (!(delta > 0.0)) throw DomainError("q_moment: delta must be positive");
  double s = 0.0;
  for (const auto& a : mu.atoms()) s += a.weight * std::pow(mu.q(a.point), delta);
  if (!mu.has_grid()) return s;
  const auto qw = axis_q_weights(mu);
  const auto masses = mu.cell_masses();
  return s + kernels::grid_q_reduce(policy, mu.grid().centers(), qw, masses,
                                    [delta](double q) { return std::pow(q, delta); });
}

double holder_modulus(const FiniteMeasure& mu, double delta,
                      const std::vector<std::pair<PhasePoint, PhasePoint>>& pairs, ExecPolicy policy) {
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("holder_modulus: delta must lie in (0,1]");
  double worst = 0.0;
  for (const auto& [g1, g2] : pairs) {
    if (g1.size() != mu.n_modes() || g2.size() != mu.n_modes()) throw DimensionError("holder_modulus: pair mode count");
    const double d = mu.q(g1 - g2);
    if (d == 0.0) continue;
    PhasePoint x1 = g1, x2 = g2;
    for (std::size_t j = 0; j < mu.n_modes(); ++j) {
      x1[j] *= mu.q_weights()[j];
      x2[j] *= mu.q_weights()[j];
    }
    const double diff = std::abs(fourier_transform(mu, x1, policy) - fourier_transform(mu, x2, policy));
    worst = std::max(worst, diff / std::pow(d, delta / 2.0));
  }
  return worst;
}

std::vector<std::pair<PhasePoint, PhasePoint>> random_pairs(std::size_t n_modes, std::size_t count, std::uint64_t seed,
                                                            double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  auto draw = [&] {
    PhasePoint p(n_modes);
    for (std::size_t j = 0; j < n_modes; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      p[j] = cplx(re, im);
    }
    return p;
  };
  std::vector<std::pair<PhasePoint, PhasePoint>> out;
  for (std::size_t i = 0; i < count; ++i) {
    PhasePoint a = draw();
    PhasePoint b = draw();
    out.emplace_back(std::move(a), std::move(b));
  }
  return out;
}

FiniteMeasure pushforward(const FiniteMeasure& mu, std::span<const double> angles) {
  if (angles.size() != mu.n_modes()) throw DimensionError("pushforward: angle count differs from the quotient");
  auto rotate = [&](PhasePoint z) {
    for (std::size_t j = 0; j < z.size(); ++j) z[j] *= std::polar(1.0, angles[j]);
    return z;
  };
  std::vector<Atom> atoms;
  for (const auto& a : mu.atoms()) atoms.push_back({rotate(a.point), a.weight});
  if (!mu.has_grid()) return FiniteMeasure::atomic(mu.q_weights(), std::move(atoms));
  const auto& g = mu.grid();
  const auto masses = mu.cell_masses();
  std::vector<double> deposit(masses.size(), 0.0);
  std::vector<std::size_t> stride(g.axes.size(), 1);
  for (std::size_t a = g.axes.size(); a-- > 1;) stride[a - 1] = stride[a] * static_cast<std::size_t>(g.axes[a].points);
  for (std::size_t c = 0; c < masses.size(); ++c) {
    if (masses[c] == 0.0) continue;
    const PhasePoint z = rotate(g.center_of(c));
    std::size_t target = 0;
    bool inside = true;
    for (std::size_t a = 0; a < g.axes.size() && inside; ++a) {
      const double x = (a % 2 == 0) ? z[a / 2].real() : z[a / 2].imag();
      const int i = g.axes[a].locate(x);
      if (i < 0) {
        inside = false;
      } else {
        target += static_cast<std::size_t>(i) * stride[a];
      }
    }
    if (inside) {
      deposit[target] += masses[c];
    } else {
      atoms.push_back({z, masses[c]});
    }
  }
  const double vol = g.cell_volume();
  for (double& d : deposit) d /= vol;
  return FiniteMeasure(mu.q_weights(), std::move(atoms), g, std::move(deposit));
}

namespace {

double atom_tv(const std::vector<Atom>& a, const std::vector<Atom>& b) {
  std::vector<double> matched(b.size(), 0.0);
  double diff = 0.0;
  std::vector<bool> used(b.size(), false);
  for (const auto& x : a) {
    bool found = false;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (!used[i] && (x.point - b[i].point).norm2() <= 1e-24) {
        diff += std::abs(x.weight - b[i].weight);
        used[i] = true;
        found = true;
        break;
      }
    }
    if (!found) diff += x.weight;
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!used[i]) diff += b[i].weight;
  }
  return diff;
}

}  // namespace

double tv_distance(const FiniteMeasure& a, const FiniteMeasure& b) {
  if (a.n_modes() != b.n_modes()) throw DimensionError("tv_distance: quotients differ");
  double diff = atom_tv(a.atoms(), b.atoms());
  if (a.has_grid() || b.has_grid()) {
    if (!a.has_grid() || !b.has_grid() || !(a.grid() == b.grid())) {
      throw DomainError("tv_distance: measures must share one grid");
    }
    const auto ma = a.cell_masses();
    const auto mb = b.cell_masses();
    for (std::size_t c = 0; c < ma.size(); ++c) diff += std::abs(ma[c] - mb[c]);
  }
  return 0.5 * diff;
}

ConsistencyReport check_consistency(const CylindricalMeasureFamily& family, double tol) {
  ConsistencyReport r;
  r.tolerance = tol;
  const auto& lv = family.levels();
  for (std::size_t i = 0; i + 1 < lv.size(); ++i) {
    const FiniteMeasure m = marginal(lv[i + 1], lv[i].n_modes());
    const double d = tv_distance(m, lv[i]);
    r.distances.push_back(d);
    if (!(d <= tol)) {
      r.pass = false;
      if (!r.first_failure) r.first_failure = i;
    }
  }
  return r;
}

std::string measure_to_json(const FiniteMeasure& mu) {
  json j;
  j["schema"] = "wigner.finite_measure";
  j["version"] = 1;
  j["quotient_size"] = mu.n_modes();
  j["q_weights"] = mu.q_weights();
  json atoms = json::array();
  for (const auto& a : mu.atoms()) {
    std::vector<double> re, im;
    for (auto z : a.point) {
      re.push_back(z.real());
      im.push_back(z.imag());
    }
    atoms.push_back({{"re", re}, {"im", im}, {"weight", a.weight}});
  }
  j["atoms"] = atoms;
  json axes = json::array();
  for (const auto& a : mu.grid().axes) axes.push_back({{"lo", a.lo}, {"hi", a.hi}, {"points", a.points}});
  j["grid"] = {{"axes", axes}, {"density", mu.density()}};
  j["total_mass"] = mu.total_mass();
  return j.dump();
}

FiniteMeasure measure_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("measure", std::string("invalid JSON: ") + e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != "wigner.finite_measure") throw ConfigError("schema", "unknown schema");
    if (j.at("version").get<int>() != 1) throw ConfigError("version", "unsupported version");
    auto qw = j.at("q_weights").get<std::vector<double>>();
    std::vector<Atom> atoms;
    for (const auto& a : j.at("atoms")) {
      const auto re = a.at("re").get<std::vector<double>>();
      const auto im = a.at("im").get<std::vector<double>>();
      if (re.size() != im.size()) throw ConfigError("atoms", "re and im lengths differ");
      PhasePoint p(re.size());
      for (std::size_t k = 0; k < re.size(); ++k) p[k] = cplx(re[k], im[k]);
      atoms.push_back({p, a.at("weight").get<double>()});
    }
    GridSpec g;
    for (const auto& a : j.at("grid").at("axes")) {
      g.axes.push_back({a.at("lo").get<double>(), a.at("hi").get<double>(), a.at("points").get<int>()});
    }
    auto density = j.at("grid").at("density").get<std::vector<double>>();
    FiniteMeasure mu(std::move(qw), std::move(atoms), std::move(g), std::move(density));
    if (j.at("quotient_size").get<std::size_t>() != mu.n_modes()) throw ConfigError("quotient_size", "mismatch");
    return mu;
  } catch (const json::exception& e) {
    throw ConfigError("measure", std::string("malformed layout: ") + e.what());
  }
}

}  // namespace wigner
