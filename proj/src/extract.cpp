#include "wigner/extract.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace wigner {

namespace {

/// Points of one mode's (Re, Im) sub-grid, Im fastest.
std::vector<cplx> mode_points(const GridSpec& grid, std::size_t j) {
  const Axis& re = grid.axes[2 * j];
  const Axis& im = grid.axes[2 * j + 1];
  std::vector<cplx> pts;
  pts.reserve(static_cast<std::size_t>(re.points) * im.points);
  for (int a = 0; a < re.points; ++a) {
    for (int b = 0; b < im.points; ++b) pts.emplace_back(re.center(a), im.center(b));
  }
  return pts;
}

/// table(n, p) = c_n(z_p / sqrt(h)) for n <= n_max.
Eigen::MatrixXcd coherent_table(ExecPolicy policy, const std::vector<cplx>& pts, double h, int n_max) {
  Eigen::MatrixXcd t(n_max + 1, static_cast<Eigen::Index>(pts.size()));
  std::vector<Eigen::VectorXcd> cols;
  kernels::map_indexed(policy, pts.size(), cols,
                       [&](std::size_t p) { return coherent_amplitudes(pts[p] / std::sqrt(h), n_max); });
  for (std::size_t p = 0; p < pts.size(); ++p) t.col(static_cast<Eigen::Index>(p)) = cols[p];
  return t;
}

std::vector<double> q_weights_head(const ModeSpace& modes, std::size_t count) {
  const auto w = modes.q_weights(count);
  return {w.begin(), w.end()};
}

std::vector<double> husimi_density(const FockVector& v, std::size_t count, const GridSpec& grid, ExecPolicy policy) {
  const FockSpace& space = *v.space;
  const std::size_t n = space.n_modes();
  std::vector<Eigen::MatrixXcd> tables;
  for (std::size_t j = 0; j < count; ++j) tables.push_back(coherent_table(policy, mode_points(grid, j), v.h, space.cutoff()));
  std::map<std::vector<int>, std::size_t> index;
  std::vector<kernels::HusimiGroup> groups;
  for (std::size_t i = 0; i < space.dim(); ++i) {
    if (v.coeffs[static_cast<Eigen::Index>(i)] == 0.0) continue;
    const auto occ = space.occupation(i);
    std::vector<int> traced(occ.begin() + static_cast<std::ptrdiff_t>(count), occ.begin() + static_cast<std::ptrdiff_t>(n));
    auto [it, fresh] = index.try_emplace(traced, groups.size());
    if (fresh) groups.emplace_back();
    auto& g = groups[it->second];
    g.kept.insert(g.kept.end(), occ.begin(), occ.begin() + static_cast<std::ptrdiff_t>(count));
    g.coeffs.push_back(v.coeffs[static_cast<Eigen::Index>(i)]);
  }
  return kernels::husimi_contract(policy, tables, groups);
}

std::vector<double> husimi_density(const ProductState& p, std::size_t count, const GridSpec& grid, ExecPolicy policy) {
  double traced = 1.0;
  for (std::size_t j = count; j < p.n_modes(); ++j) traced *= p.factors[j].squaredNorm();
  std::vector<std::vector<double>> factors;
  for (std::size_t j = 0; j < count; ++j) {
    const auto pts = mode_points(grid, j);
    const Eigen::VectorXcd& psi = p.factors[j];
    const Eigen::MatrixXcd t = coherent_table(policy, pts, p.h, static_cast<int>(psi.size()) - 1);
    const Eigen::VectorXcd overlaps = t.adjoint() * psi;
    std::vector<double> d(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) d[k] = std::norm(overlaps[static_cast<Eigen::Index>(k)]);
    if (j == 0) {
      for (double& x : d) x *= traced;
    }
    factors.push_back(std::move(d));
  }
  return kernels::outer_product(policy, factors);
}

cplx ladder_mean(const Eigen::VectorXcd& psi) {
  cplx s = 0.0;
  for (Eigen::Index n = 0; n + 1 < psi.size(); ++n) s += std::conj(psi[n]) * std::sqrt(n + 1.0) * psi[n + 1];
  return s;
}

double number_mean(const Eigen::VectorXcd& psi) {
  double s = 0.0;
  for (Eigen::Index n = 1; n < psi.size(); ++n) s += n * std::norm(psi[n]);
  return s;
}

/// Quotient q-radius of a state: sqrt(<q(a)>) on the leading modes.
double state_radius(const QuantumState& psi, const ModeSpace& modes, std::size_t count) {
  double q = 0.0;
  for (std::size_t j = 0; j < count; ++j) q += modes.m(j) * modes.m(j) * mode_statistics(psi, j).number;
  return std::sqrt(q);
}

std::vector<PhasePoint> characteristic_frequencies(std::size_t count) {
  std::vector<PhasePoint> out;
  for (int k = 0; k < 9; ++k) {
    PhasePoint xi(count);
    const double angle = 2.0 * kPi * k / 9.0;
    xi[static_cast<std::size_t>(k) % count] += std::polar(0.25 + 0.25 * k, angle);
    if (count > 1) xi[static_cast<std::size_t>(k + 1) % count] += 0.5 * k / 9.0;
    out.push_back(xi);
  }
  return out;
}

}  // namespace

HusimiResult husimi_measure(const QuantumState& psi, std::size_t count, const GridSpec& grid, const ModeSpace& modes,
                            ExecPolicy policy, double max_deficit) {
  const std::size_t n = state_modes(psi);
  if (count == 0 || count > n) throw DimensionError("husimi_measure: invalid quotient size");
  if (grid.n_modes() != count) throw DimensionError("husimi_measure: grid and quotient differ");
  if (modes.n_modes() != n) throw DimensionError("husimi_measure: state and modes differ");
  const double h = state_h(psi);
  std::vector<double> density = std::visit([&](const auto& s) { return husimi_density(s, count, grid, policy); }, psi);
  const double norm = std::pow(kPi * h, -static_cast<double>(count));
  for (double& d : density) d *= norm;
  FiniteMeasure mu(q_weights_head(modes, count), {}, grid, std::move(density));
  const double deficit = state_norm2(psi) - mu.total_mass();
  if (deficit > max_deficit) {
    throw NumericalError("husimi_measure: grid misses mass " + std::to_string(deficit) + "; widen the grid");
  }
  return {std::move(mu), deficit};
}

ModeStatistics mode_statistics(const QuantumState& psi, std::size_t j) {
  if (j >= state_modes(psi)) throw DimensionError("mode_statistics: mode out of range");
  const double h = state_h(psi);
  const double norm2 = state_norm2(psi);
  if (!(norm2 > 0.0)) throw DomainError("mode_statistics: zero vector");
  if (auto p = std::get_if<ProductState>(&psi)) {
    const Eigen::VectorXcd& f = p->factors[j];
    const double own = f.squaredNorm();
    return {std::sqrt(h) * ladder_mean(f) / own, h * number_mean(f) / own};
  }
  const auto& v = std::get<FockVector>(psi);
  cplx b = 0.0;
  double nm = 0.0;
  for (std::size_t i = 0; i < v.space->dim(); ++i) {
    const cplx c = v.coeffs[static_cast<Eigen::Index>(i)];
    const int nj = v.space->occupation(i)[j];
    if (nj == 0) continue;
    nm += nj * std::norm(c);
    b += std::conj(v.coeffs[v.space->lowered(j, i)]) * std::sqrt(static_cast<double>(nj)) * c;
  }
  return {std::sqrt(h) * b / norm2, h * nm / norm2};
}

GridSpec auto_grid(const QuantumState& psi, std::size_t count, int points, double n_sigma) {
  if (points < 2) throw DomainError("auto_grid: need at least two points per axis");
  const double h = state_h(psi);
  PhasePoint center(count);
  std::vector<double> half(count);
  for (std::size_t j = 0; j < count; ++j) {
    const ModeStatistics s = mode_statistics(psi, j);
    center[j] = s.mean;
    const double var = std::max(0.0, s.number - std::norm(s.mean)) + h;
    half[j] = n_sigma * std::sqrt(var / 2.0);
  }
  return GridSpec::centered(center, half, points);
}

double TestSymbol::evaluate(const PhasePoint& z) const {
  return std::exp(-kPi * std::norm(z[0] - center) / (width * width));
}

double TestSymbol::weyl_expectation(const FiniteMeasure& husimi, double h) const {
  const double a = kPi / (width * width);
  if (!(a * h < 2.0)) throw DomainError("TestSymbol: width too small for this h");
  const double b = 2.0 * a / (2.0 - a * h);
  const double scale = 1.0 + b * h / 2.0;
  double sum = 0.0;
  for (const auto& atom : husimi.atoms()) sum += atom.weight * std::exp(-b * std::norm(atom.point[0] - center));
  if (husimi.has_grid()) {
    const auto masses = husimi.cell_masses();
    for (std::size_t c = 0; c < masses.size(); ++c) {
      if (masses[c] != 0.0) sum += masses[c] * std::exp(-b * std::norm(husimi.grid().center_of(c)[0] - center));
    }
  }
  return scale * sum;
}

double richardson(double h1, double x1, double h2, double x2) { return (h1 * x2 - h2 * x1) / (h1 - h2); }
cplx richardson(double h1, cplx x1, double h2, cplx x2) { return (h1 * x2 - h2 * x1) / (h1 - h2); }

LimitResult limit_measure(const StateFamily& family, std::size_t count, const GridOptions& gopts, ExecPolicy policy) {
  const std::size_t n = family.size();
  if (n < 3) throw DomainError("limit_measure: the h grid needs at least three points");
  LimitDiagnostics d;
  d.h = family.h_grid();
  d.test_frequencies = characteristic_frequencies(count);
  cplx c0 = 0.0;
  if (family.kind() != StateFamily::Kind::explicit_list) c0 = family.limit_amplitude()[0];
  d.battery = {{c0, 1.0}, {0.0, 1.5}};

  std::optional<FiniteMeasure> last;
  for (std::size_t i = 0; i < n; ++i) {
    const QuantumState psi = family.materialize(i);
    const GridSpec grid = gopts.grid ? *gopts.grid : auto_grid(psi, count, gopts.points, gopts.n_sigma);
    HusimiResult hr = husimi_measure(psi, count, grid, family.modes(), policy, gopts.max_deficit);
    d.mass_deficit.push_back(hr.mass_deficit);
    std::vector<cplx> chi;
    for (const auto& xi : d.test_frequencies) chi.push_back(fourier_transform(hr.measure, xi, policy));
    d.characteristic.push_back(std::move(chi));

    std::vector<double> vals;
    for (const auto& t : d.battery) vals.push_back(t.weyl_expectation(hr.measure, d.h[i]));
    d.weyl_values.push_back(std::move(vals));
    if (i + 1 == n) last = std::move(hr.measure);
  }

  if (n >= 2) {
    const double h1 = d.h[n - 2], h2 = d.h[n - 1];
    for (std::size_t k = 0; k < d.test_frequencies.size(); ++k) {
      d.characteristic_extrapolated.push_back(richardson(h1, d.characteristic[n - 2][k], h2, d.characteristic[n - 1][k]));
    }
    for (std::size_t k = 0; k < d.battery.size(); ++k) {
      d.weyl_extrapolated.push_back(richardson(h1, d.weyl_values[n - 2][k], h2, d.weyl_values[n - 1][k]));
    }
  } else {
    d.characteristic_extrapolated = d.characteristic.back();
    d.weyl_extrapolated = d.weyl_values.back();
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row;
    for (std::size_t k = 0; k < d.battery.size(); ++k) row.push_back(std::abs(d.weyl_values[i][k] - d.weyl_extrapolated[k]));
    d.residuals.push_back(std::move(row));
  }
  // The last residual vanishes by construction of the extrapolation; the
  // Cauchy check runs over the earlier ones.
  for (std::size_t k = 0; k < d.battery.size(); ++k) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d.residuals[i][k] > d.residuals[i - 1][k] * (1.0 + 1e-9) + 1e-12) d.cauchy = false;
    }
  }
  return {std::move(*last), std::move(d)};
}

double mass_fraction_near(const FiniteMeasure& mu, const PhasePoint& f, double radius) {
  const double total = mu.total_mass();
  if (!(total > 0.0)) return 0.0;
  const double r2 = radius * radius;
  double near = 0.0;
  for (const auto& a : mu.atoms()) {
    if (mu.q(a.point - f) <= r2) near += a.weight;
  }
  if (mu.has_grid()) {
    const auto masses = mu.cell_masses();
    for (std::size_t c = 0; c < masses.size(); ++c) {
      if (masses[c] != 0.0 && mu.q(mu.grid().center_of(c) - f) <= r2) near += masses[c];
    }
  }
  return near / total;
}

AtomCheck atom_check(const FiniteMeasure& mu, const PhasePoint& f, double h) {
  const double radius = std::max(0.1, 5.0 * std::sqrt(h));
  const double frac = mass_fraction_near(mu, f.resized(mu.n_modes()), radius);
  return {radius, frac, frac >= 0.99};
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::hypothesis_failed:
      return "hypothesis_failed";
  }
  return "unknown";
}

double log_log_slope(const std::vector<double>& h, const std::vector<double>& values) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (std::size_t i = 0; i < h.size() && i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !(h[i] > 0.0)) continue;
    const double x = std::log(h[i]), y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++k;
  }
  if (k < 2) return 0.0;
  const double den = k * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (k * sxy - sx * sy) / den;
}

HypothesisReport check_hypothesis(const StateFamily& family, const MomentOperator& op, const std::string& name,
                                  const VerdictOptions& opts, ExecPolicy policy) {
  HypothesisReport hyp;
  hyp.operator_name = name;
  hyp.table = moment_table(family, op, opts.delta, policy);
  hyp.K_input = opts.K_input.value_or(hyp.table.sup);
  hyp.tolerance = opts.hypothesis_tolerance;
  hyp.slope = log_log_slope(hyp.table.h, hyp.table.moment);
  hyp.growth_slope = opts.growth_slope;
  const auto& m = hyp.table.moment;
  const auto argmax = static_cast<std::size_t>(std::max_element(m.begin(), m.end()) - m.begin());
  const bool growing = m.size() > 1 && hyp.slope <= opts.growth_slope && argmax + 1 == m.size();
  hyp.passed = true;
  if (hyp.table.sup > hyp.K_input * (1.0 + opts.hypothesis_tolerance)) {
    hyp.passed = false;
    hyp.reason = "moment supremum exceeds K_input";
  } else if (growing) {
    hyp.passed = false;
    hyp.reason = "moments grow as h decreases (log-log slope " + std::to_string(hyp.slope) + ")";
  }
  return hyp;
}

ConcentrationReport concentration_verdict(const StateFamily& family, const VerdictOptions& opts, ExecPolicy policy) {
  if (opts.R_list.empty()) throw ConfigError("R_list", "at least one quotient size is required");
  for (std::size_t i = 1; i < opts.R_list.size(); ++i) {
    if (opts.R_list[i] <= opts.R_list[i - 1]) throw ConfigError("R_list", "quotient sizes must increase");
  }
  if (opts.R_list.back() >= family.modes().n_modes()) throw ConfigError("R_list", "quotient larger than the mode space");
  if (!(opts.delta > 0.0 && opts.delta <= 1.0)) throw ConfigError("delta", "must lie in (0, 1]");

  ConcentrationReport rep;
  rep.delta = opts.delta;
  rep.slack = opts.slack;
  rep.moment_tolerance = opts.moment_tolerance;

  const MomentOperator op = opts.moment_op ? *opts.moment_op
                                           : MomentOperator::m_number(family.modes(), family.modes().n_modes());
  rep.hypothesis = check_hypothesis(family, op, opts.moment_op_name, opts, policy);
  const HypothesisReport& hyp = rep.hypothesis;
  if (!hyp.passed) {
    rep.verdict = Verdict::hypothesis_failed;
    return rep;
  }

  const double K = hyp.K_input;
  const std::size_t last = family.size() - 1;
  const double h = family.h_grid()[last];
  const QuantumState psi = family.materialize(last);
  const std::size_t top = opts.R_list.back() + 1;
  const GridSpec full = opts.grid.grid ? *opts.grid.grid : auto_grid(psi, top, opts.grid.points, opts.grid.n_sigma);
  if (full.n_modes() < top) throw ConfigError("grid", "fixed grid covers fewer modes than the largest quotient");

  std::vector<FiniteMeasure> levels;
  bool ok = true;
  for (std::size_t R : opts.R_list) {
    const std::size_t count = R + 1;
    HusimiResult hr = husimi_measure(psi, count, full.head(count), family.modes(), policy, opts.grid.max_deficit);
    const FiniteMeasure& mu = hr.measure;
    QuotientReport qr;
    qr.R = R;
    qr.mass = mu.total_mass();
    qr.mass_deficit = hr.mass_deficit;
    qr.fitted_K = 0.0;
    // The lower symbol of q is dGamma(m^2) + h sum m_j^2; the shift vanishes as h -> 0.
    double trace = 0.0;
    for (double w : family.modes().q_weights(count)) trace += w;
    const double shift = std::pow(h * trace, opts.delta);
    for (double r : opts.r_list) {
      const double tail = tail_mass(mu, r, policy);
      const double bound = opts.slack * (K + shift) * std::pow(1.0 + r, -opts.delta);
      qr.tails.push_back({r, tail, bound, tail <= bound});
      qr.fitted_K = std::max(qr.fitted_K, tail * std::pow(1.0 + r, opts.delta));
      ok = ok && tail <= bound;
    }
    qr.q_moment = q_moment(mu, opts.delta, policy);
    qr.moment_bound = (1.0 + opts.moment_tolerance) * (K + shift);
    qr.moment_pass = qr.q_moment <= qr.moment_bound;
    const auto pairs = random_pairs(count, opts.holder_pairs, opts.seed);
    qr.holder = holder_modulus(mu, opts.delta, pairs, policy);
    qr.holder_bound = std::pow(2.0, 1.0 - opts.delta) * (qr.mass + K);
    qr.holder_pass = qr.holder <= qr.holder_bound;
    ok = ok && qr.moment_pass && qr.holder_pass;
    if (family.kind() != StateFamily::Kind::explicit_list) qr.atom = atom_check(mu, family.limit_amplitude(), h);
    rep.quotients.push_back(std::move(qr));
    levels.push_back(std::move(hr.measure));
  }
  if (levels.size() > 1) {
    rep.consistency = check_consistency(CylindricalMeasureFamily(std::move(levels)), opts.consistency_tolerance);
    ok = ok && rep.consistency->pass;
  }
  rep.verdict = ok ? Verdict::pass : Verdict::fail;
  return rep;
}

std::vector<QuantizedTailRow> quantized_tail_expectation(const StateFamily& family, double r, std::size_t count,
                                                         const RadialCutoff& chi, ExecPolicy policy) {
  const ModeSpace& modes = family.modes();
  if (count == 0 || count > modes.n_modes()) throw DomainError("quantized_tail_expectation: invalid quotient size");
  double mmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < count; ++j) mmin = std::min(mmin, modes.m(j));
  std::vector<QuantizedTailRow> rows;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const double h = family.h_grid()[i];
    const QuantumState psi = family.materialize(i);
    CutoffGrid grid = cutoff_grid(chi, r, h, state_radius(psi, modes, count) + 6.0 * std::sqrt(h));
    // G(m pi eta) decays with m pi eta, so small m stretch the frequency box.
    const double stretch = 1.0 / std::min(1.0, mmin);
    grid.extent *= stretch;
    grid.points = 2 * static_cast<int>(std::ceil(grid.points * stretch / 2.0));
    const double samples = std::pow(static_cast<double>(grid.points), 2.0 * count);
    if (samples > 5e7) throw ResourceError("quantized_tail_expectation: frequency grid too large", samples);
    const SampledSymbol sym = cutoff_complement_symbol(count, chi, r, grid.extent, grid.points);
    GeneratingFunctional G(psi, modes, true, policy);
    G.prepare(kPi * grid.extent * std::sqrt(2.0));
    const IntegralExpectation e = expect_integral(sym, [&G](const PhasePoint& eta) { return G(eta); }, policy);
    rows.push_back({h, state_norm2(psi) - e.value.real(), e.error_estimate, e.leak});
  }
  return rows;
}

}  // namespace wigner
