// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <Eigen/SVD>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "wigner/scenario.hpp"

using namespace wigner;

namespace {

const std::filesystem::path kConfigs = WIGNER_CONFIG_DIR;

struct Outcome {
  bool pass;
  std::string detail;
};

double spectral(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(a).singularValues()(0);
}

PhasePoint random_point(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  PhasePoint p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = cplx(g(rng), g(rng));
  return p;
}

PhasePoint in_unit_ball(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  PhasePoint p = random_point(rng, n);
  return (u(rng) / std::sqrt(p.norm2())) * p;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome ccr() {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto s = FockSpace::make(ModeSpace::unit(n), 12);
    const auto low = static_cast<Eigen::Index>(s->count_upto(10));
    for (double h : {0.5, 0.1}) {
      for (int trial = 0; trial < 3; ++trial) {
        const auto f = random_point(rng, n), g = random_point(rng, n);
        const auto a = ladder_operators(s, f, h).first.matrix();
        const auto ad = ladder_operators(s, g, h).second.matrix();
        Eigen::MatrixXcd c = a * ad - ad * a;
        c -= h * inner(f, g) * Eigen::MatrixXcd::Identity(c.rows(), c.cols());
        worst = std::max(worst, spectral(c.leftCols(low)));
      }
    }
  }
  return {worst <= 1e-12, fmt("max restricted residual %.2e (tol 1e-12)", worst)};
}

Outcome weyl_relations() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  int not_decreasing = 0, cases = 0;
  for (std::size_t n = 1; n <= 2; ++n) {
    const ModeSpace modes = ModeSpace::unit(n);
    for (double h : {0.1, 0.05}) {
      for (int trial = 0; trial < 3; ++trial) {
        const auto xi = in_unit_ball(rng, n), zeta = in_unit_ball(rng, n);
        WeylOptions opts;
        const int cutoff = weyl_auto_cutoff(modes, {xi, zeta, xi + zeta}, h, opts);
        // Same certified subspace at both cutoffs.
        opts.exact_total = cutoff / 2;
        const double r1 = weyl_relation_residual(FockSpace::make(modes, cutoff), xi, zeta, h, opts);
        opts.leak_threshold = std::numeric_limits<double>::infinity();
        const double r2 = weyl_relation_residual(FockSpace::make(modes, cutoff + 4), xi, zeta, h, opts);
        worst = std::max(worst, r1);
        ++cases;
        if (!(r2 < r1)) ++not_decreasing;
      }
    }
  }
  return {worst <= 1e-6 && not_decreasing == 0,
          fmt("max residual %.2e (tol 1e-6); residual shrank at cutoff+4 in %g/%g cases", worst, cases - not_decreasing,
              cases)};
}

Outcome wick_weyl() {
  double worst = 0.0;
  const double h = 0.05;
  for (std::size_t R : {1u, 2u, 3u}) {
    const auto s = FockSpace::make(ModeSpace::unit(R), 8);
    PolynomialSymbol p = PolynomialSymbol::constant(R, 1.0);
    p += PolynomialSymbol::quadratic(R, R);
    const auto op = quantize_polynomial(s, p, Ordering::weyl, h);
    const FockOperator expected =
        (1.0 + h * static_cast<double>(R) / 2.0) * FockOperator::identity(s, h) + m_number(s, R, h);
    worst = std::max(worst, (op - expected).restricted_spectral_norm(op.exact_total()));
  }
  const ModeSpace modes({std::sqrt(0.5), 1.0, std::sqrt(3.0)}, {1.0, 1.0, 1.0});
  const auto s = FockSpace::make(modes, 8);
  const auto m2 = modes.m_squared();
  PolynomialSymbol p = PolynomialSymbol::constant(3, 1.0);
  p += PolynomialSymbol::quadratic(3, 3, m2);
  const auto op = quantize_polynomial(s, p, Ordering::weyl, h);
  const FockOperator expected =
      (1.0 + (h / 2.0) * (m2[0] + m2[1] + m2[2])) * FockOperator::identity(s, h) + dgamma(s, m2, h);
  const double weighted = (op - expected).restricted_spectral_norm(op.exact_total());
  worst = std::max(worst, weighted);
  return {worst <= 1e-10, fmt("max norm on the degree-exact subspace %.2e, weighted %.2e (tol 1e-10)", worst, weighted)};
}

Outcome convergence_rate() {
  const ModeSpace modes = ModeSpace::unit(1);
  const PhasePoint f{cplx(0.3, 0.2)};
  const double support = 3.0;
  auto g = [support](double s) {
    const double u = s / support;
    return u < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
  };
  const double exact = g(std::sqrt(f.norm2()));
  const std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
  std::vector<double> err;
  for (double h : hs) {
    const double extent = std::sqrt(2.0 * 27.7 / (h * kPi * kPi));
    const double spacing = 1.0 / (2.0 * (support + std::sqrt(f.norm2()) + 8.0 * std::sqrt(h) + 1.0));
    const int points = 2 * static_cast<int>(std::ceil(extent / spacing));
    const SampledSymbol sym = SampledSymbol::from_radial(1, extent, points, g, support);
    GeneratingFunctional G(ProductState::coherent(f, h), modes);
    G.prepare(kPi * extent * std::sqrt(2.0));
    const auto e = expect_integral(sym, [&G](const PhasePoint& eta) { return G(eta); });
    err.push_back(std::abs(e.value.real() - exact));
  }
  const double slope = log_log_slope(hs, err);
  bool decreasing = true;
  for (std::size_t i = 1; i < err.size(); ++i) decreasing = decreasing && err[i] < err[i - 1];
  std::ostringstream d;
  d << "errors";
  for (double e : err) d << ' ' << fmt("%.3e", e);
  d << fmt("; order %.3f (target 1 +/- 0.2)", slope);
  return {decreasing && std::abs(slope - 1.0) <= 0.2, d.str()};
}

ScenarioReport run(const std::string& name) { return run_scenario(load_config(kConfigs / name)); }

Outcome concentration_desk(const ScenarioReport& rep) {
  const auto& c = rep.concentration;
  if (c.verdict == Verdict::hypothesis_failed) return {false, "hypothesis failed: " + c.hypothesis.reason};
  const double K = c.hypothesis.K_input;
  double worst_tail = 0.0;
  bool ok = c.hypothesis.table.h.back() == 0.01;
  for (const auto& q : c.quotients) {
    for (const auto& t : q.tails) {
      const double bound = 3.0 * K / (1.0 + t.r);
      worst_tail = std::max(worst_tail, t.tail / bound);
      ok = ok && t.tail <= bound;
    }
  }
  const double qm = c.quotients.back().q_moment;
  ok = ok && qm <= 1.05 * K;
  return {ok, fmt("K %.4f, q_moment %.4f (bound %.4f)", K, qm, 1.05 * K) +
                  fmt(", max tail / 3K(1+r)^-1 %.3f", worst_tail)};
}

Outcome atomic(const ScenarioReport& rep) {
  const auto& c = rep.concentration;
  if (c.quotients.empty() || !c.quotients.back().atom || !rep.comparison) return {false, "missing report sections"};
  const AtomCheck& a = *c.quotients.back().atom;
  const double h = c.hypothesis.table.h.back();
  const double slope = rep.comparison->slope;
  double gf = 0.0;
  for (const auto& s : rep.gf_samples) gf = std::max(gf, s.difference);
  const bool ok = h == 1e-3 && a.fraction >= 0.99 && a.radius == std::max(0.1, 5.0 * std::sqrt(h)) && slope <= -0.4 &&
                  !rep.comparison->passed && rep.gf_samples.size() == 5 && gf <= 0.05;
  return {ok, fmt("mass fraction %.5f within %.4f; number-moment slope %.3f (need <= -0.4)", a.fraction, a.radius, slope) +
                  fmt("; max |G - limit| %.2e on 5 points (tol 0.05)", gf)};
}

Outcome pushforward_law(const ScenarioReport& rep) {
  if (rep.dynamics.empty()) return {false, "no dynamics section"};
  const PushforwardReport& d = rep.dynamics.front().report;
  const bool ok = d.h == 0.01 && d.t == 1.0 && d.test_frequencies.size() == 9 && d.fourier_sup <= 1e-2 &&
                  d.covariance_residual <= 10.0 * d.leak && d.moment_residual <= 1e-12;
  return {ok, fmt("fourier sup %.2e (tol 1e-2); covariance %.2e vs 10 x leak %.2e", d.fourier_sup, d.covariance_residual,
                  10.0 * d.leak) +
                  fmt("; moment residual %.1e", d.moment_residual)};
}

StateFamily three_mode_family() {
  const ModeSpace modes = ModeSpace::homogeneous_sobolev({0.5, 1.0, 1.5}, 0.5);
  return StateFamily::coherent(modes, PhasePoint{cplx(0.5, 0.3), cplx(-0.4, 0.2), cplx(0.1, -0.3)}, {0.1, 0.05, 0.02});
}

Outcome consistency() {
  VerdictOptions opts;
  opts.R_list = {0, 1, 2};
  opts.grid.points = 12;
  opts.consistency_tolerance = 1e-3;
  const auto rep = concentration_verdict(three_mode_family(), opts);
  if (!rep.consistency) return {false, "no consistency report"};
  double worst = 0.0;
  for (double d : rep.consistency->distances) worst = std::max(worst, d);
  return {rep.consistency->pass && worst <= 1e-3, fmt("max TV between levels %.2e (tol 1e-3)", worst)};
}

Outcome holder() {
  // Every extracted measure of the scenarios above, rebuilt here.
  struct Case {
    StateFamily family;
    std::vector<std::size_t> counts;
    int points;
  };
  std::vector<Case> cases;
  for (const char* name : {"massless.ini", "negative_sobolev.ini", "free_evolution.ini"}) {
    const auto cfg = load_config(kConfigs / name);
    std::vector<std::size_t> counts;
    for (std::size_t R : cfg.R_list) counts.push_back(R + 1);
    cases.push_back({build_family(cfg), counts, cfg.grid_points});
  }
  cases.push_back({three_mode_family(), {1, 2, 3}, 12});
  const double delta = 1.0;
  double worst = 0.0;
  int measures = 0;
  bool ok = true;
  for (const auto& c : cases) {
    const std::size_t last = c.family.size() - 1;
    const QuantumState psi = c.family.materialize(last);
    const GridSpec grid = auto_grid(psi, c.counts.back(), c.points);
    for (std::size_t count : c.counts) {
      const auto hus = husimi_measure(psi, count, grid.head(count), c.family.modes());
      const FiniteMeasure& mu = hus.measure;
      const double K = q_moment(mu, delta);
      const double bound = std::pow(2.0, 1.0 - delta) * std::max(K, mu.total_mass() + K);
      const double mod = holder_modulus(mu, delta, random_pairs(count, 50, 20240917));
      worst = std::max(worst, mod / bound);
      ok = ok && mod <= bound;
      ++measures;
    }
  }
  return {ok, fmt("max modulus/bound %.3f over %g measures, 50 pairs each", worst, measures)};
}

Outcome determinism() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"massless.ini", "free_evolution.ini"}) {
    auto cfg = load_config(kConfigs / name);
    cfg.parallel = false;
    const auto base = std::filesystem::temp_directory_path() / "wigner_acceptance";
    std::string bytes[2];
    for (int i = 0; i < 2; ++i) {
      const auto dir = base / (std::string(name) + std::to_string(i));
      std::filesystem::remove_all(dir);
      emit_report(run_scenario(cfg), dir, 0.0);
      std::ifstream in(dir / "report.json", std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      bytes[i] = ss.str();
    }
    std::filesystem::remove_all(base);
    const bool same = !bytes[0].empty() && bytes[0] == bytes[1];
    ok = ok && same;
    detail += std::string(detail.empty() ? "" : ", ") + name + (same ? " identical" : " differs") + " (" +
              std::to_string(bytes[0].size()) + " bytes)";
  }
  return {ok, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  ScenarioReport massless, sobolev, evolution;
  bool loaded = false;
  auto scenarios = [&] {
    if (!loaded) {
      massless = run("massless.ini");
      sobolev = run("negative_sobolev.ini");
      evolution = run("free_evolution.ini");
      loaded = true;
    }
  };
  const std::vector<Criterion> criteria{
      {"ccr exactness", ccr},
      {"weyl relations", weyl_relations},
      {"wick-weyl identity", wick_weyl},
      {"semiclassical convergence rate", convergence_rate},
      {"concentration desk check", [&] { scenarios(); return concentration_desk(massless); }},
      {"atomic concentration", [&] { scenarios(); return atomic(sobolev); }},
      {"pushforward law", [&] { scenarios(); return pushforward_law(evolution); }},
      {"projective consistency", consistency},
      {"hoelder modulus", holder},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2zu %-32s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
