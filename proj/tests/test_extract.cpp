#include "support.hpp"
#include "wigner/extract.hpp"

using namespace wigner;

namespace {

double husimi_coherent(const PhasePoint& z, const PhasePoint& f, double h) {
  return std::exp(-(z - f).norm2() / h) / std::pow(kPi * h, static_cast<double>(z.size()));
}

}  // namespace

TEST_SUITE("extract") {
  TEST_CASE("husimi measure of vacuum and coherent vectors") {
    const ModeSpace modes = ModeSpace::unit(2);
    const double h = 0.05;
    const PhasePoint f{cplx(0.4, -0.2), cplx(0.1, 0.3)};
    for (const PhasePoint& c : {PhasePoint(2), f}) {
      const QuantumState psi = ProductState::coherent(c, h);
      const GridSpec grid = auto_grid(psi, 1, 40);
      const auto hus = husimi_measure(psi, 1, grid, modes);
      CHECK(hus.measure.total_mass() >= 0.999);
      CHECK(hus.mass_deficit == doctest::Approx(state_norm2(psi) - hus.measure.total_mass()));
      double worst = 0.0;
      for (std::size_t cell = 0; cell < grid.cells(); cell += 37) {
        const PhasePoint z = grid.center_of(cell);
        worst = std::max(worst, std::abs(hus.measure.density()[cell] - husimi_coherent(z, c.head(1), h)));
      }
      CHECK(worst < 1e-7 / (kPi * h));
      const auto st = mode_statistics(psi, 0);
      CHECK(std::abs(st.mean - c[0]) < 1e-9);
      CHECK(st.number == doctest::Approx(std::norm(c[0])).epsilon(1e-8));
    }
  }

  TEST_CASE("joint and product representations give the same husimi measure") {
    const ModeSpace modes = ModeSpace::unit(2);
    const double h = 0.1;
    const PhasePoint f{cplx(0.3, 0.1), cplx(-0.2, 0.2)};
    const ProductState p = ProductState::coherent(f, h);
    const FockVector joint = p.to_fock(FockSpace::make(modes, 30));
    for (std::size_t count : {1u, 2u}) {
      const GridSpec grid = auto_grid(p, count, 12);
      const auto a = husimi_measure(p, count, grid, modes);
      const auto b = husimi_measure(joint, count, grid, modes);
      CHECK(tv_distance(a.measure, b.measure) < 1e-8);
      const auto par = husimi_measure(joint, count, grid, modes, ExecPolicy::parallel);
      CHECK(par.measure.density() == b.measure.density());
    }
  }

  TEST_CASE("superposition of separated coherent vectors has two peaks") {
    const ModeSpace modes = ModeSpace::unit(1);
    const double h = 0.02;
    const PhasePoint f1{0.5}, f2{-0.5};
    const auto s = FockSpace::make(modes, 60);
    FockVector psi = coherent_state(s, f1, h);
    psi.coeffs += coherent_state(s, f2, h).coeffs;
    psi.coeffs.normalize();
    const GridSpec grid = GridSpec::uniform(1, 1.5, 80);
    const auto hus = husimi_measure(psi, 1, grid, modes);
    CHECK(mass_fraction_near(hus.measure, f1, 0.5) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(mass_fraction_near(hus.measure, f2, 0.5) == doctest::Approx(0.5).epsilon(1e-3));
  }

  TEST_CASE("mass deficit above threshold is an error") {
    const QuantumState psi = ProductState::coherent(PhasePoint{1.0}, 0.05);
    CHECK_THROWS_AS(husimi_measure(psi, 1, GridSpec::uniform(1, 0.5, 10), ModeSpace::unit(1)), NumericalError);
  }

  TEST_CASE("anti-Wick identity matches the integral path") {
    const ModeSpace modes = ModeSpace::unit(1);
    const double h = 0.05;
    const PhasePoint f{cplx(0.3, 0.2)};
    const QuantumState psi = ProductState::coherent(f, h);
    const auto hus = husimi_measure(psi, 1, auto_grid(psi, 1, 48), modes);
    GeneratingFunctional G(psi, modes);
    G.prepare(kPi * 4.0 * std::sqrt(2.0));
    for (const TestSymbol t : {TestSymbol{cplx(0.3, 0.2), 1.0}, TestSymbol{cplx(0.0), 1.5}}) {
      auto fhat = [t](std::span<const double> eta) {
        const double e2 = eta[0] * eta[0] + eta[1] * eta[1];
        const double dot = eta[0] * t.center.real() + eta[1] * t.center.imag();
        return t.width * t.width * std::exp(-kPi * t.width * t.width * e2) * std::polar(1.0, -2.0 * kPi * dot);
      };
      const auto e = expect_integral(SampledSymbol::from_fourier(1, 4.0, 64, fhat), [&](const PhasePoint& xi) { return G(xi); });
      CHECK(std::abs(e.value - t.weyl_expectation(hus.measure, h)) < 1e-6);
    }
  }

  TEST_CASE("helpers") {
    CHECK(richardson(0.2, 1.0 + 0.2 * 3.0, 0.1, 1.0 + 0.1 * 3.0) == doctest::Approx(1.0));
    CHECK(std::abs(richardson(0.2, cplx(1.4, 0.2), 0.1, cplx(1.2, 0.1)) - cplx(1.0, 0.0)) < 1e-14);
    const std::vector<double> hs{0.1, 0.01, 0.001};
    std::vector<double> v;
    for (double h : hs) v.push_back(3.0 * std::pow(h, -0.5));
    CHECK(log_log_slope(hs, v) == doctest::Approx(-0.5));
    const auto atom = FiniteMeasure::atomic({1.0}, {{PhasePoint{0.5}, 1.0}});
    const auto ac = atom_check(atom, PhasePoint{0.5}, 1e-4);
    CHECK(ac.radius == doctest::Approx(0.1));
    CHECK(ac.atomic);
    CHECK(atom_check(atom, PhasePoint{0.5}, 0.01).radius == doctest::Approx(0.5));
    CHECK_FALSE(atom_check(atom, PhasePoint{-0.5}, 1e-4).atomic);
    CHECK(to_string(Verdict::hypothesis_failed) == "hypothesis_failed");
  }

  TEST_CASE("limit measures concentrate at the classical point") {
    const ModeSpace modes({1.0, 1.0}, {1.0, 1.0});
    const PhasePoint f{cplx(0.5, 0.2), cplx(-0.1, 0.3)};
    const std::vector<double> hs{0.01, 0.003, 0.001};
    for (const StateFamily& fam : {StateFamily::coherent(modes, f, hs), StateFamily::vacuum(modes, hs)}) {
      const auto lim = limit_measure(fam, 1, GridOptions{});
      const PhasePoint target = fam.limit_amplitude().head(1);
      CHECK(mass_fraction_near(lim.measure, target, 0.1) >= 0.99);
      CHECK(lim.diagnostics.h == hs);
      CHECK(lim.diagnostics.test_frequencies.size() == 9);
      for (std::size_t k = 0; k < 9; ++k) {
        const cplx expected = std::polar(1.0, inner(lim.diagnostics.test_frequencies[k], target).real());
        CHECK(std::abs(lim.diagnostics.characteristic_extrapolated[k] - expected) < 1e-2);
      }
    }
    CHECK_THROWS(limit_measure(StateFamily::vacuum(modes, {0.1, 0.01}), 1, GridOptions{}));
  }

  TEST_CASE("first-order residuals shrink linearly") {
    const ModeSpace modes = ModeSpace::unit(1);
    const std::vector<double> hs{0.04, 0.02, 0.01, 0.005};
    const auto lim = limit_measure(StateFamily::coherent(modes, PhasePoint{cplx(0.4, 0.3)}, hs), 1, GridOptions{});
    const auto& d = lim.diagnostics;
    CHECK(d.cauchy);
    for (std::size_t b = 0; b < d.battery.size(); ++b) {
      const double ratio = d.residuals[0][b] / d.residuals[1][b];
      CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
    }
  }

  TEST_CASE("hypothesis check") {
    const ModeSpace modes = ModeSpace::inhomogeneous_sobolev({0.5, 1.0, 30.0}, -1.0);
    const PhasePoint f{cplx(0.5, 0.2), cplx(-0.3, 0.1), cplx(0.0)};
    const std::vector<double> hs{0.1, 0.03, 0.01, 0.003, 0.001};
    const auto fam = StateFamily::divergent(modes, f, 2, 0.5, hs);
    VerdictOptions opts;
    const auto plain = check_hypothesis(fam, MomentOperator::number(3), "number", opts);
    CHECK_FALSE(plain.passed);
    CHECK(plain.slope <= -0.4);
    const auto weighted = check_hypothesis(fam, MomentOperator::m_number(modes, 3), "m_number", opts);
    CHECK(weighted.passed);
    CHECK(weighted.K_input == weighted.table.sup);
    opts.K_input = 0.5 * weighted.table.sup;
    CHECK_FALSE(check_hypothesis(fam, MomentOperator::m_number(modes, 3), "m_number", opts).passed);
  }

  TEST_CASE("concentration verdicts") {
    const ModeSpace modes = ModeSpace::homogeneous_sobolev({0.5, 1.0}, 0.5);
    const PhasePoint f{cplx(0.8, 0.4), cplx(0.6, -0.5)};
    const std::vector<double> hs{0.1, 0.05, 0.02, 0.01};
    VerdictOptions opts;
    opts.R_list = {0, 1};
    opts.grid.points = 16;
    const auto coh = concentration_verdict(StateFamily::coherent(modes, f, hs), opts);
    CHECK(coh.verdict == Verdict::pass);
    REQUIRE(coh.quotients.size() == 2);
    CHECK(coh.quotients[1].q_moment == doctest::Approx(quadratic_q(modes, f)).epsilon(0.05));
    REQUIRE(coh.consistency);
    CHECK(coh.consistency->pass);
    for (const auto& qr : coh.quotients) {
      CHECK(qr.holder_pass);
      for (const auto& row : qr.tails) CHECK(row.tail * std::pow(1.0 + row.r, opts.delta) <= 3.0 * coh.hypothesis.K_input);
    }

    const auto vac = concentration_verdict(StateFamily::vacuum(modes, hs), opts);
    CHECK(vac.verdict == Verdict::pass);
    for (const auto& row : vac.quotients[0].tails) CHECK(row.tail == 0.0);

    const ModeSpace sob = ModeSpace::inhomogeneous_sobolev({0.5, 1.0, 30.0}, -1.0);
    VerdictOptions plain;
    plain.moment_op = MomentOperator::number(3);
    plain.moment_op_name = "number";
    const auto div = StateFamily::divergent(sob, PhasePoint{0.3, 0.2, 0.0}, 2, 0.5, {0.1, 0.03, 0.01, 0.003});
    const auto failed = concentration_verdict(div, plain);
    CHECK(failed.verdict == Verdict::hypothesis_failed);
    CHECK(failed.quotients.empty());
  }

  TEST_CASE("verdicts do not depend on the execution policy") {
    const ModeSpace modes = ModeSpace::homogeneous_sobolev({0.5, 1.0}, 0.5);
    const auto fam = StateFamily::coherent(modes, PhasePoint{cplx(0.8, 0.4), cplx(0.6, -0.5)}, {0.1, 0.05, 0.02});
    VerdictOptions opts;
    opts.R_list = {0, 1};
    opts.grid.points = 10;
    const auto a = concentration_verdict(fam, opts, ExecPolicy::serial);
    const auto b = concentration_verdict(fam, opts, ExecPolicy::parallel);
    CHECK(a.verdict == b.verdict);
    CHECK(a.quotients[1].q_moment == doctest::Approx(b.quotients[1].q_moment).epsilon(1e-12));
  }

  TEST_CASE("quantized tail expectation") {
    const ModeSpace modes = ModeSpace::unit(1);
    const PhasePoint f{cplx(0.6, 0.8)};
    const auto fam = StateFamily::coherent(modes, f, {0.05});
    for (const auto& row : quantized_tail_expectation(fam, 16.0, 1)) {
      CHECK(row.value <= 0.01);
      CHECK(row.value >= -0.01);
    }
    for (const auto& row : quantized_tail_expectation(fam, 0.01, 1)) CHECK(row.value == doctest::Approx(1.0).epsilon(0.01));
  }
}
