// Randomized checks of the structural invariants across modules.
#include "support.hpp"
#include "wigner/dynamics.hpp"

using namespace wigner;

namespace {

FockVector random_state(std::mt19937_64& rng, const FockSpacePtr& s, double h, int max_total) {
  std::normal_distribution<double> g;
  FockVector v{s, h, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(s->dim()))};
  const auto n = testing::low_columns(*s, max_total);
  for (Eigen::Index i = 0; i < n; ++i) v.coeffs[i] = cplx(g(rng), g(rng));
  v.coeffs.normalize();
  return v;
}

ModeSpace random_modes(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.3, 2.0);
  std::vector<double> m, w;
  for (std::size_t j = 0; j < n; ++j) {
    m.push_back(u(rng));
    w.push_back(u(rng));
  }
  return ModeSpace(m, w);
}

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("symplectic form is antisymmetric and the flow is a q-isometry") {
    std::mt19937_64 rng(100);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 1 + static_cast<std::size_t>(trial % 3);
      const ModeSpace modes = random_modes(rng, n);
      const auto x = testing::random_point(rng, n), y = testing::random_point(rng, n);
      CHECK(symplectic_form(x, y) == doctest::Approx(-symplectic_form(y, x)));
      const double t = 0.37 * trial;
      CHECK(quadratic_q(modes, classical_flow(modes, t, x)) == doctest::Approx(quadratic_q(modes, x)).epsilon(1e-13));
    }
  }

  TEST_CASE("canonical commutation on random inputs") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 12; ++trial) {
      const std::size_t n = 1 + static_cast<std::size_t>(trial % 3);
      const auto s = FockSpace::make(random_modes(rng, n), 7);
      const double h = trial % 2 ? 0.5 : 0.05;
      const auto f = testing::random_point(rng, n), g = testing::random_point(rng, n);
      const auto a = ladder_operators(s, f, h).first.matrix();
      const auto ad = ladder_operators(s, g, h).second.matrix();
      Eigen::MatrixXcd c = a * ad - ad * a;
      c -= h * inner(f, g) * Eigen::MatrixXcd::Identity(c.rows(), c.cols());
      CHECK(c.leftCols(testing::low_columns(*s, 6)).norm() < 1e-12);
      const auto [ma, mad] = m_ladder(s, f, h);
      CHECK((mad.matrix() - ma.matrix().adjoint()).norm() == 0.0);
    }
  }

  TEST_CASE("weyl operators are unitary on the certified subspace") {
    std::mt19937_64 rng(102);
    for (int trial = 0; trial < 6; ++trial) {
      const std::size_t n = 1 + static_cast<std::size_t>(trial % 2);
      const ModeSpace modes = ModeSpace::unit(n);
      const auto xi = testing::unit_ball_point(rng, n);
      const auto s = FockSpace::make(modes, weyl_auto_cutoff(modes, {xi}, 0.1));
      const auto w = weyl_operator(s, xi, 0.1);
      const Eigen::Index low = testing::low_columns(*s, w.exact_total());
      const Eigen::MatrixXcd d = w.matrix().adjoint() * w.matrix() - Eigen::MatrixXcd::Identity(w.dim(), w.dim());
      CHECK(d.leftCols(low).norm() <= 10.0 * w.leak() + 1e-12);
    }
  }

  TEST_CASE("random real symbols quantize to Hermitian operators") {
    std::mt19937_64 rng(103);
    std::uniform_int_distribution<int> deg(0, 2);
    std::normal_distribution<double> g;
    const auto s = FockSpace::make(ModeSpace::unit(2), 6);
    for (int trial = 0; trial < 10; ++trial) {
      PolynomialSymbol p(2);
      for (int term = 0; term < 3; ++term) {
        std::vector<int> a{deg(rng), deg(rng)}, b{deg(rng), deg(rng)};
        if (a[0] + a[1] + b[0] + b[1] > 4) continue;
        const cplx c(g(rng), g(rng));
        p.add(a, b, c);
        p.add(b, a, std::conj(c));
      }
      REQUIRE(p.is_real());
      CHECK(quantize_polynomial(s, p, Ordering::weyl, 0.2).is_hermitian(0.0));
      CHECK(quantize_polynomial(s, p, Ordering::wick, 0.2).is_hermitian(0.0));
    }
  }

  TEST_CASE("generating functionals are bounded and conjugate symmetric") {
    std::mt19937_64 rng(104);
    const ModeSpace modes = ModeSpace::unit(2);
    const auto s = FockSpace::make(modes, 8);
    for (int trial = 0; trial < 8; ++trial) {
      const FockVector psi = random_state(rng, s, 0.1, 3);
      const auto xi = testing::unit_ball_point(rng, 2, 2.0);
      const GFValue a = generating_functional(psi, xi, modes);
      const GFValue b = generating_functional(psi, -1.0 * xi, modes);
      CHECK(std::abs(a.value) <= 1.0 + a.leak + 1e-12);
      CHECK(std::abs(a.value - std::conj(b.value)) <= a.leak + b.leak + 1e-12);
    }
  }

  TEST_CASE("coherent truncation keeps the norm within the leak") {
    std::mt19937_64 rng(105);
    for (int trial = 0; trial < 10; ++trial) {
      const auto f = testing::random_point(rng, 2);
      const double h = 0.02 + 0.05 * trial;
      const ProductState p = ProductState::coherent(f, h);
      CHECK(p.norm2() <= 1.0 + 1e-14);
      CHECK(p.norm2() >= 1.0 - p.leak - 1e-14);
    }
  }

  TEST_CASE("husimi measures are nonnegative with bounded mass") {
    std::mt19937_64 rng(106);
    const ModeSpace modes = ModeSpace::unit(2);
    const auto s = FockSpace::make(modes, 6);
    for (int trial = 0; trial < 4; ++trial) {
      const FockVector psi = random_state(rng, s, 0.2, 4);
      const auto hus = husimi_measure(psi, 2, GridSpec::uniform(2, 3.0, 26), modes, ExecPolicy::serial, 1.0);
      for (double d : hus.measure.density()) CHECK(d >= 0.0);
      CHECK(hus.measure.total_mass() <= 1.0 + 1e-3);
      CHECK(hus.mass_deficit == doctest::Approx(1.0 - hus.measure.total_mass()).epsilon(1e-12));
    }
  }

  TEST_CASE("measure operations conserve mass and tails decrease") {
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      const GridSpec grid = GridSpec::uniform(2, 1.5, 6);
      std::vector<double> dens(grid.cells());
      for (double& d : dens) d = u(rng);
      const FiniteMeasure mu({1.0, 0.5}, {{testing::random_point(rng, 2), 0.3}}, grid, dens);
      CHECK(marginal(mu, 1).total_mass() == doctest::Approx(mu.total_mass()).epsilon(1e-12));
      const std::vector<double> angles{u(rng) * 6.0, u(rng) * 6.0};
      CHECK(pushforward(mu, angles).total_mass() == doctest::Approx(mu.total_mass()).epsilon(1e-12));
      double prev = tail_mass(mu, 0.0);
      for (double r : {0.2, 0.5, 1.0, 2.0, 4.0}) {
        const double t = tail_mass(mu, r);
        CHECK(t <= prev);
        prev = t;
      }
      const double delta = 0.5;
      CHECK(holder_modulus(mu, delta, random_pairs(2, 50, 9)) <=
            std::pow(2.0, 1.0 - delta) * (mu.total_mass() + q_moment(mu, delta)));
      CHECK(std::abs(fourier_transform(mu, PhasePoint(2)) - mu.total_mass()) < 1e-12);
    }
  }

  TEST_CASE("free evolution composes and preserves moments") {
    std::mt19937_64 rng(108);
    const ModeSpace modes = random_modes(rng, 2);
    const auto s = FockSpace::make(modes, 6);
    for (int trial = 0; trial < 5; ++trial) {
      const FockVector psi = random_state(rng, s, 0.1, 6);
      const double t1 = 0.3 * trial, t2 = 1.1 - 0.2 * trial;
      const auto a = evolve_quantum(evolve_quantum(psi, modes, t1), modes, t2);
      CHECK((a.coeffs - evolve_quantum(psi, modes, t1 + t2).coeffs).norm() < 1e-13);
      const auto op = MomentOperator::m_number(modes, 2);
      CHECK(std::abs(moment(a, op, 0.7) - moment(psi, op, 0.7)) < 1e-12);
    }
  }
}
