#include <boost/math/special_functions/binomial.hpp>

#include "support.hpp"
#include "wigner/fock.hpp"
#include "wigner/states.hpp"

using namespace wigner;

namespace {

std::vector<int> occ(const FockSpace& s, std::size_t i) {
  const auto o = s.occupation(i);
  return {o.begin(), o.end()};
}

}  // namespace

TEST_SUITE("fock") {
  TEST_CASE("basis enumeration is graded lexicographic") {
    const auto s = FockSpace::make(ModeSpace::unit(2), 2);
    REQUIRE(s->dim() == 6);
    const std::vector<std::vector<int>> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(occ(*s, i) == expected[i]);
      CHECK(s->index_of(expected[i]) == i);
    }
    for (int m = 1; m <= 4; ++m) {
      for (int n = 0; n <= 6; ++n) {
        const double c = boost::math::binomial_coefficient<double>(static_cast<unsigned>(n + m), static_cast<unsigned>(m));
        CHECK(FockSpace::dimension_for(static_cast<std::size_t>(m), n) == static_cast<std::size_t>(c));
      }
    }
    CHECK_THROWS_AS(FockSpace::make(ModeSpace::unit(6), 40, 1000), ResourceError);
  }

  TEST_CASE("ladder operator examples") {
    const auto s = FockSpace::make(ModeSpace::unit(1), 6);
    const auto [a, ad] = ladder_operators(s, PhasePoint{1.0}, 0.25);
    const FockVector one = FockVector::basis(s, 0.25, std::vector<int>{1});
    const Eigen::VectorXcd out = a.apply(one.coeffs);
    CHECK(std::abs(out[0] - cplx(0.5)) < 1e-15);
    CHECK(out.tail(out.size() - 1).norm() < 1e-15);
    const FockVector vac = FockVector::vacuum(s, 0.25);
    const Eigen::MatrixXcd comm = a.matrix() * ad.matrix() - ad.matrix() * a.matrix();
    CHECK(std::abs(vac.coeffs.dot(comm * vac.coeffs) - cplx(0.25)) < 1e-15);
    CHECK(a.apply(vac.coeffs).norm() == 0.0);
    CHECK(ad.degree() == 1);
    CHECK((ad.matrix() - a.matrix().adjoint()).norm() == 0.0);
  }

  TEST_CASE("annihilator is antilinear in its argument") {
    const auto s = FockSpace::make(ModeSpace::unit(2), 5);
    const PhasePoint f{cplx(0.3, 0.7), cplx(-1.1, 0.2)};
    const cplx c(0.4, -1.3);
    const auto a1 = ladder_operators(s, c * f, 0.1).first.matrix();
    const auto a2 = ladder_operators(s, f, 0.1).first.matrix();
    CHECK((a1 - std::conj(c) * a2).norm() < 1e-13);
  }

  TEST_CASE("commutation relation on the exact subspace") {
    std::mt19937_64 rng(3);
    for (std::size_t n : {1u, 2u, 3u}) {
      const auto s = FockSpace::make(ModeSpace::unit(n), 8);
      for (double h : {0.5, 0.1}) {
        const auto f = testing::random_point(rng, n), g = testing::random_point(rng, n);
        const auto af = ladder_operators(s, f, h).first.matrix();
        const auto adg = ladder_operators(s, g, h).second.matrix();
        Eigen::MatrixXcd c = af * adg - adg * af;
        c -= h * inner(f, g) * Eigen::MatrixXcd::Identity(c.rows(), c.cols());
        CHECK(c.leftCols(testing::low_columns(*s, 6)).norm() < 1e-12);
      }
    }
  }

  TEST_CASE("field operator") {
    std::mt19937_64 rng(5);
    const auto s = FockSpace::make(ModeSpace::unit(2), 8);
    const double h = 0.3;
    const auto xi = testing::random_point(rng, 2);
    const FockOperator phi = field_operator(s, xi, h);
    CHECK(phi.is_hermitian());
    const FockVector vac = FockVector::vacuum(s, h);
    CHECK(std::abs(phi.expectation(vac)) < 1e-15);
    const Eigen::VectorXcd pv = phi.apply(vac.coeffs);
    CHECK(pv.squaredNorm() == doctest::Approx(h * xi.norm2()).epsilon(1e-13));
    const auto ad = ladder_operators(s, xi, h).second.matrix();
    const Eigen::MatrixXcd rebuilt = 0.5 * (phi.matrix() - kI * field_operator(s, kI * xi, h).matrix());
    CHECK((ad - rebuilt).norm() <= 1e-13);
  }

  TEST_CASE("second quantization") {
    const auto s = FockSpace::make(ModeSpace::unit(2), 4);
    const std::vector<int> n21{2, 1};
    const FockVector v = FockVector::basis(s, 0.1, n21);
    const std::vector<double> ones{1.0, 1.0}, w13{1.0, 3.0}, zeros{0.0, 0.0};
    CHECK(dgamma(s, ones, 0.1).expectation(v).real() == doctest::Approx(0.3));
    CHECK(dgamma(s, w13, 0.1).expectation(v).real() == doctest::Approx(0.5));
    CHECK(dgamma(s, zeros, 0.1).matrix().norm() == 0.0);
    CHECK(dgamma(s, ones, 0.1).degree() == 0);
    CHECK_THROWS_AS(dgamma(s, std::vector<double>{1.0}, 0.1), DimensionError);
  }

  TEST_CASE("m ladder and m number") {
    const ModeSpace unit = ModeSpace::unit(2);
    const auto su = FockSpace::make(unit, 5);
    const PhasePoint x{cplx(0.2, 0.1), cplx(-0.4, 0.9)};
    CHECK((m_ladder(su, x, 0.2).first.matrix() - ladder_operators(su, x, 0.2).first.matrix()).norm() == 0.0);

    const auto s2 = FockSpace::make(ModeSpace({2.0}, {1.0}), 5);
    const auto [ma, mad] = m_ladder(s2, PhasePoint{1.0}, 0.1);
    const Eigen::MatrixXcd comm = ma.matrix() * mad.matrix() - mad.matrix() * ma.matrix();
    CHECK(comm(0, 0).real() == doctest::Approx(0.4));
    CHECK(ma.apply(FockVector::vacuum(s2, 0.1).coeffs).norm() == 0.0);

    const ModeSpace m({1.0, std::sqrt(3.0)}, {1.0, 1.0});
    const auto s = FockSpace::make(m, 4);
    const FockVector v11 = FockVector::basis(s, 0.1, std::vector<int>{1, 1});
    CHECK(m_number(s, 2, 0.1).expectation(v11).real() == doctest::Approx(0.4));
    const auto m2 = m.m_squared();
    CHECK((m_number(s, 2, 0.1).matrix() - dgamma(s, m2, 0.1).matrix()).norm() <= 1e-12);
    CHECK(m_number(s, 0, 0.1).matrix().norm() == 0.0);
    CHECK_THROWS(m_number(s, 3, 0.1));
  }

  TEST_CASE("fractional moments") {
    const auto s = FockSpace::make(ModeSpace::unit(1), 6);
    const FockVector two = FockVector::basis(s, 0.5, std::vector<int>{2});
    const FockOperator N = dgamma(s, std::vector<double>{1.0}, 0.5);
    CHECK(fractional_moment(two, N, 0.5) == doctest::Approx(1.0));

    std::mt19937_64 rng(9);
    const auto s2 = FockSpace::make(ModeSpace::unit(2), 5);
    FockVector psi{s2, 0.2, Eigen::VectorXcd::Random(static_cast<Eigen::Index>(s2->dim()))};
    psi.coeffs.normalize();
    const FockOperator dense = m_number(s2, 2, 0.2);
    CHECK(fractional_moment(psi, dense, 1.0) == doctest::Approx(dense.expectation(psi).real()).epsilon(1e-12));

    const PhasePoint f{cplx(0.5, 0.3)};
    const double h = 0.05;
    const auto big = FockSpace::make(ModeSpace::unit(1), auto_cutoff(f, h));
    const FockVector coh = coherent_state(big, f, h);
    CHECK(fractional_moment(coh, dgamma(big, std::vector<double>{1.0}, h), 1.0) ==
          doctest::Approx(f.norm2()).epsilon(1e-9));

    const FockOperator nonherm(s, 0.5, ladder_operators(s, PhasePoint{1.0}, 0.5).first.matrix(), 1);
    CHECK_THROWS_AS(fractional_moment(two, nonherm, 1.0), NumericalError);
    const FockOperator neg = -1.0 * N;
    CHECK_THROWS_AS(fractional_moment(two, neg, 0.5), NumericalError);
  }

  TEST_CASE("poisson tails and cutoff selection") {
    // Direct summation oracle.
    const double lambda = 7.5;
    double cdf = 0.0, term = std::exp(-lambda);
    for (int n = 0; n <= 20; ++n) {
      cdf += term;
      term *= lambda / (n + 1);
      if (n == 5 || n == 12 || n == 20) CHECK(poisson_tail(lambda, n) == doctest::Approx(1.0 - cdf).epsilon(1e-9));
    }
    const int n = poisson_cutoff(40.0, 1e-10);
    CHECK(poisson_tail(40.0, n) < 1e-10);
    CHECK(poisson_tail(40.0, n - 1) >= 1e-10);
    CHECK(poisson_cutoff(0.0, 1e-10) == 0);
  }

  TEST_CASE("degree bookkeeping") {
    const auto s = FockSpace::make(ModeSpace::unit(1), 6);
    const auto [a, ad] = ladder_operators(s, PhasePoint{1.0}, 0.5);
    CHECK((ad * a).degree() == 1);
    CHECK((a * ad).degree() == 1);
    CHECK((ad * ad * a).degree() == 2);
    CHECK((a + ad).degree() == 1);
    CHECK((ad * a).exact_total() == 5);
    CHECK_NOTHROW(check_h(0.5));
    CHECK_THROWS_AS(check_h(0.0), DomainError);
  }
}
