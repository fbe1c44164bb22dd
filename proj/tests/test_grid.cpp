#include "linksaddle/grid.hpp"
#include "linksaddle/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace linksaddle;

namespace {

ScalarField random_field(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    ScalarField f(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = g(rng);
    return f;
}

}  // namespace

TEST_CASE("stiffness on the single-node interval is [4]") {
    Discretization d(DomainSpec::unit_interval(1));
    CHECK(d.stiffness().matrix().rows() == 1);
    CHECK(d.stiffness().matrix().coeff(0, 0) == doctest::Approx(4.0).epsilon(1e-15));
    ScalarField one = ScalarField::Ones(1);
    CHECK(d.dirichlet_product(one, one) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(d.dirichlet_product(one, ScalarField::Zero(1)) == 0.0);
    CHECK(d.poisson_solve(ScalarField::Constant(1, 4.0))[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.quadrature(one) == doctest::Approx(0.5));
}

TEST_CASE("single-node square: edge sums and quadrature") {
    Discretization d(DomainSpec::unit_square(1));
    const double a = 1.7;
    ScalarField u = ScalarField::Constant(1, a);
    CHECK(d.dirichlet_product(u, u) == doctest::Approx(4 * a * a).epsilon(1e-14));
    CHECK(d.quadrature(ScalarField::Ones(1)) == doctest::Approx(0.25));
}

TEST_CASE("stiffness annihilates nothing but zero and is symmetric") {
    Discretization d(DomainSpec::unit_square(8));
    CHECK(d.stiffness().apply(d.grid().zeros()).norm() == 0.0);
    Eigen::SparseMatrix<double> k = d.stiffness().matrix();
    Eigen::SparseMatrix<double> kt = k.transpose();
    CHECK((k - kt).norm() == 0.0);
}

TEST_CASE("first eigenvalue matches the closed form on n = 3") {
    Discretization d(DomainSpec::unit_interval(3));
    const auto e = principal_eigenpair(d);
    CHECK(e.value == doctest::Approx(32.0 - 16.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(d.dirichlet_product(e.vector, e.vector) == doctest::Approx(1.0).epsilon(1e-10));
    // sine shape, positive at the peak
    const double s1 = std::sin(M_PI / 4), s2 = std::sin(M_PI / 2);
    CHECK(e.vector[0] / e.vector[1] == doctest::Approx(s1 / s2).epsilon(1e-10));
    CHECK(e.vector[1] > 0.0);

    // ⟨u,Ku⟩ = λ₁‖u‖²_{L²} for the L²-normalised eigenvector
    ScalarField u = e.vector / std::sqrt(d.quadrature(e.vector.cwiseAbs2()));
    CHECK(d.dirichlet_product(u, u) == doctest::Approx(e.value).epsilon(1e-12));
}

TEST_CASE("first eigenvalue approaches pi^2") {
    Discretization d(DomainSpec::unit_interval(255));
    const auto e = principal_eigenpair(d);
    CHECK(std::abs(e.value - M_PI * M_PI) / (M_PI * M_PI) < 1e-3);
}

TEST_CASE("lowest eigenpairs follow the finite-difference spectrum") {
    Discretization d(DomainSpec::unit_interval(15));
    const double h = 1.0 / 16;
    const auto pairs = lowest_eigenpairs(d, 5);
    REQUIRE(pairs.size() == 5);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double exact = (2.0 - 2.0 * std::cos((k + 1) * M_PI * h)) / (h * h);
        CHECK(pairs[k].value == doctest::Approx(exact).epsilon(1e-10));
    }
}

TEST_CASE("poisson solve inverts the stiffness") {
    std::mt19937_64 rng(7);
    for (const auto& spec : {DomainSpec::unit_interval(31), DomainSpec::unit_square(16)}) {
        Discretization d(spec);
        ScalarField rhs = random_field(d.size(), rng);
        ScalarField w = d.poisson_solve(rhs);
        CHECK((d.stiffness().apply(w) - rhs).norm() <= 1e-10 * rhs.norm());
        CHECK(d.poisson_solve(d.grid().zeros()).norm() == 0.0);
    }
}

TEST_CASE("dirichlet product is exactly symmetric") {
    std::mt19937_64 rng(3);
    Discretization d(DomainSpec::unit_square(12));
    for (int t = 0; t < 20; ++t) {
        ScalarField a = random_field(d.size(), rng), b = random_field(d.size(), rng);
        CHECK(d.dirichlet_product(a, b) == d.dirichlet_product(b, a));
    }
}

TEST_CASE("invalid domains are rejected") {
    CHECK_THROWS_AS(Discretization(DomainSpec{1, 1.0, 1.0, 0, 1}), Error);
    CHECK_THROWS_AS(Discretization(DomainSpec{2, -1.0, 1.0, 4, 4}), Error);
    Discretization d(DomainSpec::unit_interval(4));
    CHECK_THROWS_AS(d.poisson_solve(ScalarField::Zero(3)), Error);
}
