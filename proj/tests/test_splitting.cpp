#include "linksaddle/error.hpp"
#include "linksaddle/splitting.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace linksaddle;

namespace {

StatePair pair1(double u, double v) {
    return {ScalarField::Constant(1, u), ScalarField::Constant(1, v)};
}

StatePair random_state(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    StatePair s = StatePair::zeros(n);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
        s.u[i] = g(rng);
        s.v[i] = g(rng);
    }
    return s;
}

}  // namespace

TEST_CASE("projections of diagonal and antidiagonal elements") {
    DiagonalSplitting sp(build_grid(DomainSpec::unit_interval(1)));
    CHECK(sp.project_P(pair1(1, 1)) == pair1(0, 0));
    CHECK(sp.project_Q(pair1(1, 1)) == pair1(1, 1));
    CHECK(sp.project_P(pair1(1, -1)) == pair1(1, -1));
    CHECK(sp.project_Q(pair1(1, -1)) == pair1(0, 0));
    const StatePair x = pair1(1, 0);
    CHECK(sp.project_P(x) == pair1(0.5, -0.5));
    CHECK(sp.project_Q(x) == pair1(0.5, 0.5));
    CHECK(std::pow(sp.norm(sp.project_P(x)), 2) == doctest::Approx(2.0));
    CHECK(std::pow(sp.norm(sp.project_Q(x)), 2) == doctest::Approx(2.0));
    CHECK(std::pow(sp.norm(x), 2) == doctest::Approx(4.0));
}

TEST_CASE("splitting identities on random states") {
    std::mt19937_64 rng(17);
    DiagonalSplitting sp(build_grid(DomainSpec::unit_square(8)));
    const auto& d = sp.discretization();
    for (int t = 0; t < 20; ++t) {
        const StatePair x = random_state(d.size(), rng), y = random_state(d.size(), rng);
        const StatePair px = sp.project_P(x), qx = sp.project_Q(x);
        const double n2 = x_product(d, x, x);
        CHECK((px + qx - x).u.norm() <= 1e-15 * x.u.norm());
        CHECK((px + qx - x).v.norm() <= 1e-15 * x.v.norm());
        CHECK((sp.project_P(px) - px).u.norm() <= 1e-15 * px.u.norm());
        CHECK(std::abs(sp.product(px, sp.project_Q(y))) <= 1e-10 * sp.norm(x) * sp.norm(y));
        CHECK(std::abs(sp.norm(px) * sp.norm(px) + sp.norm(qx) * sp.norm(qx) - n2) <= 1e-10 * n2);
        const double cross = d.dirichlet_product(x.u, x.v);
        const double rewrite = 0.5 * sp.norm(qx) * sp.norm(qx) - 0.5 * sp.norm(px) * sp.norm(px);
        CHECK(std::abs(cross - rewrite) <= 1e-10 * n2);
        CHECK(sp.in_Y(px));
        CHECK(sp.in_Z(qx));
    }
}

TEST_CASE("sigma basis is orthonormal and lies in Y") {
    DiagonalSplitting sp(build_grid(DomainSpec::unit_interval(15)));
    const auto basis = build_sigma_basis(sp, default_truncation(sp.discretization()));
    REQUIRE(basis.size() == 15);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const StatePair pe = sp.project_P(basis[i]);
        CHECK((pe - basis[i]).u.cwiseAbs().maxCoeff() <= 1e-12);
        for (std::size_t j = 0; j < basis.size(); ++j) {
            CHECK(std::abs(sp.product(basis[i], basis[j]) - (i == j ? 1.0 : 0.0)) <= 1e-10);
        }
    }
    CHECK(default_truncation(*build_grid(DomainSpec::unit_square(16))) == 32);
}

TEST_CASE("first sigma basis element is sine shaped") {
    DiagonalSplitting sp(build_grid(DomainSpec::unit_interval(3)));
    const auto basis = build_sigma_basis(sp, 1);
    const ScalarField v = basis[0].v;
    CHECK((basis[0].u + v).norm() == 0.0);
    CHECK(v[0] / v[1] == doctest::Approx(std::sin(M_PI / 4)).epsilon(1e-10));
    CHECK(v[2] / v[1] == doctest::Approx(std::sin(3 * M_PI / 4)).epsilon(1e-10));
}

TEST_CASE("sigma and tau norm values") {
    DiagonalSplitting sp(build_grid(DomainSpec::unit_interval(7)));
    const auto basis = build_sigma_basis(sp, 7);
    CHECK(sigma_norm(sp, basis, basis[0]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sigma_norm(sp, basis, basis[1]) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(sigma_norm(sp, basis, StatePair::zeros(7)) == 0.0);

    // a unit element of Z
    StatePair z = sp.project_Q(StatePair{basis[0].v, basis[0].v});
    z *= 1.0 / sp.norm(z);
    CHECK(tau_norm(sp, basis, basis[0] + 0.4 * z) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(tau_norm(sp, basis, basis[0] + 0.6 * z) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(tau_norm(sp, basis, StatePair::zeros(7)) == 0.0);
    CHECK_THROWS_AS(sigma_norm(sp, basis, z), Error);
}

TEST_CASE("sigma and tau bounds hold on random states") {
    std::mt19937_64 rng(23);
    DiagonalSplitting sp(build_grid(DomainSpec::unit_square(8)));
    const auto basis = build_sigma_basis(sp, 32);
    for (int t = 0; t < 50; ++t) {
        const StatePair x = random_state(sp.discretization().size(), rng);
        const StatePair px = sp.project_P(x);
        const TauArms arms = tau_arms(sp, basis, x);
        CHECK(sigma_norm(sp, basis, px) <= sp.norm(px) * (1 + 1e-12));
        CHECK(sp.norm(sp.project_Q(x)) <= tau_norm(sp, basis, x));
        CHECK(sigma_norm(sp, basis, px) <= tau_norm(sp, basis, x));
        CHECK(arms.value() == tau_norm(sp, basis, x));
    }
}

TEST_CASE("tau convergence without norm convergence") {
    DiagonalSplitting sp(build_grid(DomainSpec::unit_square(8)));
    const auto basis = build_sigma_basis(sp, 32);
    double prev = 1.0;
    for (std::size_t n = 0; n < basis.size(); ++n) {
        const StatePair diff = 0.5 * basis[n];
        const double tau = tau_norm(sp, basis, diff);
        CHECK(sp.norm(diff) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(tau == doctest::Approx(std::ldexp(1.0, -static_cast<int>(n) - 2)).epsilon(1e-10));
        CHECK(tau < prev);
        prev = tau;
    }
    CHECK(prev < 1e-9);
}
