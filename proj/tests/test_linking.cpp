#include "linksaddle/error.hpp"
#include "linksaddle/linking.hpp"
#include "linksaddle/functional.hpp"

#include <doctest.h>

#include <cmath>

using namespace linksaddle;

namespace {

Problem toy() {
    ProblemSpec s;
    s.domain = DomainSpec::unit_interval(1);
    return make_problem(s);
}

Problem line15(bool zero = false) {
    ProblemSpec s;
    s.domain = DomainSpec::unit_interval(15);
    if (zero) s.f = s.g = NonlinearitySpec::zero();
    return make_problem(s);
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("toy frame: N is the pair of diagonal points") {
    const Problem p = toy();
    const auto frame = LinkingFrame::from_problem(p, 1.0, 2.0, 1);
    const auto sets = sample_sets(frame, {}, 1);
    CHECK(sets.z_one_dimensional);
    REQUIRE(sets.n_set.size() == 2);
    const double a = 1.0 / (2.0 * std::sqrt(2.0));
    for (const auto& s : sets.n_set) {
        CHECK(std::abs(s.u[0]) == doctest::Approx(a).epsilon(1e-15));
        CHECK(s.u[0] == s.v[0]);
    }
    CHECK(sets.n_set[0].u[0] == -sets.n_set[1].u[0]);
}

TEST_CASE("toy geometry: closed form infimum on N") {
    const Problem p = toy();
    const auto frame = LinkingFrame::from_problem(p, 1.0, 16.0, 1);
    const auto g = estimate_geometry(frame, p, {}, 1);
    CHECK(g.b_exact);
    CHECK(std::abs(g.b_est - 127.0 / 256.0) <= 4e-16);
    CHECK(g.base_max <= 0.0);
    CHECK(g.certified);
}

TEST_CASE("sample contracts on a larger frame") {
    const Problem p = line15();
    const auto frame = LinkingFrame::from_problem(p, 1.5, 6.0, 2);
    const auto sets = sample_sets(frame, {200, 200, 200}, 3);
    CHECK_FALSE(sets.z_one_dimensional);
    for (const auto& s : sets.n_set) {
        CHECK(std::abs(frame.splitting().norm(s) - 1.5) <= 1e-10);
        CHECK(frame.splitting().norm(frame.splitting().project_P(s)) <= 1e-10);
    }
    for (const auto& b : sets.boundary_base) CHECK(b.lambda0 == 0.0);
    for (const auto& b : sets.boundary_sphere) {
        CHECK(b.lambda0 >= 0.0);
        CHECK(frame.chart_norm(b) == doctest::Approx(6.0).epsilon(1e-12));
    }
    for (const auto& q : sets.interior) CHECK(frame.in_M(q));

    // chart coordinates are isometric
    const ChartPoint c{vec({0.3, -1.1}), 0.7};
    CHECK(frame.splitting().norm(frame.embed(c)) == doctest::Approx(frame.to_vector(c).norm()).epsilon(1e-12));
    const ChartPoint back = frame.chart(frame.embed(c));
    CHECK((back.y - c.y).norm() <= 1e-12);
    CHECK(back.lambda0 == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("pure quadratic geometry does not link") {
    const Problem p = line15(true);
    const double r = 1.5, rho = 3.0;
    const auto g = estimate_geometry(LinkingFrame::from_problem(p, r, rho, 1), p, {300, 300, 0}, 2);
    // J(u,u) = ⟨u,Ku⟩ = ‖(u,u)‖²/2 on N
    CHECK(g.b_est == doctest::Approx(0.5 * r * r).epsilon(1e-12));
    // the top of the sphere slice is ρz/r, where J = ρ²/2
    CHECK(g.a_est == doctest::Approx(0.5 * rho * rho).epsilon(1e-12));
    CHECK(g.base_max <= 0.0);
    CHECK_FALSE(g.certified);

    try {
        choose_radii(p, 1, 1);
        FAIL("expected a geometry failure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Geometry);
    }
}

TEST_CASE("automatic radii on the toy respect the closed form") {
    const Problem p = toy();
    const auto radii = choose_radii(p, 1, 1);
    CHECK(radii.r > 0.0);
    CHECK(radii.rho > radii.r);
    CHECK(radii.r * radii.r < 128.0);
    const auto g = estimate_geometry(LinkingFrame::from_problem(p, radii.r, radii.rho, 1), p, {}, 1);
    CHECK(g.certified);
}

TEST_CASE("homotopy endpoints") {
    const Problem p = line15();
    const auto frame = LinkingFrame::from_problem(p, 1.0, 4.0, 2);
    const auto id = identity_deformation(frame);
    const ChartPoint u{vec({0.4, -0.2}), 1.3};
    const auto h0 = homotopy_H(0.0, u, id, frame);
    CHECK((h0.y_part - frame.embed_y(u.y)).u.norm() == 0.0);
    CHECK(h0.z_coeff == doctest::Approx(u.lambda0 - 1.0).epsilon(1e-15));

    const ChartPoint z{vec({0.0, 0.0}), 1.0};
    const auto hz = homotopy_H(1.0, z, id, frame);
    CHECK(homotopy_norm(hz, frame) <= 1e-14);

    const auto sets = sample_sets(frame, {10, 100, 0}, 4);
    for (const auto& b : sets.boundary_sphere) {
        for (double t : {0.0, 0.5, 1.0}) CHECK(homotopy_norm(homotopy_H(t, b, id, frame), frame) > 1e-3);
    }
    for (const auto& b : sets.boundary_base) {
        CHECK(homotopy_norm(homotopy_H(0.7, b, id, frame), frame) > 1e-3);
    }
}

TEST_CASE("shipped deformations are certified") {
    const Problem p = line15();
    const auto frame = LinkingFrame::from_problem(p, 1.0, 4.0, 2);
    const auto sets = sample_sets(frame, {100, 1000, 1000}, 5);
    const auto all = shipped_deformations(frame);
    CHECK(all.size() >= 3);
    CHECK(all.front().name == "identity");
    for (const auto& g : all) {
        const auto c = certify_deformation(g, frame, sets);
        CHECK(c.boundary_max_displacement == 0.0);
        CHECK(c.boundary_ok);
        CHECK(c.displacement_ok);
        CHECK(g.chart_preserving);
    }
}

TEST_CASE("intersection points") {
    const Problem p = line15();
    const auto frame = LinkingFrame::from_problem(p, 1.0, 4.0, 1);
    const auto id = intersection_point(identity_deformation(frame), frame);
    CHECK(id.point.y.norm() == 0.0);
    CHECK(id.point.lambda0 == 1.0);
    CHECK(id.p_residual == 0.0);

    const auto shift = intersection_point(shift_deformation(frame, 0, 0.25), frame);
    CHECK(shift.p_residual <= 1e-8);
    CHECK(shift.norm_residual <= 1e-8);
    CHECK(shift.point.y.norm() > 0.0);
}

TEST_CASE("brouwer degrees of simple maps") {
    const Problem p = line15();
    for (std::size_t dy : {1u, 2u}) {
        const auto frame = LinkingFrame::from_problem(p, 1.0, 4.0, dy);
        Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dy + 1));
        z[static_cast<Eigen::Index>(dy)] = frame.r();

        const auto plus = brouwer_degree_small([&](const Eigen::VectorXd& q) { return Eigen::VectorXd(q - z); }, frame);
        CHECK(plus.degree == 1);
        REQUIRE(plus.roots.size() == 1);
        CHECK((plus.roots[0] - z).norm() <= 1e-8);

        const auto minus = brouwer_degree_small([&](const Eigen::VectorXd& q) { return Eigen::VectorXd(z - q); }, frame);
        const int expected = (dy + 1) % 2 == 0 ? 1 : -1;
        CHECK(minus.degree == expected);

        const auto id = identity_deformation(frame);
        const auto h1 = brouwer_degree_small(
            [&](const Eigen::VectorXd& q) { return homotopy_chart(1.0, q, id, frame); }, frame);
        CHECK(h1.degree == 1);
    }
}

TEST_CASE("degree of a reflection and of an empty map") {
    const Problem p = line15();
    const auto frame = LinkingFrame::from_problem(p, 1.0, 4.0, 1);
    const auto reflect = brouwer_degree_small(
        [&](const Eigen::VectorXd& q) { return vec({-q[0], q[1] - 1.0}); }, frame);
    CHECK(reflect.degree == -1);
    const auto none = brouwer_degree_small(
        [&](const Eigen::VectorXd& q) { return vec({q[0], q[1] + 1.0}); }, frame);
    CHECK(none.degree == 0);
    CHECK(none.roots.empty());
}

TEST_CASE("degree failures are reported") {
    const Problem p = line15();
    const auto frame = LinkingFrame::from_problem(p, 1.0, 4.0, 1);
    try {
        brouwer_degree_small([&](const Eigen::VectorXd& q) { return vec({q[0], q[1] - 4.0}); }, frame);
        FAIL("expected a boundary zero");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BoundaryZero);
    }
    try {
        brouwer_degree_small([&](const Eigen::VectorXd& q) { return vec({q[0] * q[0] * q[0], q[1] - 2.0}); }, frame);
        FAIL("expected a degenerate root");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateRoot);
    }
}

TEST_CASE("frame validation") {
    const Problem p = line15();
    CHECK_THROWS_AS(LinkingFrame::from_problem(p, 2.0, 1.0, 1), Error);
    CHECK_THROWS_AS(LinkingFrame::from_problem(p, 0.0, 1.0, 1), Error);
    CHECK_THROWS_AS(LinkingFrame::from_problem(p, 1.0, 2.0, 20), Error);
}
