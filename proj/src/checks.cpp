#include "linksaddle/checks.hpp"

#include "linksaddle/solver.hpp"
#include "linksaddle/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace linksaddle {

namespace {

ScalarField random_field(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ScalarField f(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = normal(rng);
    return f;
}

StatePair random_state(std::mt19937_64& rng, std::size_t n) {
    ScalarField u = random_field(rng, n);
    ScalarField v = random_field(rng, n);
    return {std::move(u), std::move(v)};
}

CheckRow at_most(std::string suite, std::string name, double measured, double bound) {
    return {std::move(suite), std::move(name), measured, bound, measured <= bound, true};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

double rel_state(const Discretization& disc, const StatePair& a, const StatePair& b) {
    return x_norm(disc, a - b) / std::max(1.0, x_norm(disc, b));
}

}  // namespace

std::vector<CheckRow> grid_suite(const Problem& prob, const CheckOptions& opt) {
    const auto& disc = prob.discretization();
    const std::size_t n = disc.size();
    std::mt19937_64 rng(opt.seed ^ 0x67726964ULL);
    const auto eig = principal_eigenpair(disc);
    double sym = 0.0;
    double coercive = 0.0;
    double roundtrip = 0.0;
    for (std::size_t i = 0; i < opt.samples; ++i) {
        const ScalarField u = random_field(rng, n);
        const ScalarField v = random_field(rng, n);
        const double uv = disc.dirichlet_product(u, v);
        sym = std::max(sym, std::abs(uv - disc.dirichlet_product(v, u)) / (1.0 + std::abs(uv)));
        const double gap = disc.dirichlet_product(u, u) - eig.value * disc.quadrature(u.cwiseAbs2());
        coercive = std::max(coercive, -gap);
        const ScalarField w = disc.poisson_solve(u);
        roundtrip = std::max(roundtrip, (disc.stiffness().apply(w) - u).norm() / u.norm());
    }
    const ScalarField kphi = disc.stiffness().apply(eig.vector);
    const double eig_res =
        (kphi - eig.value * disc.grid().cell_volume() * eig.vector).norm() / kphi.norm();
    return {
        at_most("grid", "symmetry", sym, 1e-12),
        at_most("grid", "coercivity_deficit", coercive, 1e-9),
        at_most("grid", "poisson_roundtrip", roundtrip, 1e-9),
        at_most("grid", "eigen_residual", eig_res, 1e-10),
        at_most("grid", "eigen_normalization", std::abs(disc.dirichlet_product(eig.vector, eig.vector) - 1.0), 1e-10),
    };
}

std::vector<CheckRow> splitting_suite(const Problem& prob, const CheckOptions& opt) {
    const auto& disc = prob.discretization();
    const std::size_t n = disc.size();
    DiagonalSplitting split(prob.disc);
    const std::size_t kcount = opt.basis_size == 0 ? default_truncation(disc) : opt.basis_size;
    const SigmaBasis basis = build_sigma_basis(split, kcount);
    std::mt19937_64 rng(opt.seed ^ 0x73706c74ULL);

    double sum_id = 0.0, idem = 0.0, orth = 0.0, pyth = 0.0, cross = 0.0, remark1 = 0.0, remark2 = 0.0;
    for (std::size_t i = 0; i < opt.samples; ++i) {
        const StatePair x = random_state(rng, n);
        const StatePair y = random_state(rng, n);
        const StatePair px = split.project_P(x);
        const StatePair qx = split.project_Q(x);
        sum_id = std::max(sum_id, rel_state(disc, px + qx, x));
        idem = std::max(idem, std::max(rel_state(disc, split.project_P(px), px),
                                       rel_state(disc, split.project_Q(qx), qx)));
        const double nx = split.norm(x);
        orth = std::max(orth, std::abs(split.product(px, split.project_Q(y))) /
                                  std::max(1.0, nx * split.norm(y)));
        const double np = split.norm(px);
        const double nq = split.norm(qx);
        pyth = std::max(pyth, rel(nx * nx, np * np + nq * nq));
        cross = std::max(cross, rel(disc.dirichlet_product(x.u, x.v), 0.5 * nq * nq - 0.5 * np * np));
        remark1 = std::max(remark1, sigma_norm(split, basis, px) - np);
        const TauArms arms = tau_arms(split, basis, x);
        const double tau = arms.value();
        remark2 = std::max(remark2, std::max(nq - tau, arms.sigma_part - tau));
    }
    double gram = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j) {
        for (std::size_t k = 0; k < basis.size(); ++k) {
            gram = std::max(gram, std::abs(split.product(basis[j], basis[k]) - (j == k ? 1.0 : 0.0)));
        }
    }
    return {
        at_most("splitting", "P_plus_Q_identity", sum_id, 1e-10),
        at_most("splitting", "idempotence", idem, 1e-10),
        at_most("splitting", "orthogonality", orth, 1e-10),
        at_most("splitting", "pythagoras", pyth, 1e-10),
        at_most("splitting", "cross_term_identity", cross, 1e-10),
        at_most("splitting", "basis_gram", gram, 1e-10),
        at_most("splitting", "sigma_below_norm", remark1, 0.0),
        at_most("splitting", "tau_dominates_arms", remark2, 0.0),
    };
}

std::vector<CheckRow> functional_suite(const Problem& prob, const CheckOptions& opt) {
    const auto& disc = prob.discretization();
    const std::size_t n = disc.size();
    std::mt19937_64 rng(opt.seed ^ 0x66756e63ULL);
    double riesz = 0.0;
    double fd = 0.0;
    double swap = 0.0;
    double el = 0.0;
    const std::size_t count = std::max<std::size_t>(1, opt.samples / 10);
    for (std::size_t i = 0; i < count; ++i) {
        const StatePair x = random_state(rng, n);
        const StatePair w = random_state(rng, n);
        const StatePair g = riesz_gradient(prob, x);
        const double dd = directional_derivative(prob, x, w);
        riesz = std::max(riesz, rel(x_product(disc, g, w), dd));
        const double eps = 1e-4;
        const double quotient = (energy(prob, x + eps * w) - energy(prob, x - eps * w)) / (2.0 * eps);
        fd = std::max(fd, std::abs(quotient - dd) / std::max(1.0, std::abs(dd)));
        if (prob.spec.swap_symmetric()) {
            const StatePair gs = riesz_gradient(prob, x.swapped());
            swap = std::max(swap, std::abs(energy(prob, x) - energy(prob, x.swapped())) +
                                      x_norm(disc, g - gs.swapped()));
        }
        const double gn = x_norm(disc, g);
        const double rn = residual_dual_norm(prob, euler_lagrange_residual(prob, x));
        el = std::max(el, std::abs(gn - rn) / std::max(1.0, gn));
    }
    std::vector<CheckRow> rows{
        at_most("functional", "riesz_identity", riesz, 1e-8),
        at_most("functional", "central_difference", fd, 1e-6),
        at_most("functional", "gradient_vs_residual", el, 1e-9),
    };
    if (prob.spec.swap_symmetric()) rows.push_back(at_most("functional", "swap_equivariance", swap, 0.0));
    return rows;
}

std::vector<CheckRow> hypothesis_suite(const ProblemSpec& spec) {
    std::vector<CheckRow> rows;
    for (const auto* nl : {&spec.f, &spec.g}) {
        const std::string prefix = nl == &spec.f ? "f_" : "g_";
        const HypothesisReport h = validate_hypotheses(*nl, std::max(100.0, 10.0 * nl->threshold), 4001);
        auto row = [&](const char* name, bool ok) {
            return CheckRow{"hypotheses", prefix + name, ok ? 1.0 : 0.0, 1.0, ok, false};
        };
        rows.push_back(row("growth", h.growth));
        rows.push_back(row("small_t", h.small_t));
        rows.push_back(row("superquadratic", h.superquadratic));
    }
    return rows;
}

std::vector<CheckRow> run_invariant_suites(const Problem& prob, const CheckOptions& opt) {
    std::vector<CheckRow> rows = grid_suite(prob, opt);
    for (auto&& part : {splitting_suite(prob, opt), functional_suite(prob, opt), hypothesis_suite(prob.spec)}) {
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

bool all_gating_pass(const std::vector<CheckRow>& rows) {
    return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return !r.gating || r.pass; });
}

}  // namespace linksaddle
