// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "linksaddle/commands.hpp"
#include "linksaddle/config.hpp"
#include "linksaddle/linking.hpp"
#include "linksaddle/solver.hpp"
#include "linksaddle/splitting.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace linksaddle;
namespace fs = std::filesystem;

namespace {

int failures = 0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < budget_s;
    if (!pass) ++failures;
    std::printf("%s %-26s %s; runtime %.2fs (< %gs)\n", pass ? "PASS" : "FAIL", name.c_str(),
                o.detail.c_str(), secs, budget_s);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
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

Problem power_problem(const DomainSpec& d) {
    ProblemSpec s;
    s.domain = d;
    return make_problem(s);
}

double rel(double err, double scale) { return err / std::max(scale, 1e-300); }

Outcome splitting_identities() {
    std::mt19937_64 rng(20240101);
    double worst = 0.0;
    for (const auto& dom : {DomainSpec::unit_interval(15), DomainSpec::unit_interval(31),
                            DomainSpec::unit_square(16), DomainSpec::unit_square(32)}) {
        DiagonalSplitting sp(build_grid(dom));
        const auto& d = sp.discretization();
        for (int t = 0; t < 100; ++t) {
            const StatePair x = random_state(d.size(), rng), y = random_state(d.size(), rng);
            const StatePair px = sp.project_P(x), qx = sp.project_Q(x);
            const double nx2 = x_product(d, x, x);
            const double nx = std::sqrt(nx2), ny = sp.norm(y);
            const double pp = sp.norm(px), qq = sp.norm(qx);
            worst = std::max({worst, rel(sp.norm(px + qx - x), nx),
                              rel(sp.norm(sp.project_P(px) - px), nx),
                              rel(sp.norm(sp.project_Q(qx) - qx), nx),
                              rel(std::abs(sp.product(px, sp.project_Q(y))), nx * ny),
                              rel(std::abs(pp * pp + qq * qq - nx2), nx2),
                              rel(std::abs(d.dirichlet_product(x.u, x.v) - (0.5 * qq * qq - 0.5 * pp * pp)), nx2)});
        }
    }
    return {worst <= 1e-10, fmt("max relative defect %.3e (tol 1e-10)", worst)};
}

Outcome sigma_tau() {
    std::mt19937_64 rng(7);
    DiagonalSplitting sp(build_grid(DomainSpec::unit_square(16)));
    const auto basis = build_sigma_basis(sp, 32);
    bool ok = basis.size() == 32;
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const StatePair x = random_state(sp.discretization().size(), rng);
        const StatePair px = sp.project_P(x);
        const double tau = tau_norm(sp, basis, x);
        const double sig = sigma_norm(sp, basis, px);
        worst = std::max({worst, sig - sp.norm(px), sp.norm(sp.project_Q(x)) - tau, sig - tau});
    }
    ok = ok && worst <= 0.0;
    // x_n = x* + e_n/2: τ-distance 2^{-n-2} → 0 while the norm distance stays 1/2
    const StatePair xs = random_state(sp.discretization().size(), rng);
    double last_tau = 0.0, norm_dev = 0.0;
    for (std::size_t n = 0; n < basis.size(); ++n) {
        const StatePair xn = xs + 0.5 * basis[n];
        last_tau = tau_norm(sp, basis, xn - xs);
        norm_dev = std::max(norm_dev, std::abs(sp.norm(xn - xs) - 0.5));
        ok = ok && std::abs(last_tau - std::ldexp(1.0, -static_cast<int>(n) - 2)) <= 1e-12;
    }
    ok = ok && norm_dev <= 1e-12;
    std::ostringstream o;
    o << "max inequality excess " << fmt("%.3e", worst) << ", tau(x_31 - x*) = " << fmt("%.3e", last_tau)
      << ", | |x_n - x*| - 1/2 | <= " << fmt("%.1e", norm_dev);
    return {ok, o.str()};
}

Outcome gradient_order() {
    std::mt19937_64 rng(99);
    ProblemSpec s;
    s.domain = DomainSpec::unit_square(16);
    s.lambda = 1.0;
    s.delta = 2.0;
    const Problem p = make_problem(s);
    const std::size_t n = p.grid().size();
    double min_order = 1e9, worst_riesz = 0.0;
    for (int t = 0; t < 50; ++t) {
        const StatePair x = random_state(n, rng), d = random_state(n, rng);
        const double exact = directional_derivative(p, x, d);
        auto fd = [&](double e) { return (energy(p, x + e * d) - energy(p, x - e * d)) / (2 * e); };
        const double e1 = std::abs(fd(1e-2) - exact), e2 = std::abs(fd(5e-3) - exact);
        min_order = std::min(min_order, std::log2(e1 / e2));
        const StatePair g = riesz_gradient(p, x);
        worst_riesz = std::max(worst_riesz,
                               rel(std::abs(x_product(p.discretization(), g, d) - exact), std::max(1.0, std::abs(exact))));
    }
    std::ostringstream o;
    o << "min observed order " << fmt("%.4f", min_order) << " (>= 1.9), Riesz defect "
      << fmt("%.2e", worst_riesz) << " (tol 1e-8)";
    return {min_order >= 1.9 && worst_riesz <= 1e-8, o.str()};
}

Outcome toy_closed_form() {
    const Problem p = power_problem(DomainSpec::unit_interval(1));
    SolverConfig cfg;
    cfg.method = SolveMethod::Newton;
    cfg.init = InitPolicy::Explicit;
    cfg.initial_state = StatePair{ScalarField::Ones(1), ScalarField::Ones(1)};
    const auto rep = solve(p, cfg);
    const double s8 = 2.0 * std::sqrt(2.0);
    const double eu = std::max(std::abs(rep.state.u[0] - s8), std::abs(rep.state.v[0] - s8));
    const double ec = std::abs(rep.c_est - 16.0);
    const auto frame = LinkingFrame::from_problem(p, 1.0, 16.0, 1);
    const auto geo = estimate_geometry(frame, p, {}, 1);
    const double eb = std::abs(geo.b_est - 127.0 / 256.0);
    const bool flag = minimax_consistency(rep, geo);
    std::ostringstream o;
    o << "|u - 2sqrt2| = " << fmt("%.2e", eu) << ", |c - 16| = " << fmt("%.2e", ec)
      << " (tol 1e-10), |b - 127/256| = " << fmt("%.2e", eb) << " (1-D exact extremum, tol 4e-16), minimax "
      << (flag ? "true" : "false");
    return {rep.converged && eu <= 1e-10 && ec <= 1e-10 && geo.b_exact && eb <= 4e-16 && flag, o.str()};
}

double oracle_error(int n) {
    const Problem p = power_problem(DomainSpec::unit_interval(n));
    const auto rep = solve(p, SolverConfig{});
    if (!rep.converged || rep.state.u != rep.state.v) return std::nan("");
    const auto w = oracle::lane_emden_cubic(n);
    double err = 0.0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::abs(rep.state.u[i] - w[static_cast<std::size_t>(i)]));
    return err;
}

Outcome pde_oracle() {
    const double e127 = oracle_error(127), e255 = oracle_error(255);
    const double ratio = e127 / e255;
    std::ostringstream o;
    o << "max-node error n=127 " << fmt("%.3e", e127) << ", n=255 " << fmt("%.3e", e255) << ", ratio "
      << fmt("%.4f", ratio) << " (in [3.5, 4.5])";
    return {ratio >= 3.5 && ratio <= 4.5, o.str()};
}

Problem square32() { return power_problem(DomainSpec::unit_square(32)); }

Outcome geometry_certificate() {
    const Problem p = square32();
    const auto radii = choose_radii(p, 1, 1);
    const auto frame = LinkingFrame::from_problem(p, radii.r, radii.rho, 1);
    const auto g = estimate_geometry(frame, p, {}, 1);
    std::ostringstream o;
    o << "r = " << fmt("%.4f", radii.r) << ", rho = " << fmt("%.4f", radii.rho) << ", b_est = "
      << fmt("%.6g", g.b_est) << ", a_est = " << fmt("%.6g", g.a_est) << ", margin = " << fmt("%.6g", g.margin)
      << ", base max = " << fmt("%.6g", g.base_max);
    return {g.b_est > 0.0 && g.a_est <= 0.0 && g.margin > 0.0 && g.base_max <= 0.0, o.str()};
}

Outcome intersection_degree() {
    const Problem p = square32();
    bool ok = true;
    std::ostringstream o;
    for (std::size_t dy : {1u, 2u}) {
        const auto radii = choose_radii(p, dy, 1);
        const auto frame = LinkingFrame::from_problem(p, radii.r, radii.rho, dy);
        const auto geo = estimate_geometry(frame, p, {}, 1);
        const auto samples = sample_sets(frame, {}, 1);
        int nontrivial = 0;
        bool identity_ok = false;
        double worst_res = 0.0, worst_gap = 1e300;
        for (const auto& gamma : shipped_deformations(frame)) {
            const auto cert = certify_deformation(gamma, frame, samples);
            if (!cert.boundary_ok || !cert.displacement_ok) continue;
            const auto hit = intersection_point(gamma, frame);
            const int d0 = brouwer_degree_small(
                [&](const Eigen::VectorXd& q) { return homotopy_chart(0.0, q, gamma, frame); }, frame).degree;
            const int d1 = brouwer_degree_small(
                [&](const Eigen::VectorXd& q) { return homotopy_chart(1.0, q, gamma, frame); }, frame).degree;
            const double gap = energy(p, hit.image) - (geo.b_est - 1e-8);
            const bool good = hit.p_residual <= 1e-8 && hit.norm_residual <= 1e-8 && d0 == 1 && d1 == 1 && gap >= 0.0;
            worst_res = std::max({worst_res, hit.p_residual, hit.norm_residual});
            worst_gap = std::min(worst_gap, gap);
            if (!good) continue;
            if (gamma.name == "identity") identity_ok = true;
            else ++nontrivial;
        }
        ok = ok && identity_ok && nontrivial >= 2;
        o << "dim " << dy + 1 << ": id " << (identity_ok ? "ok" : "FAILED") << ", " << nontrivial
          << " nontrivial ok, max residual " << fmt("%.1e", worst_res) << ", min J - b " << fmt("%.3e", worst_gap + 1e-8)
          << (dy == 1 ? "; " : "");
    }
    return {ok, o.str()};
}

Outcome minimax_checker() {
    const Problem p = square32();
    const auto radii = choose_radii(p, 1, 1);
    const auto frame = LinkingFrame::from_problem(p, radii.r, radii.rho, 1);
    const auto geo = estimate_geometry(frame, p, {}, 1);
    const auto rep = solve(p, SolverConfig{});
    if (!rep.converged) return {false, "solver did not converge"};
    const double eps = 0.1 * rep.c_est;
    const auto gamma = flow_deformation(frame, rep.state);
    const auto w = minimax_witness(gamma, frame, p, rep.c_est, geo.a_est, eps, 1.0, {}, 1);
    std::ostringstream o;
    o << "c_est = " << fmt("%.6g", rep.c_est) << ", |J - c| = " << fmt("%.3e", std::abs(w.J - rep.c_est))
      << " (<= " << fmt("%.4g", 2 * eps) << "), dist = " << fmt("%.3e", w.distance) << " (<= 2), |J'| = "
      << fmt("%.3e", w.grad_norm) << " (< " << fmt("%.4g", 8 * eps) << ")";
    return {w.preconditions && w.found && w.conditions.all(), o.str()};
}

Outcome refinement() {
    std::vector<double> c;
    for (int n : {31, 63, 127, 255}) {
        const auto rep = solve(power_problem(DomainSpec::unit_interval(n)), SolverConfig{});
        if (!rep.converged) return {false, "solver did not converge at n = " + std::to_string(n)};
        c.push_back(rep.c_est);
    }
    const double r1 = (c[1] - c[0]) / (c[2] - c[1]), r2 = (c[2] - c[1]) / (c[3] - c[2]);
    std::ostringstream o;
    o << "ratios " << fmt("%.4f", r1) << ", " << fmt("%.4f", r2) << " (in [3, 5])";
    return {r1 >= 3 && r1 <= 5 && r2 >= 3 && r2 <= 5, o.str()};
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream o;
    o << in.rdbuf();
    return o.str();
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "linksaddle_acceptance_determinism";
    fs::remove_all(root);
    std::ostringstream sink;
    for (const char* run : {"a", "b"}) {
        RunConfig c = parse_config_text("domain.nx = 31\nframe.dim_y = 2\nrefine.levels = 2\n");
        c.out_dir = (root / run).string();
        cmd_check(c, true, sink);
        cmd_geometry(c, true, sink);
        cmd_intersect(c, true, sink);
        cmd_solve(c, true, sink);
        cmd_refine(c, true, sink);
    }
    int files = 0;
    bool same = true;
    for (const auto& e : fs::directory_iterator(root / "a")) {
        if (e.path().extension() != ".csv") continue;
        ++files;
        const fs::path other = root / "b" / e.path().filename();
        same = same && fs::exists(other) && read_all(e.path()) == read_all(other);
    }
    fs::remove_all(root);
    return {same && files >= 7, std::to_string(files) + " CSV files compared byte for byte"};
}

}  // namespace

int main() {
    criterion("splitting-identities", 5, splitting_identities);
    criterion("sigma-tau-norms", 2, sigma_tau);
    criterion("gradient-correctness", 10, gradient_order);
    criterion("toy-closed-form", 1, toy_closed_form);
    criterion("pde-shooting-oracle", 30, pde_oracle);
    criterion("geometry-certificate", 20, geometry_certificate);
    criterion("intersection-degree", 30, intersection_degree);
    criterion("minimax-witness", 30, minimax_checker);
    criterion("mesh-refinement", 60, refinement);
    criterion("determinism", 60, determinism);
    std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
