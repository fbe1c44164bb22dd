#include "linksaddle/solver.hpp"

#include "linksaddle/error.hpp"
#include "linksaddle/splitting.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>

namespace linksaddle {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

ScalarField sparse_solve(const SparseMatrix& a, const ScalarField& rhs, const char* what) {
    if ((rhs.array() == 0.0).all()) return ScalarField::Zero(rhs.size());
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw Error(ErrorKind::SolverFailure, std::string("Newton: singular Jacobian block (") + what + ")");
    }
    ScalarField x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) {
        throw Error(ErrorKind::SolverFailure, std::string("Newton: Jacobian solve failed (") + what + ")");
    }
    return x;
}

SparseMatrix with_diagonal(const SparseMatrix& k, const ScalarField& diag) {
    SparseMatrix out = k;
    for (Eigen::Index i = 0; i < diag.size(); ++i) out.coeffRef(i, i) += diag[i];
    return out;
}

/// Newton correction from the Jacobian
///   [[K, A], [B, K]],  A = −h^d diag(δ + g′(v)),  B = −h^d diag(λ + f′(u)),
/// solved in sum/difference coordinates so swap-symmetric states stay
/// exactly symmetric.
StatePair newton_direction(const Problem& prob, const StatePair& x, const StatePair& res) {
    const auto& disc = prob.discretization();
    const auto& grid = disc.grid();
    const double vol = grid.cell_volume();
    const auto n = static_cast<Eigen::Index>(disc.size());
    const ScalarField a =
        -vol * (prob.spec.delta * ScalarField::Ones(n) + eval_nodal(grid, prob.spec.g.derivative, x.v));
    const ScalarField b =
        -vol * (prob.spec.lambda * ScalarField::Ones(n) + eval_nodal(grid, prob.spec.f.derivative, x.u));
    const ScalarField s_diag = 0.5 * (a + b);
    const ScalarField d_diag = 0.5 * (b - a);
    const ScalarField rs = -(res.u + res.v);
    const ScalarField rd = -(res.u - res.v);
    const SparseMatrix& k = disc.stiffness().matrix();

    ScalarField s;
    ScalarField d;
    if ((d_diag.array() == 0.0).all()) {
        s = sparse_solve(with_diagonal(k, s_diag), rs, "sum");
        d = sparse_solve(with_diagonal(k, -s_diag), rd, "difference");
    } else {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(2 * k.nonZeros() + 4 * n));
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::Index off = pass * n;
            for (Eigen::Index col = 0; col < k.outerSize(); ++col) {
                for (SparseMatrix::InnerIterator it(k, col); it; ++it) {
                    trip.emplace_back(off + it.row(), off + it.col(), it.value());
                }
            }
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            trip.emplace_back(i, i, s_diag[i]);
            trip.emplace_back(n + i, n + i, -s_diag[i]);
            trip.emplace_back(i, n + i, d_diag[i]);
            trip.emplace_back(n + i, i, -d_diag[i]);
        }
        SparseMatrix full(2 * n, 2 * n);
        full.setFromTriplets(trip.begin(), trip.end());
        ScalarField rhs(2 * n);
        rhs << rs, rd;
        const ScalarField sol = sparse_solve(full, rhs, "coupled");
        s = sol.head(n);
        d = sol.tail(n);
    }
    return {0.5 * (s + d), 0.5 * (s - d)};
}

double mu_mass(const Problem& prob, const StatePair& x) {
    const auto& disc = prob.discretization();
    return lebesgue_power(disc, x.u, prob.spec.f.mu) + lebesgue_power(disc, x.v, prob.spec.g.mu);
}

void record(const Problem& prob, IterateTrace& trace, int iteration, const char* stage,
            const StatePair& x, double J, double grad, double step) {
    IterateRecord rec;
    rec.iteration = iteration;
    rec.stage = stage;
    rec.J = J;
    rec.grad_norm = grad;
    rec.step = step;
    rec.state_norm = x_norm(prob.discretization(), x);
    rec.mu_mass = mu_mass(prob, x);
    trace.push(std::move(rec), x);
}

SaddleReport finish(const Problem& prob, const SolverConfig& config, StatePair x, IterateTrace trace,
                    int iterations, const char* method, std::string message) {
    SaddleReport rep;
    const auto& disc = prob.discretization();
    rep.c_est = energy(prob, x);
    rep.grad_norm = x_norm(disc, riesz_gradient(prob, x));
    rep.residual_norm = residual_dual_norm(prob, euler_lagrange_residual(prob, x));
    rep.state_norm = x_norm(disc, x);
    rep.converged = rep.grad_norm <= config.tolerance;
    rep.nontrivial = rep.state_norm >= config.eta;
    rep.iterations = iterations;
    rep.method = method;
    rep.message = rep.converged ? "converged" : std::move(message);
    rep.state = std::move(x);
    rep.trace = std::move(trace);
    return rep;
}

struct GradState {
    StatePair grad;
    double norm = 0.0;
    bool ok = false;
};

GradState try_gradient(const Problem& prob, const StatePair& x) {
    GradState g;
    if (!x.all_finite()) return g;
    try {
        g.grad = riesz_gradient(prob, x);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::SolverFailure || e.kind() == ErrorKind::Overflow) return g;
        throw;
    }
    g.norm = x_norm(prob.discretization(), g.grad);
    g.ok = std::isfinite(g.norm);
    return g;
}

SaddleReport newton_from(const Problem& prob, const SolverConfig& config, StatePair x,
                         IterateTrace trace, int first_iteration, const char* method) {
    GradState g = try_gradient(prob, x);
    if (!g.ok) throw Error(ErrorKind::Overflow, "Newton: non-finite gradient at the initial state");
    int it = first_iteration;
    record(prob, trace, it, "newton", x, energy(prob, x), g.norm, 0.0);
    if (config.observer && config.observer(it, x, trace.records.back().J, g.norm)) {
        return finish(prob, config, std::move(x), std::move(trace), it, method, "stopped by observer");
    }
    int stalls = 0;
    std::string message = "iteration budget exhausted";
    for (int k = 0; k < config.max_iterations && g.norm > config.tolerance; ++k) {
        const StatePair dir = newton_direction(prob, x, euler_lagrange_residual(prob, x));
        double alpha = 1.0;
        StatePair best_x;
        GradState best;
        best.norm = std::numeric_limits<double>::infinity();
        double best_alpha = 0.0;
        for (int ls = 0; ls <= config.max_backtracks; ++ls, alpha *= 0.5) {
            StatePair trial = x + alpha * dir;
            GradState gt = try_gradient(prob, trial);
            if (!gt.ok) continue;
            if (gt.norm < best.norm) {
                best = gt;
                best_x = std::move(trial);
                best_alpha = alpha;
            }
            if (best.norm < g.norm) break;
        }
        if (!best.ok) {
            message = "no finite Newton step";
            break;
        }
        stalls = best.norm < g.norm ? 0 : stalls + 1;
        x = std::move(best_x);
        g = std::move(best);
        ++it;
        record(prob, trace, it, "newton", x, energy(prob, x), g.norm, best_alpha);
        if (config.observer && config.observer(it, x, trace.records.back().J, g.norm)) {
            message = "stopped by observer";
            break;
        }
        if (stalls >= 4) {
            message = "Newton stalled";
            break;
        }
    }
    return finish(prob, config, std::move(x), std::move(trace), it, method, message);
}

struct FlowOutcome {
    StatePair x;
    IterateTrace trace;
    int iterations = 0;
    bool stopped = false;
    std::string message;
};

FlowOutcome run_flow(const Problem& prob, const SolverConfig& config, StatePair x, double target) {
    FlowOutcome out;
    const auto& disc = prob.discretization();
    const DiagonalSplitting split(prob.disc);
    GradState g = try_gradient(prob, x);
    if (!g.ok) throw Error(ErrorKind::Overflow, "signflow: non-finite gradient at the initial state");
    double tau = config.flow_step;
    int it = 0;
    record(prob, out.trace, it, "flow", x, energy(prob, x), g.norm, 0.0);
    if (config.observer && config.observer(it, x, out.trace.records.back().J, g.norm)) {
        out.stopped = true;
    }
    out.message = "flow budget exhausted";
    while (!out.stopped && it < config.flow_max_iterations && g.norm > target) {
        StatePair dir = split.project_P(g.grad) - split.project_Q(g.grad);
        const StatePair qx = split.project_Q(x);
        const double nq = x_norm(disc, qx);
        if (nq > 0.0) {
            const StatePair xh = (1.0 / nq) * qx;
            if (second_variation(prob, x, xh, xh) < 0.0) {
                dir += (2.0 * x_product(disc, g.grad, xh)) * xh;
            }
        }
        bool accepted = false;
        while (tau >= 1e-14) {
            StatePair trial = x + tau * dir;
            GradState gt = try_gradient(prob, trial);
            if (gt.ok && gt.norm <= (1.0 + config.flow_band) * g.norm) {
                x = std::move(trial);
                g = std::move(gt);
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted) {
            out.message = "flow step collapsed";
            break;
        }
        ++it;
        record(prob, out.trace, it, "flow", x, energy(prob, x), g.norm, tau);
        if (config.observer && config.observer(it, x, out.trace.records.back().J, g.norm)) {
            out.stopped = true;
            out.message = "stopped by observer";
        }
        tau = std::min(config.flow_step_max, 1.25 * tau);
    }
    out.x = std::move(x);
    out.iterations = it;
    return out;
}

}  // namespace

const char* to_string(SolveMethod m) noexcept {
    switch (m) {
        case SolveMethod::Newton: return "newton";
        case SolveMethod::Signflow: return "signflow";
        case SolveMethod::FlowThenNewton: return "flow-then-newton";
    }
    return "unknown";
}

const char* to_string(InitPolicy p) noexcept {
    switch (p) {
        case InitPolicy::Anchor: return "anchor";
        case InitPolicy::Eigen: return "eigen";
        case InitPolicy::Explicit: return "explicit";
    }
    return "unknown";
}

SolveMethod parse_method(const std::string& name) {
    if (name == "newton") return SolveMethod::Newton;
    if (name == "signflow") return SolveMethod::Signflow;
    if (name == "flow-then-newton") return SolveMethod::FlowThenNewton;
    throw Error(ErrorKind::Config, "unknown solver method '" + name + "'");
}

InitPolicy parse_init(const std::string& name) {
    if (name == "anchor") return InitPolicy::Anchor;
    if (name == "eigen") return InitPolicy::Eigen;
    if (name == "explicit") return InitPolicy::Explicit;
    throw Error(ErrorKind::Config, "unknown init policy '" + name + "'");
}

void SolverConfig::validate() const {
    if (!(tolerance > 0.0)) throw Error(ErrorKind::InvalidSpec, "solver tolerance must be > 0");
    if (!(eta > 0.0)) throw Error(ErrorKind::InvalidSpec, "nontriviality threshold must be > 0");
    if (max_iterations < 0 || flow_max_iterations < 0 || max_backtracks < 0) {
        throw Error(ErrorKind::InvalidSpec, "iteration budgets must be >= 0");
    }
    if (!(flow_step > 0.0) || !(flow_step_max >= flow_step) || !(flow_band >= 0.0)) {
        throw Error(ErrorKind::InvalidSpec, "flow step parameters out of range");
    }
    if (!(flow_switch > 0.0)) throw Error(ErrorKind::InvalidSpec, "flow switch must be > 0");
    if (!(init_scale > 0.0)) throw Error(ErrorKind::InvalidSpec, "init scale must be > 0");
}

void IterateTrace::push(IterateRecord rec, const StatePair& state) {
    records.push_back(std::move(rec));
    tail_states.push_back(state);
    tail_index.push_back(records.size() - 1);
    if (tail_states.size() > kTail) {
        tail_states.erase(tail_states.begin());
        tail_index.erase(tail_index.begin());
    }
}

StatePair euler_lagrange_residual(const Problem& prob, const StatePair& state) {
    const auto& disc = prob.discretization();
    disc.require_shape(state.u, "euler_lagrange_residual");
    disc.require_shape(state.v, "euler_lagrange_residual");
    const auto& grid = disc.grid();
    const double vol = grid.cell_volume();
    const auto& k = disc.stiffness();
    return {k.apply(state.u) - vol * (prob.spec.delta * state.v + eval_nodal(grid, prob.spec.g.f, state.v)),
            k.apply(state.v) - vol * (prob.spec.lambda * state.u + eval_nodal(grid, prob.spec.f.f, state.u))};
}

double residual_dual_norm(const Problem& prob, const StatePair& residual) {
    const auto& disc = prob.discretization();
    const double a = residual.u.dot(disc.poisson_solve(residual.u));
    const double b = residual.v.dot(disc.poisson_solve(residual.v));
    return std::sqrt(std::max(0.0, a + b));
}

StatePair ray_maximize(const Problem& prob, const StatePair& x0) {
    if (x_norm(prob.discretization(), x0) == 0.0) return x0;
    auto J = [&](double t) {
        try {
            return energy(prob, t * x0);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Overflow) return -std::numeric_limits<double>::infinity();
            throw;
        }
    };
    constexpr int kGrid = 321;
    std::vector<double> ts(kGrid);
    std::vector<double> js(kGrid);
    for (int i = 0; i < kGrid; ++i) {
        ts[i] = std::pow(10.0, -4.0 + 8.0 * i / (kGrid - 1));
        js[i] = J(ts[i]);
    }
    int best = 0;
    for (int i = 1; i < kGrid; ++i) {
        if (js[i] > js[best]) best = i;
    }
    if (best == 0 || best == kGrid - 1 || !(js[best] > 0.0)) return x0;
    // ⟨J′(t x₀), x₀⟩ changes sign from + to − across the maximizer.
    auto slope = [&](double t) { return directional_derivative(prob, t * x0, x0); };
    double lo = ts[best - 1];
    double hi = ts[best + 1];
    if (!(slope(lo) > 0.0) || !(slope(hi) < 0.0)) return ts[best] * x0;
    for (int i = 0; i < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double sm = slope(mid);
        if (sm == 0.0) {
            lo = hi = mid;
            break;
        }
        (sm > 0.0 ? lo : hi) = mid;
    }
    return (0.5 * (lo + hi)) * x0;
}

StatePair initial_state(const Problem& prob, const SolverConfig& config) {
    const auto& disc = prob.discretization();
    switch (config.init) {
        case InitPolicy::Anchor: {
            const auto phi = principal_eigenpair(disc).vector;
            return ray_maximize(prob, {phi, phi});
        }
        case InitPolicy::Eigen: {
            const auto phi = principal_eigenpair(disc).vector;
            StatePair x{phi, phi};
            x *= config.init_scale / x_norm(disc, x);
            return config.ray_rescale ? ray_maximize(prob, x) : x;
        }
        case InitPolicy::Explicit: {
            if (!config.initial_state) {
                throw Error(ErrorKind::InvalidSpec, "explicit init policy without an initial state");
            }
            const StatePair& x = *config.initial_state;
            disc.require_shape(x.u, "initial state");
            disc.require_shape(x.v, "initial state");
            return config.ray_rescale ? ray_maximize(prob, x) : x;
        }
    }
    throw Error(ErrorKind::InvalidSpec, "unknown init policy");
}

SaddleReport newton_solve(const Problem& prob, const SolverConfig& config) {
    config.validate();
    return newton_from(prob, config, initial_state(prob, config), {}, 0, "newton");
}

SaddleReport signflow_solve(const Problem& prob, const SolverConfig& config) {
    config.validate();
    FlowOutcome flow = run_flow(prob, config, initial_state(prob, config), config.tolerance);
    return finish(prob, config, std::move(flow.x), std::move(flow.trace), flow.iterations, "signflow",
                  flow.message);
}

SaddleReport solve(const Problem& prob, const SolverConfig& config) {
    switch (config.method) {
        case SolveMethod::Newton: return newton_solve(prob, config);
        case SolveMethod::Signflow: return signflow_solve(prob, config);
        case SolveMethod::FlowThenNewton: {
            config.validate();
            FlowOutcome flow = run_flow(prob, config, initial_state(prob, config),
                                        std::max(config.flow_switch, config.tolerance));
            if (flow.stopped) {
                return finish(prob, config, std::move(flow.x), std::move(flow.trace), flow.iterations,
                              "flow-then-newton", flow.message);
            }
            return newton_from(prob, config, std::move(flow.x), std::move(flow.trace),
                               flow.iterations + 1, "flow-then-newton");
        }
    }
    throw Error(ErrorKind::InvalidSpec, "unknown solver method");
}

bool minimax_consistency(const SaddleReport& report, const GeometryReport& geometry) {
    return report.c_est >= geometry.b_est - 1e-8;
}

}  // namespace linksaddle
