#include "linksaddle/error.hpp"
#include "linksaddle/parallel.hpp"
#include "linksaddle/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace linksaddle {

namespace {

/// Fits m_i ≤ C₁ n_i + C₂ with C₁, C₂ ≥ 0 minimizing C₁·mean(n) + C₂. For
/// fixed C₁ the best C₂ is max(0, max_i(m_i − C₁ n_i)), so the objective is
/// convex piecewise linear in C₁; its minimum sits at a breakpoint.
void fit_growth(const std::vector<double>& n, const std::vector<double>& m, PSReport& rep) {
    const double mean_n = [&] {
        double s = 0.0;
        for (double v : n) s += v;
        return s / static_cast<double>(n.size());
    }();
    auto c2_for = [&](double c1) {
        double c2 = 0.0;
        for (std::size_t i = 0; i < n.size(); ++i) c2 = std::max(c2, m[i] - c1 * n[i]);
        return c2;
    };
    auto objective = [&](double c1) { return c1 * mean_n + c2_for(c1); };

    // Breakpoints: C₁ = 0, zero crossings m_i/n_i, and pairwise crossings of
    // the upper envelope. Candidates are thinned to the envelope's support.
    std::vector<double> cand{0.0};
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (n[i] > 0.0 && m[i] > 0.0) cand.push_back(m[i] / n[i]);
    }
    std::vector<std::size_t> order(n.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return n[a] != n[b] ? n[a] > n[b] : m[a] > m[b];
    });
    // Upper envelope of lines m_i − c n_i, by increasing slope −n_i.
    std::vector<std::size_t> hull;
    auto cross = [&](std::size_t a, std::size_t b) { return (m[a] - m[b]) / (n[a] - n[b]); };
    for (std::size_t idx : order) {
        if (!hull.empty() && n[hull.back()] == n[idx]) continue;
        while (hull.size() >= 2 &&
               cross(hull[hull.size() - 2], idx) <= cross(hull[hull.size() - 2], hull.back())) {
            hull.pop_back();
        }
        hull.push_back(idx);
    }
    for (std::size_t i = 1; i < hull.size(); ++i) {
        const double c = cross(hull[i - 1], hull[i]);
        if (c >= 0.0 && std::isfinite(c)) cand.push_back(c);
    }
    double best_c1 = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (double c : cand) {
        const double val = objective(c);
        if (val < best) {
            best = val;
            best_c1 = c;
        }
    }
    rep.c1 = best_c1;
    rep.c2 = c2_for(best_c1);
    double slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n.size(); ++i) {
        slack = std::min(slack, rep.c1 * n[i] + rep.c2 - m[i]);
    }
    rep.min_slack = slack;
    // Rounding in C₂ = m_i − C₁n_i may leave a few ulps below zero.
    const double scale = std::max(1.0, std::abs(rep.c2));
    rep.fit_ok = std::isfinite(slack) && slack >= -1e-12 * scale;
}

}  // namespace

PSReport ps_monitor(const IterateTrace& trace, const Discretization& disc, double tol) {
    if (trace.empty()) throw Error(ErrorKind::InvalidSpec, "ps_monitor: empty trace");
    PSReport rep;
    rep.bounded = std::all_of(trace.records.begin(), trace.records.end(), [](const IterateRecord& r) {
        return std::isfinite(r.J) && std::abs(r.J) <= 1e12;
    });
    rep.gradient_small = trace.records.back().grad_norm <= tol;

    const double thr = std::max(tol, 1e-6);
    std::vector<const StatePair*> window;
    for (std::size_t i = trace.tail_states.size(); i-- > 0 && window.size() < 10;) {
        if (trace.records[trace.tail_index[i]].grad_norm <= thr) window.push_back(&trace.tail_states[i]);
    }
    const bool settled = !window.empty();
    if (!settled) {
        for (std::size_t i = trace.tail_states.size(); i-- > 0 && window.size() < 10;) {
            window.push_back(&trace.tail_states[i]);
        }
    }
    double dist = 0.0;
    for (std::size_t a = 0; a < window.size(); ++a) {
        for (std::size_t b = a + 1; b < window.size(); ++b) {
            dist = std::max(dist, x_norm(disc, *window[a] - *window[b]));
        }
    }
    rep.cauchy_distance = dist;
    rep.cauchy_window = window.size();
    rep.cauchy = settled && dist <= 10.0 * thr;

    std::vector<double> n;
    std::vector<double> m;
    for (const auto& r : trace.records) {
        n.push_back(r.state_norm);
        m.push_back(r.mu_mass);
    }
    fit_growth(n, m, rep);
    return rep;
}

WitnessConditions evaluate_conditions(double J, double dist, double grad, double c, double eps,
                                      double delta_prox) {
    WitnessConditions w;
    w.level = std::abs(J - c) <= 2.0 * eps;
    w.proximity = dist <= 2.0 * delta_prox;
    w.slope = grad < 8.0 * eps / delta_prox;
    return w;
}

WitnessReport minimax_witness(const Deformation& gamma, const LinkingFrame& frame,
                              const Problem& prob, double c_est, double a_est, double eps,
                              double delta_prox, const SampleCounts& counts, std::uint64_t seed,
                              int max_steps) {
    WitnessReport rep;
    const auto& disc = prob.discretization();
    const SampleSets samples = sample_sets(frame, counts, seed);
    std::vector<ChartPoint> points = samples.interior;
    points.insert(points.end(), gamma.hints.begin(), gamma.hints.end());

    std::vector<StatePair> images(points.size());
    std::vector<double> norms2(points.size());
    std::vector<double> values(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
        images[i] = gamma(points[i]);
        norms2[i] = euclidean_dot(images[i], apply_stiffness(disc, images[i]));
        values[i] = energy(prob, images[i]);
    });
    rep.image_samples = images.size();
    const auto argmax = static_cast<std::size_t>(
        std::max_element(values.begin(), values.end()) - values.begin());
    rep.sup_gamma = values[argmax];

    rep.preconditions = rep.sup_gamma <= c_est + eps && eps > 0.0 && eps < 0.5 * (c_est - a_est) &&
                        delta_prox > 0.0;
    if (!rep.preconditions) {
        rep.message = "preconditions fail: need sup J(gamma) <= c + eps and 0 < eps < (c - a)/2";
        return rep;
    }

    auto distance = [&](const StatePair& x) {
        const StatePair kx = apply_stiffness(disc, x);
        const double xx = euclidean_dot(x, kx);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < images.size(); ++i) {
            const double d2 = xx - 2.0 * euclidean_dot(images[i], kx) + norms2[i];
            best = std::min(best, d2);
        }
        return std::sqrt(std::max(0.0, best));
    };

    SolverConfig cfg;
    cfg.method = SolveMethod::Signflow;
    cfg.init = InitPolicy::Explicit;
    cfg.initial_state = images[argmax];
    cfg.ray_rescale = false;
    cfg.tolerance = 1e-300;
    cfg.flow_max_iterations = max_steps;
    cfg.observer = [&](int it, const StatePair& x, double J, double grad) {
        rep.steps = it;
        const double dist = distance(x);
        const WitnessConditions w = evaluate_conditions(J, dist, grad, c_est, eps, delta_prox);
        if (w.all()) {
            rep.found = true;
            rep.J = J;
            rep.distance = dist;
            rep.grad_norm = grad;
            rep.conditions = w;
            rep.witness = x;
            return true;
        }
        return false;
    };
    signflow_solve(prob, cfg);
    rep.message = rep.found ? "witness found" : "no witness along the flow";
    return rep;
}

}  // namespace linksaddle
