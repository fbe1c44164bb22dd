#include "linksaddle/functional.hpp"

#include "linksaddle/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace linksaddle {

namespace {

double abs_pow(double t, double q) {
    const double a = std::abs(t);
    if (q == 2.0) return a * a;
    if (q == 4.0) return (a * a) * (a * a);
    if (q == 3.0) return a * a * a;
    return std::pow(a, q);
}

}  // namespace

NonlinearitySpec NonlinearitySpec::power(double p, double mu, double threshold,
                                         double growth_constant) {
    NonlinearitySpec s;
    s.name = "power";
    s.p = p;
    s.mu = mu;
    s.threshold = threshold;
    s.growth_constant = growth_constant;
    if (p == 4.0) {
        s.f = [](const NodeCoord&, double t) { return t * t * t; };
        s.primitive = [](const NodeCoord&, double t) { return (t * t) * (t * t) / 4.0; };
        s.derivative = [](const NodeCoord&, double t) { return 3.0 * t * t; };
    } else {
        s.f = [p](const NodeCoord&, double t) { return abs_pow(t, p - 2.0) * t; };
        s.primitive = [p](const NodeCoord&, double t) { return abs_pow(t, p) / p; };
        s.derivative = [p](const NodeCoord&, double t) { return (p - 1.0) * abs_pow(t, p - 2.0); };
    }
    return s;
}

NonlinearitySpec NonlinearitySpec::zero(double p) {
    NonlinearitySpec s;
    s.name = "zero";
    s.p = p;
    s.mu = p;
    s.f = [](const NodeCoord&, double) { return 0.0; };
    s.primitive = [](const NodeCoord&, double) { return 0.0; };
    s.derivative = [](const NodeCoord&, double) { return 0.0; };
    return s;
}

NonlinearitySpec NonlinearitySpec::linear() {
    NonlinearitySpec s;
    s.name = "linear";
    s.p = 4.0;
    s.mu = 4.0;
    s.f = [](const NodeCoord&, double t) { return t; };
    s.primitive = [](const NodeCoord&, double t) { return 0.5 * t * t; };
    s.derivative = [](const NodeCoord&, double) { return 1.0; };
    return s;
}

bool ProblemSpec::swap_symmetric() const {
    return lambda == delta && f.name == g.name && f.p == g.p && f.mu == g.mu &&
           f.threshold == g.threshold && f.growth_constant == g.growth_constant;
}

Problem make_problem(const ProblemSpec& spec) {
    return make_problem(spec, build_grid(spec.domain));
}

Problem make_problem(const ProblemSpec& spec, DiscretizationPtr disc) {
    if (!disc) throw Error(ErrorKind::InvalidSpec, "problem without discretization");
    if (!(disc->grid().spec() == Grid(spec.domain).spec())) {
        throw Error(ErrorKind::Shape, "discretization does not match the problem's domain");
    }
    return Problem{std::move(disc), spec};
}

ScalarField eval_nodal(const Grid& grid, const NonlinearitySpec::Evaluator& fn,
                       const ScalarField& t) {
    ScalarField out(t.size());
    for (Eigen::Index k = 0; k < t.size(); ++k) {
        const auto idx = static_cast<std::size_t>(k);
        out[k] = fn(NodeCoord{grid.x(idx), grid.y(idx)}, t[k]);
    }
    return out;
}

double lebesgue_power(const Discretization& disc, const ScalarField& w, double q) {
    disc.require_shape(w, "lebesgue_power");
    double sum = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) sum += abs_pow(w[k], q);
    return disc.grid().cell_volume() * sum;
}

namespace {

void require_state(const Problem& prob, const StatePair& s, const char* what) {
    prob.disc->require_shape(s.u, what);
    prob.disc->require_shape(s.v, what);
}

double finite_term(double value, const char* term) {
    if (!std::isfinite(value)) {
        throw Error(ErrorKind::Overflow, std::string("evaluate_J: non-finite ") + term);
    }
    return value;
}

}  // namespace

EnergyBreakdown evaluate_J(const Problem& prob, const StatePair& state) {
    require_state(prob, state, "evaluate_J");
    const auto& disc = *prob.disc;
    const auto& grid = disc.grid();
    EnergyBreakdown e;
    e.cross = finite_term(disc.dirichlet_product(state.u, state.v), "cross term");
    e.lambda_term = finite_term(0.5 * prob.spec.lambda * disc.quadrature(state.u.cwiseAbs2()),
                                "lambda term");
    e.delta_term = finite_term(0.5 * prob.spec.delta * disc.quadrature(state.v.cwiseAbs2()),
                               "delta term");
    e.f_integral = finite_term(disc.quadrature(eval_nodal(grid, prob.spec.f.primitive, state.u)),
                               "integral of F(u)");
    e.g_integral = finite_term(disc.quadrature(eval_nodal(grid, prob.spec.g.primitive, state.v)),
                               "integral of G(v)");
    // Paired sums commute, so J(u,v) and J(v,u) agree bitwise for symmetric problems.
    e.total = finite_term(e.cross - (e.lambda_term + e.delta_term) - (e.f_integral + e.g_integral),
                          "total");
    return e;
}

double directional_derivative(const Problem& prob, const StatePair& state, const StatePair& dir) {
    require_state(prob, state, "directional_derivative");
    require_state(prob, dir, "directional_derivative");
    const auto& disc = *prob.disc;
    const auto& grid = disc.grid();
    const ScalarField fu = eval_nodal(grid, prob.spec.f.f, state.u);
    const ScalarField gv = eval_nodal(grid, prob.spec.g.f, state.v);
    const double quadratic = disc.dirichlet_product(state.u, dir.v) +
                             disc.dirichlet_product(state.v, dir.u);
    const ScalarField nodal = (prob.spec.lambda * state.u + fu).cwiseProduct(dir.u) +
                              (prob.spec.delta * state.v + gv).cwiseProduct(dir.v);
    return quadratic - disc.quadrature(nodal);
}

StatePair riesz_gradient(const Problem& prob, const StatePair& state) {
    require_state(prob, state, "riesz_gradient");
    const auto& disc = *prob.disc;
    const auto& grid = disc.grid();
    const double vol = grid.cell_volume();
    const ScalarField load_u = vol * (prob.spec.lambda * state.u + eval_nodal(grid, prob.spec.f.f, state.u));
    const ScalarField load_v = vol * (prob.spec.delta * state.v + eval_nodal(grid, prob.spec.g.f, state.v));
    return {state.v - disc.poisson_solve(load_u), state.u - disc.poisson_solve(load_v)};
}

double second_variation(const Problem& prob, const StatePair& state, const StatePair& a,
                        const StatePair& b) {
    require_state(prob, state, "second_variation");
    const auto& disc = *prob.disc;
    const auto& grid = disc.grid();
    const ScalarField dfu = eval_nodal(grid, prob.spec.f.derivative, state.u);
    const ScalarField dgv = eval_nodal(grid, prob.spec.g.derivative, state.v);
    const double quadratic = disc.dirichlet_product(a.u, b.v) + disc.dirichlet_product(a.v, b.u);
    const ScalarField nodal =
        (prob.spec.lambda * ScalarField::Ones(a.u.size()) + dfu).cwiseProduct(a.u).cwiseProduct(b.u) +
        (prob.spec.delta * ScalarField::Ones(a.v.size()) + dgv).cwiseProduct(a.v).cwiseProduct(b.v);
    return quadratic - disc.quadrature(nodal);
}

HypothesisReport validate_hypotheses(const NonlinearitySpec& spec, double t_max,
                                     std::size_t samples, double small_t_tol) {
    if (!(t_max >= 10.0 * spec.threshold)) {
        throw Error(ErrorKind::Domain, "validate_hypotheses: t-range must span [-10R, 10R]");
    }
    if (samples < 1000) {
        throw Error(ErrorKind::Domain, "validate_hypotheses: at least 1000 samples required");
    }
    const NodeCoord origin{};
    HypothesisReport rep;
    rep.growth = rep.small_t = rep.superquadratic = true;

    std::vector<double> ts;
    ts.reserve(samples + 400);
    for (std::size_t i = 0; i < samples; ++i) {
        ts.push_back(-t_max + 2.0 * t_max * static_cast<double>(i) / static_cast<double>(samples - 1));
    }
    // (H2) is a limit at 0; the uniform grid never gets close enough.
    std::vector<double> tiny;
    for (int i = 0; i <= 160; ++i) {
        const double t = std::pow(10.0, -12.0 + 8.0 * i / 160.0);
        tiny.push_back(t);
        tiny.push_back(-t);
    }

    double worst_growth = -std::numeric_limits<double>::infinity();
    double worst_ar = -std::numeric_limits<double>::infinity();
    for (double t : ts) {
        const double ft = spec.f(origin, t);
        const double bound = spec.growth_constant * (1.0 + abs_pow(t, spec.p - 1.0));
        const double excess = std::abs(ft) - bound * (1.0 + 1e-12);
        if (excess > 0.0) {
            rep.growth = false;
            if (excess > worst_growth) {
                worst_growth = excess;
                rep.growth_witness = HypothesisWitness{t, std::abs(ft), bound};
            }
        }
        if (std::abs(t) >= spec.threshold) {
            const double muF = spec.mu * spec.primitive(origin, t);
            const double tf = t * ft;
            const double slack = 1e-12 * std::abs(tf);
            const bool ok = muF > 0.0 && muF <= tf + slack;
            if (!ok) {
                rep.superquadratic = false;
                const double violation = muF <= 0.0 ? std::numeric_limits<double>::max() : muF - tf;
                if (violation > worst_ar || !rep.superquadratic_witness) {
                    worst_ar = violation;
                    rep.superquadratic_witness = HypothesisWitness{t, muF, tf};
                }
            }
        }
    }
    double worst_ratio = 0.0;
    for (double t : tiny) {
        const double ratio = std::abs(spec.f(origin, t) / t);
        if (!(ratio <= small_t_tol)) {
            rep.small_t = false;
            if (ratio >= worst_ratio) {
                worst_ratio = ratio;
                rep.small_t_witness = HypothesisWitness{t, ratio, small_t_tol};
            }
        }
    }
    rep.samples = ts.size() + tiny.size();
    return rep;
}

std::vector<double> log_sample_grid(double t_max) {
    std::vector<double> out;
    const double top = std::log10(t_max);
    const int steps = static_cast<int>(std::ceil((top + 6.0) * 200.0));
    for (int i = 0; i <= steps; ++i) {
        const double t = i == steps ? t_max : std::pow(10.0, -6.0 + (top + 6.0) * i / steps);
        out.push_back(t);
        out.push_back(-t);
    }
    out.push_back(1.0);
    out.push_back(-1.0);
    out.push_back(0.0);
    return out;
}

ConstantFit lower_bound_constant(const NonlinearitySpec& spec, double t_max) {
    const NodeCoord origin{};
    double upper = std::numeric_limits<double>::infinity();
    double lower = 0.0;
    bool feasible = true;
    for (double t : log_sample_grid(t_max)) {
        const double F = spec.primitive(origin, t);
        const double a = abs_pow(t, spec.mu) - 1.0;
        if (a > 0.0) {
            upper = std::min(upper, F / a);
        } else if (a < 0.0) {
            lower = std::max(lower, F / a);
        } else if (F < 0.0) {
            feasible = false;
        }
    }
    ConstantFit fit;
    if (!feasible || !(upper > 0.0) || upper < lower || !std::isfinite(upper)) {
        fit.value = 0.0;
        fit.warning = true;
        fit.note = "no positive constant c1 satisfies F(t) >= c1(|t|^mu - 1) on the sample grid";
        return fit;
    }
    fit.value = upper;
    return fit;
}

ConstantFit lower_bound_constant(const ProblemSpec& spec, double t_max) {
    ConstantFit a = lower_bound_constant(spec.f, t_max);
    ConstantFit b = lower_bound_constant(spec.g, t_max);
    if (a.warning) return a;
    if (b.warning) return b;
    return a.value <= b.value ? a : b;
}

ConstantFit small_t_constants(const NonlinearitySpec& spec, double eps, double t_max) {
    if (!(eps > 0.0)) throw Error(ErrorKind::Domain, "small_t_constants: eps must be positive");
    const NodeCoord origin{};
    double c = 0.0;
    for (double t : log_sample_grid(t_max)) {
        if (t == 0.0) continue;
        const double need = (std::abs(spec.primitive(origin, t)) - 0.5 * eps * t * t) / abs_pow(t, spec.p);
        c = std::max(c, need);
    }
    ConstantFit fit;
    fit.value = c;
    return fit;
}

ConstantFit small_t_constants(const ProblemSpec& spec, double eps, double t_max) {
    ConstantFit a = small_t_constants(spec.f, eps, t_max);
    ConstantFit b = small_t_constants(spec.g, eps, t_max);
    return a.value >= b.value ? a : b;
}

}  // namespace linksaddle
