#pragma once

#include "linksaddle/grid.hpp"
#include "linksaddle/state.hpp"

#include <functional>
#include <optional>
#include <string>

namespace linksaddle {

struct NodeCoord {
    double x = 0.0;
    double y = 0.0;
};

/// Nonlinearity f with primitive F and derivative f'. Evaluators receive the
/// node coordinate; the shipped presets ignore it.
struct NonlinearitySpec {
    using Evaluator = std::function<double(const NodeCoord&, double)>;

    std::string name;
    Evaluator f;
    Evaluator primitive;   // F, F(0) = 0
    Evaluator derivative;  // f'
    double p = 4.0;        // growth exponent
    double mu = 4.0;       // superquadratic exponent, μ > 2
    double threshold = 1.0;  // R
    double growth_constant = 1.0;  // c

    /// f(t) = |t|^{p-2} t, F(t) = |t|^p / p.
    static NonlinearitySpec power(double p = 4.0, double mu = 4.0, double threshold = 1.0,
                                  double growth_constant = 1.0);
    static NonlinearitySpec zero(double p = 4.0);
    /// f(t) = t. Violates the small-t hypothesis; used for diagnostics.
    static NonlinearitySpec linear();
};

struct ProblemSpec {
    DomainSpec domain;
    double lambda = 0.0;
    double delta = 0.0;
    NonlinearitySpec f = NonlinearitySpec::power();  // acts on u
    NonlinearitySpec g = NonlinearitySpec::power();  // acts on v

    /// λ = δ and f, g the same preset: the problem commutes with (u,v) ↦ (v,u).
    bool swap_symmetric() const;
};

/// A problem bound to its discretization.
struct Problem {
    DiscretizationPtr disc;
    ProblemSpec spec;

    const Discretization& discretization() const { return *disc; }
    const Grid& grid() const { return disc->grid(); }
};

Problem make_problem(const ProblemSpec& spec);
Problem make_problem(const ProblemSpec& spec, DiscretizationPtr disc);

struct EnergyBreakdown {
    double cross = 0.0;        // ∫∇u·∇v
    double lambda_term = 0.0;  // (λ/2)∫u²
    double delta_term = 0.0;   // (δ/2)∫v²
    double f_integral = 0.0;   // ∫F(u)
    double g_integral = 0.0;   // ∫G(v)
    double total = 0.0;

    /// φ = λ-term + δ-term + ∫F + ∫G
    double phi() const { return lambda_term + delta_term + f_integral + g_integral; }
};

EnergyBreakdown evaluate_J(const Problem& prob, const StatePair& state);
inline double energy(const Problem& prob, const StatePair& state) {
    return evaluate_J(prob, state).total;
}

/// ⟨J'(state), dir⟩.
double directional_derivative(const Problem& prob, const StatePair& state, const StatePair& dir);

/// X-inner-product representative of J'(state): K g₁ = Kv − h^d(λu + f(u)),
/// K g₂ = Ku − h^d(δv + g(v)).
StatePair riesz_gradient(const Problem& prob, const StatePair& state);

/// Second variation D²J(state)[a, b].
double second_variation(const Problem& prob, const StatePair& state, const StatePair& a,
                        const StatePair& b);

/// Nodal evaluation helpers.
ScalarField eval_nodal(const Grid& grid, const NonlinearitySpec::Evaluator& fn, const ScalarField& t);

/// |w|_q^q by nodal quadrature.
double lebesgue_power(const Discretization& disc, const ScalarField& w, double q);

struct HypothesisWitness {
    double t = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct HypothesisReport {
    bool growth = false;          // (H1)
    bool small_t = false;         // (H2)
    bool superquadratic = false;  // (H3)
    std::optional<HypothesisWitness> growth_witness;
    std::optional<HypothesisWitness> small_t_witness;
    std::optional<HypothesisWitness> superquadratic_witness;
    std::size_t samples = 0;

    bool all() const { return growth && small_t && superquadratic; }
};

/// Samples [−t_max, t_max] uniformly plus a logarithmic cluster near 0.
/// Requires t_max ≥ 10R and samples ≥ 1000.
HypothesisReport validate_hypotheses(const NonlinearitySpec& spec, double t_max,
                                     std::size_t samples, double small_t_tol = 1e-6);

struct ConstantFit {
    double value = 0.0;
    bool warning = false;
    std::string note;
};

/// Largest c₁ with F(t) ≥ c₁(|t|^μ − 1) on a logarithmic grid in [−t_max, t_max].
ConstantFit lower_bound_constant(const NonlinearitySpec& spec, double t_max = 1e4);
ConstantFit lower_bound_constant(const ProblemSpec& spec, double t_max = 1e4);

/// Smallest c_ε with |F(t)| ≤ (ε/2)t² + c_ε|t|^p on a logarithmic grid.
ConstantFit small_t_constants(const NonlinearitySpec& spec, double eps, double t_max = 1e4);
ConstantFit small_t_constants(const ProblemSpec& spec, double eps, double t_max = 1e4);

/// The logarithmic sample grid shared by the constant fits.
std::vector<double> log_sample_grid(double t_max);

}  // namespace linksaddle
