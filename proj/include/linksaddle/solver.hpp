#pragma once

#include "linksaddle/functional.hpp"
#include "linksaddle/linking.hpp"
#include "linksaddle/state.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace linksaddle {

enum class SolveMethod { Newton, Signflow, FlowThenNewton };
enum class InitPolicy { Anchor, Eigen, Explicit };

const char* to_string(SolveMethod m) noexcept;
const char* to_string(InitPolicy p) noexcept;
SolveMethod parse_method(const std::string& name);
InitPolicy parse_init(const std::string& name);

/// Called after every accepted iterate with (iteration, state, J, ‖∇J‖).
/// Returning true stops the run.
using IterateObserver = std::function<bool(int, const StatePair&, double, double)>;

struct SolverConfig {
    SolveMethod method = SolveMethod::FlowThenNewton;
    double tolerance = 1e-10;  // on ‖∇J‖_X
    int max_iterations = 100;  // Newton
    double eta = 0.1;          // nontriviality threshold
    int max_backtracks = 30;

    double flow_step = 0.5;
    double flow_step_max = 0.5;
    double flow_band = 0.5;
    double flow_switch = 1e-3;  // hand-off to Newton
    int flow_max_iterations = 5000;

    InitPolicy init = InitPolicy::Anchor;
    double init_scale = 1.0;
    bool ray_rescale = true;
    std::optional<StatePair> initial_state;

    IterateObserver observer;

    /// Throws ErrorKind::InvalidSpec on nonpositive tolerances or budgets.
    void validate() const;
};

struct IterateRecord {
    int iteration = 0;
    std::string stage;
    double J = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;
    double state_norm = 0.0;
    double mu_mass = 0.0;  // |u|_μ^μ + |v|_μ^μ
};

struct IterateTrace {
    static constexpr std::size_t kTail = 32;

    std::vector<IterateRecord> records;
    /// The last kTail states with their record indices.
    std::vector<StatePair> tail_states;
    std::vector<std::size_t> tail_index;

    void push(IterateRecord rec, const StatePair& state);
    bool empty() const noexcept { return records.empty(); }
};

struct SaddleReport {
    StatePair state;
    double c_est = 0.0;
    double grad_norm = 0.0;
    double residual_norm = 0.0;  // dual norm of the Euler–Lagrange residual
    double state_norm = 0.0;
    bool converged = false;
    bool nontrivial = false;
    std::optional<bool> minimax_consistent;
    int iterations = 0;
    std::string method;
    std::string message;
    IterateTrace trace;
};

/// Discrete Euler–Lagrange system of J:
/// (K u − h^d(δv + g(v)), K v − h^d(λu + f(u))). Vanishes exactly where the
/// Riesz gradient does.
StatePair euler_lagrange_residual(const Problem& prob, const StatePair& state);

/// sqrt(⟨R, K⁻¹R⟩) summed over both components.
double residual_dual_norm(const Problem& prob, const StatePair& residual);

/// Maximizes J(t·x₀) over t > 0; returns x₀ unchanged when J has no positive
/// interior maximum on the ray.
StatePair ray_maximize(const Problem& prob, const StatePair& x0);

StatePair initial_state(const Problem& prob, const SolverConfig& config);

SaddleReport newton_solve(const Problem& prob, const SolverConfig& config);
SaddleReport signflow_solve(const Problem& prob, const SolverConfig& config);
/// Dispatches on config.method.
SaddleReport solve(const Problem& prob, const SolverConfig& config);

struct PSReport {
    bool bounded = false;
    bool gradient_small = false;
    bool cauchy = false;
    double cauchy_distance = 0.0;
    std::size_t cauchy_window = 0;
    double c1 = 0.0;
    double c2 = 0.0;
    double min_slack = 0.0;
    bool fit_ok = false;

    bool all() const { return bounded && gradient_small && cauchy && fit_ok; }
};

PSReport ps_monitor(const IterateTrace& trace, const Discretization& disc, double tol);

/// c_est ≥ b_est − 1e−8.
bool minimax_consistency(const SaddleReport& report, const GeometryReport& geometry);

struct WitnessConditions {
    bool level = false;      // |J − c| ≤ 2ε
    bool proximity = false;  // dist ≤ 2δ_prox
    bool slope = false;      // ‖J′‖ < 8ε/δ_prox
    bool all() const { return level && proximity && slope; }
};

WitnessConditions evaluate_conditions(double J, double dist, double grad, double c, double eps,
                                      double delta_prox);

struct WitnessReport {
    bool preconditions = false;
    bool found = false;
    double sup_gamma = 0.0;  // max of J∘γ over the M-sample image
    double J = 0.0;
    double distance = 0.0;   // to the sampled image of γ
    double grad_norm = 0.0;
    int steps = 0;
    std::size_t image_samples = 0;
    WitnessConditions conditions;
    std::optional<StatePair> witness;
    std::string message;
};

/// Searches the sign-split flow started at the sampled argmax of J∘γ for a
/// state meeting the three minimax-principle conditions.
WitnessReport minimax_witness(const Deformation& gamma, const LinkingFrame& frame,
                              const Problem& prob, double c_est, double a_est, double eps,
                              double delta_prox, const SampleCounts& counts, std::uint64_t seed,
                              int max_steps = 400);

}  // namespace linksaddle
