#pragma once

#include "linksaddle/functional.hpp"
#include "linksaddle/splitting.hpp"
#include "linksaddle/state.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace linksaddle {

/// Chart coordinates of u = Σ_k y_k e_k + λ₀ z on the truncated half-ball M.
struct ChartPoint {
    Eigen::VectorXd y;
    double lambda0 = 0.0;
};

/// Linking frame: anchor z ∈ Z with ‖z‖ = r, radii ρ > r > 0, and the first
/// d_Y σ-basis vectors spanning the truncated Y-part of M.
///
///   M  = { y + λ₀z : ‖y + λ₀z‖ ≤ ρ, λ₀ ≥ 0 }
///   ∂M = sphere slice ‖·‖ = ρ, λ₀ ≥ 0  ∪  base λ₀ = 0, ‖y‖ ≤ ρ
///   N  = { w ∈ Z : ‖w‖ = r }
class LinkingFrame {
public:
    LinkingFrame(DiagonalSplitting splitting, SigmaBasis basis, StatePair anchor, double r,
                 double rho, std::size_t dim_y);

    /// Anchor along (φ₁, φ₁), the principal Laplacian eigenvector doubled.
    static LinkingFrame from_problem(const Problem& prob, double r, double rho, std::size_t dim_y,
                                     std::size_t basis_size = 0);
    LinkingFrame with_radii(double r, double rho) const;

    const DiagonalSplitting& splitting() const noexcept { return splitting_; }
    const Discretization& discretization() const { return splitting_.discretization(); }
    const SigmaBasis& basis() const noexcept { return basis_; }
    const StatePair& anchor() const noexcept { return anchor_; }
    /// Unit vector z/r.
    StatePair anchor_direction() const { return (1.0 / r_) * anchor_; }
    double r() const noexcept { return r_; }
    double rho() const noexcept { return rho_; }
    std::size_t dim_y() const noexcept { return dim_y_; }
    std::size_t chart_dim() const noexcept { return dim_y_ + 1; }

    StatePair embed(const ChartPoint& p) const;
    StatePair embed_y(const Eigen::VectorXd& y) const;
    /// Coordinates of x against e_0..e_{d_Y−1} and z.
    ChartPoint chart(const StatePair& x) const;
    /// Coefficients ⟨x, e_k⟩_X, k < d_Y.
    Eigen::VectorXd y_coordinates(const StatePair& x) const;
    /// ‖x − Σ⟨x,e_k⟩e_k‖ for x expected in the truncated Y-span.
    double y_span_residual(const StatePair& x, const Eigen::VectorXd& coords) const;

    /// Isometric coordinates q = (y, λ₀ r): ‖embed(p)‖ = ‖q‖.
    Eigen::VectorXd to_vector(const ChartPoint& p) const;
    ChartPoint from_vector(const Eigen::VectorXd& q) const;

    double chart_norm(const ChartPoint& p) const;
    bool in_M(const ChartPoint& p, double tol = 1e-12) const;
    /// λ₀ ≤ 0 or ‖p‖ ≥ ρ(1 − tol).
    bool on_boundary(const ChartPoint& p, double tol = 1e-12) const;

private:
    DiagonalSplitting splitting_;
    SigmaBasis basis_;
    StatePair anchor_;
    StatePair anchor_stiff_;
    double r_;
    double rho_;
    std::size_t dim_y_;
};

struct SampleCounts {
    std::size_t n_samples = 1000;
    std::size_t boundary_samples = 1000;
    std::size_t interior_samples = 1000;
};

struct SampleSets {
    std::vector<StatePair> n_set;                 // N
    std::vector<ChartPoint> boundary_sphere;      // ‖u‖ = ρ, λ₀ ≥ 0
    std::vector<ChartPoint> boundary_base;        // λ₀ = 0
    std::vector<ChartPoint> interior;             // int(M)
    bool z_one_dimensional = false;               // N = {±z} exactly
};

SampleSets sample_sets(const LinkingFrame& frame, const SampleCounts& counts, std::uint64_t seed);

struct GeometryReport {
    double b_est = 0.0;  // min J over N-samples
    double a_est = 0.0;  // max J over ∂M-samples
    double margin = 0.0;
    double base_max = 0.0;  // max J over the Y-part (λ₀ = 0) of ∂M
    std::size_t n_count = 0;
    std::size_t boundary_count = 0;
    bool b_exact = false;
    bool a_exact = false;
    bool certified = false;
    double r = 0.0;
    double rho = 0.0;
    std::size_t dim_y = 0;
    std::uint64_t seed = 0;
};

GeometryReport estimate_geometry(const LinkingFrame& frame, const Problem& prob,
                                 const SampleCounts& counts, std::uint64_t seed);

struct RadiiChoice {
    double r = 0.0;
    double rho = 0.0;
    double eps = 0.0;             // ε with (κ + ε)/λ₁ = ½
    double c_eps = 0.0;
    double sobolev = 0.0;         // sampled c̄₀: ∫|u|^p ≤ c̄₀ ⟨u,u⟩^{p/2}
    double lambda1 = 0.0;
    double component_radius = 0.0;  // s = ‖u‖ on N, r = √2·s
    double lower_bound = 0.0;     // ½s² − 2c_ε c̄₀ s^p
    double pilot_a_est = 0.0;
    int rho_doublings = 0;
};

/// Picks r from the certified lower bound on N and ρ as the smallest
/// power-of-two multiple of r with a non-positive pilot estimate of sup_∂M J.
/// Throws ErrorKind::Geometry when no certifying pair exists.
RadiiChoice choose_radii(const Problem& prob, std::size_t dim_y, std::uint64_t seed,
                         const SampleCounts& pilot = {200, 400, 0});

/// Smallest ρ = 2^k·r (k ≥ 1) whose pilot estimate of sup_∂M J is ≤ 0.
/// Throws ErrorKind::Geometry when none exists up to 2^24·r.
double choose_rho(const Problem& prob, double r, std::size_t dim_y, std::uint64_t seed,
                  const SampleCounts& pilot = {200, 400, 0}, double* pilot_a_est = nullptr,
                  int* doublings = nullptr);

/// Admissible deformation γ: M → X with constructive certificates.
struct Deformation {
    using Map = std::function<StatePair(const ChartPoint&)>;

    std::string name;
    Map map;
    /// Finite basis containing the range of id − γ.
    std::vector<StatePair> displacement_basis;
    /// γ = id on ∂M by construction.
    bool boundary_identity = true;
    /// Range stays inside span(e_0..e_{d_Y−1}, z).
    bool chart_preserving = true;
    /// Chart points where the deformation concentrates.
    std::vector<ChartPoint> hints;

    StatePair operator()(const ChartPoint& p) const { return map(p); }
};

/// Bump that vanishes on ∂M, normalised to max 1: a(1 − b)/max with
/// a = λ₀r/ρ, b = ‖u‖²/ρ².
double boundary_taper(const LinkingFrame& frame, const ChartPoint& p);

Deformation identity_deformation(const LinkingFrame& frame);
/// u ↦ u + s·β(u)·e_k
Deformation shift_deformation(const LinkingFrame& frame, std::size_t k, double s);
/// u ↦ u + s·β(u)·λ₀·e_k
Deformation shear_deformation(const LinkingFrame& frame, std::size_t k, double s);
/// u ↦ u + s·β(u)·z
Deformation lift_deformation(const LinkingFrame& frame, double s);
/// Carries the ray point t*z (t* = ⟨x*, z⟩/r²) onto the flow endpoint x*
/// with a bump supported in the ball of radius min(t*r, ρ − t*r) around it.
Deformation flow_deformation(const LinkingFrame& frame, const StatePair& endpoint);

/// The identity plus every nontrivial chart-preserving deformation, sized to
/// the frame.
std::vector<Deformation> shipped_deformations(const LinkingFrame& frame);

struct CertificateReport {
    double boundary_max_displacement = 0.0;
    double displacement_max_residual = 0.0;
    std::size_t boundary_samples = 0;
    std::size_t interior_samples = 0;
    bool boundary_ok = false;
    bool displacement_ok = false;
};

CertificateReport certify_deformation(const Deformation& gamma, const LinkingFrame& frame,
                                      const SampleSets& samples, double tol = 1e-10);

struct HomotopyValue {
    StatePair y_part;
    double z_coeff = 0.0;
};

/// H(t,u) = (tPγ(u) + (1−t)y) + ((t/r)‖γ(u) − Pγ(u)‖ + (1−t)λ₀ − 1)z.
HomotopyValue homotopy_H(double t, const ChartPoint& u, const Deformation& gamma,
                         const LinkingFrame& frame);

/// H(t,·) in isometric chart coordinates: (⟨Y-part, e_k⟩, z_coeff·r).
/// Throws ErrorKind::Domain if the Y-part leaves the truncated span.
Eigen::VectorXd homotopy_chart(double t, const Eigen::VectorXd& q, const Deformation& gamma,
                               const LinkingFrame& frame);

/// X-norm of H(t,u).
double homotopy_norm(const HomotopyValue& h, const LinkingFrame& frame);

struct IntersectionResult {
    ChartPoint point;
    StatePair image;
    double p_residual = 0.0;     // ‖Pγ(ū)‖
    double norm_residual = 0.0;  // |‖γ(ū)‖ − r|
    std::size_t start_index = 0;
    int iterations = 0;
};

/// Root of H(1,·) by damped Newton from a deterministic lattice of interior
/// starts. Throws ErrorKind::Intersection when every start fails.
IntersectionResult intersection_point(const Deformation& gamma, const LinkingFrame& frame);

using ChartMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct DegreeResult {
    int degree = 0;
    std::vector<Eigen::VectorXd> roots;
    std::vector<int> signs;
    std::vector<double> determinants;
    double boundary_min = 0.0;
};

/// Brouwer degree of `map` on int(M) at 0 as the signed root count. Requires
/// chart dimension ≤ 4. Throws ErrorKind::BoundaryZero if the map comes
/// within 1e−6 of zero on the sampled boundary and ErrorKind::DegenerateRoot
/// if a root has |det| < 1e−8.
DegreeResult brouwer_degree_small(const ChartMap& map, const LinkingFrame& frame);

/// Finite-difference Jacobian (central differences).
Eigen::MatrixXd fd_jacobian(const ChartMap& map, const Eigen::VectorXd& q, double step);

}  // namespace linksaddle
