#pragma once

#include "linksaddle/grid.hpp"
#include "linksaddle/state.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace linksaddle {

/// X = Y ⊕ Z with Y = {(−v, v)} and Z = {(u, u)}.
class DiagonalSplitting {
public:
    explicit DiagonalSplitting(DiscretizationPtr disc);

    const Discretization& discretization() const { return *disc_; }
    const DiscretizationPtr& discretization_ptr() const { return disc_; }

    /// P(u,v) = ((u−v)/2, (v−u)/2)
    StatePair project_P(const StatePair& x) const;
    /// Q(u,v) = ((u+v)/2, (u+v)/2)
    StatePair project_Q(const StatePair& x) const;

    double product(const StatePair& a, const StatePair& b) const { return x_product(*disc_, a, b); }
    double norm(const StatePair& a) const { return x_norm(*disc_, a); }

    /// ‖Qy‖ ≤ 1e−10·‖y‖ (absolute for y = 0).
    bool in_Y(const StatePair& y, double tol = 1e-10) const;
    bool in_Z(const StatePair& z, double tol = 1e-10) const;

private:
    void require(const StatePair& x, const char* what) const;

    DiscretizationPtr disc_;
};

/// X-orthonormal elements e_k = (−φ_k, φ_k)/‖(−φ_k, φ_k)‖ of Y built from the
/// lowest Laplacian eigenvectors.
class SigmaBasis {
public:
    SigmaBasis() = default;
    SigmaBasis(std::vector<StatePair> elements, std::vector<double> eigenvalues);

    std::size_t size() const noexcept { return elements_.size(); }
    const StatePair& operator[](std::size_t k) const { return elements_[k]; }
    const std::vector<StatePair>& elements() const noexcept { return elements_; }
    /// Laplacian eigenvalue attached to e_k.
    double eigenvalue(std::size_t k) const { return eigenvalues_[k]; }
    /// 2^{−k−1}
    static double weight(std::size_t k) { return std::ldexp(1.0, -static_cast<int>(k) - 1); }

    /// K e_k, cached so that ⟨x, e_k⟩_X is a dot product.
    const StatePair& stiff(std::size_t k) const { return stiff_[k]; }
    void cache_stiffness(const Discretization& disc);

private:
    std::vector<StatePair> elements_;
    std::vector<StatePair> stiff_;
    std::vector<double> eigenvalues_;
};

/// Default truncation min(32, interior count).
std::size_t default_truncation(const Discretization& disc);

SigmaBasis build_sigma_basis(const DiagonalSplitting& splitting, std::size_t count);

/// Σ_{k<K} 2^{−k−1}|⟨y, e_k⟩_X|; throws ErrorKind::Domain if y ∉ Y.
double sigma_norm(const DiagonalSplitting& splitting, const SigmaBasis& basis, const StatePair& y);

/// max(|Px|_σ, ‖Qx‖_X)
double tau_norm(const DiagonalSplitting& splitting, const SigmaBasis& basis, const StatePair& x);

/// Both arms of the τ-norm, for diagnostics.
struct TauArms {
    double sigma_part = 0.0;
    double z_part = 0.0;
    double value() const { return std::max(sigma_part, z_part); }
};
TauArms tau_arms(const DiagonalSplitting& splitting, const SigmaBasis& basis, const StatePair& x);

}  // namespace linksaddle
