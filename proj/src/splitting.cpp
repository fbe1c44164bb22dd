#include "linksaddle/splitting.hpp"

#include "linksaddle/error.hpp"

#include <cmath>

namespace linksaddle {

DiagonalSplitting::DiagonalSplitting(DiscretizationPtr disc) : disc_(std::move(disc)) {
    if (!disc_) throw Error(ErrorKind::InvalidSpec, "splitting without discretization");
}

void DiagonalSplitting::require(const StatePair& x, const char* what) const {
    disc_->require_shape(x.u, what);
    disc_->require_shape(x.v, what);
}

StatePair DiagonalSplitting::project_P(const StatePair& x) const {
    require(x, "project_P");
    ScalarField half = 0.5 * (x.u - x.v);
    return {half, -half};
}

StatePair DiagonalSplitting::project_Q(const StatePair& x) const {
    require(x, "project_Q");
    ScalarField half = 0.5 * (x.u + x.v);
    return {half, half};
}

bool DiagonalSplitting::in_Y(const StatePair& y, double tol) const {
    const double scale = norm(y);
    return norm(project_Q(y)) <= tol * (scale > 0.0 ? scale : 1.0);
}

bool DiagonalSplitting::in_Z(const StatePair& z, double tol) const {
    const double scale = norm(z);
    return norm(project_P(z)) <= tol * (scale > 0.0 ? scale : 1.0);
}

SigmaBasis::SigmaBasis(std::vector<StatePair> elements, std::vector<double> eigenvalues)
    : elements_(std::move(elements)), eigenvalues_(std::move(eigenvalues)) {}

void SigmaBasis::cache_stiffness(const Discretization& disc) {
    stiff_.clear();
    stiff_.reserve(elements_.size());
    for (const auto& e : elements_) stiff_.push_back(apply_stiffness(disc, e));
}

std::size_t default_truncation(const Discretization& disc) {
    return std::min<std::size_t>(32, disc.size());
}

SigmaBasis build_sigma_basis(const DiagonalSplitting& splitting, std::size_t count) {
    const auto& disc = splitting.discretization();
    if (count > disc.size()) {
        throw Error(ErrorKind::Domain, "sigma basis larger than the interior node count");
    }
    const auto pairs = lowest_eigenpairs(disc, count);
    std::vector<StatePair> elements;
    std::vector<double> values;
    elements.reserve(count);
    for (const auto& pair : pairs) {
        StatePair e{-pair.vector, pair.vector};
        // Re-orthonormalise (modified Gram–Schmidt in X) so degenerate
        // eigenspaces cannot leak rounding into the Gram matrix.
        for (const auto& prev : elements) e -= splitting.product(e, prev) * prev;
        e *= 1.0 / splitting.norm(e);
        elements.push_back(std::move(e));
        values.push_back(pair.value);
    }
    SigmaBasis basis(std::move(elements), std::move(values));
    basis.cache_stiffness(disc);
    return basis;
}

double sigma_norm(const DiagonalSplitting& splitting, const SigmaBasis& basis, const StatePair& y) {
    if (!splitting.in_Y(y)) {
        throw Error(ErrorKind::Domain, "sigma_norm: argument is not in Y");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        sum += SigmaBasis::weight(k) * std::abs(euclidean_dot(y, basis.stiff(k)));
    }
    return sum;
}

TauArms tau_arms(const DiagonalSplitting& splitting, const SigmaBasis& basis, const StatePair& x) {
    TauArms arms;
    arms.sigma_part = sigma_norm(splitting, basis, splitting.project_P(x));
    arms.z_part = splitting.norm(splitting.project_Q(x));
    return arms;
}

double tau_norm(const DiagonalSplitting& splitting, const SigmaBasis& basis, const StatePair& x) {
    return tau_arms(splitting, basis, x).value();
}

}  // namespace linksaddle
