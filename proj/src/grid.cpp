#include "linksaddle/grid.hpp"

#include "linksaddle/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

namespace linksaddle {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidSpec: return "invalid-spec";
        case ErrorKind::Shape: return "shape";
        case ErrorKind::SolverFailure: return "solver-failure";
        case ErrorKind::Overflow: return "overflow";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Geometry: return "geometry-failure";
        case ErrorKind::Intersection: return "intersection-failure";
        case ErrorKind::DegenerateRoot: return "degenerate-root";
        case ErrorKind::BoundaryZero: return "boundary-zero";
        case ErrorKind::Config: return "config";
    }
    return "unknown";
}

void DomainSpec::validate() const {
    if (dimension != 1 && dimension != 2) {
        throw Error(ErrorKind::InvalidSpec, "domain dimension must be 1 or 2");
    }
    if (!(lx > 0.0) || !std::isfinite(lx)) {
        throw Error(ErrorKind::InvalidSpec, "domain extent lx must be positive");
    }
    if (nx <= 0) throw Error(ErrorKind::InvalidSpec, "interior count nx must be positive");
    if (dimension == 2) {
        if (!(ly > 0.0) || !std::isfinite(ly)) {
            throw Error(ErrorKind::InvalidSpec, "domain extent ly must be positive");
        }
        if (ny <= 0) throw Error(ErrorKind::InvalidSpec, "interior count ny must be positive");
    }
}

Grid::Grid(const DomainSpec& spec) : spec_(spec) {
    spec_.validate();
    if (spec_.dimension == 1) {
        spec_.ny = 1;
        spec_.ly = 1.0;
    }
    hx_ = spec_.lx / (spec_.nx + 1);
    hy_ = spec_.dimension == 2 ? spec_.ly / (spec_.ny + 1) : 1.0;
    cell_volume_ = spec_.dimension == 2 ? hx_ * hy_ : hx_;
    size_ = static_cast<std::size_t>(spec_.nx) * static_cast<std::size_t>(ny());
}

double Grid::measure() const noexcept {
    return spec_.dimension == 2 ? spec_.lx * spec_.ly : spec_.lx;
}

double Grid::x(std::size_t k) const noexcept {
    return hx_ * static_cast<double>(k % static_cast<std::size_t>(spec_.nx) + 1);
}

double Grid::y(std::size_t k) const noexcept {
    if (spec_.dimension == 1) return 0.0;
    return hy_ * static_cast<double>(k / static_cast<std::size_t>(spec_.nx) + 1);
}

StiffnessOperator::StiffnessOperator(const Grid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(n) * 5);

    // Edge sums: each edge contributes w·(a_i − a_j)(b_i − b_j), w being the
    // transverse width over the edge length.
    const double wx = grid.dimension() == 2 ? grid.hy() / grid.hx() : 1.0 / grid.hx();
    const double wy = grid.dimension() == 2 ? grid.hx() / grid.hy() : 0.0;
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            const auto k = static_cast<Eigen::Index>(grid.index(i, j));
            double diag = 2.0 * wx;
            if (i > 0) entries.emplace_back(k, static_cast<Eigen::Index>(grid.index(i - 1, j)), -wx);
            if (i + 1 < grid.nx()) entries.emplace_back(k, static_cast<Eigen::Index>(grid.index(i + 1, j)), -wx);
            if (grid.dimension() == 2) {
                diag += 2.0 * wy;
                if (j > 0) entries.emplace_back(k, static_cast<Eigen::Index>(grid.index(i, j - 1)), -wy);
                if (j + 1 < grid.ny()) entries.emplace_back(k, static_cast<Eigen::Index>(grid.index(i, j + 1)), -wy);
            }
            entries.emplace_back(k, k, diag);
        }
    }
    matrix_.resize(n, n);
    matrix_.setFromTriplets(entries.begin(), entries.end());
    matrix_.makeCompressed();
    factor_.compute(matrix_);
    if (factor_.info() != Eigen::Success) {
        throw Error(ErrorKind::SolverFailure, "stiffness factorization failed");
    }
}

ScalarField StiffnessOperator::apply(const ScalarField& u) const {
    return matrix_ * u;
}

ScalarField StiffnessOperator::solve(const ScalarField& rhs) const {
    const double rhs_norm = rhs.norm();
    if (!std::isfinite(rhs_norm)) {
        throw Error(ErrorKind::SolverFailure, "poisson solve: non-finite right-hand side");
    }
    if (rhs_norm == 0.0) return ScalarField::Zero(rhs.size());
    ScalarField w = factor_.solve(rhs);
    const double residual = (matrix_ * w - rhs).norm();
    if (factor_.info() != Eigen::Success || !(residual <= 1e-10 * rhs_norm)) {
        std::ostringstream msg;
        msg << "poisson solve: relative residual " << residual / rhs_norm << " exceeds 1e-10";
        throw Error(ErrorKind::SolverFailure, msg.str());
    }
    return w;
}

Eigen::MatrixXd StiffnessOperator::solve(const Eigen::MatrixXd& rhs) const {
    Eigen::MatrixXd w = factor_.solve(rhs);
    if (factor_.info() != Eigen::Success) {
        throw Error(ErrorKind::SolverFailure, "poisson solve: block solve failed");
    }
    return w;
}

Discretization::Discretization(const DomainSpec& spec) : grid_(spec), stiffness_(grid_) {}

void Discretization::require_shape(const ScalarField& f, const char* what) const {
    if (static_cast<std::size_t>(f.size()) != grid_.size()) {
        std::ostringstream msg;
        msg << what << ": field has " << f.size() << " entries, grid has " << grid_.size();
        throw Error(ErrorKind::Shape, msg.str());
    }
}

double Discretization::dirichlet_product(const ScalarField& u, const ScalarField& v) const {
    require_shape(u, "dirichlet_product");
    require_shape(v, "dirichlet_product");
    // Symmetrised so that swapping the arguments is exact in floating point.
    return 0.5 * (u.dot(stiffness_.apply(v)) + v.dot(stiffness_.apply(u)));
}

ScalarField Discretization::poisson_solve(const ScalarField& rhs) const {
    require_shape(rhs, "poisson_solve");
    return stiffness_.solve(rhs);
}

double Discretization::quadrature(const ScalarField& values) const {
    require_shape(values, "quadrature");
    return grid_.cell_volume() * values.sum();
}

DiscretizationPtr build_grid(const DomainSpec& spec) {
    return std::make_shared<const Discretization>(spec);
}

namespace {

void normalise_pair(const Discretization& disc, Eigenpair& pair) {
    const double energy = pair.vector.dot(disc.stiffness().apply(pair.vector));
    pair.vector /= std::sqrt(energy);
    Eigen::Index at = 0;
    pair.vector.cwiseAbs().maxCoeff(&at);
    if (pair.vector[at] < 0.0) pair.vector = -pair.vector;
}

std::vector<Eigenpair> dense_eigenpairs(const Discretization& disc, std::size_t count) {
    const Eigen::MatrixXd dense(disc.stiffness().matrix());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::SolverFailure, "dense eigen-solve failed");
    }
    std::vector<Eigenpair> out;
    for (std::size_t k = 0; k < count; ++k) {
        const auto idx = static_cast<Eigen::Index>(k);
        Eigenpair pair{solver.eigenvalues()[idx] / disc.grid().cell_volume(),
                       solver.eigenvectors().col(idx)};
        normalise_pair(disc, pair);
        out.push_back(std::move(pair));
    }
    return out;
}

// Block inverse iteration; M = h^d·I so Euclidean orthonormality is enough.
std::vector<Eigenpair> subspace_eigenpairs(const Discretization& disc, std::size_t count) {
    const auto& K = disc.stiffness();
    const auto n = static_cast<Eigen::Index>(disc.size());
    const auto block = static_cast<Eigen::Index>(
        std::min<std::size_t>(disc.size(), count + std::max<std::size_t>(8, count)));
    const auto wanted = static_cast<Eigen::Index>(count);

    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::MatrixXd basis(n, block);
    for (Eigen::Index c = 0; c < block; ++c)
        for (Eigen::Index r = 0; r < n; ++r) basis(r, c) = unif(rng);

    Eigen::VectorXd theta;
    const int budget = 2000;
    for (int it = 0; it < budget; ++it) {
        Eigen::MatrixXd w = K.solve(basis);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
        Eigen::MatrixXd kq = K.matrix() * q;
        Eigen::MatrixXd small = q.transpose() * kq;
        small = 0.5 * (small + small.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(small);
        basis = q * ritz.eigenvectors();
        theta = ritz.eigenvalues();

        Eigen::MatrixXd kb = kq * ritz.eigenvectors();
        double worst = 0.0;
        for (Eigen::Index c = 0; c < wanted; ++c) {
            const double res = (kb.col(c) - theta[c] * basis.col(c)).norm();
            worst = std::max(worst, res / (theta[c] * basis.col(c).norm()));
        }
        if (worst <= 1e-12) {
            std::vector<Eigenpair> out;
            for (Eigen::Index c = 0; c < wanted; ++c) {
                Eigenpair pair{theta[c] / disc.grid().cell_volume(), basis.col(c)};
                normalise_pair(disc, pair);
                out.push_back(std::move(pair));
            }
            return out;
        }
    }
    throw Error(ErrorKind::SolverFailure, "eigen-solver iteration budget exhausted");
}

}  // namespace

std::vector<Eigenpair> lowest_eigenpairs(const Discretization& disc, std::size_t count) {
    if (count == 0) return {};
    if (count > disc.size()) {
        throw Error(ErrorKind::Domain, "requested more eigenpairs than interior nodes");
    }
    if (disc.size() <= 400) return dense_eigenpairs(disc, count);
    return subspace_eigenpairs(disc, count);
}

Eigenpair principal_eigenpair(const Discretization& disc) {
    return lowest_eigenpairs(disc, 1).front();
}

}  // namespace linksaddle
