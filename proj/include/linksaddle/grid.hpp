#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

namespace linksaddle {

/// Nodal values on the interior points of a grid. Boundary values are zero by
/// convention and never stored.
using ScalarField = Eigen::VectorXd;

/// Interval (dimension 1) or rectangle (dimension 2) with homogeneous
/// Dirichlet conditions.
struct DomainSpec {
    int dimension = 1;
    double lx = 1.0;
    double ly = 1.0;
    int nx = 31;
    int ny = 31;

    static DomainSpec unit_interval(int n) { return {1, 1.0, 1.0, n, 1}; }
    static DomainSpec unit_square(int n) { return {2, 1.0, 1.0, n, n}; }

    /// Throws ErrorKind::InvalidSpec on nonpositive extents or counts.
    void validate() const;

    bool operator==(const DomainSpec&) const = default;
};

class Grid {
public:
    explicit Grid(const DomainSpec& spec);

    const DomainSpec& spec() const noexcept { return spec_; }
    int dimension() const noexcept { return spec_.dimension; }
    double hx() const noexcept { return hx_; }
    double hy() const noexcept { return hy_; }
    int nx() const noexcept { return spec_.nx; }
    int ny() const noexcept { return spec_.dimension == 2 ? spec_.ny : 1; }
    std::size_t size() const noexcept { return size_; }

    /// h_x for 1D, h_x·h_y for 2D; the nodal quadrature weight.
    double cell_volume() const noexcept { return cell_volume_; }
    /// |Ω|
    double measure() const noexcept;

    /// Lexicographic interior index, x fastest.
    std::size_t index(int i, int j = 0) const noexcept {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(spec_.nx) +
               static_cast<std::size_t>(i);
    }
    double x(std::size_t k) const noexcept;
    double y(std::size_t k) const noexcept;

    ScalarField zeros() const { return ScalarField::Zero(static_cast<Eigen::Index>(size_)); }

private:
    DomainSpec spec_;
    double hx_;
    double hy_;
    double cell_volume_;
    std::size_t size_;
};

/// Sparse SPD operator K of the discrete Dirichlet form ⟨u, Kv⟩ ≈ ∫∇u·∇v,
/// together with its Cholesky factorization.
class StiffnessOperator {
public:
    explicit StiffnessOperator(const Grid& grid);

    const Eigen::SparseMatrix<double>& matrix() const noexcept { return matrix_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }

    ScalarField apply(const ScalarField& u) const;
    /// Solves Kw = rhs; throws ErrorKind::SolverFailure if the relative
    /// residual exceeds 1e-10.
    ScalarField solve(const ScalarField& rhs) const;
    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

private:
    Eigen::SparseMatrix<double> matrix_;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> factor_;
};

/// Grid plus stiffness; immutable and shared by every other module.
class Discretization {
public:
    explicit Discretization(const DomainSpec& spec);

    const Grid& grid() const noexcept { return grid_; }
    const StiffnessOperator& stiffness() const noexcept { return stiffness_; }
    std::size_t size() const noexcept { return grid_.size(); }

    /// Returns ⟨u, Kv⟩.
    double dirichlet_product(const ScalarField& u, const ScalarField& v) const;
    ScalarField poisson_solve(const ScalarField& rhs) const;
    /// Nodal rule h^d·Σ values_i.
    double quadrature(const ScalarField& values) const;

    void require_shape(const ScalarField& f, const char* what) const;

private:
    Grid grid_;
    StiffnessOperator stiffness_;
};

using DiscretizationPtr = std::shared_ptr<const Discretization>;

DiscretizationPtr build_grid(const DomainSpec& spec);

struct Eigenpair {
    double value;
    ScalarField vector;
};

/// Smallest eigenpair of K φ = λ·h^d·φ with ⟨φ, Kφ⟩ = 1 and the largest nodal
/// entry positive.
Eigenpair principal_eigenpair(const Discretization& disc);

/// The `count` smallest eigenpairs in ascending order, each normalised to
/// ⟨φ, Kφ⟩ = 1. Uses block inverse iteration with Rayleigh–Ritz; exact
/// Rayleigh–Ritz when the block spans the whole space.
std::vector<Eigenpair> lowest_eigenpairs(const Discretization& disc, std::size_t count);

}  // namespace linksaddle
