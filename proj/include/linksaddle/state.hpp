#pragma once

#include "linksaddle/grid.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace linksaddle {

/// A point (u, v) of X = H¹₀ × H¹₀ at truncation.
struct StatePair {
    ScalarField u;
    ScalarField v;

    static StatePair zeros(const Grid& grid) { return {grid.zeros(), grid.zeros()}; }
    static StatePair zeros(std::size_t n) {
        const auto m = static_cast<Eigen::Index>(n);
        return {ScalarField::Zero(m), ScalarField::Zero(m)};
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(u.size()); }
    StatePair swapped() const { return {v, u}; }
    bool all_finite() const { return u.allFinite() && v.allFinite(); }

    StatePair& operator+=(const StatePair& o) {
        u += o.u;
        v += o.v;
        return *this;
    }
    StatePair& operator-=(const StatePair& o) {
        u -= o.u;
        v -= o.v;
        return *this;
    }
    StatePair& operator*=(double s) {
        u *= s;
        v *= s;
        return *this;
    }
    friend StatePair operator+(StatePair a, const StatePair& b) { return a += b; }
    friend StatePair operator-(StatePair a, const StatePair& b) { return a -= b; }
    friend StatePair operator*(double s, StatePair a) { return a *= s; }
    friend StatePair operator*(StatePair a, double s) { return a *= s; }
    friend StatePair operator-(StatePair a) { return a *= -1.0; }
    friend bool operator==(const StatePair& a, const StatePair& b) {
        return a.u == b.u && a.v == b.v;
    }
};

/// ⟨a, b⟩_X = ⟨a.u, K b.u⟩ + ⟨a.v, K b.v⟩.
inline double x_product(const Discretization& disc, const StatePair& a, const StatePair& b) {
    return disc.dirichlet_product(a.u, b.u) + disc.dirichlet_product(a.v, b.v);
}

inline double x_norm(const Discretization& disc, const StatePair& a) {
    return std::sqrt(std::max(0.0, x_product(disc, a, a)));
}

/// K applied componentwise; lets repeated products against a fixed element
/// reduce to plain dot products.
inline StatePair apply_stiffness(const Discretization& disc, const StatePair& a) {
    return {disc.stiffness().apply(a.u), disc.stiffness().apply(a.v)};
}

inline double euclidean_dot(const StatePair& a, const StatePair& b) {
    return a.u.dot(b.u) + a.v.dot(b.v);
}

}  // namespace linksaddle
