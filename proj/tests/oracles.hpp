#pragma once

// Independent reference solutions used by the tests.

#include <array>
#include <cmath>
#include <vector>

namespace oracle {

/// Positive solution of −w″ = w³, w(0) = w(1) = 0 sampled at x_i = i/(n+1),
/// i = 1..n, by RK4 shooting on the initial slope. n + 1 must divide 2^16.
inline std::vector<double> lane_emden_cubic(int n) {
    constexpr int kSteps = 1 << 16;
    const double h = 1.0 / kSteps;
    auto integrate = [&](double slope, std::vector<double>* nodes) {
        std::array<double, 2> y{0.0, slope};
        auto rhs = [](const std::array<double, 2>& s) { return std::array<double, 2>{s[1], -s[0] * s[0] * s[0]}; };
        const int stride = kSteps / (n + 1);
        for (int k = 0; k < kSteps; ++k) {
            if (nodes && k > 0 && k % stride == 0) nodes->push_back(y[0]);
            const auto k1 = rhs(y);
            const auto k2 = rhs({y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
            const auto k3 = rhs({y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
            const auto k4 = rhs({y[0] + h * k3[0], y[1] + h * k3[1]});
            y[0] += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
            y[1] += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
        }
        return y[0];
    };
    // w(1) > 0 for slopes below the root, < 0 above it (first zero moves inside)
    double lo = 1.0, hi = 30.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (integrate(mid, nullptr) > 0.0 ? lo : hi) = mid;
    }
    std::vector<double> nodes;
    integrate(0.5 * (lo + hi), &nodes);
    return nodes;
}

}  // namespace oracle
