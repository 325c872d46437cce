#pragma once
// Shared fixtures for the test suites: seeded random sampling and small
// synthetic models with known closed-form behavior.

#include "phtrack/model.hpp"

#include <random>

namespace support {

using phtrack::Mat;
using phtrack::MechModel;
using phtrack::Vec;

inline Vec random_vec(std::mt19937_64& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = d(rng);
    return v;
}

/// Constant mass matrix, zero potential.
inline MechModel constant_mass_model(const Mat& M) {
    MechModel m;
    m.n = static_cast<int>(M.rows());
    m.name = "constant-mass";
    m.mass_matrix = [M](const Vec&) { return M; };
    m.potential = [](const Vec&) { return 0.0; };
    m.grad_potential = [n = m.n](const Vec&) { return Vec::Zero(n).eval(); };
    m.mass_matrix_grad = [n = m.n](const Vec&) { return std::vector<Mat>(n, Mat::Zero(n, n)); };
    return m;
}

/// M(q) loses positive definiteness at q1 = 0.
inline MechModel degenerate_model() {
    MechModel m;
    m.n = 2;
    m.name = "degenerate";
    m.mass_matrix = [](const Vec& q) {
        Mat M(2, 2);
        M << q[0] * q[0], 0.0, 0.0, 1.0;
        return M;
    };
    m.potential = [](const Vec&) { return 0.0; };
    return m;
}

/// Configuration-dependent SPD mass matrix with nonzero potential, for
/// exercising generic n = 2 paths that PERA's structure would hide.
inline MechModel twisty_model() {
    MechModel m;
    m.n = 2;
    m.name = "twisty";
    m.mass_matrix = [](const Vec& q) {
        const double c = 0.3 * std::sin(q[0]) + 0.1 * std::cos(q[1]);
        Mat M(2, 2);
        M << 2.0 + std::sin(q[1]) * 0.5, c, c, 1.5 + 0.4 * std::cos(q[0]);
        return M;
    };
    m.potential = [](const Vec& q) { return 2.0 * std::cos(q[0]) + 0.7 * std::sin(q[0] + q[1]); };
    return m;
}

}  // namespace support
