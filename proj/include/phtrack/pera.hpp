#pragma once
// Reduced 3-DoF model of the PERA robotic arm (shoulder pitch, shoulder
// yaw, elbow pitch), with analytic potential gradient and mass-matrix
// derivatives.

#include "phtrack/model.hpp"

namespace phtrack {

/// PERA parameters, SI units. Defaults are the identified values of the
/// physical system.
struct PeraParams {
    double g = 9.81;    ///< gravity [m/s^2]
    double L1 = 0.32;   ///< upper-arm length [m]
    double L2 = 0.48;   ///< forearm length [m]
    double m1 = 2.9;    ///< upper-arm mass [kg]
    double m2 = 1.0;    ///< forearm mass [kg]
    double I1 = 0.03;   ///< shoulder-pitch inertia [kg m^2]
    double I2 = 4e-3;   ///< shoulder-yaw inertia [kg m^2]
    double I3 = 0.02;   ///< elbow-pitch inertia [kg m^2]
};

/// Builds the 3-DoF PERA model. All parameters must be strictly positive.
inline MechModel pera_model(const PeraParams& pp = {}) {
    const double vals[] = {pp.g, pp.L1, pp.L2, pp.m1, pp.m2, pp.I1, pp.I2, pp.I3};
    const char* names[] = {"g", "L1", "L2", "m1", "m2", "I1", "I2", "I3"};
    for (int i = 0; i < 8; ++i) {
        if (!(vals[i] > 0.0) || !std::isfinite(vals[i])) {
            throw std::invalid_argument(std::string("pera_model: parameter ") + names[i] + " must be strictly positive");
        }
    }

    const double a = (pp.m1 + pp.m2) * pp.L1 * pp.L1;
    const double c1 = (pp.m1 / 3.0 + pp.m2) * pp.g * pp.L1;  // shoulder gravity lever
    const double c2 = pp.m2 * pp.g * pp.L2 / 3.0;            // forearm gravity lever

    MechModel m;
    m.n = 3;
    m.name = "pera";
    m.params = {{"g", pp.g},   {"L1", pp.L1}, {"L2", pp.L2}, {"m1", pp.m1},
                {"m2", pp.m2}, {"I1", pp.I1}, {"I2", pp.I2}, {"I3", pp.I3},
                {"a", a}};

    const double I1 = pp.I1, I2 = pp.I2, I3 = pp.I3;

    m.mass_matrix = [=](const Vec& q) {
        const double s1 = std::sin(q[0]), cos1 = std::cos(q[0]);
        Mat M(3, 3);
        M << I1 + I2 + I3 + a * s1 * s1, 0.0, I3 * cos1,
             0.0, I2 + I3 + a, 0.0,
             I3 * cos1, 0.0, I3;
        return M;
    };

    m.potential = [=](const Vec& q) {
        const double b = std::cos(q[1]) * std::sin(q[0]) * std::sin(q[2]) -
                         std::cos(q[0]) * std::cos(q[2]);
        return -c1 * std::cos(q[0]) + c2 * b;
    };

    m.grad_potential = [=](const Vec& q) {
        const double s1 = std::sin(q[0]), cos1 = std::cos(q[0]);
        const double s2 = std::sin(q[1]), cos2 = std::cos(q[1]);
        const double s3 = std::sin(q[2]), cos3 = std::cos(q[2]);
        Vec g(3);
        g[0] = c1 * s1 + c2 * (cos2 * cos1 * s3 + s1 * cos3);
        g[1] = -c2 * s2 * s1 * s3;
        g[2] = c2 * (cos2 * s1 * cos3 + cos1 * s3);
        return g;
    };

    m.mass_matrix_grad = [=](const Vec& q) {
        const double s1 = std::sin(q[0]), cos1 = std::cos(q[0]);
        std::vector<Mat> dM(3, Mat::Zero(3, 3));
        dM[0] << 2.0 * a * s1 * cos1, 0.0, -I3 * s1,
                 0.0, 0.0, 0.0,
                 -I3 * s1, 0.0, 0.0;
        return dM;
    };

    return m;
}

}  // namespace phtrack
