#pragma once
// Fixed-step explicit integrators on flat state vectors.

#include "phtrack/model.hpp"

namespace phtrack {

enum class Integrator { Rk4, Heun };

inline const char* integrator_name(Integrator m) {
    return m == Integrator::Rk4 ? "rk4" : "heun";
}

namespace detail {
inline void check_stage(const Vec& k, double t) {
    if (!k.allFinite()) {
        throw std::runtime_error("integrator: non-finite derivative at t = " + std::to_string(t));
    }
}
}  // namespace detail

/// Classic 4th-order Runge-Kutta step.
template <class Rhs>
Vec rk4_step(Rhs&& rhs, const Vec& y, double t, double dt) {
    const Vec k1 = rhs(t, y);
    detail::check_stage(k1, t);
    const Vec k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1);
    detail::check_stage(k2, t + 0.5 * dt);
    const Vec k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2);
    detail::check_stage(k3, t + 0.5 * dt);
    const Vec k4 = rhs(t + dt, y + dt * k3);
    detail::check_stage(k4, t + dt);
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Heun (explicit trapezoid) step, 2nd order.
template <class Rhs>
Vec heun_step(Rhs&& rhs, const Vec& y, double t, double dt) {
    const Vec k1 = rhs(t, y);
    detail::check_stage(k1, t);
    const Vec k2 = rhs(t + dt, y + dt * k1);
    detail::check_stage(k2, t + dt);
    return y + (0.5 * dt) * (k1 + k2);
}

template <class Rhs>
Vec step(Rhs&& rhs, const Vec& y, double t, double dt, Integrator method = Integrator::Rk4) {
    return method == Integrator::Rk4 ? rk4_step(rhs, y, t, dt) : heun_step(rhs, y, t, dt);
}

}  // namespace phtrack
