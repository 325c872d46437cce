#pragma once
// Trajectory-tracking controllers that use only position measurements:
// a dynamic extension replaces velocity feedback, the stabilizing term is
// either linear or saturated per axis, and the feedforward is evaluated
// entirely along the desired trajectory.

#include "phtrack/plvcc.hpp"
#include "phtrack/trajectory.hpp"

#include <numbers>

namespace phtrack {

namespace detail {

inline void require_positive_entries(const Vec& v, const char* name) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
            std::ostringstream os;
            os << name << " must be elementwise positive, got " << name << "[" << i << "] = " << v[i];
            throw std::invalid_argument(os.str());
        }
    }
}

/// Positive definiteness of the symmetric part.
inline void require_positive_definite(const Mat& A, const char* name) {
    if (A.rows() != A.cols()) throw std::invalid_argument(std::string(name) + " must be square");
    const Mat sym = 0.5 * (A + A.transpose());
    const double min_eig = Eigen::SelfAdjointEigenSolver<Mat>(sym).eigenvalues().minCoeff();
    if (!(min_eig > 0.0)) {
        std::ostringstream os;
        os << name << " must be positive definite (smallest symmetric-part eigenvalue " << min_eig << ")";
        throw std::invalid_argument(os.str());
    }
}

}  // namespace detail

/// Gains of the saturated controller: per-axis saturation amplitudes alpha
/// [N m] and slopes beta [1/rad], plus positive definite Kc and Rc.
struct SaturatedGains {
    Vec alpha;
    Vec beta;
    Mat Kc;
    Mat Rc;

    SaturatedGains(Vec alpha_, Vec beta_, Mat Kc_, Mat Rc_)
        : alpha(std::move(alpha_)), beta(std::move(beta_)), Kc(std::move(Kc_)), Rc(std::move(Rc_)) {
        detail::require_positive_entries(alpha, "alpha");
        detail::require_positive_entries(beta, "beta");
        if (beta.size() != alpha.size()) throw std::invalid_argument("SaturatedGains: alpha/beta size mismatch");
        detail::require_positive_definite(Kc, "Kc");
        detail::require_positive_definite(Rc, "Rc");
    }

    int dim() const { return static_cast<int>(alpha.size()); }
};

/// Gains of the unsaturated controller: positive definite Ki, Kc, Rc.
struct UnsaturatedGains {
    Mat Ki;
    Mat Kc;
    Mat Rc;

    UnsaturatedGains(Mat Ki_, Mat Kc_, Mat Rc_)
        : Ki(std::move(Ki_)), Kc(std::move(Kc_)), Rc(std::move(Rc_)) {
        detail::require_positive_definite(Ki, "Ki");
        detail::require_positive_definite(Kc, "Kc");
        detail::require_positive_definite(Rc, "Rc");
    }

    int dim() const { return static_cast<int>(Ki.rows()); }
};

/// Dynamic-extension state of the controller.
struct ControllerState {
    Vec x_c;
};

/// Control command and its decomposition; u = u_grav + u_hat + u_ff holds
/// exactly by construction.
struct ControlOutput {
    Vec u;       ///< total command [N m]
    Vec u_ff;    ///< velocity feedforward (vanishes on set-points)
    Vec u_grav;  ///< gravity compensation dV/dq at the measured q
    Vec u_hat;   ///< stabilizing term
};

/// Per-axis saturated force sum_i e_i alpha_i tanh(beta_i z_i).
inline Vec saturated_force(const SaturatedGains& g, const Vec& z) {
    Vec f(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) f[i] = g.alpha[i] * std::tanh(g.beta[i] * z[i]);
    return f;
}

/// Desired transformed momentum P_d = Psi^{-1}(q_d) qd_dot.
inline Vec desired_momentum(const MechModel& model, const TrajectorySample& sample) {
    return psi_pair(model, sample.q_d).PsiInv * sample.qd_dot;
}

/**
 * Velocity feedforward: the torque that keeps the plant on a feasible
 * trajectory, minus the gravity contribution at q_d:
 *
 *   u_ff = Psi^{-T}(q_d) [ d/dt(Psi^{-1}(q_d) qd_dot) - J_d(t) Psi^{-1}(q_d) qd_dot ]
 *
 * with d/dt(Psi^{-1} qd_dot) expanded through the chain rule,
 * dPsi^{-1}/dq_k = -Psi^{-1} (dPsi/dq_k) Psi^{-1}.
 */
inline Vec velocity_feedforward(const MechModel& model, const TrajectorySample& sample,
                                PsiDeriv mode = PsiDeriv::FiniteDifference) {
    const PlvccFrame frame = factorize(model, sample.q_d, mode);
    const Vec Pd = frame.PsiInv * sample.qd_dot;
    Vec ddt = frame.PsiInv * sample.qd_ddot;
    for (int k = 0; k < model.n; ++k) {
        const Mat dPsiInv_k = -frame.PsiInv * frame.psi_partial(k) * frame.PsiInv;
        ddt += sample.qd_dot[k] * (dPsiInv_k * sample.qd_dot);
    }
    const Mat Jd = gyroscopic_matrix_desired(model, frame, sample.qd_dot);
    return frame.PsiInv.transpose() * (ddt - Jd * Pd);
}

/// Full feedforward u_d = velocity feedforward + dV/dq(q_d); the pair
/// (q_d, u_d) is an exact solution of the open-loop dynamics.
inline Vec feedforward(const MechModel& model, const TrajectorySample& sample,
                       PsiDeriv mode = PsiDeriv::FiniteDifference) {
    return velocity_feedforward(model, sample, mode) + potential_gradient(model, sample.q_d);
}

/// Dynamic-extension flow, saturated variant:
/// xc_dot = -Rc (sum_i e_i alpha_i tanh(beta_i z_i) + Kc x_c), z = q_err + x_c.
inline Vec controller_rhs_saturated(const SaturatedGains& g, const Vec& q_err, const ControllerState& cs) {
    const Vec z = q_err + cs.x_c;
    return -g.Rc * (saturated_force(g, z) + g.Kc * cs.x_c);
}

/// Dynamic-extension flow, linear variant: xc_dot = -Rc (Ki z + Kc x_c).
inline Vec controller_rhs_unsaturated(const UnsaturatedGains& g, const Vec& q_err, const ControllerState& cs) {
    const Vec z = q_err + cs.x_c;
    return -g.Rc * (g.Ki * z + g.Kc * cs.x_c);
}

/**
 * Saturated position-only tracking law:
 *
 *   u = dV/dq(q) - sum_i e_i alpha_i tanh(beta_i z_i) + u_ff(t)
 *
 * The arguments carry no plant momentum or velocity; the stabilizing term
 * satisfies |u_hat_i| < alpha_i for every z.
 */
inline ControlOutput control_saturated(const MechModel& model, const SaturatedGains& g, const Vec& q,
                                       const ControllerState& cs, const TrajectorySample& sample,
                                       PsiDeriv mode = PsiDeriv::FiniteDifference) {
    require_dim(model, q, "control_saturated: q");
    require_finite(q, "control_saturated: q");
    require_finite(cs.x_c, "control_saturated: x_c");
    ControlOutput out;
    const Vec z = (q - sample.q_d) + cs.x_c;
    out.u_hat = -saturated_force(g, z);
    out.u_grav = potential_gradient(model, q);
    out.u_ff = velocity_feedforward(model, sample, mode);
    out.u = out.u_grav + out.u_hat + out.u_ff;
    return out;
}

/// Linear position-only tracking law, u_hat = -Ki z.
inline ControlOutput control_unsaturated(const MechModel& model, const UnsaturatedGains& g, const Vec& q,
                                         const ControllerState& cs, const TrajectorySample& sample,
                                         PsiDeriv mode = PsiDeriv::FiniteDifference) {
    require_dim(model, q, "control_unsaturated: q");
    require_finite(q, "control_unsaturated: q");
    require_finite(cs.x_c, "control_unsaturated: x_c");
    ControlOutput out;
    const Vec z = (q - sample.q_d) + cs.x_c;
    out.u_hat = -(g.Ki * z);
    out.u_grav = potential_gradient(model, q);
    out.u_ff = velocity_feedforward(model, sample, mode);
    out.u = out.u_grav + out.u_hat + out.u_ff;
    return out;
}

/// Per-axis actuator limits, u_i(t) must stay in [u_min_i, u_max_i].
struct ActuatorLimits {
    Vec u_min;
    Vec u_max;
};

/**
 * Certified per-axis bound on the command of the saturated law:
 *
 *   B_i = sup_t |u_ff_i(t)| + sup_q |dV/dq_i(q)| + alpha_i
 *
 * The feedforward supremum is taken over [0, horizon] by dense sampling;
 * the gravity supremum over a dense grid on [-pi, pi]^n. Axes where
 * [-B_i, B_i] does not fit inside the actuator limits are flagged.
 */
struct SaturationBudget {
    Vec bound;
    Vec ff_sup;
    Vec grav_sup;
    std::vector<int> flagged;

    bool certified() const { return flagged.empty(); }
};

inline SaturationBudget saturation_budget(const MechModel& model, const SaturatedGains& g,
                                          const Trajectory& traj, double horizon,
                                          const ActuatorLimits& limits, int traj_samples = 2001,
                                          int grid_per_axis = 41) {
    SaturationBudget out;
    out.ff_sup = Vec::Zero(model.n);
    for (int k = 0; k < traj_samples; ++k) {
        const double t = horizon * static_cast<double>(k) / (traj_samples - 1);
        const Vec ff = velocity_feedforward(model, traj.sample(t));
        if (!ff.allFinite()) throw std::runtime_error("saturation_budget: non-finite feedforward sample at t = " + std::to_string(t));
        out.ff_sup = out.ff_sup.cwiseMax(ff.cwiseAbs());
    }

    out.grav_sup = Vec::Zero(model.n);
    Vec q(model.n);
    std::vector<int> idx(static_cast<size_t>(model.n), 0);
    const double lo = -std::numbers::pi, hi = std::numbers::pi;
    while (true) {
        for (int d = 0; d < model.n; ++d)
            q[d] = lo + (hi - lo) * static_cast<double>(idx[static_cast<size_t>(d)]) / (grid_per_axis - 1);
        const Vec dV = potential_gradient(model, q);
        if (!dV.allFinite()) throw std::runtime_error("saturation_budget: non-finite potential gradient at q = " + format_vec(q));
        out.grav_sup = out.grav_sup.cwiseMax(dV.cwiseAbs());
        int d = 0;
        while (d < model.n && ++idx[static_cast<size_t>(d)] == grid_per_axis) idx[static_cast<size_t>(d++)] = 0;
        if (d == model.n) break;
    }

    out.bound = out.ff_sup + out.grav_sup + g.alpha;
    for (int i = 0; i < model.n; ++i) {
        if (out.bound[i] > limits.u_max[i] || -out.bound[i] < limits.u_min[i]) out.flagged.push_back(i);
    }
    return out;
}

}  // namespace phtrack
