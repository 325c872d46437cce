#pragma once
// Smooth, bounded desired trajectories with analytic first and second
// derivatives: a joint-space circle for a 3-DoF arm, constant set-points,
// and a C^2 blended approach phase.

#include "phtrack/model.hpp"

#include <memory>
#include <numbers>

namespace phtrack {

/// One sample of a desired trajectory.
struct TrajectorySample {
    double t = 0.0;
    Vec q_d;
    Vec qd_dot;
    Vec qd_ddot;
};

/// Immutable trajectory generator, pure in t.
class Trajectory {
public:
    virtual ~Trajectory() = default;
    virtual int dim() const = 0;
    virtual TrajectorySample sample(double t) const = 0;
};

/**
 * Joint-space parameterization of a circular end-effector path for the
 * 3-DoF arm:
 *   q_d(t) = [ 0,
 *              asin(r/L2) sin(2 pi t / T),
 *              pi/2 - asin(r/L2) cos(2 pi t / T) ].
 *
 * r is the circle radius [m], T the period [s], L2 the forearm length [m].
 */
class CircleTrajectory final : public Trajectory {
public:
    CircleTrajectory(double r, double T, double L2) : T_(T) {
        if (!(T > 0.0)) throw std::invalid_argument("CircleTrajectory: period T must be positive");
        if (!(r > 0.0 && r < L2)) {
            std::ostringstream os;
            os << "CircleTrajectory: radius must satisfy 0 < r < L2 (r=" << r << ", L2=" << L2 << ")";
            throw std::invalid_argument(os.str());
        }
        amp_ = std::asin(r / L2);
        omega_ = 2.0 * std::numbers::pi / T;
    }

    int dim() const override { return 3; }

    TrajectorySample sample(double t) const override {
        // Phase reduction keeps samples exactly periodic and accurate at large t.
        const double theta = omega_ * std::fmod(t, T_);
        const double s = std::sin(theta), c = std::cos(theta);
        TrajectorySample out;
        out.t = t;
        out.q_d = Vec{{0.0, amp_ * s, std::numbers::pi / 2.0 - amp_ * c}};
        out.qd_dot = Vec{{0.0, amp_ * omega_ * c, amp_ * omega_ * s}};
        out.qd_ddot = Vec{{0.0, -amp_ * omega_ * omega_ * s, amp_ * omega_ * omega_ * c}};
        return out;
    }

    double period() const { return T_; }

private:
    double T_;
    double amp_;
    double omega_;
};

/// Constant set-point: q_d = q*, derivatives zero.
class ConstantSetpoint final : public Trajectory {
public:
    explicit ConstantSetpoint(Vec q_star) : q_star_(std::move(q_star)) {
        require_finite(q_star_, "ConstantSetpoint: q*");
    }

    int dim() const override { return static_cast<int>(q_star_.size()); }

    TrajectorySample sample(double t) const override {
        TrajectorySample out;
        out.t = t;
        out.q_d = q_star_;
        out.qd_dot = Vec::Zero(q_star_.size());
        out.qd_ddot = Vec::Zero(q_star_.size());
        return out;
    }

private:
    Vec q_star_;
};

/**
 * Drives the output from a start configuration q0 onto an inner trajectory
 * over [0, t_ramp] using the C^2 smoothstep s(x) = 6x^5 - 15x^4 + 10x^3:
 *   q_d(t) = q0 + s(t/t_ramp) (inner.q_d(t) - q0).
 * For t >= t_ramp the inner samples are returned unchanged.
 */
class ApproachBlend final : public Trajectory {
public:
    ApproachBlend(std::shared_ptr<const Trajectory> inner, double t_ramp, Vec q0)
        : inner_(std::move(inner)), t_ramp_(t_ramp), q0_(std::move(q0)) {
        if (!inner_) throw std::invalid_argument("ApproachBlend: inner trajectory is null");
        if (!(t_ramp > 0.0)) throw std::invalid_argument("ApproachBlend: t_ramp must be positive");
        require_finite(q0_, "ApproachBlend: q0");
        if (q0_.size() != inner_->dim()) throw std::invalid_argument("ApproachBlend: q0 dimension mismatch");
    }

    int dim() const override { return inner_->dim(); }

    TrajectorySample sample(double t) const override {
        if (t >= t_ramp_) return inner_->sample(t);
        const TrajectorySample in = inner_->sample(t);
        const double x = std::clamp(t / t_ramp_, 0.0, 1.0);
        const double s = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
        const double sd = 30.0 * x * x * (x - 1.0) * (x - 1.0) / t_ramp_;
        const double sdd = 60.0 * x * (2.0 * x - 1.0) * (x - 1.0) / (t_ramp_ * t_ramp_);
        const Vec d = in.q_d - q0_;
        TrajectorySample out;
        out.t = t;
        out.q_d = q0_ + s * d;
        out.qd_dot = sd * d + s * in.qd_dot;
        out.qd_ddot = sdd * d + 2.0 * sd * in.qd_dot + s * in.qd_ddot;
        return out;
    }

    double ramp_time() const { return t_ramp_; }

private:
    std::shared_ptr<const Trajectory> inner_;
    double t_ramp_;
    Vec q0_;
};

/// Per-axis suprema of |q_d|, |qd_dot|, |qd_ddot| over [0, horizon].
struct TrajectoryBounds {
    Vec sup_q;
    Vec sup_qdot;
    Vec sup_qddot;
};

inline TrajectoryBounds boundedness_report(const Trajectory& traj, double horizon, int samples = 4001) {
    TrajectoryBounds b;
    b.sup_q = Vec::Zero(traj.dim());
    b.sup_qdot = Vec::Zero(traj.dim());
    b.sup_qddot = Vec::Zero(traj.dim());
    for (int k = 0; k < samples; ++k) {
        const double t = horizon * static_cast<double>(k) / (samples - 1);
        const TrajectorySample s = traj.sample(t);
        b.sup_q = b.sup_q.cwiseMax(s.q_d.cwiseAbs());
        b.sup_qdot = b.sup_qdot.cwiseMax(s.qd_dot.cwiseAbs());
        b.sup_qddot = b.sup_qddot.cwiseMax(s.qd_ddot.cwiseAbs());
    }
    return b;
}

}  // namespace phtrack
