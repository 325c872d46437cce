#pragma once
// Built-in verification suite: the structural properties the library is
// supposed to guarantee, each reduced to a sampled numerical check with an
// explicit bound. Fault-injection hooks exist so the checks themselves can
// be shown to detect broken math.

#include "phtrack/pera.hpp"
#include "phtrack/simulate.hpp"

#include <random>

namespace phtrack {

/// Self-test hooks: deliberately corrupt one quantity inside a check to
/// confirm the check fails.
enum class FaultInjection {
    None,
    GyroSign,        ///< flip the sign of one gyroscopic-matrix entry
    DropDesiredGyro  ///< omit the desired-gyroscopic term from the feedforward
};

inline FaultInjection fault_from_name(const std::string& name) {
    if (name.empty() || name == "none") return FaultInjection::None;
    if (name == "gyro-sign") return FaultInjection::GyroSign;
    if (name == "drop-jd") return FaultInjection::DropDesiredGyro;
    throw std::invalid_argument("unknown fault injection '" + name + "' (expected gyro-sign or drop-jd)");
}

struct CheckResult {
    std::string name;
    bool pass = false;
    double worst = 0.0;
    double bound = 0.0;
    std::string detail;
};

namespace verifydetail {

inline Vec random_vec(std::mt19937_64& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = d(rng);
    return v;
}

/// Feedforward with an optional injected fault (desired-gyroscopic term dropped).
inline Vec feedforward_maybe_faulty(const MechModel& model, const TrajectorySample& s, bool drop_jd) {
    if (!drop_jd) return feedforward(model, s);
    const PlvccFrame frame = factorize(model, s.q_d);
    Vec ddt = frame.PsiInv * s.qd_ddot;
    for (int k = 0; k < model.n; ++k) {
        const Mat dPsiInv_k = -frame.PsiInv * frame.psi_partial(k) * frame.PsiInv;
        ddt += s.qd_dot[k] * (dPsiInv_k * s.qd_dot);
    }
    return frame.PsiInv.transpose() * ddt + potential_gradient(model, s.q_d);
}

/// Open-loop integration under the feedforward from matched initial
/// conditions; returns the sup position deviation from the trajectory.
inline double feasibility_residual(const MechModel& model, const Trajectory& traj, double t_end,
                                   double dt, bool drop_jd) {
    const TrajectorySample s0 = traj.sample(0.0);
    Vec y(2 * model.n);
    y.head(model.n) = s0.q_d;
    y.segment(model.n, model.n) = model.mass_matrix(s0.q_d) * s0.qd_dot;
    const auto rhs = [&](double t, const Vec& s) {
        const Vec u = feedforward_maybe_faulty(model, traj.sample(t), drop_jd);
        const auto [qdot, pdot] = open_loop_rhs(model, {s.head(model.n), s.segment(model.n, model.n)}, u);
        Vec ds(2 * model.n);
        ds.head(model.n) = qdot;
        ds.segment(model.n, model.n) = pdot;
        return ds;
    };
    const auto steps = static_cast<long>(std::llround(t_end / dt));
    double worst = 0.0;
    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        y = rk4_step(rhs, y, t, dt);
        const double dev = (y.head(model.n) - traj.sample(t + dt).q_d).cwiseAbs().maxCoeff();
        worst = std::max(worst, dev);
        if (!std::isfinite(dev)) return std::numeric_limits<double>::infinity();
        if (worst > 10.0) break;  // hopeless; stop early
    }
    return worst;
}

}  // namespace verifydetail

inline std::vector<CheckResult> run_verification(bool fast, FaultInjection fault = FaultInjection::None,
                                                 std::uint64_t seed = 20240915) {
    using namespace verifydetail;
    std::vector<CheckResult> out;
    const MechModel model = pera_model();
    std::mt19937_64 rng(seed);
    const int samples = fast ? 100 : 1000;

    {  // factorization: Psi Psi^T = M^{-1} and Psi Psi^{-1} = I
        CheckResult r{"factorization", false, 0.0, 1e-10, ""};
        for (int k = 0; k < samples; ++k) {
            const Vec q = random_vec(rng, 3, -std::numbers::pi, std::numbers::pi);
            const PsiPair pair = psi_pair(model, q);
            const Mat Minv = model.mass_matrix(q).inverse();
            const double rel = (pair.Psi * pair.Psi.transpose() - Minv).norm() / Minv.norm();
            const double inv = (pair.Psi * pair.PsiInv - Mat::Identity(3, 3)).norm();
            r.worst = std::max({r.worst, rel, inv});
        }
        r.pass = r.worst <= r.bound;
        r.detail = std::to_string(samples) + " random q";
        out.push_back(r);
    }

    {  // Lie-bracket antisymmetry
        CheckResult r{"bracket-antisymmetry", false, 0.0, 1e-8, ""};
        for (int k = 0; k < samples / 4; ++k) {
            const Vec q = random_vec(rng, 3, -std::numbers::pi, std::numbers::pi);
            const PlvccFrame frame = factorize(model, q);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    r.worst = std::max(r.worst, (lie_bracket(frame, i, j) + lie_bracket(frame, j, i)).norm());
        }
        r.pass = r.worst <= r.bound;
        out.push_back(r);
    }

    {  // gyroscopic-matrix skew-symmetry, relative to 1 + |P|
        CheckResult r{"gyro-skew-symmetry", false, 0.0, 1e-6, ""};
        for (int k = 0; k < samples / 4; ++k) {
            const Vec q = random_vec(rng, 3, -std::numbers::pi, std::numbers::pi);
            const Vec P = random_vec(rng, 3, -2.0, 2.0);
            const PlvccFrame frame = factorize(model, q);
            Mat J = gyroscopic_matrix(frame, P);
            if (fault == FaultInjection::GyroSign) J(0, 1) = -J(0, 1);
            r.worst = std::max(r.worst, (J + J.transpose()).norm() / (1.0 + P.norm()));
        }
        r.pass = r.worst <= r.bound;
        out.push_back(r);
    }

    {  // trajectory derivative consistency against central differences
        CheckResult r{"derivative-consistency", false, 0.0, 1e-5, ""};
        const auto circle = std::make_shared<CircleTrajectory>(0.2, 10.0, 0.48);
        const ApproachBlend blended(circle, 5.0, Vec{{0.5, -0.2, 0.1}});
        const double h = 1e-5;
        for (int k = 1; k < (fast ? 100 : 400); ++k) {
            const double t = 12.0 * k / 400.0 + 0.3 * h;
            const auto sp = blended.sample(t + h), sm = blended.sample(t - h), s = blended.sample(t);
            r.worst = std::max(r.worst, ((sp.q_d - sm.q_d) / (2 * h) - s.qd_dot).cwiseAbs().maxCoeff());
            r.worst = std::max(r.worst, ((sp.qd_dot - sm.qd_dot) / (2 * h) - s.qd_ddot).cwiseAbs().maxCoeff());
        }
        r.pass = r.worst <= r.bound;
        out.push_back(r);
    }

    {  // open-loop energy conservation with u = 0
        CheckResult r{"energy-conservation", false, 0.0, 1e-6, ""};
        SimConfig cfg;
        cfg.dt = 1e-4;
        cfg.t_end = fast ? 2.0 : 10.0;
        cfg.q0 = Vec{{0.3, -0.4, 0.5}};
        cfg.p0 = Vec{{0.05, 0.1, -0.02}};
        cfg.record_stride = 20;
        const ConstantSetpoint still(Vec::Zero(3));
        const SimTrace trace = simulate(model, std::monostate{}, still, cfg);
        const Metrics m = metrics(trace, 0.0, ActuatorLimits{Vec::Constant(3, -1e9), Vec::Constant(3, 1e9)});
        r.worst = m.energy_drift.value_or(std::numeric_limits<double>::infinity());
        r.detail = "u = 0 over " + std::to_string(cfg.t_end) + " s at dt = 1e-4";
        r.pass = r.worst <= r.bound;
        out.push_back(r);
    }

    {  // feasibility: the feedforward reproduces the trajectory open loop
        CheckResult r{"feasibility-residual", false, 0.0, 1e-3, ""};
        const double dt = fast ? 1e-3 : 1e-4;
        const auto circle = std::make_shared<CircleTrajectory>(0.2, 10.0, 0.48);
        const bool drop = fault == FaultInjection::DropDesiredGyro;
        const double on_circle = feasibility_residual(model, *circle, 10.0, dt, drop);
        // The approach ramp from a tilted start exercises the desired-
        // gyroscopic term, which vanishes identically on the circle itself.
        const ApproachBlend ramped(circle, 10.0, Vec{{0.8, -0.3, 0.2}});
        const double on_ramp = feasibility_residual(model, ramped, fast ? 10.0 : 20.0, dt, drop);
        r.worst = std::max(on_circle, on_ramp);
        r.detail = "circle " + std::to_string(on_circle) + ", ramped " + std::to_string(on_ramp);
        r.pass = r.worst <= r.bound;
        out.push_back(r);
    }

    {  // storage function non-increasing along closed-loop runs
        CheckResult r{"lyapunov-monotonicity", false, 0.0, 0.5, "violations (bound: none allowed)"};
        const SaturatedGains gains(Vec{{11.0, 1.7, 6.0}}, Vec{{40.0, 30.0, 30.0}},
                                   Vec{{1.0, 2.0, 0.1}}.asDiagonal(), Vec{{0.4, 0.11, 0.5}}.asDiagonal());
        SimConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_end = fast ? 5.0 : 20.0;
        cfg.q0 = Vec{{0.5, -0.4, 1.2}};
        const ConstantSetpoint target(Vec{{0.2, 0.1, 0.6}});
        const SimTrace trace = simulate(model, GainProfile(gains), target, cfg);
        const DissipationReport rep = dissipation_check(trace, GainProfile(gains));
        r.worst = rep.violations;
        r.pass = rep.violations == 0;
        out.push_back(r);
    }

    return out;
}

}  // namespace phtrack
