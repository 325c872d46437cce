#pragma once
// Mechanical-system abstraction: configuration-dependent mass matrix,
// potential energy, and the open-loop dynamics in (q, p) coordinates.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace phtrack {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Central-difference step for a coordinate, relative above magnitude 1.
inline double fd_step(double xk, double scale = 1e-6) {
    return scale * std::max(1.0, std::abs(xk));
}

inline std::string format_vec(const Vec& v) {
    std::ostringstream os;
    os << "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << "]";
    return os.str();
}

/// Plant state: generalized positions q [rad] and momenta p [kg m^2 rad/s].
struct PhState {
    Vec q;
    Vec p;
};

/**
 * n-DoF mechanical system with Hamiltonian
 *   H(q, p) = 1/2 p^T M(q)^{-1} p + V(q).
 *
 * mass_matrix and potential are required. grad_potential and
 * mass_matrix_grad (the list of dM/dq_k) are optional analytic overrides;
 * when absent, central finite differences are used instead.
 *
 * Instances are immutable after construction and safe to share across
 * concurrent simulations.
 */
struct MechModel {
    int n = 0;
    std::string name;
    std::function<Mat(const Vec&)> mass_matrix;
    std::function<double(const Vec&)> potential;
    std::function<Vec(const Vec&)> grad_potential;                 // optional
    std::function<std::vector<Mat>(const Vec&)> mass_matrix_grad;  // optional
    std::map<std::string, double> params;

    bool has_grad_potential() const { return static_cast<bool>(grad_potential); }
    bool has_mass_matrix_grad() const { return static_cast<bool>(mass_matrix_grad); }
};

inline void require_dim(const MechModel& model, const Vec& v, const char* what) {
    if (v.size() != model.n) {
        std::ostringstream os;
        os << what << ": expected dimension " << model.n << ", got " << v.size();
        throw std::invalid_argument(os.str());
    }
}

inline void require_finite(const Vec& v, const char* what) {
    if (!v.allFinite()) {
        throw std::invalid_argument(std::string(what) + " contains a non-finite entry: " + format_vec(v));
    }
}

/// Cholesky factorization of M(q); throws naming q if M is not positive definite.
inline Eigen::LLT<Mat> mass_cholesky(const MechModel& model, const Vec& q) {
    Mat M = model.mass_matrix(q);
    Eigen::LLT<Mat> llt(M);
    if (llt.info() != Eigen::Success) {
        const double min_eig = Eigen::SelfAdjointEigenSolver<Mat>(M).eigenvalues().minCoeff();
        std::ostringstream os;
        os << "mass matrix not positive definite at q = " << format_vec(q)
           << " (smallest eigenvalue " << min_eig << ")";
        throw std::runtime_error(os.str());
    }
    return llt;
}

/**
 * Central-difference gradient of a scalar field, O(h^2) accurate.
 * Per-axis step h_k = scale * max(1, |q_k|).
 */
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& q,
                       double scale = 1e-6) {
    Vec g(q.size());
    Vec qp = q, qm = q;
    for (Eigen::Index k = 0; k < q.size(); ++k) {
        const double h = fd_step(q[k], scale);
        qp[k] = q[k] + h;
        qm[k] = q[k] - h;
        const double fp = f(qp);
        const double fm = f(qm);
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw std::runtime_error("fd_gradient: non-finite field evaluation near q = " + format_vec(q));
        }
        g[k] = (fp - fm) / (2.0 * h);
        qp[k] = q[k];
        qm[k] = q[k];
    }
    return g;
}

/// dV/dq, analytic when the model provides it, finite differences otherwise.
inline Vec potential_gradient(const MechModel& model, const Vec& q) {
    require_dim(model, q, "potential_gradient: q");
    if (model.has_grad_potential()) return model.grad_potential(q);
    return fd_gradient(model.potential, q);
}

/// Total energy H(q, p) = 1/2 p^T M(q)^{-1} p + V(q).
inline double hamiltonian(const MechModel& model, const PhState& s) {
    require_dim(model, s.q, "hamiltonian: q");
    require_dim(model, s.p, "hamiltonian: p");
    require_finite(s.q, "hamiltonian: q");
    require_finite(s.p, "hamiltonian: p");
    const auto llt = mass_cholesky(model, s.q);
    const double kinetic = 0.5 * s.p.dot(llt.solve(s.p));
    return kinetic + model.potential(s.q);
}

/**
 * Open-loop dynamics of the plant:
 *   qdot = M(q)^{-1} p
 *   pdot = -dH/dq(q, p) + u
 *
 * The configuration gradient of the kinetic term uses the analytic
 * mass-matrix derivatives when available and central differences on
 * M^{-1} otherwise.
 */
inline std::pair<Vec, Vec> open_loop_rhs(const MechModel& model, const PhState& s, const Vec& u) {
    require_dim(model, s.q, "open_loop_rhs: q");
    require_dim(model, s.p, "open_loop_rhs: p");
    require_dim(model, u, "open_loop_rhs: u");
    require_finite(u, "open_loop_rhs: u");

    const auto llt = mass_cholesky(model, s.q);
    const Vec qdot = llt.solve(s.p);

    Vec kinetic_grad(model.n);
    if (model.has_mass_matrix_grad()) {
        // d/dq_k (1/2 p^T M^{-1} p) = -1/2 w^T (dM/dq_k) w with w = M^{-1} p
        const std::vector<Mat> dM = model.mass_matrix_grad(s.q);
        for (int k = 0; k < model.n; ++k) kinetic_grad[k] = -0.5 * qdot.dot(dM[k] * qdot);
    } else {
        const Vec& p = s.p;
        kinetic_grad = fd_gradient(
            [&](const Vec& q) {
                Eigen::LLT<Mat> l(model.mass_matrix(q));
                if (l.info() != Eigen::Success) {
                    throw std::runtime_error("open_loop_rhs: mass matrix lost positive definiteness at q = " + format_vec(q));
                }
                return 0.5 * p.dot(l.solve(p));
            },
            s.q);
    }

    const Vec pdot = -(potential_gradient(model, s.q) + kinetic_grad) + u;
    return {qdot, pdot};
}

}  // namespace phtrack
