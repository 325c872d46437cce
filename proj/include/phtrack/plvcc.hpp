#pragma once
// Partial linearization via change of coordinates (PLvCC): a factor Psi of
// the inverse mass matrix, the transformed momenta P = Psi^T p that make the
// kinetic energy 1/2 P^T P, and the gyroscopic matrices built from Lie
// brackets of Psi's columns.

#include "phtrack/model.hpp"

namespace phtrack {

/// Light factor pair: Psi with M^{-1} = Psi Psi^T and its inverse.
///
/// Convention: with M = L L^T the lower Cholesky factorization (positive
/// diagonal), Psi = L^{-T} is upper triangular with positive diagonal and
/// Psi^{-1} = L^T. This makes the factor unique and deterministic.
struct PsiPair {
    Mat Psi;
    Mat PsiInv;
};

inline PsiPair psi_pair(const MechModel& model, const Vec& q) {
    require_dim(model, q, "psi_pair: q");
    const auto llt = mass_cholesky(model, q);
    const Mat L = llt.matrixL();
    PsiPair out;
    out.PsiInv = L.transpose();
    out.Psi = L.transpose().triangularView<Eigen::Upper>().solve(Mat::Identity(model.n, model.n));
    return out;
}

/// How the configuration derivatives of Psi are obtained.
enum class PsiDeriv {
    FiniteDifference,  ///< central differences on Psi(.), step 1e-6 * max(1, |q_k|)
    Analytic           ///< Cholesky differentiation; requires mass_matrix_grad
};

/**
 * Per-configuration factor frame: Psi, Psi^{-1}, and the column Jacobians
 * dPsi_k/dq (Jacobian of the k-th column of Psi viewed as a vector field).
 */
struct PlvccFrame {
    Vec q;
    Mat Psi;
    Mat PsiInv;
    std::vector<Mat> col_jacobians;  ///< col_jacobians[k](i, l) = d Psi(i,k) / d q_l

    /// Reslice of the same data: the matrix dPsi/dq_k.
    Mat psi_partial(int k) const {
        const auto n = Psi.rows();
        Mat d(n, n);
        for (Eigen::Index j = 0; j < n; ++j) d.col(j) = col_jacobians[static_cast<size_t>(j)].col(k);
        return d;
    }
};

namespace detail {

/// dPsi/dq_k for all k by central differences on the factor.
inline std::vector<Mat> psi_partials_fd(const MechModel& model, const Vec& q) {
    std::vector<Mat> parts(static_cast<size_t>(model.n));
    Vec qp = q, qm = q;
    for (int k = 0; k < model.n; ++k) {
        const double h = fd_step(q[k]);
        qp[k] = q[k] + h;
        qm[k] = q[k] - h;
        parts[static_cast<size_t>(k)] = (psi_pair(model, qp).Psi - psi_pair(model, qm).Psi) / (2.0 * h);
        qp[k] = q[k];
        qm[k] = q[k];
    }
    return parts;
}

/// dPsi/dq_k via differentiation of the Cholesky factorization:
/// with A = L^{-1} (dM/dq_k) L^{-T}, dL = L * Phi(A) where Phi keeps the
/// strict lower triangle and halves the diagonal, and dPsi = -Psi dL^T Psi.
inline std::vector<Mat> psi_partials_analytic(const MechModel& model, const Vec& q, const PsiPair& pair) {
    if (!model.has_mass_matrix_grad()) {
        throw std::invalid_argument("factorize: PsiDeriv::Analytic requires the model to provide mass_matrix_grad");
    }
    const int n = model.n;
    const Mat L = pair.PsiInv.transpose();  // lower Cholesky factor of M
    const std::vector<Mat> dM = model.mass_matrix_grad(q);
    std::vector<Mat> parts(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        Mat A = L.triangularView<Eigen::Lower>().solve(dM[static_cast<size_t>(k)]);
        A = L.triangularView<Eigen::Lower>().solve(A.transpose()).transpose();
        Mat phi = A.triangularView<Eigen::StrictlyLower>();
        phi.diagonal() = 0.5 * A.diagonal();
        const Mat dL = L * phi;
        parts[static_cast<size_t>(k)] = -pair.Psi * dL.transpose() * pair.Psi;
    }
    return parts;
}

inline std::vector<Mat> to_col_jacobians(const std::vector<Mat>& psi_partials, int n) {
    std::vector<Mat> cj(static_cast<size_t>(n), Mat(n, n));
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) cj[static_cast<size_t>(j)].col(k) = psi_partials[static_cast<size_t>(k)].col(j);
    return cj;
}

}  // namespace detail

/// Factor frame at q. Throws (reporting the smallest eigenvalue) when M(q)
/// is not positive definite.
inline PlvccFrame factorize(const MechModel& model, const Vec& q,
                            PsiDeriv mode = PsiDeriv::FiniteDifference) {
    const PsiPair pair = psi_pair(model, q);
    PlvccFrame frame;
    frame.q = q;
    frame.Psi = pair.Psi;
    frame.PsiInv = pair.PsiInv;
    const auto partials = (mode == PsiDeriv::Analytic)
                              ? detail::psi_partials_analytic(model, q, pair)
                              : detail::psi_partials_fd(model, q);
    frame.col_jacobians = detail::to_col_jacobians(partials, model.n);
    return frame;
}

/// P = Psi^T(q) p.
inline Vec transform_momentum(const PlvccFrame& frame, const Vec& p) {
    return frame.Psi.transpose() * p;
}

/// p = Psi^{-T}(q) P, the inverse of transform_momentum.
inline Vec inverse_transform_momentum(const PlvccFrame& frame, const Vec& P) {
    return frame.PsiInv.transpose() * P;
}

/// Lie bracket of the i-th and j-th columns of Psi as vector fields:
/// [Psi_i, Psi_j](q) = (dPsi_j/dq) Psi_i - (dPsi_i/dq) Psi_j. Zero-based indices.
inline Vec lie_bracket(const PlvccFrame& frame, int i, int j) {
    const auto n = frame.Psi.rows();
    if (i < 0 || j < 0 || i >= n || j >= n) {
        std::ostringstream os;
        os << "lie_bracket: column index out of range (i=" << i << ", j=" << j << ", n=" << n << ")";
        throw std::out_of_range(os.str());
    }
    return frame.col_jacobians[static_cast<size_t>(j)] * frame.Psi.col(i) -
           frame.col_jacobians[static_cast<size_t>(i)] * frame.Psi.col(j);
}

/// Skew-symmetric gyroscopic matrix with entries
/// J_ij(q, P) = -P^T Psi^{-1}(q) [Psi_i(q), Psi_j(q)].
/// Entries are computed independently; skew-symmetry is a checked property,
/// not enforced by construction.
inline Mat gyroscopic_matrix(const PlvccFrame& frame, const Vec& P) {
    const auto n = frame.Psi.rows();
    const Vec w = frame.PsiInv.transpose() * P;  // P^T Psi^{-1} as a column
    Mat J(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) J(i, j) = -w.dot(lie_bracket(frame, i, j));
    return J;
}

/// Gyroscopic matrix of the desired motion, a pure function of time along a
/// trajectory: J_d_ij = -qd_dot^T M(q_d) [Psi_i(q_d), Psi_j(q_d)].
inline Mat gyroscopic_matrix_desired(const MechModel& model, const PlvccFrame& frame_d, const Vec& qd_dot) {
    const auto n = frame_d.Psi.rows();
    const Vec w = model.mass_matrix(frame_d.q) * qd_dot;
    Mat Jd(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Jd(i, j) = -w.dot(lie_bracket(frame_d, i, j));
    return Jd;
}

inline Mat gyroscopic_matrix_desired(const MechModel& model, const Vec& q_d, const Vec& qd_dot,
                                     PsiDeriv mode = PsiDeriv::FiniteDifference) {
    return gyroscopic_matrix_desired(model, factorize(model, q_d, mode), qd_dot);
}

/**
 * Dynamics in the transformed coordinates (q, P):
 *   qdot = Psi(q) P
 *   Pdot = -Psi^T(q) dV/dq + J(q, P) P + Psi^T(q) u
 *
 * Used for cross-validation against open_loop_rhs; the two coordinate
 * systems must produce matching trajectories after mapping.
 */
inline std::pair<Vec, Vec> transformed_rhs(const MechModel& model, const Vec& q, const Vec& P,
                                           const Vec& u, PsiDeriv mode = PsiDeriv::FiniteDifference) {
    require_dim(model, P, "transformed_rhs: P");
    require_dim(model, u, "transformed_rhs: u");
    const PlvccFrame frame = factorize(model, q, mode);
    const Vec qdot = frame.Psi * P;
    const Vec Pdot = -frame.Psi.transpose() * potential_gradient(model, q) +
                     gyroscopic_matrix(frame, P) * P + frame.Psi.transpose() * u;
    return {qdot, Pdot};
}

}  // namespace phtrack
