#include "phtrack/plvcc.hpp"

#include "phtrack/integrate.hpp"
#include "phtrack/pera.hpp"

#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numbers>

using namespace phtrack;
using support::random_vec;

TEST_CASE("factorization of constant mass matrices") {
    SECTION("identity") {
        const MechModel m = support::constant_mass_model(Mat::Identity(3, 3));
        const PlvccFrame f = factorize(m, Vec::Zero(3));
        REQUIRE((f.Psi - Mat::Identity(3, 3)).norm() < 1e-14);
        for (const Mat& cj : f.col_jacobians) REQUIRE(cj.cwiseAbs().maxCoeff() < 1e-9);
    }

    SECTION("diagonal") {
        const MechModel m = support::constant_mass_model(Vec{{4.0, 9.0}}.asDiagonal());
        const PlvccFrame f = factorize(m, Vec::Zero(2));
        REQUIRE((f.Psi - Mat(Vec{{0.5, 1.0 / 3.0}}.asDiagonal())).cwiseAbs().maxCoeff() < 1e-15);
        REQUIRE((f.Psi * f.PsiInv - Mat::Identity(2, 2)).norm() < 1e-15);
        for (const Mat& cj : f.col_jacobians) REQUIRE(cj.cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("pera factor at zero matches the hand-inverted mass matrix") {
    // M(0)^{-1} from the 2x2 block [[0.054, 0.02], [0.02, 0.02]] and the
    // decoupled middle axis.
    const double det = 0.054 * 0.02 - 0.02 * 0.02;
    Mat Minv0(3, 3);
    Minv0 << 0.02 / det, 0.0, -0.02 / det,
             0.0, 1.0 / 0.42336, 0.0,
             -0.02 / det, 0.0, 0.054 / det;
    const MechModel m = pera_model();
    const PsiPair f = psi_pair(m, Vec::Zero(3));
    REQUIRE((f.Psi * f.Psi.transpose() - Minv0).norm() <= 1e-10 * Minv0.norm());
}

TEST_CASE("factor frame invariants at random configurations") {
    const MechModel m = pera_model();
    std::mt19937_64 rng(1);
    for (int k = 0; k < 1000; ++k) {
        const Vec q = random_vec(rng, 3, -std::numbers::pi, std::numbers::pi);
        const PsiPair f = psi_pair(m, q);
        const Mat Minv = m.mass_matrix(q).inverse();
        REQUIRE((f.Psi * f.Psi.transpose() - Minv).norm() <= 1e-10 * Minv.norm());
        REQUIRE((f.Psi * f.PsiInv - Mat::Identity(3, 3)).norm() <= 1e-10);
        // chosen convention: upper triangular, strictly positive diagonal
        REQUIRE(f.Psi(1, 0) == 0.0);
        REQUIRE(f.Psi(2, 0) == 0.0);
        REQUIRE(f.Psi(2, 1) == 0.0);
        REQUIRE(f.Psi.diagonal().minCoeff() > 0.0);
    }
}

TEST_CASE("factorization failure reports the smallest eigenvalue") {
    const MechModel bad = support::degenerate_model();
    REQUIRE_THROWS_WITH(factorize(bad, Vec::Zero(2)),
                        Catch::Matchers::ContainsSubstring("smallest eigenvalue"));
}

TEST_CASE("momentum transform") {
    const MechModel m = pera_model();
    std::mt19937_64 rng(2);

    SECTION("zero maps to zero, identity mass is the identity map") {
        const PlvccFrame f = factorize(m, Vec{{0.3, -0.7, 1.1}});
        REQUIRE(transform_momentum(f, Vec::Zero(3)).norm() == 0.0);
        const MechModel id = support::constant_mass_model(Mat::Identity(3, 3));
        const PlvccFrame fid = factorize(id, Vec::Zero(3));
        const Vec p = random_vec(rng, 3, -2.0, 2.0);
        REQUIRE((transform_momentum(fid, p) - p).norm() < 1e-14);
    }

    SECTION("round trip and kinetic-energy preservation") {
        for (int k = 0; k < 200; ++k) {
            const Vec q = random_vec(rng, 3, -std::numbers::pi, std::numbers::pi);
            const Vec p = random_vec(rng, 3, -2.0, 2.0);
            const PsiPair f = psi_pair(m, q);
            const PlvccFrame frame = factorize(m, q);
            const Vec P = transform_momentum(frame, p);
            REQUIRE((inverse_transform_momentum(frame, P) - p).norm() <= 1e-10 * (1.0 + p.norm()));
            const double kin_p = 0.5 * p.dot(m.mass_matrix(q).llt().solve(p));
            REQUIRE(0.5 * P.squaredNorm() == Catch::Approx(kin_p).margin(1e-10));
            (void)f;
        }
    }
}

TEST_CASE("lie brackets of the factor columns") {
    const MechModel m = pera_model();
    std::mt19937_64 rng(3);

    SECTION("bracket of a column with itself vanishes") {
        const PlvccFrame f = factorize(m, random_vec(rng, 3, -2.0, 2.0));
        for (int i = 0; i < 3; ++i) REQUIRE(lie_bracket(f, i, i).norm() == 0.0);
    }

    SECTION("constant mass matrix gives zero brackets") {
        const MechModel cm = support::constant_mass_model(Vec{{2.0, 1.0, 0.5}}.asDiagonal());
        const PlvccFrame f = factorize(cm, Vec{{0.4, 0.2, -0.3}});
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) REQUIRE(lie_bracket(f, i, j).norm() < 1e-9);
    }

    SECTION("antisymmetry at random configurations") {
        for (int k = 0; k < 1000; ++k) {
            const PlvccFrame f = factorize(m, random_vec(rng, 3, -std::numbers::pi, std::numbers::pi));
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j)
                    REQUIRE((lie_bracket(f, i, j) + lie_bracket(f, j, i)).norm() < 1e-8);
        }
    }

    SECTION("index bounds") {
        const PlvccFrame f = factorize(m, Vec::Zero(3));
        REQUIRE_THROWS_AS(lie_bracket(f, 0, 3), std::out_of_range);
        REQUIRE_THROWS_AS(lie_bracket(f, -1, 0), std::out_of_range);
    }
}

TEST_CASE("gyroscopic matrix") {
    const MechModel m = pera_model();
    std::mt19937_64 rng(4);

    SECTION("linear in P, zero at P = 0") {
        const PlvccFrame f = factorize(m, random_vec(rng, 3, -2.0, 2.0));
        REQUIRE(gyroscopic_matrix(f, Vec::Zero(3)).norm() == 0.0);
        const Vec P = random_vec(rng, 3, -1.0, 1.0);
        REQUIRE((gyroscopic_matrix(f, 2.0 * P) - 2.0 * gyroscopic_matrix(f, P)).norm() < 1e-12);
    }

    SECTION("constant mass matrix gives no gyroscopic forces") {
        const MechModel cm = support::constant_mass_model(Vec{{2.0, 1.0, 0.5}}.asDiagonal());
        const PlvccFrame f = factorize(cm, Vec{{0.4, 0.2, -0.3}});
        REQUIRE(gyroscopic_matrix(f, Vec{{1.0, -2.0, 0.5}}).norm() < 1e-9);
    }

    SECTION("skew-symmetry and vanishing quadratic form") {
        for (int k = 0; k < 1000; ++k) {
            const Vec q = random_vec(rng, 3, -std::numbers::pi, std::numbers::pi);
            const Vec P = random_vec(rng, 3, -2.0, 2.0);
            const Mat J = gyroscopic_matrix(factorize(m, q), P);
            REQUIRE((J + J.transpose()).norm() <= 1e-6 * (1.0 + P.norm()));
            REQUIRE(std::abs(P.dot(J * P)) < 1e-8);
        }
    }
}

TEST_CASE("desired gyroscopic matrix") {
    const MechModel m = pera_model();
    std::mt19937_64 rng(5);

    SECTION("zero desired velocity") {
        REQUIRE(gyroscopic_matrix_desired(m, Vec{{0.5, 0.1, -0.4}}, Vec::Zero(3)).norm() == 0.0);
    }

    SECTION("constant mass matrix") {
        const MechModel cm = support::constant_mass_model(Vec{{2.0, 1.0, 0.5}}.asDiagonal());
        REQUIRE(gyroscopic_matrix_desired(cm, Vec{{0.5, 0.1, -0.4}}, Vec{{1.0, 1.0, 1.0}}).norm() < 1e-9);
    }

    SECTION("matches the momentum form with P_d = PsiInv qd_dot") {
        for (int k = 0; k < 200; ++k) {
            const Vec q_d = random_vec(rng, 3, -std::numbers::pi, std::numbers::pi);
            const Vec qd_dot = random_vec(rng, 3, -1.0, 1.0);
            const PlvccFrame f = factorize(m, q_d);
            const Mat Jd = gyroscopic_matrix_desired(m, f, qd_dot);
            const Mat J = gyroscopic_matrix(f, f.PsiInv * qd_dot);
            REQUIRE((Jd - J).norm() < 1e-6);
            REQUIRE((Jd + Jd.transpose()).norm() < 1e-6 * (1.0 + qd_dot.norm()));
        }
    }
}

TEST_CASE("analytic factor derivatives agree with finite differences") {
    const MechModel m = pera_model();
    std::mt19937_64 rng(6);
    for (int k = 0; k < 100; ++k) {
        const Vec q = random_vec(rng, 3, -std::numbers::pi, std::numbers::pi);
        const PlvccFrame ffd = factorize(m, q, PsiDeriv::FiniteDifference);
        const PlvccFrame fan = factorize(m, q, PsiDeriv::Analytic);
        for (int j = 0; j < 3; ++j)
            REQUIRE((ffd.col_jacobians[static_cast<size_t>(j)] - fan.col_jacobians[static_cast<size_t>(j)])
                        .cwiseAbs()
                        .maxCoeff() < 1e-5);
    }
    MechModel no_grad = m;
    no_grad.mass_matrix_grad = nullptr;
    REQUIRE_THROWS_AS(factorize(no_grad, Vec::Zero(3), PsiDeriv::Analytic), std::invalid_argument);
}

TEST_CASE("transformed dynamics") {
    const MechModel m = pera_model();
    std::mt19937_64 rng(7);

    SECTION("gravity-compensated rest is an equilibrium") {
        const Vec q = random_vec(rng, 3, -2.0, 2.0);
        const auto [qdot, Pdot] = transformed_rhs(m, q, Vec::Zero(3), potential_gradient(m, q));
        REQUIRE(qdot.norm() == 0.0);
        REQUIRE(Pdot.norm() < 1e-12);
    }

    SECTION("power balance: dH/dt equals the input power") {
        for (int k = 0; k < 100; ++k) {
            const Vec q = random_vec(rng, 3, -2.0, 2.0);
            const Vec P = random_vec(rng, 3, -1.0, 1.0);
            const Vec u = random_vec(rng, 3, -3.0, 3.0);
            const auto [qdot, Pdot] = transformed_rhs(m, q, P, u);
            const double hdot = potential_gradient(m, q).dot(qdot) + P.dot(Pdot);
            REQUIRE(hdot == Catch::Approx(u.dot(qdot)).margin(1e-8));
        }
    }

    SECTION("dual-coordinate integration agrees after mapping") {
        const Vec q0 = Vec{{0.4, -0.6, 0.9}};
        const Vec p0 = Vec{{0.1, -0.05, 0.08}};
        const Vec u = Vec{{0.3, -0.2, 0.1}};
        const double dt = 5e-4;
        const int steps = 2000;  // 1 s

        Vec y_ph(6), y_tr(6);
        y_ph << q0, p0;
        y_tr << q0, transform_momentum(factorize(m, q0), p0);

        const auto rhs_ph = [&](double, const Vec& s) {
            const auto [qd, pd] = open_loop_rhs(m, {s.head(3), s.tail(3)}, u);
            Vec ds(6);
            ds << qd, pd;
            return ds;
        };
        const auto rhs_tr = [&](double, const Vec& s) {
            const auto [qd, Pd] = transformed_rhs(m, s.head(3), s.tail(3), u);
            Vec ds(6);
            ds << qd, Pd;
            return ds;
        };
        for (int k = 0; k < steps; ++k) {
            const double t = k * dt;
            y_ph = rk4_step(rhs_ph, y_ph, t, dt);
            y_tr = rk4_step(rhs_tr, y_tr, t, dt);
        }
        REQUIRE((y_ph.head(3) - y_tr.head(3)).cwiseAbs().maxCoeff() < 1e-6);
        const Vec P_from_ph = transform_momentum(factorize(m, y_ph.head(3)), y_ph.tail(3));
        REQUIRE((P_from_ph - y_tr.tail(3)).cwiseAbs().maxCoeff() < 1e-6);
    }
}
