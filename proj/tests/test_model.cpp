#include "phtrack/model.hpp"
#include "phtrack/pera.hpp"

#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numbers>

using namespace phtrack;
using support::random_vec;

namespace {
// Hand-evaluated constants for the default PERA parameters.
constexpr double kGravLever1 = (2.9 / 3.0 + 1.0) * 9.81 * 0.32;  // 6.17376
constexpr double kGravLever2 = 9.81 * 0.48 / 3.0;                // 1.5696
constexpr double kV0 = -kGravLever1 - kGravLever2;               // V at q = 0, where b = -1
}  // namespace

TEST_CASE("pera mass matrix and potential at zero match hand evaluation") {
    const MechModel m = pera_model();
    Mat M0(3, 3);
    M0 << 0.054, 0.0, 0.02,
          0.0, 0.024 + 3.9 * 0.32 * 0.32, 0.0,
          0.02, 0.0, 0.02;
    REQUIRE((m.mass_matrix(Vec::Zero(3)) - M0).cwiseAbs().maxCoeff() < 1e-15);
    REQUIRE(m.potential(Vec::Zero(3)) == Catch::Approx(kV0).margin(1e-12));
    REQUIRE(potential_gradient(m, Vec::Zero(3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pera parameters must be strictly positive") {
    PeraParams bad;
    bad.m2 = 0.0;
    REQUIRE_THROWS_AS(pera_model(bad), std::invalid_argument);
    bad.m2 = -1.0;
    REQUIRE_THROWS_AS(pera_model(bad), std::invalid_argument);
}

TEST_CASE("hamiltonian") {
    const MechModel m = pera_model();

    SECTION("zero momentum reduces to the potential") {
        std::mt19937_64 rng(7);
        for (int k = 0; k < 50; ++k) {
            const Vec q = random_vec(rng, 3, -std::numbers::pi, std::numbers::pi);
            REQUIRE(hamiltonian(m, {q, Vec::Zero(3)}) == m.potential(q));
        }
    }

    SECTION("unit momentum on the first axis") {
        // 1/2 (M(0)^{-1})_11 + V(0); the 2x2 block inverse gives
        // (M^{-1})_11 = M_33 / (M_11 M_33 - M_13^2).
        const double minv11 = 0.02 / (0.054 * 0.02 - 0.02 * 0.02);
        const double expected = 0.5 * minv11 + kV0;
        REQUIRE(hamiltonian(m, {Vec::Zero(3), Vec{{1.0, 0.0, 0.0}}}) ==
                Catch::Approx(expected).margin(1e-12));
    }

    SECTION("kinetic part is nonnegative") {
        std::mt19937_64 rng(8);
        for (int k = 0; k < 200; ++k) {
            const Vec q = random_vec(rng, 3, -std::numbers::pi, std::numbers::pi);
            const Vec p = random_vec(rng, 3, -2.0, 2.0);
            REQUIRE(hamiltonian(m, {q, p}) >= m.potential(q));
        }
    }

    SECTION("non-finite input is rejected with a diagnostic") {
        Vec bad = Vec::Zero(3);
        bad[1] = std::numeric_limits<double>::quiet_NaN();
        REQUIRE_THROWS_WITH(hamiltonian(m, {bad, Vec::Zero(3)}),
                            Catch::Matchers::ContainsSubstring("non-finite"));
        REQUIRE_THROWS_WITH(hamiltonian(m, {Vec::Zero(3), bad}),
                            Catch::Matchers::ContainsSubstring("non-finite"));
    }
}

TEST_CASE("pera mass matrix is symmetric positive definite over the joint range") {
    const MechModel m = pera_model();
    std::mt19937_64 rng(42);
    for (int k = 0; k < 1000; ++k) {
        const Vec q = random_vec(rng, 3, -std::numbers::pi, std::numbers::pi);
        const Mat M = m.mass_matrix(q);
        REQUIRE((M - M.transpose()).norm() <= 1e-12 * M.norm());
        REQUIRE(Eigen::SelfAdjointEigenSolver<Mat>(M).eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("analytic pera derivatives match finite differences") {
    const MechModel m = pera_model();
    std::mt19937_64 rng(43);

    SECTION("potential gradient, 1000 random points") {
        for (int k = 0; k < 1000; ++k) {
            const Vec q = random_vec(rng, 3, -std::numbers::pi, std::numbers::pi);
            const Vec fd = fd_gradient(m.potential, q);
            REQUIRE((m.grad_potential(q) - fd).cwiseAbs().maxCoeff() < 1e-6);
        }
    }

    SECTION("mass matrix gradient") {
        for (int k = 0; k < 100; ++k) {
            const Vec q = random_vec(rng, 3, -std::numbers::pi, std::numbers::pi);
            const auto dM = m.mass_matrix_grad(q);
            for (int ax = 0; ax < 3; ++ax) {
                const double h = fd_step(q[ax]);
                Vec qp = q, qm = q;
                qp[ax] += h;
                qm[ax] -= h;
                const Mat fd = (m.mass_matrix(qp) - m.mass_matrix(qm)) / (2.0 * h);
                REQUIRE((dM[static_cast<size_t>(ax)] - fd).cwiseAbs().maxCoeff() < 1e-7);
            }
        }
    }
}

TEST_CASE("pera gravity torque is bounded by the lever arms") {
    const MechModel m = pera_model();
    const double bound = kGravLever1 + 2.0 * kGravLever2;
    const int grid = 21;
    Vec q(3);
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j)
            for (int k = 0; k < grid; ++k) {
                q << -std::numbers::pi + 2.0 * std::numbers::pi * i / (grid - 1),
                    -std::numbers::pi + 2.0 * std::numbers::pi * j / (grid - 1),
                    -std::numbers::pi + 2.0 * std::numbers::pi * k / (grid - 1);
                REQUIRE(m.grad_potential(q).cwiseAbs().maxCoeff() <= bound + 1e-12);
            }
}

TEST_CASE("open-loop dynamics") {
    const MechModel m = pera_model();

    SECTION("gravity-compensated rest is an equilibrium") {
        std::mt19937_64 rng(44);
        for (int k = 0; k < 20; ++k) {
            const Vec q = random_vec(rng, 3, -2.0, 2.0);
            const auto [qdot, pdot] = open_loop_rhs(m, {q, Vec::Zero(3)}, potential_gradient(m, q));
            REQUIRE(qdot.norm() == 0.0);
            REQUIRE(pdot.norm() < 1e-14);
        }
    }

    SECTION("unit torque at the origin") {
        const auto [qdot, pdot] = open_loop_rhs(m, {Vec::Zero(3), Vec::Zero(3)}, Vec{{1.0, 0.0, 0.0}});
        REQUIRE(qdot.norm() == 0.0);
        REQUIRE((pdot - Vec{{1.0, 0.0, 0.0}}).cwiseAbs().maxCoeff() < 1e-12);
    }

    SECTION("finite-difference kinetic gradient agrees with the analytic path") {
        MechModel fd_only = m;
        fd_only.mass_matrix_grad = nullptr;
        fd_only.grad_potential = nullptr;
        std::mt19937_64 rng(45);
        for (int k = 0; k < 50; ++k) {
            const Vec q = random_vec(rng, 3, -2.5, 2.5);
            const Vec p = random_vec(rng, 3, -0.5, 0.5);
            const Vec u = random_vec(rng, 3, -3.0, 3.0);
            const auto [qa, pa] = open_loop_rhs(m, {q, p}, u);
            const auto [qf, pf] = open_loop_rhs(fd_only, {q, p}, u);
            REQUIRE((qa - qf).cwiseAbs().maxCoeff() == 0.0);
            REQUIRE((pa - pf).cwiseAbs().maxCoeff() < 1e-6);
        }
    }

    SECTION("singular mass matrix names the offending configuration") {
        const MechModel bad = support::degenerate_model();
        REQUIRE_THROWS_WITH(open_loop_rhs(bad, {Vec::Zero(2), Vec::Zero(2)}, Vec::Zero(2)),
                            Catch::Matchers::ContainsSubstring("not positive definite"));
    }

    SECTION("non-finite input torque is rejected") {
        Vec u = Vec::Zero(3);
        u[2] = std::numeric_limits<double>::infinity();
        REQUIRE_THROWS_AS(open_loop_rhs(m, {Vec::Zero(3), Vec::Zero(3)}, u), std::invalid_argument);
    }
}

TEST_CASE("fd_gradient") {
    SECTION("constant field") {
        const Vec g = fd_gradient([](const Vec&) { return 3.5; }, Vec{{0.2, -1.0, 4.0}});
        REQUIRE(g.cwiseAbs().maxCoeff() == 0.0);
    }

    SECTION("quadratic field is exact to roundoff") {
        const Vec g = fd_gradient([](const Vec& q) { return q.squaredNorm(); }, Vec{{1.0, 2.0}});
        REQUIRE((g - Vec{{2.0, 4.0}}).cwiseAbs().maxCoeff() < 1e-8);
    }

    SECTION("non-finite evaluations raise") {
        REQUIRE_THROWS_WITH(fd_gradient([](const Vec& q) { return std::sqrt(q[0] - 10.0); }, Vec{{0.0}}),
                            Catch::Matchers::ContainsSubstring("non-finite"));
    }
}
