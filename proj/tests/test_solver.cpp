#include <doctest.h>

#include "fraclap/errors.hpp"
#include "fraclap/mesh.hpp"
#include "fraclap/solver.hpp"

#include <cmath>
#include <random>

using namespace fl;

TEST_CASE("solver on small dense systems") {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(5, 5);
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, 1, 5);
    CHECK((solve(I, b).x - b).norm() < 1e-12);

    Eigen::MatrixXd one(1, 1);
    one << 4;
    CHECK(solve(one, Eigen::VectorXd::Constant(1, 2)).x[0] == doctest::Approx(0.5));

    std::mt19937 rng(3);
    std::normal_distribution<double> N(0, 1);
    Eigen::MatrixXd B(50, 50);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j) B(i, j) = N(rng);
    const Eigen::MatrixXd A = B * B.transpose() + 50 * Eigen::MatrixXd::Identity(50, 50);
    Eigen::VectorXd g(50);
    for (int i = 0; i < 50; ++i) g[i] = N(rng);
    const auto r = solve(A, g);
    CHECK((A * r.x - g).norm() <= 1e-9 * g.norm());

    Eigen::MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(solve(bad, Eigen::VectorXd::Ones(2)), SolverError);
    Eigen::MatrixXd neg(2, 2);
    neg << -1, 0, 0, 1;
    CHECK_THROWS_AS(solve(neg, Eigen::VectorXd::Ones(2)), SolverError);
}

TEST_CASE("closed-form ball solution") {
    const BallSolution u(0.5);
    CHECK(u(Vec3::Zero()) == doctest::Approx(2 / M_PI).epsilon(1e-14));
    CHECK(u(Vec3(1, 0, 0)) == 0);
    CHECK(u(Vec3(2, 0, 0)) == 0);
    CHECK(u.energy() == doctest::Approx(M_PI / 2).epsilon(1e-14));
    for (double s : {0.1, 0.2, 0.5, 0.8, 0.9}) {
        const BallSolution v(s);
        CHECK(std::abs(v.energy_radial() - v.energy()) <= 1e-10 * v.energy());
    }
    CHECK_THROWS_AS(BallSolution(1.0), InvalidParameter);
}

TEST_CASE("energy error bookkeeping") {
    StiffnessSystem sys;
    sys.s = 0.5;
    sys.A = Eigen::MatrixXd::Identity(2, 2);
    const auto zero = energy_error(sys, Eigen::VectorXd::Zero(2));
    CHECK(zero.rel == doctest::Approx(1.0));
    CHECK(zero.exact_energy == doctest::Approx(M_PI / 2));
    // Discrete energy above the exact one signals under-resolved quadrature.
    CHECK_THROWS_AS(energy_error(sys, Eigen::VectorXd::Constant(2, 1.0)), ConsistencyError);
}

TEST_CASE("piecewise-linear evaluation") {
    const Mesh m = ball_mesh(1);
    Eigen::VectorXd x(m.dofs());
    for (int d = 0; d < m.dofs(); ++d) x[d] = d + 1;
    for (int d = 0; d < m.dofs(); ++d)
        CHECK(eval_uh(m, x, m.vertices[m.dof_vertex[d]]) == doctest::Approx(d + 1.0));
    CHECK(eval_uh(m, x, Vec3(1, 0, 0)) == 0);
    CHECK_THROWS_AS(eval_uh(m, x, Vec3(0, 0, 1.5)), OutOfDomain);
}
