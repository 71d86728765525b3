#include <doctest.h>

#include "fraclap/assembly.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/kernels.hpp"
#include "fraclap/mesh.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>

using namespace fl;

namespace {

OrderPlan fixed_plan(int n) {
    OrderPlan p;
    p.n1 = p.n2 = n;
    return p;
}

Mesh transformed(Mesh m, const Mat3& R, double scale) {
    for (auto& v : m.vertices) v = scale * (R * v);
    return m;
}

// a(phi, phi) for the octahedral tent 1 - |x|_1 by Monte Carlo, independent of
// every element routine: y = x + z with |z| sampled as r^{-1-2s} dr on (0, 2),
// x uniform in [-3,3]^3, plus the closed-form tail |z| > 2 where phi(x+z)phi(x) = 0.
std::pair<double, double> tent_energy_mc(double s, long samples) {
    auto phi = [](double x, double y, double z) {
        const double v = 1 - std::abs(x) - std::abs(y) - std::abs(z);
        return v > 0 ? v : 0.0;
    };
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> U(0, 1);
    const double al = 1 / (2 - 2 * s);
    double sum = 0, sum2 = 0;
    for (long k = 0; k < samples; ++k) {
        const double t = U(gen);
        const double r = 2 * std::pow(t, al);
        const double cz = 2 * U(gen) - 1, ph = 2 * M_PI * U(gen), sz = std::sqrt(1 - cz * cz);
        const double x = 6 * U(gen) - 3, y = 6 * U(gen) - 3, z = 6 * U(gen) - 3;
        const double d = phi(x + r * sz * std::cos(ph), y + r * sz * std::sin(ph), z + r * cz) - phi(x, y, z);
        const double w = 4 * M_PI * 216 * (2 * al * std::pow(t, al - 1)) * std::pow(r, -1 - 2 * s) * 0.5 * d * d;
        sum += w;
        sum2 += w * w;
    }
    const double mean = sum / samples;
    const double se = std::sqrt((sum2 / samples - mean * mean) / samples);
    // ||phi||^2 = 2/15; tail = ||phi||^2 * 4 pi int_2^inf r^{-1-2s} dr.
    const double tail = (2.0 / 15) * 4 * M_PI * std::pow(2, -2 * s) / (2 * s);
    const double c = kernel_constant(s);
    return {c * (mean + tail), c * se};
}

}  // namespace

TEST_CASE("load vector") {
    const Mesh m = ball_mesh(0);
    CHECK(assemble_load(m, [](const Vec3&) { return 1.0; })[0] == doctest::Approx(1.0 / 3).epsilon(1e-13));
    CHECK(assemble_load(m, [](const Vec3& x) { return x[0] * x[0]; })[0] ==
          doctest::Approx(1.0 / 45).epsilon(1e-13));
    CHECK(assemble_load(m, [](const Vec3&) { return 0.0; })[0] == 0);
}

TEST_CASE("single-dof stiffness agrees with an independent Monte Carlo energy") {
    const Mesh m = ball_mesh(0);
    for (double s : {0.2, 0.5, 0.8}) {
        CAPTURE(s);
        const auto sys = assemble_stiffness(m, s, fixed_plan(10), PrefactorMode::Audit, 1);
        REQUIRE(sys.A.rows() == 1);
        const auto [mc, se] = tent_energy_mc(s, 4000000);
        CAPTURE(mc);
        CAPTURE(se);
        CHECK(sys.A(0, 0) > 0);
        CHECK(std::abs(sys.A(0, 0) - mc) < 4 * se + 3e-3 * mc);
    }
}

TEST_CASE("level-1 matrix is symmetric, SPD and thread independent") {
    const Mesh m = ball_mesh(1);
    const auto a = assemble_stiffness(m, 0.6, fixed_plan(3), PrefactorMode::Audit, 1);
    const auto b = assemble_stiffness(m, 0.6, fixed_plan(3), PrefactorMode::Audit, 2);
    CHECK(a.A.rows() == 7);
    CHECK((a.A - a.A.transpose()).cwiseAbs().maxCoeff() == 0);
    CHECK(std::memcmp(a.A.data(), b.A.data(), sizeof(double) * a.A.size()) == 0);
    Eigen::LLT<Eigen::MatrixXd> llt(a.A);
    CHECK(llt.info() == Eigen::Success);
    CHECK(a.g.sum() > 0);
    long long tt = 0;
    for (const auto& [k, n] : a.stats.pairs)
        if (!is_tet_panel(k)) tt += n;
    CHECK(tt > 0);
    CHECK(a.stats.evaluations > 0);
}

TEST_CASE("stiffness scales like 2^(3-2s) and is rotation invariant") {
    const Mesh m = ball_mesh(1);
    const double s = 0.35;
    const auto base = assemble_stiffness(m, s, fixed_plan(3), PrefactorMode::Audit, 1);
    const auto big = assemble_stiffness(transformed(m, Mat3::Identity(), 2), s, fixed_plan(3),
                                        PrefactorMode::Audit, 1);
    const double f = std::pow(2.0, 3 - 2 * s);
    CHECK((big.A - f * base.A).cwiseAbs().maxCoeff() < 1e-10 * f * base.A.cwiseAbs().maxCoeff());
    const Mat3 R = Eigen::AngleAxisd(1.1, Vec3(0.3, -1, 2).normalized()).toRotationMatrix();
    const auto rot = assemble_stiffness(transformed(m, R, 1), s, fixed_plan(3), PrefactorMode::Audit, 1);
    CHECK((rot.A - base.A).cwiseAbs().maxCoeff() < 1e-10 * base.A.cwiseAbs().maxCoeff());
}

TEST_CASE("matrix dump round trip") {
    const Mesh m = ball_mesh(1);
    const auto sys = assemble_stiffness(m, 0.5, fixed_plan(2), PrefactorMode::Audit, 1);
    const std::string path = "fraclap_test_matrix.bin";
    write_matrix(sys, path);
    const Eigen::MatrixXd r = read_matrix(path);
    CHECK(r == sys.A);
    std::remove(path.c_str());
    std::remove((path + ".json").c_str());
    CHECK_THROWS_AS(read_matrix("no/such/matrix.bin"), IoError);
}

TEST_CASE("parallel_for rethrows worker errors") {
    CHECK_THROWS_AS(parallel_for(10, 2, [](int k) {
                        if (k == 7) throw MeshError("boom");
                    }),
                    MeshError);
    CHECK(resolve_threads(3) == 3);
    CHECK(resolve_threads(0) >= 1);
}
