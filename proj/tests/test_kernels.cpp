#include <doctest.h>

#include "fraclap/configs.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/kernels.hpp"
#include "fraclap/quadrature.hpp"

#include <cmath>
#include <random>

using namespace fl;

TEST_CASE("c_ds closed forms and reference values") {
    CHECK(c_ds(0.5) == doctest::Approx(2 / (M_PI * M_PI)).epsilon(1e-14));
    // 30-digit reference values.
    CHECK(c_ds(0.25) == doctest::Approx(0.190480907802722909357).epsilon(1e-13));
    CHECK(c_ds(0.75) == doctest::Approx(0.158734089835602424464).epsilon(1e-13));
    for (int k = 1; k <= 9; ++k) CHECK(c_ds(0.1 * k) > 0);
    CHECK_THROWS_AS(c_ds(0.0), InvalidParameter);
    CHECK_THROWS_AS(c_ds(1.0), InvalidParameter);
    CHECK(kernel_constant(0.5) == doctest::Approx(1 / (M_PI * M_PI)));
}

TEST_CASE("hat restrictions interpolate 0/1 nodal values") {
    const Tetrahedron t{Vec3(0.1, 0, 0), Vec3(1, 0.2, 0), Vec3(0.3, 0.9, 0.1), Vec3(0.2, 0.3, 0.8)};
    for (int i = 0; i < 4; ++i) {
        const auto r = basis_restriction(t, i);
        CHECK(r.active);
        const auto v = r.nodal(t);
        for (int k = 0; k < 4; ++k) CHECK(v[k] == doctest::Approx(k == i ? 1.0 : 0.0).epsilon(1e-13));
    }
    const auto off = basis_restriction(t, -1);
    CHECK_FALSE(off.active);
    CHECK(off.g == Vec3::Zero());
    CHECK_THROWS_AS(basis_restriction(t, 4), InvalidParameter);
}

TEST_CASE("difference factor special cases") {
    const Tetrahedron t{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(1, 0, 1)};
    const Mat3 M = tet_map(t).M;
    const auto r = basis_restriction(t, 1);
    const auto none = basis_restriction(t, -1);
    const Vec3 d1(0.3, 0.1, 0.2), d2(0.6, 0.2, 0.1);
    CHECK(difference_factor(r, M, r, M, d1, d1) == 0);
    CHECK(difference_factor(r, M, r, M, d1, d2) == doctest::Approx(r.g.dot(M * (d2 - d1))));
    CHECK(difference_factor(r, M, none, M, d1, d2) == doctest::Approx(-r.g.dot(M * d1)));
    CHECK(difference_factor(none, M, none, M, d1, d2) == 0);
}

TEST_CASE("tangential gradients agree across a shared face") {
    const auto c = touching_config(CaseKind::TTFace);
    // Hat of shared vertex 0 restricted to both tets.
    const auto r1 = basis_restriction(c.t1, 0);
    const auto r2 = basis_restriction(c.t2, 0);
    CHECK(tangential_mismatch(CaseKind::TTFace, r1, tet_map(c.t1).M, r2, tet_map(c.t2).M) < 1e-12);
}

TEST_CASE("transformed integrands are finite on random eta") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0, 1);
    for (auto kind : {CaseKind::TTIdentical, CaseKind::TTFace, CaseKind::TTEdge, CaseKind::TTVertex}) {
        const auto c = touching_config(kind);
        const Mat3 M1 = tet_map(c.t1).M, M2 = tet_map(c.t2).M;
        const auto ri1 = basis_restriction(c.t1, 0), ri2 = basis_restriction(c.t2, 0);
        const auto& tab = case_table(kind);
        for (int draw = 0; draw < 2000; ++draw) {
            double eta[6];
            for (double& e : eta) e = U(rng);
            const int m = draw % static_cast<int>(tab.subdomains.size());
            CHECK(std::isfinite(k1_eta(kind, m, eta, M1, M2, ri1, ri2, ri1, ri2, 0.7)));
        }
    }
}

namespace {

// prefactor x sum_m Q^n(k_eta) through the single-point reference path.
double reference_path_tt(const TouchingConfig& c, double s, int n) {
    const auto& tab = case_table(c.kind);
    const Mat3 M1 = tet_map(c.t1).M, M2 = tet_map(c.t2).M;
    auto restriction = [](const Tetrahedron& t, const std::array<double, 4>& v) {
        AffineRestriction r;
        r.g = tet_map(t).M.transpose().partialPivLu().solve(nodal_w(v));
        r.v0 = v[0];
        r.active = true;
        return r;
    };
    const auto ri1 = restriction(c.t1, c.phi_i.on1), ri2 = restriction(c.t2, c.phi_i.on2);
    const auto rj1 = restriction(c.t1, c.phi_j.on1), rj2 = restriction(c.t2, c.phi_j.on2);
    double sum = 0;
    for (int m = 0; m < static_cast<int>(tab.subdomains.size()); ++m) {
        std::array<int, 6> orders;
        orders.fill(n);
        auto f = [&](const std::array<double, 6>& x) {
            return k1_eta(c.kind, m, x.data(), M1, M2, ri1, ri2, rj1, rj2, s);
        };
        switch (tab.k_eta) {
            case 2: sum += tensor_integrate<2>([&](const std::array<double, 2>& x) {
                    std::array<double, 6> e{x[0], x[1]};
                    return f(e);
                }, {n, n}); break;
            case 3: sum += tensor_integrate<3>([&](const std::array<double, 3>& x) {
                    std::array<double, 6> e{x[0], x[1], x[2]};
                    return f(e);
                }, {n, n, n}); break;
            case 4: sum += tensor_integrate<4>([&](const std::array<double, 4>& x) {
                    std::array<double, 6> e{x[0], x[1], x[2], x[3]};
                    return f(e);
                }, {n, n, n, n}); break;
            case 5: sum += tensor_integrate<5>([&](const std::array<double, 5>& x) {
                    std::array<double, 6> e{x[0], x[1], x[2], x[3], x[4]};
                    return f(e);
                }, {n, n, n, n, n}); break;
            default: FAIL("unexpected eta dimension");
        }
    }
    return prefactor(c.kind, s, PrefactorMode::Audit) * sum;
}

}  // namespace

TEST_CASE("single-point integrands reproduce the moment engine") {
    for (auto kind : {CaseKind::TTIdentical, CaseKind::TTFace, CaseKind::TTEdge, CaseKind::TTVertex}) {
        CAPTURE(to_string(kind));
        const auto c = touching_config(kind);
        const double a = reference_path_tt(c, 0.6, 5);
        const double b = duffy_value(c, 0.6, 5);
        CHECK(a == doctest::Approx(b).epsilon(1e-11));
    }
}
