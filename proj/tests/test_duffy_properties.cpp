#include <doctest.h>

#include "fraclap/configs.hpp"
#include "fraclap/duffy.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/oracle.hpp"
#include "fraclap/quadrature.hpp"

#include <Eigen/Geometry>

#include <cmath>

using namespace fl;

namespace {

const CaseKind kTT[] = {CaseKind::TTIdentical, CaseKind::TTFace, CaseKind::TTEdge, CaseKind::TTVertex};
const CaseKind kTP[] = {CaseKind::TPFace, CaseKind::TPEdge, CaseKind::TPVertex};

Tetrahedron transform(const Tetrahedron& t, const Mat3& R, double scale) {
    return {scale * (R * t.a), scale * (R * t.b), scale * (R * t.c), scale * (R * t.d)};
}

Panel transform(const Panel& p, const Mat3& R, double scale) {
    return {scale * (R * p.a), scale * (R * p.b), scale * (R * p.c), R * p.n, p.owner};
}

double value(const TouchingConfig& c, double s, int n) {
    if (is_tet_panel(c.kind)) return singular_integral(c.kind, c.t1, c.tau, c.phi_i.on1, c.phi_j.on1, s, n);
    return singular_integral(c.kind, c.t1, c.t2, c.phi_i, c.phi_j, s, n);
}

TouchingConfig moved(TouchingConfig c, const Mat3& R, double scale) {
    c.t1 = transform(c.t1, R, scale);
    c.t2 = transform(c.t2, R, scale);
    c.tau = transform(c.tau, R, scale);
    return c;
}

}  // namespace

TEST_CASE("tet-tet integrals are symmetric under swapping the elements") {
    for (auto k : kTT) {
        CAPTURE(to_string(k));
        const auto c = touching_config(k);
        // The partitions are not swap symmetric, so agreement is up to quadrature error.
        const double a = singular_integral(k, c.t1, c.t2, c.phi_i, c.phi_j, 0.4, 10);
        const double b = singular_integral(k, c.t2, c.t1, NodalPair{c.phi_i.on2, c.phi_i.on1},
                                           NodalPair{c.phi_j.on2, c.phi_j.on1}, 0.4, 10);
        CHECK(b == doctest::Approx(a).epsilon(1e-6));
    }
}

TEST_CASE("scaling by 2 multiplies every case by 2^(3-2s)") {
    for (double s : {0.3, 0.8}) {
        for (auto k : kTT) {
            const auto c = touching_config(k);
            CHECK(value(moved(c, Mat3::Identity(), 2), s, 5) ==
                  doctest::Approx(std::pow(2.0, 3 - 2 * s) * value(c, s, 5)).epsilon(1e-12));
        }
        for (auto k : kTP) {
            const auto c = touching_config(k);
            CHECK(value(moved(c, Mat3::Identity(), 2), s, 5) ==
                  doctest::Approx(std::pow(2.0, 3 - 2 * s) * value(c, s, 5)).epsilon(1e-12));
        }
    }
}

TEST_CASE("rigid rotations leave values unchanged") {
    const Mat3 R = Eigen::AngleAxisd(0.7, Vec3(1, 2, -0.5).normalized()).toRotationMatrix();
    for (auto k : {CaseKind::TTIdentical, CaseKind::TTFace, CaseKind::TTEdge, CaseKind::TTVertex,
                   CaseKind::TPFace, CaseKind::TPEdge, CaseKind::TPVertex}) {
        CAPTURE(to_string(k));
        const auto c = touching_config(k);
        CHECK(value(moved(c, R, 1), 0.55, 5) == doctest::Approx(value(c, 0.55, 5)).epsilon(1e-12));
    }
}

TEST_CASE("reordering non-shared vertices changes only the quadrature error") {
    auto c = touching_config(CaseKind::TTVertex);
    const double a = value(c, 0.5, 10);
    std::swap(c.t2.b, c.t2.d);
    std::swap(c.phi_i.on2[1], c.phi_i.on2[3]);
    std::swap(c.phi_j.on2[1], c.phi_j.on2[3]);
    const double b = value(c, 0.5, 10);
    CHECK(b == doctest::Approx(a).epsilon(1e-6));
}

TEST_CASE("identical case with constant basis functions vanishes") {
    const auto c = touching_config(CaseKind::TTIdentical);
    const NodalPair one{{1, 1, 1, 1}, {1, 1, 1, 1}};
    CHECK(singular_integral(CaseKind::TTIdentical, c.t1, c.t1, one, one, 0.5, 6) == 0);
}

TEST_CASE("distant moments match naive tensor Gauss for well separated tets") {
    const Tetrahedron t1{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(1, 0, 1)};
    Tetrahedron t2 = t1;
    for (int k = 0; k < 4; ++k) t2[k] += Vec3(10, 0.5, -0.3);
    const NodalPair pi{{1, 0, 0, 0}, {0, 0, 0, 0}}, pj{{0, 0, 0, 0}, {0, 0, 1, 0}};
    const double s = 0.6;
    const double a = distant_integral(t1, t2, pi, pj, s, 6);
    // Naive: collapsed coordinates on both tets, untransformed integrand.
    const auto m1 = tet_map(t1), m2 = tet_map(t2);
    const double det = std::abs(m1.M.determinant() * m2.M.determinant());
    auto point = [](double e1, double e2, double e3) { return Vec3(e1, e1 * e2 * e3, e1 * e2 * (1 - e3)); };
    const double b = tensor_integrate<6>(
        [&](const std::array<double, 6>& e) {
            const Vec3 xh = point(e[0], e[1], e[2]), yh = point(e[3], e[4], e[5]);
            const Vec3 x = m1(xh), y = m2(yh);
            const double fi = (1 - xh[0]);  // hat of vertex a on t1, zero on t2
            const double fj = -yh[1];       // minus hat of vertex c on t2
            return fi * fj * std::pow((x - y).squaredNorm(), -1.5 - s) * e[0] * e[0] * e[1] * e[3] *
                   e[3] * e[4] * det;
        },
        {6, 6, 6, 6, 6, 6});
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("element errors are reported") {
    const auto c = touching_config(CaseKind::TTFace);
    Tetrahedron bad = c.t2;
    std::swap(bad.a, bad.b);
    CHECK_THROWS_AS(singular_integral(CaseKind::TTFace, c.t1, bad, c.phi_i, c.phi_j, 0.5, 4), AlignmentError);
    CHECK_THROWS_AS(distant_integral(c.t1, c.t2, c.phi_i, c.phi_j, 0.5, 4), WrongCase);
    const auto p = touching_config(CaseKind::TPEdge);
    std::array<double, 4> on_panel{1, 0, 0, 0};
    CHECK_THROWS_AS(singular_integral(CaseKind::TPEdge, p.t1, p.tau, on_panel, on_panel, 0.5, 4),
                    InvalidParameter);
}

TEST_CASE("subdivision additivity at moderate order") {
    const Tetrahedron t{Vec3(0, 0, 0), Vec3(1, 0.1, 0), Vec3(0.3, 0.9, 0.1), Vec3(0.2, 0.3, 0.8)};
    const auto r = subdivision_additivity(t, 0, 1, 0.5, 8);
    CHECK(r.rel_err < 1e-5);
    const auto z = subdivision_additivity(t, -1, 2, 0.5, 4);
    CHECK(z.direct == 0);
    CHECK(z.summed == 0);
}
