#include <doctest.h>

#include "fraclap/configs.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/mesh.hpp"
#include "fraclap/oracle.hpp"
#include "fraclap/studies.hpp"

#include <cmath>

using namespace fl;

TEST_CASE("Richardson fit recovers a synthetic limit") {
    const double gamma = richardson_gamma(CaseKind::TTEdge, 0.3);
    CHECK(gamma == doctest::Approx(3.4));
    const auto eps = default_eps_list();
    std::vector<double> v;
    for (double e : eps) v.push_back(2.5 - 0.7 * e + 3 * e * e + 0.4 * std::pow(e, gamma));
    const auto r = richardson_fit(eps, v, gamma);
    CHECK(r.limit == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(r.residual < 1e-10);
    CHECK_THROWS_AS(richardson_fit({0.1, 0.05}, {1, 1}, gamma), InvalidParameter);
}

TEST_CASE("panel flux through spheres") {
    // Flux of (y-x).n |x-y|^{-3-2s} through a sphere of radius R seen from its
    // centre is 4 pi R^{-2s}.
    const double s = 0.5;
    CHECK(panel_flux_reference(Vec3::Zero(), icosphere(3, 1.0), s, 1e-8) ==
          doctest::Approx(4 * M_PI).epsilon(0.02));
    CHECK(panel_flux_reference(Vec3::Zero(), icosphere(3, 2.0), s, 1e-8) ==
          doctest::Approx(2 * M_PI).epsilon(0.02));
    const auto panels = icosphere(1);
    CHECK_THROWS_AS(panel_flux_reference(panels[0].a, panels, s), OracleUnstable);
}

TEST_CASE("tt-face Duffy value matches the separation reference") {
    const auto rows = oracle_suite({CaseKind::TTFace}, {0.3}, 1e-3, 12);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].rel_err < 1e-3);
    CHECK(rows[0].pass);
}

TEST_CASE("line fit") {
    const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(f.slope == doctest::Approx(2));
    CHECK(f.intercept == doctest::Approx(1));
    CHECK(f.r2 == doctest::Approx(1));
}
