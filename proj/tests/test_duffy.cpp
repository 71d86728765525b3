#include <doctest.h>

#include "fraclap/configs.hpp"
#include "fraclap/duffy.hpp"
#include "fraclap/errors.hpp"

#include <cmath>

using namespace fl;

namespace {

const CaseKind kSingular[] = {CaseKind::TTIdentical, CaseKind::TTFace,  CaseKind::TTEdge,
                              CaseKind::TTVertex,    CaseKind::TPFace,  CaseKind::TPEdge,
                              CaseKind::TPVertex};

}  // namespace

TEST_CASE("poly parser") {
    const double e[6] = {0.5, 0.25, 0.2, 0, 0, 0};
    CHECK(Poly::parse("-e1 e2 (1-e3)")(e) == doctest::Approx(-0.5 * 0.25 * 0.8));
    CHECK(Poly::parse("(1-e1 e2 e3)")(e) == doctest::Approx(1 - 0.025));
    CHECK(Poly::parse("0")(e) == 0);
    CHECK(Poly::parse("-1")(e) == -1);
    CHECK_THROWS_AS(Poly::parse("e7"), InvalidParameter);
}

TEST_CASE("case names round-trip") {
    for (auto k : kSingular) CHECK(case_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(case_from_string("tt-corner"), InvalidParameter);
}

TEST_CASE("partitions cover the reference product domain") {
    for (auto k : {CaseKind::TTIdentical, CaseKind::TTFace, CaseKind::TTEdge, CaseKind::TTVertex,
                   CaseKind::TTDistant}) {
        CAPTURE(to_string(k));
        CHECK(partition_volume(k) == doctest::Approx(1.0 / 36).epsilon(1e-12));
    }
    for (auto k : {CaseKind::TPFace, CaseKind::TPEdge, CaseKind::TPVertex, CaseKind::TPDistant}) {
        CAPTURE(to_string(k));
        CHECK(partition_volume(k) == doctest::Approx(1.0 / 12).epsilon(1e-12));
    }
}

TEST_CASE("exponent audit") {
    for (auto k : kSingular) {
        CAPTURE(to_string(k));
        const auto audit = xi_exponent_audit(k);
        if (k == CaseKind::TPVertex) {
            CHECK(audit == std::vector<int>{4});
            CHECK_THROWS_AS(xi_exponent_audit(k, true), ExponentMismatch);
        } else {
            CHECK(audit == case_table(k).paper_exponents);
            CHECK_NOTHROW(xi_exponent_audit(k, true));
        }
    }
}

TEST_CASE("touching configurations are finite and stable in n") {
    for (auto k : kSingular) {
        CAPTURE(to_string(k));
        const auto c = touching_config(k);
        const double a = duffy_value(c, 0.5, 6);
        const double b = duffy_value(c, 0.5, 8);
        MESSAGE(to_string(k) << " " << a << " " << b);
        CHECK(std::isfinite(a));
        CHECK(std::abs(a - b) < 1e-2 * std::abs(b));
    }
}
