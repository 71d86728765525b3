#include <doctest.h>

#include "fraclap/quadrature.hpp"

#include <cmath>

using namespace fl;

TEST_CASE("gauss rule integrates polynomials of degree 2n-1 exactly") {
    for (int n : {1, 2, 5, 12, 31, 64}) {
        const auto& g = gauss_rule(n);
        REQUIRE(g.n == n);
        for (int p = 0; p <= 2 * n - 1; p += std::max(1, n / 4)) {
            double sum = 0;
            for (int i = 0; i < n; ++i) sum += g.weights[i] * std::pow(g.nodes[i], p);
            CHECK(sum == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("gauss nodes are ascending and interior") {
    const auto& g = gauss_rule(20);
    for (int i = 0; i < 20; ++i) {
        CHECK(g.nodes[i] > 0);
        CHECK(g.nodes[i] < 1);
        if (i) CHECK(g.nodes[i] > g.nodes[i - 1]);
        CHECK(g.weights[i] > 0);
    }
}

TEST_CASE("gauss order outside range is rejected") {
    CHECK_THROWS_AS(gauss_rule(0), InvalidOrder);
    CHECK_THROWS_AS(gauss_rule(65), InvalidOrder);
}

TEST_CASE("tensor integration of a separable monomial") {
    const double v = tensor_integrate<3>(
        [](const std::array<double, 3>& x) { return x[0] * x[1] * x[1] * x[2] * x[2] * x[2]; },
        {2, 3, 3});
    CHECK(v == doctest::Approx(1.0 / 24).epsilon(1e-14));
}

TEST_CASE("tensor integration reports non-finite values") {
    CHECK_THROWS_AS(tensor_integrate<2>([](const std::array<double, 2>&) { return NAN; }, {2, 2}),
                    IntegrandError);
}

TEST_CASE("order plan grows with refinement") {
    const auto coarse = order_plan(0.5, 1, 0.5, 0.75, 0.75);
    const auto fine = order_plan(0.05, 1, 0.5, 0.75, 0.75);
    CHECK(fine.n1 > coarse.n1);
    CHECK(fine.n1 >= fine.n2);
    CHECK_THROWS_AS(order_plan(1.5, 1, 0.5, 0.75, 0.75), InvalidParameter);
    CHECK_THROWS_AS(order_plan(0.5, 1, 0.5, 0.4, 0.75), InvalidParameter);
}

TEST_CASE("distant order never exceeds the near order") {
    for (double d : {0.01, 0.5, 1.0, 3.0}) {
        const int n = distant_order(10, 0.75, d);
        CHECK(n <= 10);
        CHECK(n >= 2);
    }
    CHECK(distant_order(10, 0.75, 3.0) <= distant_order(10, 0.75, 0.5));
}
