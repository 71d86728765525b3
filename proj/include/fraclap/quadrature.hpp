#pragma once

#include "fraclap/errors.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace fl {

// Gauss-Legendre rule on [0,1].
struct GaussRule {
    int n = 0;
    std::vector<double> nodes, weights;
};

// Cached, thread-safe; 1 <= n <= 64.
const GaussRule& gauss_rule(int n);

// Tensor Gauss quadrature on [0,1]^K, lexicographic evaluation order (last
// axis fastest). Throws IntegrandError on a non-finite integrand value.
template <int K, class F>
double tensor_integrate(F&& f, const std::array<int, K>& orders) {
    static_assert(K >= 1 && K <= 6);
    std::array<const GaussRule*, K> r;
    for (int k = 0; k < K; ++k) r[k] = &gauss_rule(orders[k]);
    std::array<int, K> idx{};
    std::array<double, K> x;
    double sum = 0;
    while (true) {
        double w = 1;
        for (int k = 0; k < K; ++k) {
            x[k] = r[k]->nodes[idx[k]];
            w *= r[k]->weights[idx[k]];
        }
        const double v = f(x);
        if (!std::isfinite(v)) {
            std::string at;
            for (int k = 0; k < K; ++k) at += (k ? "," : "") + std::to_string(x[k]);
            throw IntegrandError("non-finite integrand at node (" + at + ")");
        }
        sum += w * v;
        int k = K - 1;
        while (k >= 0 && ++idx[k] == orders[k]) idx[k--] = 0;
        if (k < 0) break;
    }
    return sum;
}

struct OrderPlan {
    int n1 = 8;          // tet-tet orders per axis
    int n2 = 8;          // tet-panel orders per axis
    double rho1 = 0.75;  // assumed analyticity ellipse parameters
    double rho2 = 0.75;
    double l = 1.0;      // smoothness index used in the order rule
    bool graded_distant = true;  // distance-graded orders for separated pairs
};

// Order rule: n1 >= (3+l+s)|log h| / (2 log(2 rho1)), n2 >= (2+l+s)|log h| / (2 log(2 rho2)),
// ceiling, clamped to [2, 64].
OrderPlan order_plan(double h, double l, double s, double rho1, double rho2);

// Order for a separated pair: the smallest n with R(delta)^{-2n} <= (2 rho)^{-2 n_near},
// where delta = dist / diam and R(delta) is the Bernstein-ellipse radius of the nearest
// kernel singularity; clamped to [2, n_near].
int distant_order(int n_near, double rho, double delta);

}  // namespace fl
