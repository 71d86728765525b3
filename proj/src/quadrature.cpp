#include "fraclap/quadrature.hpp"

#include <algorithm>
#include <memory>
#include <mutex>

namespace fl {

namespace {

GaussRule build_rule(int n) {
    GaussRule r;
    r.n = n;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton on P_n from the Chebyshev-like initial guess, in [-1,1].
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1;
            dp = n * (x * p1 - p0) / (x * x - 1);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
        }
        // Ascending order on [0,1].
        r.nodes[n - 1 - i] = 0.5 * (1 + x);
        r.weights[n - 1 - i] = 1.0 / ((1 - x * x) * dp * dp);
    }
    return r;
}

}  // namespace

const GaussRule& gauss_rule(int n) {
    if (n < 1 || n > 64) throw InvalidOrder("Gauss order " + std::to_string(n) + " outside [1,64]");
    static std::mutex mu;
    static std::array<std::unique_ptr<GaussRule>, 65> cache;
    std::lock_guard<std::mutex> lock(mu);
    if (!cache[n]) cache[n] = std::make_unique<GaussRule>(build_rule(n));
    return *cache[n];
}

OrderPlan order_plan(double h, double l, double s, double rho1, double rho2) {
    if (!(h > 0 && h < 1)) throw InvalidParameter("order_plan needs 0 < h < 1");
    if (!(s > 0 && s < 1)) throw InvalidParameter("order_plan needs 0 < s < 1");
    if (!(l > s)) throw InvalidParameter("order_plan needs l > s");
    if (!(rho1 > 0.5 && rho2 > 0.5)) throw InvalidParameter("order_plan needs rho > 1/2");
    const double lh = std::abs(std::log(h));
    auto pick = [](double bound) { return std::clamp(static_cast<int>(std::ceil(bound)), 2, 64); };
    OrderPlan p;
    p.rho1 = rho1;
    p.rho2 = rho2;
    p.l = l;
    p.n1 = pick(0.5 * (3 + l + s) * lh / std::log(2 * rho1));
    p.n2 = pick(0.5 * (2 + l + s) * lh / std::log(2 * rho2));
    return p;
}

int distant_order(int n_near, double rho, double delta) {
    if (!(delta > 0)) return n_near;
    const double b = 2 * delta;
    const double R = b + std::sqrt(1 + b * b);
    const double n = std::ceil(n_near * std::log(2 * rho) / std::log(R));
    return std::clamp(static_cast<int>(n), std::min(2, n_near), n_near);
}

}  // namespace fl
