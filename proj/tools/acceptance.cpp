// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//
//   acceptance [--only 1,4] [--threads N] [--known-failure 7]
//
// Exit status is 0 when every criterion passes or fails only among the
// --known-failure ids (those still print FAIL); 1 otherwise.

#include "fraclap/configs.hpp"
#include "fraclap/duffy.hpp"
#include "fraclap/mesh.hpp"
#include "fraclap/oracle.hpp"
#include "fraclap/studies.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace fl;

namespace {

// Pinned tolerances.
constexpr double kPartitionTol = 1e-10;
constexpr double kAdditivityTol = 1e-6;
constexpr double kOracleTol = 1e-3;
constexpr double kFitR2 = 0.98;
constexpr double kFitSlope = -0.5;
constexpr double kSlopeSpread = 0.10;
constexpr double kScalingTol = 1e-10;
constexpr double kFluxTol = 0.02;
constexpr double kRateLo = 0.35, kRateHi = 0.65;
constexpr double kEnergyTol = 1e-10;
constexpr double kSymmetryTol = 1e-12;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

Outcome partition_volumes() {
    double worst = 0;
    for (auto k : {CaseKind::TTIdentical, CaseKind::TTFace, CaseKind::TTEdge, CaseKind::TTVertex,
                   CaseKind::TTDistant, CaseKind::TPFace, CaseKind::TPEdge, CaseKind::TPVertex,
                   CaseKind::TPDistant}) {
        const double target = is_tet_panel(k) ? 1.0 / 12 : 1.0 / 36;
        worst = std::max(worst, std::abs(partition_volume(k, 12) - target));
    }
    return {worst <= kPartitionTol, fmt("9 tables, max |vol - target| = %.2e (tol %.0e)", worst, kPartitionTol)};
}

// Regular tet with vertices jittered by up to 15% of the edge, kept if the
// minimum angle stays above 0.3 rad.
std::vector<Tetrahedron> random_tets(int count) {
    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> U(-0.15, 0.15);
    const Tetrahedron regular{Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
    std::vector<Tetrahedron> out;
    while (static_cast<int>(out.size()) < count) {
        Tetrahedron t = regular;
        for (int k = 0; k < 4; ++k) t[k] += 2.83 * Vec3(U(rng), U(rng), U(rng));
        if (shape_metrics(t).theta > 0.3) out.push_back(t);
    }
    return out;
}

Outcome additivity() {
    double worst = 0;
    for (const auto& t : random_tets(3))
        for (double s : {0.2, 0.5, 0.8}) worst = std::max(worst, subdivision_additivity(t, 0, 1, s, 12).rel_err);
    return {worst <= kAdditivityTol, fmt("3 tets x 3 s, n=12: max rel err %.2e (tol %.0e)", worst, kAdditivityTol)};
}

Outcome separation_oracle() {
    const auto rows = oracle_suite(touching_kinds(), {0.3, 0.7}, kOracleTol, 16);
    double worst = 0;
    bool pass = true, decisive = true;
    std::string modes;
    for (const auto& r : rows) {
        worst = std::max(worst, r.rel_err);
        pass = pass && r.pass;
        if (r.kind == CaseKind::TPVertex) {
            const auto m = select_prefactor_mode(r, kOracleTol);
            decisive = decisive && m.decisive && m.winner == PrefactorMode::Audit;
            modes += fmt(" s=%.1f:%s(paper/audit %.4f, (5-2s)/(4-2s) %.4f)", r.s, to_string(m.winner).c_str(),
                         m.ratio, (5 - 2 * r.s) / (4 - 2 * r.s));
        }
    }
    return {pass && decisive, fmt("14 runs, max rel err %.2e (tol %.0e); tp-vertex%s%s", worst, kOracleTol,
                                  modes.c_str(), decisive ? "" : " NOT decisive")};
}

Outcome quadrature_convergence() {
    bool pass = true;
    std::string detail;
    for (auto kind : {CaseKind::TTFace, CaseKind::TPEdge}) {
        std::vector<double> slopes;
        double min_r2 = 1;
        for (double h : {1.0, 0.5, 0.25}) {
            const auto rows = singular_study(kind, 0.8, {h}, 2, 8, 20);
            std::vector<double> x, y;
            for (const auto& r : rows) {
                x.push_back(r.n);
                y.push_back(std::log10(std::max(r.abs_err, 1e-300)));
            }
            const auto f = fit_line(x, y);
            slopes.push_back(f.slope);
            min_r2 = std::min(min_r2, f.r2);
        }
        const double lo = *std::min_element(slopes.begin(), slopes.end());
        const double hi = *std::max_element(slopes.begin(), slopes.end());
        const double spread = (hi - lo) / std::abs(hi);
        const bool ok = min_r2 >= kFitR2 && hi <= kFitSlope && spread <= kSlopeSpread;
        pass = pass && ok;
        detail += fmt("%s slopes %.3f/%.3f/%.3f R2>=%.4f spread %.1f%%; ", to_string(kind).c_str(), slopes[0],
                      slopes[1], slopes[2], min_r2, 100 * spread);
    }
    detail += fmt("(R2 >= %.2f, slope <= %.1f, spread <= %.0f%%)", kFitR2, kFitSlope, 100 * kSlopeSpread);
    return {pass, detail};
}

Mesh scaled(Mesh m, double f) {
    for (auto& v : m.vertices) v *= f;
    return m;
}

Outcome scaling(int threads) {
    double worst_int = 0, worst_entry = 0;
    for (double s : {0.2, 0.5, 0.8}) {
        const double f = std::pow(2.0, 3 - 2 * s);
        for (auto kind : touching_kinds()) {
            const double a = duffy_value(touching_config(kind), s, 8);
            const double b = duffy_value(touching_config(kind, 2.0), s, 8);
            worst_int = std::max(worst_int, std::abs(b - f * a) / std::abs(f * a));
        }
        const Mesh m = ball_mesh(1);
        OrderPlan p;
        p.n1 = p.n2 = 4;
        const auto A = assemble_stiffness(m, s, p, PrefactorMode::Audit, threads).A;
        const auto B = assemble_stiffness(scaled(m, 2), s, p, PrefactorMode::Audit, threads).A;
        for (int i = 0; i < A.rows(); ++i)
            for (int j = 0; j < A.cols(); ++j)
                if (A(i, j) != 0) worst_entry = std::max(worst_entry, std::abs(B(i, j) - f * A(i, j)) / std::abs(f * A(i, j)));
    }
    const double worst = std::max(worst_int, worst_entry);
    return {worst <= kScalingTol, fmt("lambda=2: integrals %.2e, stiffness entries %.2e (tol %.0e)", worst_int,
                                      worst_entry, kScalingTol)};
}

Outcome sphere_flux() {
    const auto panels = icosphere(3);
    const double flux = panel_flux_reference(Vec3::Zero(), panels, 0.5);
    const double rel = std::abs(flux - 4 * M_PI) / (4 * M_PI);
    return {panels.size() >= 1280 && rel <= kFluxTol,
            fmt("%zu panels, flux %.6f vs 4pi, rel %.2e (tol %.0e)", panels.size(), flux, rel, kFluxTol)};
}

// Observed order: least-squares slope of log(rel err) against log(h) over the levels.
Outcome ball_benchmark(int threads) {
    bool pass = true;
    std::string detail;
    for (double s : {0.2, 0.8}) {
        BallOptions opt;
        opt.s = s;
        opt.threads = threads;
        const auto rows = ball_study(opt);
        std::vector<double> x, y;
        bool decreasing = true;
        std::string errs, steps;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            x.push_back(std::log(rows[k].h));
            y.push_back(std::log(rows[k].rel_err));
            errs += fmt("%s%.4f", k ? "/" : "", rows[k].rel_err);
            if (k) {
                decreasing = decreasing && rows[k].rel_err < rows[k - 1].rel_err;
                steps += fmt("%s%.3f", k > 1 ? "/" : "", rows[k].observed_rate);
            }
        }
        const double order = fit_line(x, y).slope;
        const bool ok = decreasing && order >= kRateLo && order <= kRateHi;
        pass = pass && ok;
        detail += fmt("s=%.1f err %s order %.3f (steps %s)%s; ", s, errs.c_str(), order, steps.c_str(),
                      decreasing ? "" : " not decreasing");
    }
    const BallSolution u(0.5);
    const double diff = std::abs(u.energy_radial() - M_PI / 2);
    const double closed = std::abs(u.energy() - M_PI / 2);
    pass = pass && diff <= kEnergyTol && closed <= kEnergyTol;
    detail += fmt("order in [%.2f, %.2f]; a(u,u)|s=0.5 radial-pi/2 %.1e closed-pi/2 %.1e", kRateLo, kRateHi, diff,
                  closed);
    return {pass, detail};
}

Outcome matrix_sanity(int threads) {
    const Mesh m = ball_mesh(2);
    BallOptions opt;
    opt.s = 0.5;
    const OrderPlan p = ball_order_plan(m.max_diameter(), opt);
    const auto a = assemble_stiffness(m, 0.5, p, PrefactorMode::Audit, 1);
    const int other = std::max(2, resolve_threads(threads));
    const auto b = assemble_stiffness(m, 0.5, p, PrefactorMode::Audit, other);
    const double asym = (a.A - a.A.transpose()).cwiseAbs().maxCoeff() / a.A.cwiseAbs().maxCoeff();
    const bool chol = Eigen::LLT<Eigen::MatrixXd>(a.A).info() == Eigen::Success;
    const bool same = std::memcmp(a.A.data(), b.A.data(), sizeof(double) * a.A.size()) == 0;
    return {asym <= kSymmetryTol && chol && same,
            fmt("level 2 (N=%d): asym %.1e (tol %.0e), cholesky %s, 1 vs %d threads %s", int(a.A.rows()), asym,
                kSymmetryTol, chol ? "ok" : "FAILED", other, same ? "bitwise equal" : "DIFFER")};
}

std::set<int> parse_ids(const std::string& text) {
    std::set<int> ids;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) ids.insert(std::stoi(item));
    return ids;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fraclap acceptance suite"};
    std::string only, known;
    int threads = 0;
    app.add_option("--only", only, "comma-separated criterion ids (default all)");
    app.add_option("--known-failure", known, "criterion ids allowed to fail");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"partition of volume", partition_volumes},
        {"subdivision additivity", additivity},
        {"eps-separation oracle", separation_oracle},
        {"exponential quadrature convergence", quadrature_convergence},
        {"h^(3-2s) scaling", [&] { return scaling(threads); }},
        {"sphere flux", sphere_flux},
        {"ball benchmark", [&] { return ball_benchmark(threads); }},
        {"matrix sanity", [&] { return matrix_sanity(threads); }},
    };
    const auto selected = parse_ids(only);
    const auto allowed = parse_ids(known);
    int unexpected = 0;
    for (int id = 1; id <= static_cast<int>(criteria.size()); ++id) {
        if (!selected.empty() && !selected.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[id - 1].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool tolerated = !o.pass && allowed.count(id);
        std::printf("[%s] %d %s: %s [%.1f s]%s\n", o.pass ? "PASS" : "FAIL", id, criteria[id - 1].first,
                    o.detail.c_str(), sec, tolerated ? " (known failure)" : "");
        std::fflush(stdout);
        if (!o.pass && !tolerated) ++unexpected;
    }
    return unexpected ? 1 : 0;
}
