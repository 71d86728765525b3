#include "fraclap/studies.hpp"

#include "fraclap/configs.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/oracle.hpp"

#include <cmath>
#include <limits>

namespace fl {

std::vector<SingularRow> singular_study(CaseKind kind, double s, const std::vector<double>& h_list,
                                        int n_min, int n_max, int ref_order, PrefactorMode mode) {
    if (is_distant(kind)) throw InvalidParameter("singular-study needs a touching case");
    if (n_min < 1 || n_max < n_min) throw InvalidParameter("bad order range");
    std::vector<SingularRow> rows;
    const double base = touching_config(kind).h;
    for (double h : h_list) {
        if (!(h > 0)) throw InvalidParameter("h must be positive");
        const auto c = touching_config(kind, h / base);
        const double ref = duffy_value(c, s, ref_order, mode);
        for (int n = n_min; n <= n_max; ++n) {
            const double v = duffy_value(c, s, n, mode);
            rows.push_back({kind, s, h, n, v, ref, std::abs(v - ref)});
        }
    }
    return rows;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    if (n < 2 || static_cast<int>(y.size()) != n) throw InvalidParameter("fit_line needs >= 2 points");
    double mx = 0, my = 0;
    for (int k = 0; k < n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (int k = 0; k < n; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

double default_smoothness(double s) { return std::min(1.0, s + 0.5 - 1e-3); }

OrderPlan ball_order_plan(double h, const BallOptions& opt) {
    const double l = opt.l.value_or(default_smoothness(opt.s));
    OrderPlan p;
    if (h < 1) {
        p = order_plan(h, l, opt.s, opt.rho1, opt.rho2);
    } else {
        p.n1 = p.n2 = 2;
        p.rho1 = opt.rho1;
        p.rho2 = opt.rho2;
        p.l = l;
    }
    if (opt.n1) p.n1 = *opt.n1;
    if (opt.n2) p.n2 = *opt.n2;
    if (p.n1 < 1 || p.n2 < 1 || p.n1 > 64 || p.n2 > 64) throw InvalidOrder("orders must lie in 1..64");
    p.graded_distant = opt.graded_distant;
    return p;
}

std::vector<BallRow> ball_study(const BallOptions& opt, const LevelHook& hook) {
    if (opt.level_min < 0 || opt.level_max < opt.level_min) throw InvalidParameter("bad level range");
    if (opt.level_max > 3) throw ResourceLimit("solve-ball supports levels up to 3");
    std::vector<BallRow> rows;
    for (int level = opt.level_min; level <= opt.level_max; ++level) {
        const Mesh mesh = ball_mesh(level);
        BallRow row;
        row.level = level;
        row.h = mesh.max_diameter();
        row.M = static_cast<int>(mesh.tets.size());
        const OrderPlan plan = ball_order_plan(row.h, opt);
        row.n1 = plan.n1;
        row.n2 = plan.n2;
        const auto sys = assemble_stiffness(mesh, opt.s, plan, opt.mode, opt.threads);
        row.N = static_cast<int>(sys.A.rows());
        row.assembly_seconds = sys.stats.seconds;
        const auto sol = solve(sys.A, sys.g);
        row.cg_iterations = sol.iterations;
        row.used_cholesky = sol.used_cholesky;
        row.energy = energy_error(sys, sol.x);
        row.rel_err = row.energy.rel;
        row.observed_rate = std::numeric_limits<double>::quiet_NaN();
        if (!rows.empty()) {
            const auto& prev = rows.back();
            row.observed_rate = std::log(prev.rel_err / row.rel_err) / std::log(prev.h / row.h);
        }
        if (hook) hook(row, mesh, sys, sol.x);
        rows.push_back(row);
    }
    return rows;
}

std::vector<CaseKind> touching_kinds() {
    return {CaseKind::TTIdentical, CaseKind::TTFace, CaseKind::TTEdge, CaseKind::TTVertex,
            CaseKind::TPFace,      CaseKind::TPEdge, CaseKind::TPVertex};
}

std::vector<OracleRow> oracle_suite(const std::vector<CaseKind>& kinds, const std::vector<double>& s_list,
                                    double tol, int duffy_order) {
    std::vector<OracleRow> rows;
    for (CaseKind kind : kinds) {
        const auto c = touching_config(kind);
        const auto refs = eps_separation_reference(c, s_list);
        for (std::size_t k = 0; k < s_list.size(); ++k) {
            OracleRow r;
            r.kind = kind;
            r.s = s_list[k];
            r.duffy = duffy_value(c, r.s, duffy_order, PrefactorMode::Audit);
            r.reference = refs[k].limit;
            r.fit_residual = refs[k].residual;
            r.rel_err = std::abs(r.duffy - r.reference) / std::abs(r.reference);
            if (kind == CaseKind::TPVertex) {
                r.paper_value = duffy_value(c, r.s, duffy_order, PrefactorMode::Paper);
                r.paper_rel_err = std::abs(r.paper_value - r.reference) / std::abs(r.reference);
            }
            r.pass = r.rel_err <= tol;
            rows.push_back(r);
        }
    }
    return rows;
}

ModeSelection select_prefactor_mode(const OracleRow& row, double tol) {
    if (row.kind != CaseKind::TPVertex) throw WrongCase("mode selection applies to tp-vertex");
    ModeSelection m;
    m.audit_rel = row.rel_err;
    m.paper_rel = row.paper_rel_err;
    m.ratio = row.paper_value / row.duffy;
    m.winner = m.audit_rel <= m.paper_rel ? PrefactorMode::Audit : PrefactorMode::Paper;
    const double win = std::min(m.audit_rel, m.paper_rel);
    const double lose = std::max(m.audit_rel, m.paper_rel);
    m.decisive = win <= tol && lose > 10 * tol;
    return m;
}

}  // namespace fl
