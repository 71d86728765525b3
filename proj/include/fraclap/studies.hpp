#pragma once

#include "fraclap/assembly.hpp"
#include "fraclap/duffy.hpp"
#include "fraclap/solver.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fl {

// ---------------------------------------------------------------------------
// Singular-integral convergence study: E^n = |Q^n - Q^ref| on the canonical
// touching configuration scaled to diameter h.
// ---------------------------------------------------------------------------

struct SingularRow {
    CaseKind kind;
    double s, h;
    int n;
    double value, ref, abs_err;
};

std::vector<SingularRow> singular_study(CaseKind kind, double s, const std::vector<double>& h_list,
                                        int n_min, int n_max, int ref_order = 20,
                                        PrefactorMode mode = PrefactorMode::Audit);

struct LineFit {
    double slope = 0, intercept = 0, r2 = 0;
};

// Least-squares line y = slope x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Unit-ball benchmark.
// ---------------------------------------------------------------------------

struct BallOptions {
    double s = 0.5;
    int level_min = 1, level_max = 3;
    double rho1 = 0.75, rho2 = 0.75;
    std::optional<double> l;  // default min(1, s + 1/2 - 1e-3)
    std::optional<int> n1, n2;  // overrides of the order rule
    PrefactorMode mode = PrefactorMode::Audit;
    int threads = 0;
    bool graded_distant = true;
};

double default_smoothness(double s);

// order_plan for a ball level. The order rule is vacuous for h >= 1 (its
// bound is <= 0 there), so coarse meshes get the clamp floor n = 2.
OrderPlan ball_order_plan(double h, const BallOptions& opt);

struct BallRow {
    int level = 0;
    double h = 0;
    int N = 0, M = 0, n1 = 0, n2 = 0;
    double rel_err = 0;
    double observed_rate = 0;  // NaN on the first level
    double assembly_seconds = 0;
    EnergyError energy;
    int cg_iterations = 0;
    bool used_cholesky = false;
};

// Called after each level with the mesh, system and solution (for dumps).
using LevelHook =
    std::function<void(const BallRow&, const Mesh&, const StiffnessSystem&, const Eigen::VectorXd&)>;

std::vector<BallRow> ball_study(const BallOptions& opt, const LevelHook& hook = {});

// ---------------------------------------------------------------------------
// Oracle suite: Duffy values against the eps-separation reference.
// ---------------------------------------------------------------------------

struct OracleRow {
    CaseKind kind;
    double s = 0;
    double duffy = 0;      // audit-mode value
    double reference = 0;
    double rel_err = 0;
    double fit_residual = 0;
    double paper_value = 0;  // tp-vertex only
    double paper_rel_err = 0;
    bool pass = false;
};

// Duffy at duffy_order vs the polar-correlation eps reference; pass when
// rel_err <= tol.
std::vector<OracleRow> oracle_suite(const std::vector<CaseKind>& kinds, const std::vector<double>& s_list,
                                    double tol = 1e-3, int duffy_order = 16);

struct ModeSelection {
    PrefactorMode winner = PrefactorMode::Audit;
    bool decisive = false;  // winner within tol, loser off by more than 10 tol
    double audit_rel = 0, paper_rel = 0;
    double ratio = 0;       // paper / audit value
};

ModeSelection select_prefactor_mode(const OracleRow& tp_vertex_row, double tol = 1e-3);

std::vector<CaseKind> touching_kinds();

}  // namespace fl
