// Command-line driver: singular-study, solve-ball, oracle.
//
// Exit codes: 0 ok, 2 usage, 3 numerical consistency failure, 4 I/O.

#include "fraclap/config.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/oracle.hpp"
#include "fraclap/studies.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kOk = 0, kUsage = 2, kConsistency = 3, kIo = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("bad number '" + item + "' in list '" + text + "'");
        }
    }
    if (out.empty()) throw UsageError("empty list");
    return out;
}

// "a..b" or a single integer.
std::pair<int, int> parse_range(const std::string& text) {
    try {
        const auto dots = text.find("..");
        if (dots == std::string::npos) {
            const int v = std::stoi(text);
            return {v, v};
        }
        return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
    } catch (const std::exception&) {
        throw UsageError("bad range '" + text + "' (expected a..b)");
    }
}

fl::CaseKind parse_case(const std::string& name) {
    try {
        return fl::case_from_string(name);
    } catch (const fl::InvalidParameter&) {
        throw UsageError("unknown case '" + name + "'");
    }
}

std::string fmt_double(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw fl::IoError("cannot write " + path);
    return out;
}

// Shared options resolved as flags > config file > defaults.
struct Common {
    std::string config_path;
    int threads = 0;
    fl::FlatConfig config;
    void load() {
        if (config_path.empty()) return;
        config = fl::FlatConfig::load(config_path);
        config.require_keys({"s", "rho1", "rho2", "l", "n1", "n2", "threads", "prefactor_mode"});
    }
};

fl::PrefactorMode parse_mode(const std::string& m) {
    try {
        return fl::prefactor_mode_from_string(m);
    } catch (const fl::InvalidParameter&) {
        throw UsageError("prefactor mode must be audit or paper");
    }
}

// --- singular-study --------------------------------------------------------

struct SingularArgs {
    std::string kase, h = "1,0.5,0.25", n = "2..8", out, mode;
    double s = -1;
    int ref = 20;
};

int run_singular(const SingularArgs& a, Common& common) {
    common.load();
    const double s = a.s > 0 ? a.s : common.config.number("s").value_or(0.8);
    const auto mode = parse_mode(!a.mode.empty() ? a.mode
                                                 : common.config.string("prefactor_mode").value_or("audit"));
    const auto kind = parse_case(a.kase);
    if (fl::is_distant(kind)) throw UsageError("case must be a touching case");
    const auto [n0, n1] = parse_range(a.n);
    const auto rows = fl::singular_study(kind, s, parse_list(a.h), n0, n1, a.ref, mode);
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!a.out.empty()) {
        file = open_out(a.out);
        out = &file;
    }
    *out << "case,s,h,n,value,ref,abs_err\n";
    for (const auto& r : rows)
        *out << fl::to_string(r.kind) << "," << fmt_double(r.s) << "," << fmt_double(r.h) << "," << r.n
             << "," << fmt_double(r.value) << "," << fmt_double(r.ref) << "," << fmt_double(r.abs_err)
             << "\n";
    if (!*out) throw fl::IoError("write failed");
    return kOk;
}

// --- solve-ball ------------------------------------------------------------

struct BallArgs {
    double s = -1, rho1 = -1, rho2 = -1, l = -1;
    int n1 = 0, n2 = 0;
    std::string levels = "1..3", mode, out, dump_dir;
    bool no_grading = false;
};

int run_ball(const BallArgs& a, Common& common) {
    common.load();
    const auto& cfg = common.config;
    fl::BallOptions opt;
    opt.s = a.s > 0 ? a.s : cfg.number("s").value_or(0.5);
    opt.rho1 = a.rho1 > 0 ? a.rho1 : cfg.number("rho1").value_or(0.75);
    opt.rho2 = a.rho2 > 0 ? a.rho2 : cfg.number("rho2").value_or(0.75);
    if (a.l > 0)
        opt.l = a.l;
    else if (cfg.has("l"))
        opt.l = cfg.number("l");
    if (a.n1 > 0)
        opt.n1 = a.n1;
    else if (cfg.has("n1"))
        opt.n1 = cfg.integer("n1");
    if (a.n2 > 0)
        opt.n2 = a.n2;
    else if (cfg.has("n2"))
        opt.n2 = cfg.integer("n2");
    opt.mode = parse_mode(!a.mode.empty() ? a.mode : cfg.string("prefactor_mode").value_or("audit"));
    opt.threads = common.threads > 0 ? common.threads : cfg.integer("threads").value_or(0);
    opt.graded_distant = !a.no_grading;
    const auto [l0, l1] = parse_range(a.levels);
    opt.level_min = l0;
    opt.level_max = l1;
    if (!(opt.s > 0 && opt.s < 1)) throw UsageError("s must lie in (0,1)");

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!a.out.empty()) {
        file = open_out(a.out);
        out = &file;
    }
    *out << "level,h,N,M,n1,n2,rel_err,observed_rate\n";
    nlohmann::json side;
    side["s"] = opt.s;
    side["rho1"] = opt.rho1;
    side["rho2"] = opt.rho2;
    side["l"] = opt.l.value_or(fl::default_smoothness(opt.s));
    side["prefactor_mode"] = fl::to_string(opt.mode);
    side["threads"] = fl::resolve_threads(opt.threads);
    side["graded_distant"] = opt.graded_distant;
    side["error_normalization"] = "energy error divided by sqrt(a(u,u))";
    side["exact_energy"] = fl::BallSolution(opt.s).energy();
    side["levels"] = nlohmann::json::array();

    auto hook = [&](const fl::BallRow& r, const fl::Mesh& mesh, const fl::StiffnessSystem& sys,
                    const Eigen::VectorXd& x) {
        *out << r.level << "," << fmt_double(r.h) << "," << r.N << "," << r.M << "," << r.n1 << ","
             << r.n2 << "," << fmt_double(r.rel_err) << "," << fmt_double(r.observed_rate) << "\n";
        out->flush();
        nlohmann::json lv = nlohmann::json::parse(fl::stats_json(sys));
        lv["level"] = r.level;
        lv["rel_err"] = r.rel_err;
        lv["discrete_energy"] = r.energy.discrete_energy;
        lv["cg_iterations"] = r.cg_iterations;
        lv["used_cholesky"] = r.used_cholesky;
        side["levels"].push_back(lv);
        if (!a.dump_dir.empty()) {
            const std::string base = a.dump_dir + "/level" + std::to_string(r.level);
            fl::write_matrix(sys, base + ".bin");
            auto sol = open_out(base + "_solution.json");
            sol << fl::solution_json(mesh, sys, x) << "\n";
        }
    };
    int code = kOk;
    try {
        fl::ball_study(opt, hook);
    } catch (const fl::ConsistencyError& e) {
        std::cerr << e.what() << "\nhint: raise n1/n2 or rho1/rho2\n";
        code = kConsistency;
    }
    if (!a.out.empty()) {
        auto js = open_out(a.out + ".json");
        js << side.dump(2) << "\n";
    }
    return code;
}

// --- oracle ----------------------------------------------------------------

struct OracleArgs {
    std::string kase = "all", s = "0.3,0.7";
    double tol = 1e-3;
};

int run_oracle(const OracleArgs& a) {
    std::vector<fl::CaseKind> kinds;
    if (a.kase == "all")
        kinds = fl::touching_kinds();
    else
        kinds = {parse_case(a.kase)};
    for (auto k : kinds)
        if (fl::is_distant(k)) throw UsageError("oracle needs a touching case");
    const auto rows = fl::oracle_suite(kinds, parse_list(a.s), a.tol);
    bool ok = true;
    std::printf("%-13s %5s %20s %20s %10s %6s\n", "case", "s", "duffy", "reference", "rel_err", "result");
    for (const auto& r : rows) {
        std::printf("%-13s %5.2f %20.12e %20.12e %10.2e %6s\n", fl::to_string(r.kind).c_str(), r.s, r.duffy,
                    r.reference, r.rel_err, r.pass ? "PASS" : "FAIL");
        ok &= r.pass;
        if (r.kind == fl::CaseKind::TPVertex) {
            const auto m = fl::select_prefactor_mode(r, a.tol);
            std::printf("  tp-vertex mode: audit rel %.2e, paper rel %.2e, paper/audit %.4f -> %s (%s)\n",
                        m.audit_rel, m.paper_rel, m.ratio, fl::to_string(m.winner).c_str(),
                        m.decisive ? "decisive" : "not decisive");
        }
    }
    // Zero basis: both sides vanish identically.
    auto zc = fl::touching_config(fl::CaseKind::TTFace);
    zc.phi_i = zc.phi_j = fl::NodalPair{};
    const double z = fl::duffy_value(zc, 0.5, 8);
    std::printf("%-13s %5.2f %20.12e %20.12e %10.2e %6s\n", "zero-basis", 0.5, z, 0.0, std::abs(z),
                z == 0 ? "PASS" : "FAIL");
    ok &= z == 0;
    return ok ? kOk : kConsistency;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fractional Laplacian Duffy quadrature driver"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config_path, "flat TOML config (s, rho1, rho2, l, n1, n2, threads, prefactor_mode)");
    app.add_option("--threads", common.threads, "worker threads (default: all cores)");

    SingularArgs sa;
    auto* sub_s = app.add_subcommand("singular-study", "E^n = |Q^n - Q^ref| for one touching case");
    sub_s->set_help_flag("--help", "Print this help message and exit");  // frees --h for diameters
    sub_s->add_option("--case", sa.kase, "tt-identical|tt-face|tt-edge|tt-vertex|tp-face|tp-edge|tp-vertex")
        ->required();
    sub_s->add_option("--s", sa.s, "fractional order");
    sub_s->add_option("--h", sa.h, "comma-separated element diameters");
    sub_s->add_option("--n", sa.n, "order range a..b");
    sub_s->add_option("--ref", sa.ref, "reference order");
    sub_s->add_option("--mode", sa.mode, "prefactor mode audit|paper");
    sub_s->add_option("--out", sa.out, "CSV path (default stdout)");

    BallArgs ba;
    auto* sub_b = app.add_subcommand("solve-ball", "unit-ball benchmark (-Delta)^s u = 1");
    sub_b->add_option("--s", ba.s, "fractional order");
    sub_b->add_option("--levels", ba.levels, "refinement levels a..b (<= 3)");
    sub_b->add_option("--rho1", ba.rho1);
    sub_b->add_option("--rho2", ba.rho2);
    sub_b->add_option("--l", ba.l, "smoothness index of the order rule");
    sub_b->add_option("--n1", ba.n1, "override tet-tet order");
    sub_b->add_option("--n2", ba.n2, "override tet-panel order");
    sub_b->add_option("--mode", ba.mode, "prefactor mode audit|paper");
    sub_b->add_flag("--no-grading", ba.no_grading, "use n1/n2 for separated pairs too");
    sub_b->add_option("--out", ba.out, "CSV path (default stdout); sidecar at <out>.json");
    sub_b->add_option("--dump-dir", ba.dump_dir, "write matrices and solutions here");

    OracleArgs oa;
    auto* sub_o = app.add_subcommand("oracle", "Duffy values against the eps-separation oracle");
    sub_o->add_option("--case", oa.kase, "touching case or all");
    sub_o->add_option("--s", oa.s, "comma-separated orders");
    sub_o->add_option("--tol", oa.tol, "relative tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    try {
        if (*sub_s) return run_singular(sa, common);
        if (*sub_b) return run_ball(ba, common);
        if (*sub_o) return run_oracle(oa);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const fl::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kUsage;
    } catch (const fl::InvalidParameter& e) {
        std::cerr << e.what() << "\n";
        return kUsage;
    } catch (const fl::InvalidOrder& e) {
        std::cerr << e.what() << "\n";
        return kUsage;
    } catch (const fl::ResourceLimit& e) {
        std::cerr << e.what() << "\n";
        return kUsage;
    } catch (const fl::IoError& e) {
        std::cerr << e.what() << "\n";
        return kIo;
    } catch (const fl::ConsistencyError& e) {
        std::cerr << e.what() << "\n";
        return kConsistency;
    } catch (const fl::Error& e) {
        std::cerr << e.what() << "\n";
        return kConsistency;
    }
    return kUsage;
}
