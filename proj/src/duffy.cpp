#include "fraclap/duffy.hpp"

#include "fraclap/configs.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/quadrature.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>

namespace fl {

// ---------------------------------------------------------------------------
// Names and case helpers
// ---------------------------------------------------------------------------

namespace {

const std::array<std::pair<CaseKind, const char*>, 9> kCaseNames{{
    {CaseKind::TTIdentical, "tt-identical"},
    {CaseKind::TTFace, "tt-face"},
    {CaseKind::TTEdge, "tt-edge"},
    {CaseKind::TTVertex, "tt-vertex"},
    {CaseKind::TPFace, "tp-face"},
    {CaseKind::TPEdge, "tp-edge"},
    {CaseKind::TPVertex, "tp-vertex"},
    {CaseKind::TTDistant, "tt-distant"},
    {CaseKind::TPDistant, "tp-distant"},
}};

}  // namespace

std::string to_string(CaseKind k) {
    for (const auto& [kind, name] : kCaseNames)
        if (kind == k) return name;
    return "unknown";
}

CaseKind case_from_string(const std::string& name) {
    for (const auto& [kind, n] : kCaseNames)
        if (name == n) return kind;
    throw InvalidParameter("unknown case '" + name + "'");
}

std::string to_string(PrefactorMode m) { return m == PrefactorMode::Audit ? "audit" : "paper"; }

PrefactorMode prefactor_mode_from_string(const std::string& name) {
    if (name == "audit") return PrefactorMode::Audit;
    if (name == "paper") return PrefactorMode::Paper;
    throw InvalidParameter("unknown prefactor mode '" + name + "'");
}

bool is_tet_panel(CaseKind k) {
    return k == CaseKind::TPFace || k == CaseKind::TPEdge || k == CaseKind::TPVertex ||
           k == CaseKind::TPDistant;
}

bool is_distant(CaseKind k) { return k == CaseKind::TTDistant || k == CaseKind::TPDistant; }

int shared_vertex_count(CaseKind k) {
    switch (k) {
        case CaseKind::TTIdentical: return 4;
        case CaseKind::TTFace: case CaseKind::TPFace: return 3;
        case CaseKind::TTEdge: case CaseKind::TPEdge: return 2;
        case CaseKind::TTVertex: case CaseKind::TPVertex: return 1;
        default: return 0;
    }
}

CaseKind tt_kind_from_shared(int shared) {
    switch (shared) {
        case 0: return CaseKind::TTDistant;
        case 1: return CaseKind::TTVertex;
        case 2: return CaseKind::TTEdge;
        case 3: return CaseKind::TTFace;
        case 4: return CaseKind::TTIdentical;
    }
    throw InvalidParameter("shared vertex count " + std::to_string(shared));
}

CaseKind tp_kind_from_shared(int shared) {
    switch (shared) {
        case 0: return CaseKind::TPDistant;
        case 1: return CaseKind::TPVertex;
        case 2: return CaseKind::TPEdge;
        case 3: return CaseKind::TPFace;
    }
    throw InvalidParameter("shared vertex count " + std::to_string(shared));
}

// ---------------------------------------------------------------------------
// Poly
// ---------------------------------------------------------------------------

double Poly::operator()(const double* eta) const {
    double sum = 0;
    for (const auto& t : terms) {
        double v = t.c;
        for (int k = 0; k < 6; ++k)
            for (int p = 0; p < t.e[k]; ++p) v *= eta[k];
        sum += v;
    }
    return sum;
}

namespace {

Poly constant(double c) {
    Poly p;
    if (c != 0) p.terms.push_back({c, {}});
    return p;
}

Poly multiply(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& ta : a.terms)
        for (const auto& tb : b.terms) {
            Poly::Term t{ta.c * tb.c, {}};
            for (int k = 0; k < 6; ++k) t.e[k] = ta.e[k] + tb.e[k];
            r.terms.push_back(t);
        }
    return r;
}

// One factor: "0", "1", "eK".
Poly parse_atom(const std::string& tok, const std::string& text) {
    if (tok == "0") return constant(0);
    if (tok == "1") return constant(1);
    if (tok.size() == 2 && tok[0] == 'e' && tok[1] >= '1' && tok[1] <= '6') {
        Poly p = constant(1);
        p.terms[0].e[tok[1] - '1'] = 1;
        return p;
    }
    throw InvalidParameter("bad polynomial factor '" + tok + "' in '" + text + "'");
}

}  // namespace

Poly Poly::parse(const std::string& text) {
    std::string body = text;
    double sign = 1;
    auto trim = [](std::string& s) {
        s.erase(0, s.find_first_not_of(' '));
        s.erase(s.find_last_not_of(' ') + 1);
    };
    trim(body);
    if (!body.empty() && body[0] == '-') {
        sign = -1;
        body.erase(0, 1);
    }
    Poly result = constant(sign);
    std::size_t i = 0;
    while (i < body.size()) {
        if (body[i] == ' ') {
            ++i;
            continue;
        }
        if (body[i] == '(') {
            const auto close = body.find(')', i);
            if (close == std::string::npos) throw InvalidParameter("unbalanced '(' in '" + text + "'");
            std::string inner = body.substr(i + 1, close - i - 1);
            trim(inner);
            if (inner.rfind("1-", 0) != 0)
                throw InvalidParameter("expected (1-...) in '" + text + "'");
            Poly mono = parse("-" + inner.substr(2));
            Poly factor = constant(1);
            factor.terms.insert(factor.terms.end(), mono.terms.begin(), mono.terms.end());
            result = multiply(result, factor);
            i = close + 1;
        } else {
            auto end = body.find_first_of(" (", i);
            if (end == std::string::npos) end = body.size();
            result = multiply(result, parse_atom(body.substr(i, end - i), text));
            i = end;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

namespace {

using S3 = std::array<const char*, 3>;

SubdomainMap sd(const S3& d1, const S3& d2, const char* jac) {
    SubdomainMap m;
    for (int k = 0; k < 3; ++k) {
        m.d1[k] = Poly::parse(d1[k]);
        m.d2[k] = Poly::parse(d2[k]);
    }
    m.jac = Poly::parse(jac);
    return m;
}

SubdomainMap swapped(const SubdomainMap& m, int of) {
    SubdomainMap r = m;
    std::swap(r.d1, r.d2);
    r.symmetric_of = of;
    return r;
}

DuffyCaseTable build_table(CaseKind kind) {
    DuffyCaseTable t;
    t.kind = kind;
    auto& S = t.subdomains;
    switch (kind) {
        case CaseKind::TTVertex:
            t.k_eta = 5;
            t.xi_jac = {5};
            t.paper_exponents = {4};
            S.push_back(sd({"1", "e1 e2", "e1 (1-e2)"}, {"e3", "e3 e4 e5", "e3 e4 (1-e5)"},
                           "e1 e3 e3 e4"));
            S.push_back(swapped(S[0], 0));
            break;
        case CaseKind::TTEdge:
            t.k_eta = 4;
            t.shift = Shift::Edge;
            t.xi_jac = {5, 4};
            t.paper_exponents = {4, 3};
            S.push_back(sd({"0", "e1", "(1-e1)"}, {"-e2 e3 e4", "e2 e3 (1-e4)", "e2 (1-e3)"},
                           "e2 e2 e3"));
            S.push_back(sd({"0", "e3 e4", "e3 (1-e4)"}, {"-e1 e2", "e1 (1-e2)", "(1-e1)"},
                           "e1 e3"));
            S.push_back(swapped(S[0], 0));
            S.push_back(swapped(S[1], 1));
            break;
        case CaseKind::TTFace: {
            t.k_eta = 3;
            t.shift = Shift::Face;
            t.xi_jac = {5, 4, 3};
            t.paper_exponents = {4, 3, 2};
            const char* J = "e1 e1 e2";
            S.push_back(sd({"0", "e1", "(1-e1)"}, {"-e1 e2 e3", "0", "e1 e2 (1-e3)"}, J));
            S.push_back(sd({"0", "e1 e2", "e1 (1-e2)"}, {"-e1 e2 e3", "0", "(1-e1 e2 e3)"}, J));
            S.push_back(sd({"0", "e1 e2", "(1-e1 e2)"}, {"-e1 e2 e3", "0", "e1 (1-e2 e3)"}, J));
            S.push_back(sd({"0", "e1 e2 e3", "e1 e2 (1-e3)"}, {"-e1", "0", "(1-e1)"}, J));
            S.push_back(sd({"0", "e1 e2 e3", "e1 (1-e2 e3)"}, {"-e1 e2", "0", "(1-e1 e2)"}, J));
            S.push_back(sd({"0", "e1 e2 e3", "(1-e1 e2 e3)"}, {"-e1 e2", "0", "e1 (1-e2)"}, J));
            S.push_back(sd({"0", "0", "1"}, {"-e1 e2 e3", "e1 e2 (1-e3)", "e1 (1-e2)"}, J));
            for (int m = 0; m < 7; ++m) S.push_back(swapped(S[m], m));
            S.push_back(sd({"-e1 e2 e3", "e1 e2 (1-e3)", "(1-e1 e2)"}, {"0", "0", "e1"}, J));
            S.push_back(sd({"0", "0", "e3"}, {"-e1 e2", "e1 (1-e2)", "(1-e1)"}, "e1"));
            S.push_back(sd({"-e1 e2", "e1 (1-e2)", "(1-e1)"}, {"0", "0", "e1 e3"}, "e1 e1"));
            break;
        }
        case CaseKind::TTIdentical:
            t.k_eta = 2;
            t.xi_jac = {5, 4, 3, 2};
            t.paper_exponents = {4, 3, 2, 1};
            t.symmetry_factor = 2;
            S.push_back(sd({"0", "e1", "-e1"}, {"-e1 e2", "0", "-1"}, "e1"));
            S.push_back(sd({"0", "1", "0"}, {"-e1 e2", "0", "e1 (1-e2)"}, "e1"));
            S.push_back(sd({"0", "e1", "-1"}, {"-e1 e2", "0", "-e1 e2"}, "e1"));
            S.push_back(sd({"0", "e1 e2", "-e1 e2"}, {"-e1", "0", "-1"}, "e1"));
            S.push_back(sd({"0", "e1 e2", "e1 (1-e2)"}, {"-1", "0", "0"}, "e1"));
            S.push_back(sd({"0", "e1 e2", "-1"}, {"-e1", "0", "-e1"}, "e1"));
            S.push_back(sd({"0", "0", "0"}, {"-e1 e2", "e1 (1-e2)", "-1"}, "e1"));
            S.push_back(sd({"0", "0", "-1"}, {"-e1 e2", "e1 (1-e2)", "-e1"}, "e1"));
            S.push_back(sd({"0", "0", "e1"}, {"-e2", "(1-e2)", "0"}, "1"));
            break;
        case CaseKind::TPVertex:
            t.k_eta = 4;
            t.xi_jac = {4};
            t.paper_exponents = {3};
            S.push_back(sd({"1", "e1 e2", "e1 (1-e2)"}, {"e3", "e3 e4", "0"}, "e1 e3"));
            S.push_back(sd({"e2", "e2 e3 e4", "e2 e3 (1-e4)"}, {"1", "e1", "0"}, "e2 e2 e3"));
            break;
        case CaseKind::TPEdge:
            t.k_eta = 3;
            t.shift = Shift::Edge;
            t.xi_jac = {4, 3};
            t.paper_exponents = {4, 3};
            S.push_back(sd({"0", "e1", "(1-e1)"}, {"-e2 e3", "e2 (1-e3)", "0"}, "e2"));
            S.push_back(sd({"0", "e2 e3", "e2 (1-e3)"}, {"-e1", "(1-e1)", "0"}, "e2"));
            S.push_back(sd({"-e2 e3", "e2 (1-e3)", "(1-e2)"}, {"0", "e1", "0"}, "e2"));
            S.push_back(sd({"-e1 e2 e3", "e1 e2 (1-e3)", "e1 (1-e2)"}, {"0", "1", "0"},
                           "e1 e1 e2"));
            break;
        case CaseKind::TPFace:
            t.k_eta = 2;
            t.shift = Shift::Face;
            t.xi_jac = {4, 3, 2};
            t.paper_exponents = {4, 3, 2};
            S.push_back(sd({"0", "e1", "(1-e1)"}, {"-e1 e2", "0", "0"}, "e1"));
            S.push_back(sd({"0", "e1 e2", "e1 (1-e2)"}, {"-1", "0", "0"}, "e1"));
            S.push_back(sd({"0", "e1 e2", "(1-e1 e2)"}, {"-e1", "0", "0"}, "e1"));
            S.push_back(sd({"0", "0", "1"}, {"-e1 e2", "e1 (1-e2)", "0"}, "e1"));
            S.push_back(sd({"-e1 e2", "e1 (1-e2)", "(1-e1)"}, {"0", "0", "0"}, "e1"));
            S.push_back(sd({"-e1", "0", "(1-e1)"}, {"0", "e1 e2", "0"}, "e1"));
            S.push_back(sd({"-e1 e2", "0", "e1 (1-e2)"}, {"0", "1", "0"}, "e1"));
            S.push_back(sd({"-e1 e2", "0", "(1-e1 e2)"}, {"0", "e1", "0"}, "e1"));
            S.push_back(sd({"0", "0", "e2"}, {"-e1", "(1-e1)", "0"}, "1"));
            break;
        case CaseKind::TTDistant:
            t.k_eta = 6;
            S.push_back(sd({"e1", "e1 e2 e3", "e1 e2 (1-e3)"}, {"e4", "e4 e5 e6", "e4 e5 (1-e6)"},
                           "e1 e1 e2 e4 e4 e5"));
            break;
        case CaseKind::TPDistant:
            t.k_eta = 5;
            S.push_back(sd({"e1", "e1 e2 e3", "e1 e2 (1-e3)"}, {"e4", "e4 e5", "0"},
                           "e1 e1 e2 e4"));
            break;
    }
    return t;
}

}  // namespace

const DuffyCaseTable& case_table(CaseKind kind) {
    static const std::array<DuffyCaseTable, 9> tables = [] {
        std::array<DuffyCaseTable, 9> a;
        for (const auto& [k, name] : kCaseNames) a[static_cast<int>(k)] = build_table(k);
        return a;
    }();
    return tables[static_cast<int>(kind)];
}

double partition_volume(CaseKind kind, int n) {
    const auto& t = case_table(kind);
    const auto& g = gauss_rule(n);
    double xi = 1;
    for (int p : t.xi_jac) {
        double sum = 0;
        for (int i = 0; i < n; ++i) sum += g.weights[i] * std::pow(g.nodes[i], p);
        xi *= sum;
    }
    double eta = 0;
    for (const auto& m : t.subdomains) {
        std::array<int, 6> idx{};
        const int k = t.k_eta;
        while (true) {
            double e[6] = {0, 0, 0, 0, 0, 0};
            double w = 1;
            for (int j = 0; j < k; ++j) {
                e[j] = g.nodes[idx[j]];
                w *= g.weights[idx[j]];
            }
            eta += w * std::abs(m.jac(e));
            int j = k - 1;
            while (j >= 0 && ++idx[j] == n) idx[j--] = 0;
            if (j < 0) break;
        }
    }
    return t.symmetry_factor * xi * eta;
}

// ---------------------------------------------------------------------------
// Exponent audit
// ---------------------------------------------------------------------------

namespace {

std::string format_exponents(const std::vector<int>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + "]";
}

Vec3 shift_point(const DuffyCaseTable& t, const std::vector<double>& xi) {
    if (t.kind == CaseKind::TTIdentical) return Vec3(0.75, 0.25, 0.25);
    switch (t.shift) {
        case Shift::Edge: return Vec3(xi[0], 0, 0);
        case Shift::Face: return Vec3(xi[0], xi[0] * (1 - xi[1]), 0);
        default: return Vec3::Zero();
    }
}

// Integrand of the configuration at (xi, eta) on subdomain m, without Jacobians.
double audit_integrand(const TouchingConfig& c, const DuffyCaseTable& t, int m,
                       const std::vector<double>& xi, const double* eta, double s) {
    double S = 1;
    for (double v : xi) S *= v;
    const Vec3 sh = shift_point(t, xi);
    const auto& sub = t.subdomains[m];
    const Vec3 xr = sh + S * Vec3(sub.d1[0](eta), sub.d1[1](eta), sub.d1[2](eta));
    const Vec3 yr = sh + S * Vec3(sub.d2[0](eta), sub.d2[1](eta), sub.d2[2](eta));
    const auto m1 = tet_map(c.t1);
    const Vec3 x = m1(xr);
    auto value = [](const std::array<double, 4>& v, const Vec3& r) {
        return v[0] + nodal_w(v).dot(r);
    };
    if (is_tet_panel(c.kind)) {
        const auto mp = panel_map(c.tau);
        const Vec3 y = mp(Vec2(yr[0], yr[1]));
        const Vec3 d = y - x;
        return value(c.phi_i.on1, xr) * value(c.phi_j.on1, xr) * d.dot(c.tau.n) *
               std::pow(d.squaredNorm(), -1.5 - s);
    }
    const auto m2 = tet_map(c.t2);
    const Vec3 y = m2(yr);
    const double di = value(c.phi_i.on1, xr) - value(c.phi_i.on2, yr);
    const double dj = value(c.phi_j.on1, xr) - value(c.phi_j.on2, yr);
    return di * dj * std::pow((x - y).squaredNorm(), -1.5 - s);
}

std::vector<int> run_audit(CaseKind kind) {
    const auto& t = case_table(kind);
    const auto cfg = touching_config(kind);
    const double s = 0.37;
    const double eta[6] = {0.37, 0.61, 0.29, 0.53, 0.71, 0.43};
    std::vector<int> p(t.xi_jac.size());
    for (std::size_t k = 0; k < t.xi_jac.size(); ++k) {
        std::optional<double> deg;
        for (std::size_t m = 0; m < t.subdomains.size() && !deg; ++m) {
            std::vector<double> xi(t.xi_jac.size(), 0.6);
            xi[k] = 1.0;
            const double f1 = audit_integrand(cfg, t, static_cast<int>(m), xi, eta, s);
            xi[k] = 0.5;
            const double fh = audit_integrand(cfg, t, static_cast<int>(m), xi, eta, s);
            if (std::abs(f1) > 1e-12 && std::abs(fh) > 1e-12) deg = -std::log2(std::abs(fh / f1));
        }
        if (!deg) throw ConsistencyError("audit integrand vanishes for " + to_string(kind));
        const double raw = t.xi_jac[k] + *deg + 2 * s;
        if (std::abs(raw - std::round(raw)) > 1e-6)
            throw ConsistencyError("non-integer audit exponent " + std::to_string(raw) + " for " +
                                   to_string(kind));
        p[k] = static_cast<int>(std::lround(raw));
    }
    return p;
}

}  // namespace

std::vector<int> xi_exponent_audit(CaseKind kind, bool strict) {
    if (is_distant(kind)) return {};
    static std::mutex mu;
    static std::map<CaseKind, std::vector<int>> cache;
    std::vector<int> p;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(kind);
        if (it == cache.end()) it = cache.emplace(kind, run_audit(kind)).first;
        p = it->second;
    }
    const auto& t = case_table(kind);
    if (strict && p != t.paper_exponents)
        throw ExponentMismatch(to_string(kind), format_exponents(t.paper_exponents),
                               format_exponents(p));
    return p;
}

double prefactor(CaseKind kind, double s, PrefactorMode mode) {
    if (is_distant(kind)) return 1;
    const auto& t = case_table(kind);
    const auto p = mode == PrefactorMode::Paper ? t.paper_exponents : xi_exponent_audit(kind);
    double f = t.symmetry_factor;
    for (int e : p) f /= e + 1 - 2 * s;
    return f;
}

// ---------------------------------------------------------------------------
// Tabulated eta points
// ---------------------------------------------------------------------------

namespace {

// Structure-of-arrays point set: reference points in element 1 and 2 and weights.
struct PointSet {
    std::vector<double> x0, x1, x2, y0, y1, y2, w;
    std::size_t size() const { return w.size(); }
    void clear() {
        for (auto* v : {&x0, &x1, &x2, &y0, &y1, &y2, &w}) v->clear();
    }
    void push(const double* x, const double* y, double wt) {
        x0.push_back(x[0]);
        x1.push_back(x[1]);
        x2.push_back(x[2]);
        y0.push_back(y[0]);
        y1.push_back(y[1]);
        y2.push_back(y[2]);
        w.push_back(wt);
    }
};

long long ipow(int n, int k) {
    long long r = 1;
    while (k-- > 0) r *= n;
    return r;
}

// Points of subdomain m with the first eta index fixed to i1 (all if i1 < 0).
void generate(const DuffyCaseTable& t, int m, int n, int i1, PointSet& out) {
    const auto& g = gauss_rule(n);
    const auto& sub = t.subdomains[m];
    const int k = t.k_eta;
    std::array<int, 6> idx{};
    const int first = i1 < 0 ? 0 : 1;
    if (i1 >= 0) idx[0] = i1;
    while (true) {
        double e[6] = {0, 0, 0, 0, 0, 0};
        double w = 1;
        for (int j = 0; j < k; ++j) {
            e[j] = g.nodes[idx[j]];
            w *= g.weights[idx[j]];
        }
        const double x[3] = {sub.d1[0](e), sub.d1[1](e), sub.d1[2](e)};
        const double y[3] = {sub.d2[0](e), sub.d2[1](e), sub.d2[2](e)};
        out.push(x, y, w * std::abs(sub.jac(e)));
        int j = k - 1;
        while (j >= first && ++idx[j] == n) idx[j--] = 0;
        if (j < first) break;
    }
}

constexpr long long kCacheLimit = 1 << 21;  // points per cached table

// Calls fn(PointSet) over all points of the singular rule (kind, n).
template <class F>
void for_each_chunk(CaseKind kind, int n, F&& fn) {
    const auto& t = case_table(kind);
    const long long total = static_cast<long long>(t.subdomains.size()) * ipow(n, t.k_eta);
    if (total <= kCacheLimit) {
        static std::mutex mu;
        static std::map<std::pair<int, int>, std::shared_ptr<const PointSet>> cache;
        std::shared_ptr<const PointSet> ps;
        {
            std::lock_guard<std::mutex> lock(mu);
            auto& slot = cache[{static_cast<int>(kind), n}];
            if (!slot) {
                auto p = std::make_shared<PointSet>();
                for (std::size_t m = 0; m < t.subdomains.size(); ++m)
                    generate(t, static_cast<int>(m), n, -1, *p);
                slot = p;
            }
            ps = slot;
        }
        fn(*ps);
        return;
    }
    PointSet buf;
    for (std::size_t m = 0; m < t.subdomains.size(); ++m)
        for (int i1 = 0; i1 < n; ++i1) {
            buf.clear();
            generate(t, static_cast<int>(m), n, i1, buf);
            fn(buf);
        }
}

// Points of the reference tet (n^3) or triangle (n^2) with weights.
struct ElementRule {
    std::vector<double> r0, r1, r2, w;
};

std::shared_ptr<const ElementRule> element_rule(bool tet, int n) {
    static std::mutex mu;
    static std::map<std::pair<bool, int>, std::shared_ptr<const ElementRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{tet, n}];
    if (!slot) {
        const auto& g = gauss_rule(n);
        auto r = std::make_shared<ElementRule>();
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                const double e1 = g.nodes[a], e2 = g.nodes[b];
                if (tet) {
                    for (int c = 0; c < n; ++c) {
                        const double e3 = g.nodes[c];
                        r->r0.push_back(e1);
                        r->r1.push_back(e1 * e2 * e3);
                        r->r2.push_back(e1 * e2 * (1 - e3));
                        r->w.push_back(g.weights[a] * g.weights[b] * g.weights[c] * e1 * e1 * e2);
                    }
                } else {
                    r->r0.push_back(e1);
                    r->r1.push_back(e1 * e2);
                    r->r2.push_back(0);
                    r->w.push_back(g.weights[a] * g.weights[b] * e1);
                }
            }
        slot = r;
    }
    return slot;
}

constexpr int kBatch = 256;

// out[b] = w[b] * r2[b]^e
inline void kernel_batch(const double* r2, const double* w, double e, double* out, int len) {
    for (int b = 0; b < len; ++b) out[b] = w[b] * std::exp(e * std::log(r2[b]));
}

void check_finite(double v, CaseKind kind) {
    if (!std::isfinite(v)) throw IntegrandError("non-finite moment in " + to_string(kind));
}

void require_singular(CaseKind kind, bool panel) {
    if (is_distant(kind) || is_tet_panel(kind) != panel)
        throw WrongCase(to_string(kind) + " is not a " + (panel ? "tet-panel" : "tet-tet") +
                        " singular kind");
}

void check_s(double s) {
    if (!(s > 0 && s < 1)) throw InvalidParameter("s must lie in (0,1)");
}

}  // namespace

// ---------------------------------------------------------------------------
// Moment engine
// ---------------------------------------------------------------------------

Moments6 tt_singular_moments(CaseKind kind, const Mat3& M1, const Mat3& M2, double s, int n) {
    require_singular(kind, false);
    check_s(s);
    const double e = -1.5 - s;
    std::array<double, 21> acc{};
    double r2[kBatch], kf[kBatch];
    for_each_chunk(kind, n, [&](const PointSet& ps) {
        const std::size_t N = ps.size();
        for (std::size_t off = 0; off < N; off += kBatch) {
            const int len = static_cast<int>(std::min<std::size_t>(kBatch, N - off));
            const double* u[6] = {&ps.x0[off], &ps.x1[off], &ps.x2[off],
                                  &ps.y0[off], &ps.y1[off], &ps.y2[off]};
            for (int b = 0; b < len; ++b) {
                double q = 0;
                for (int r = 0; r < 3; ++r) {
                    const double d = M1(r, 0) * u[0][b] + M1(r, 1) * u[1][b] + M1(r, 2) * u[2][b] -
                                     M2(r, 0) * u[3][b] - M2(r, 1) * u[4][b] - M2(r, 2) * u[5][b];
                    q += d * d;
                }
                r2[b] = q;
            }
            kernel_batch(r2, &ps.w[off], e, kf, len);
            int slot = 0;
            for (int i = 0; i < 6; ++i)
                for (int j = i; j < 6; ++j) {
                    double sum = 0;
                    for (int b = 0; b < len; ++b) sum += kf[b] * u[i][b] * u[j][b];
                    acc[slot++] += sum;
                }
        }
    });
    const double scale = prefactor(kind, s, PrefactorMode::Audit) * std::abs(M1.determinant()) *
                         std::abs(M2.determinant());
    Moments6 G;
    int slot = 0;
    for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j) {
            check_finite(acc[slot], kind);
            G(i, j) = G(j, i) = scale * acc[slot++];
        }
    return G;
}

Moments7 tt_distant_moments(const AffineMap3& m1, const AffineMap3& m2, double s, int n) {
    check_s(s);
    const auto rule = element_rule(true, n);
    const auto& R = *rule;
    const std::size_t N = R.w.size();
    const double e = -1.5 - s;
    // Physical points of element 2.
    std::vector<double> py0(N), py1(N), py2(N);
    for (std::size_t j = 0; j < N; ++j) {
        const Vec3 y = m2(Vec3(R.r0[j], R.r1[j], R.r2[j]));
        py0[j] = y[0];
        py1[j] = y[1];
        py2[j] = y[2];
    }
    Moments7 G = Moments7::Zero();
    std::vector<double> r2(N), kf(N);
    for (std::size_t i = 0; i < N; ++i) {
        const Vec3 xr(R.r0[i], R.r1[i], R.r2[i]);
        const Vec3 x = m1(xr);
        for (std::size_t j = 0; j < N; ++j) {
            const double a = x[0] - py0[j], b = x[1] - py1[j], c = x[2] - py2[j];
            r2[j] = a * a + b * b + c * c;
        }
        kernel_batch(r2.data(), R.w.data(), e, kf.data(), static_cast<int>(N));
        double s0 = 0, sy[3] = {0, 0, 0}, syy[6] = {0, 0, 0, 0, 0, 0};
        for (std::size_t j = 0; j < N; ++j) {
            const double k = kf[j], y0 = R.r0[j], y1 = R.r1[j], y2 = R.r2[j];
            s0 += k;
            sy[0] += k * y0;
            sy[1] += k * y1;
            sy[2] += k * y2;
            syy[0] += k * y0 * y0;
            syy[1] += k * y0 * y1;
            syy[2] += k * y0 * y2;
            syy[3] += k * y1 * y1;
            syy[4] += k * y1 * y2;
            syy[5] += k * y2 * y2;
        }
        const double wi = R.w[i];
        Eigen::Matrix<double, 4, 1> ux;
        ux << 1, xr;
        G.topLeftCorner<4, 4>() += wi * s0 * ux * ux.transpose();
        const Vec3 syv(sy[0], sy[1], sy[2]);
        G.block<4, 3>(0, 4) += wi * ux * syv.transpose();
        Mat3 Y;
        Y << syy[0], syy[1], syy[2], syy[1], syy[3], syy[4], syy[2], syy[4], syy[5];
        G.bottomRightCorner<3, 3>() += wi * Y;
    }
    G.block<3, 4>(4, 0) = G.block<4, 3>(0, 4).transpose();
    G *= std::abs(m1.M.determinant()) * std::abs(m2.M.determinant());
    check_finite(G.sum(), CaseKind::TTDistant);
    return G;
}

Moments3 tp_singular_moments(CaseKind kind, const Mat3& Mt, const Mat32& Mtau, const Vec3& normal,
                             double s, int n, PrefactorMode mode) {
    require_singular(kind, true);
    check_s(s);
    const double e = -1.5 - s;
    std::array<double, 6> acc{};
    double r2[kBatch], kf[kBatch], num[kBatch];
    for_each_chunk(kind, n, [&](const PointSet& ps) {
        const std::size_t N = ps.size();
        for (std::size_t off = 0; off < N; off += kBatch) {
            const int len = static_cast<int>(std::min<std::size_t>(kBatch, N - off));
            const double* u[3] = {&ps.x0[off], &ps.x1[off], &ps.x2[off]};
            const double* y0 = &ps.y0[off];
            const double* y1 = &ps.y1[off];
            for (int b = 0; b < len; ++b) {
                double q = 0, p = 0;
                for (int r = 0; r < 3; ++r) {
                    const double d = Mtau(r, 0) * y0[b] + Mtau(r, 1) * y1[b] - Mt(r, 0) * u[0][b] -
                                     Mt(r, 1) * u[1][b] - Mt(r, 2) * u[2][b];
                    q += d * d;
                    p += d * normal[r];
                }
                r2[b] = q;
                num[b] = p;
            }
            kernel_batch(r2, &ps.w[off], e, kf, len);
            for (int b = 0; b < len; ++b) kf[b] *= num[b];
            int slot = 0;
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) {
                    double sum = 0;
                    for (int b = 0; b < len; ++b) sum += kf[b] * u[i][b] * u[j][b];
                    acc[slot++] += sum;
                }
        }
    });
    const double area = Mtau.col(0).cross(Mtau.col(1)).norm();
    const double scale = prefactor(kind, s, mode) * std::abs(Mt.determinant()) * area;
    Moments3 G;
    int slot = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            check_finite(acc[slot], kind);
            G(i, j) = G(j, i) = scale * acc[slot++];
        }
    return G;
}

Moments4 tp_distant_moments(const AffineMap3& mt, const AffineMap2& mtau, const Vec3& normal,
                            double s, int n) {
    check_s(s);
    const auto tr = element_rule(true, n);
    const auto pr = element_rule(false, n);
    const std::size_t NY = pr->w.size();
    const double e = -1.5 - s;
    std::vector<double> py0(NY), py1(NY), py2(NY), r2(NY), num(NY), kf(NY);
    for (std::size_t j = 0; j < NY; ++j) {
        const Vec3 y = mtau(Vec2(pr->r0[j], pr->r1[j]));
        py0[j] = y[0];
        py1[j] = y[1];
        py2[j] = y[2];
    }
    Moments4 G = Moments4::Zero();
    for (std::size_t i = 0; i < tr->w.size(); ++i) {
        const Vec3 xr(tr->r0[i], tr->r1[i], tr->r2[i]);
        const Vec3 x = mt(xr);
        for (std::size_t j = 0; j < NY; ++j) {
            const double a = py0[j] - x[0], b = py1[j] - x[1], c = py2[j] - x[2];
            r2[j] = a * a + b * b + c * c;
            num[j] = a * normal[0] + b * normal[1] + c * normal[2];
        }
        kernel_batch(r2.data(), pr->w.data(), e, kf.data(), static_cast<int>(NY));
        double s0 = 0;
        for (std::size_t j = 0; j < NY; ++j) s0 += kf[j] * num[j];
        Eigen::Matrix<double, 4, 1> u;
        u << 1, xr;
        G += tr->w[i] * s0 * u * u.transpose();
    }
    G *= std::abs(mt.M.determinant()) * mtau.M.col(0).cross(mtau.M.col(1)).norm();
    check_finite(G.sum(), CaseKind::TPDistant);
    return G;
}

Vec3 nodal_w(const std::array<double, 4>& v) {
    return Vec3(v[1] - v[0], v[2] - v[1], v[3] - v[1]);
}

// ---------------------------------------------------------------------------
// Wrappers
// ---------------------------------------------------------------------------

namespace {

template <class A, class B>
void check_alignment(CaseKind kind, const A& e1, int n1, const B& e2, int n2, double h) {
    const int k = shared_vertex_count(kind);
    const double tol = 1e-10 * h;
    for (int i = 0; i < k; ++i)
        if ((e1[i] - e2[i]).norm() > tol)
            throw AlignmentError("vertex " + std::to_string(i) + " is not shared in " +
                                 to_string(kind) + " ordering");
    for (int i = k; i < n1; ++i)
        for (int j = k; j < n2; ++j)
            if ((e1[i] - e2[j]).norm() <= tol)
                throw WrongCase("extra shared vertex for " + to_string(kind));
}

}  // namespace

double singular_integral(CaseKind kind, const Tetrahedron& t1, const Tetrahedron& t2,
                         const NodalPair& phi_i, const NodalPair& phi_j, double s, int n) {
    require_singular(kind, false);
    check_alignment(kind, t1, 4, t2, 4, std::max(diameter(t1), diameter(t2)));
    const auto m1 = tet_map(t1);
    const auto m2 = tet_map(t2);
    const auto G = tt_singular_moments(kind, m1.M, m2.M, s, n);
    Eigen::Matrix<double, 6, 1> ci, cj;
    ci << nodal_w(phi_i.on1), -nodal_w(phi_i.on2);
    cj << nodal_w(phi_j.on1), -nodal_w(phi_j.on2);
    return ci.dot(G * cj);
}

double singular_integral(CaseKind kind, const Tetrahedron& t, const Panel& tau,
                         const std::array<double, 4>& phi_i, const std::array<double, 4>& phi_j,
                         double s, int n, PrefactorMode mode) {
    require_singular(kind, true);
    check_alignment(kind, t, 4, tau, 3, std::max(diameter(t), diameter(tau)));
    for (int k = 0; k < shared_vertex_count(kind); ++k)
        if (phi_i[k] != 0 || phi_j[k] != 0)
            throw InvalidParameter("tet-panel basis functions must vanish on the panel");
    const auto mt = tet_map(t);
    const auto mp = panel_map(tau);
    const auto G = tp_singular_moments(kind, mt.M, mp.M, tau.n, s, n, mode);
    return nodal_w(phi_i).dot(G * nodal_w(phi_j));
}

double distant_integral(const Tetrahedron& t1, const Tetrahedron& t2, const NodalPair& phi_i,
                        const NodalPair& phi_j, double s, int n) {
    const double h = std::max(diameter(t1), diameter(t2));
    if (tet_distance(t1, t2) <= 1e-12 * h) throw WrongCase("tt-distant needs disjoint elements");
    const auto G = tt_distant_moments(tet_map(t1), tet_map(t2), s, n);
    Eigen::Matrix<double, 7, 1> ci, cj;
    ci << phi_i.on1[0] - phi_i.on2[0], nodal_w(phi_i.on1), -nodal_w(phi_i.on2);
    cj << phi_j.on1[0] - phi_j.on2[0], nodal_w(phi_j.on1), -nodal_w(phi_j.on2);
    return ci.dot(G * cj);
}

double distant_integral(const Tetrahedron& t, const Panel& tau, const std::array<double, 4>& phi_i,
                        const std::array<double, 4>& phi_j, double s, int n) {
    const double h = std::max(diameter(t), diameter(tau));
    if (tet_panel_distance(t, tau) <= 1e-12 * h)
        throw WrongCase("tp-distant needs disjoint elements");
    const auto G = tp_distant_moments(tet_map(t), panel_map(tau), tau.n, s, n);
    Eigen::Matrix<double, 4, 1> ci, cj;
    ci << phi_i[0], nodal_w(phi_i);
    cj << phi_j[0], nodal_w(phi_j);
    return ci.dot(G * cj);
}

long long evaluation_count(CaseKind kind, int n) {
    if (kind == CaseKind::TTDistant) return ipow(n, 6);
    if (kind == CaseKind::TPDistant) return ipow(n, 5);
    const auto& t = case_table(kind);
    return static_cast<long long>(t.subdomains.size()) * ipow(n, t.k_eta);
}

}  // namespace fl
