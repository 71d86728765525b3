#include "fraclap/oracle.hpp"

#include "fraclap/errors.hpp"
#include "fraclap/kernels.hpp"
#include "fraclap/mesh.hpp"
#include "fraclap/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace fl {

namespace {

// ---------------------------------------------------------------------------
// Exact clipping and cubature
// ---------------------------------------------------------------------------

struct Tet4 {
    std::array<Vec3, 4> p;
};

Vec3 cut(const Vec3& a, const Vec3& b, double fa, double fb) {
    return a + (fa / (fa - fb)) * (b - a);
}

void push_prism(std::vector<Tet4>& out, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& a2,
                const Vec3& b2, const Vec3& c2) {
    out.push_back({{a, b, c, a2}});
    out.push_back({{b, c, a2, b2}});
    out.push_back({{c, a2, b2, c2}});
}

// Keeps the part of every tet where n.x <= c.
void clip_tets(std::vector<Tet4>& tets, const Vec3& n, double c, std::vector<Tet4>& scratch) {
    scratch.clear();
    for (const auto& t : tets) {
        std::array<double, 4> f;
        std::array<int, 4> in{}, out{};
        int ni = 0, no = 0;
        for (int k = 0; k < 4; ++k) {
            f[k] = c - n.dot(t.p[k]);
            if (f[k] >= 0)
                in[ni++] = k;
            else
                out[no++] = k;
        }
        if (ni == 4) {
            scratch.push_back(t);
        } else if (ni == 1) {
            const int a = in[0];
            Tet4 r;
            r.p[0] = t.p[a];
            for (int k = 0; k < 3; ++k) r.p[k + 1] = cut(t.p[a], t.p[out[k]], f[a], f[out[k]]);
            scratch.push_back(r);
        } else if (ni == 3) {
            const int d = out[0];
            const Vec3& A = t.p[in[0]];
            const Vec3& B = t.p[in[1]];
            const Vec3& C = t.p[in[2]];
            push_prism(scratch, A, B, C, cut(A, t.p[d], f[in[0]], f[d]),
                       cut(B, t.p[d], f[in[1]], f[d]), cut(C, t.p[d], f[in[2]], f[d]));
        } else if (ni == 2) {
            const Vec3& A = t.p[in[0]];
            const Vec3& B = t.p[in[1]];
            const Vec3& C = t.p[out[0]];
            const Vec3& D = t.p[out[1]];
            const double fa = f[in[0]], fb = f[in[1]], fc = f[out[0]], fd = f[out[1]];
            push_prism(scratch, A, cut(A, C, fa, fc), cut(A, D, fa, fd), B, cut(B, C, fb, fc),
                       cut(B, D, fb, fd));
        }
    }
    tets.swap(scratch);
}

// Keeps the part of a planar polygon where n.x <= c.
void clip_polygon(std::vector<Vec3>& poly, const Vec3& n, double c, std::vector<Vec3>& scratch) {
    scratch.clear();
    const std::size_t m = poly.size();
    for (std::size_t k = 0; k < m; ++k) {
        const Vec3& a = poly[k];
        const Vec3& b = poly[(k + 1) % m];
        const double fa = c - n.dot(a), fb = c - n.dot(b);
        if (fa >= 0) scratch.push_back(a);
        if ((fa >= 0) != (fb >= 0)) scratch.push_back(cut(a, b, fa, fb));
    }
    poly.swap(scratch);
}

// Outward face planes (n, c) of a tet: x inside <=> n.x <= c for all four.
std::array<std::pair<Vec3, double>, 4> face_planes(const Tetrahedron& t) {
    std::array<std::pair<Vec3, double>, 4> planes;
    for (int f = 0; f < 4; ++f) {
        const Vec3& p0 = t[(f + 1) % 4];
        const Vec3& p1 = t[(f + 2) % 4];
        const Vec3& p2 = t[(f + 3) % 4];
        Vec3 n = (p1 - p0).cross(p2 - p0).normalized();
        if (n.dot(t[f] - p0) > 0) n = -n;
        planes[f] = {n, n.dot(p0)};
    }
    return planes;
}

// Degree-2 exact four-point rule on a tet.
constexpr double kTetA = 0.5854101966249685, kTetB = 0.1381966011250105;

template <class F>
double integrate_tet(const Tet4& t, F&& f) {
    const double vol = std::abs((t.p[1] - t.p[0]).dot((t.p[2] - t.p[0]).cross(t.p[3] - t.p[0]))) / 6;
    if (vol == 0) return 0;
    double sum = 0;
    for (int k = 0; k < 4; ++k) {
        Vec3 x = kTetA * t.p[k];
        for (int j = 0; j < 4; ++j)
            if (j != k) x += kTetB * t.p[j];
        sum += f(x);
    }
    return vol * sum / 4;
}

// Affine form of the interpolant of nodal values on t: phi(x) = g.x + b.
std::pair<Vec3, double> affine_form(const Tetrahedron& t, const std::array<double, 4>& v) {
    const auto m = tet_map(t);
    const Vec3 g = m.M.transpose().inverse() * nodal_w(v);
    return {g, v[0] - g.dot(t.a)};
}

// ---------------------------------------------------------------------------
// Angular partition of the sphere
// ---------------------------------------------------------------------------

using Poly2 = std::vector<Vec2>;

// Splits convex polygon by the line l0 + l1 u + l2 v = 0.
void split_polygon(const Poly2& poly, const Vec3& l, std::vector<Poly2>& out) {
    std::vector<double> f(poly.size());
    bool pos = false, neg = false;
    const double tol = 1e-13;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        f[k] = l[0] + l[1] * poly[k][0] + l[2] * poly[k][1];
        pos |= f[k] > tol;
        neg |= f[k] < -tol;
    }
    if (!(pos && neg)) {
        out.push_back(poly);
        return;
    }
    Poly2 a, b;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const std::size_t j = (k + 1) % poly.size();
        if (f[k] >= 0) a.push_back(poly[k]);
        if (f[k] <= 0) b.push_back(poly[k]);
        if ((f[k] > 0 && f[j] < 0) || (f[k] < 0 && f[j] > 0)) {
            const Vec2 x = poly[k] + (f[k] / (f[k] - f[j])) * (poly[j] - poly[k]);
            a.push_back(x);
            b.push_back(x);
        }
    }
    out.push_back(std::move(a));
    out.push_back(std::move(b));
}

double polygon_area(const Poly2& p) {
    double a = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const auto& u = p[k];
        const auto& v = p[(k + 1) % p.size()];
        a += u[0] * v[1] - u[1] * v[0];
    }
    return 0.5 * std::abs(a);
}

struct Direction {
    Vec3 w;
    double weight;
};

// Chebyshev sample positions on [0,1].
std::array<double, 6> cheb_nodes() {
    std::array<double, 6> t;
    for (int k = 0; k < 6; ++k) t[k] = 0.5 * (1 - std::cos(M_PI * (2 * k + 1) / 12.0));
    return t;
}

const std::array<double, 6> kCheb = cheb_nodes();

// Inverse Vandermonde on the Chebyshev nodes (sample values -> monomial coefficients in t).
const Eigen::Matrix<double, 6, 6>& cheb_to_monomial() {
    static const Eigen::Matrix<double, 6, 6> inv = [] {
        Eigen::Matrix<double, 6, 6> V;
        for (int k = 0; k < 6; ++k)
            for (int j = 0; j < 6; ++j) V(k, j) = std::pow(kCheb[k], j);
        return Eigen::Matrix<double, 6, 6>(V.inverse());
    }();
    return inv;
}

struct Segment {
    double a, b;
    Eigen::Matrix<double, 6, 1> coef;  // monomial coefficients in t = (r-a)/(b-a)
};

double poly_eval(const Eigen::Matrix<double, 6, 1>& c, double t) {
    double v = c[5];
    for (int k = 4; k >= 0; --k) v = v * t + c[k];
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// PolarCorrelation
// ---------------------------------------------------------------------------

PolarCorrelation::PolarCorrelation(const TouchingConfig& config, const PolarOptions& opts)
    : cfg_(config), opts_(opts), panel_(is_tet_panel(config.kind)) {
    if (is_distant(cfg_.kind)) throw WrongCase("polar correlation needs a touching configuration");
    scale_ = cfg_.h;
    std::tie(gi1_, bi1_) = affine_form(cfg_.t1, cfg_.phi_i.on1);
    std::tie(gj1_, bj1_) = affine_form(cfg_.t1, cfg_.phi_j.on1);
    if (!panel_) {
        std::tie(gi2_, bi2_) = affine_form(cfg_.t2, cfg_.phi_i.on2);
        std::tie(gj2_, bj2_) = affine_form(cfg_.t2, cfg_.phi_j.on2);
    }
    auto add = [&](Vec3 n, double c) {
        const double len = n.norm();
        if (len < 1e-14 * scale_ * scale_) return;
        n /= len;
        c /= len;
        if (std::abs(c) <= 1e-12 * scale_) {
            for (const auto& o : origin_planes_)
                if ((o - n).norm() < 1e-12 || (o + n).norm() < 1e-12) return;
            origin_planes_.push_back(n);
        } else {
            events_.push_back({n, c});
        }
    };
    auto edges_of = [](const std::vector<Vec3>& v) {
        std::vector<std::pair<Vec3, Vec3>> e;
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = i + 1; j < v.size(); ++j) e.push_back({v[i], v[j] - v[i]});
        return e;
    };
    if (!panel_) {
        const auto f1 = face_planes(cfg_.t1);
        const auto f2 = face_planes(cfg_.t2);
        std::vector<Vec3> v1{cfg_.t1.a, cfg_.t1.b, cfg_.t1.c, cfg_.t1.d};
        std::vector<Vec3> v2{cfg_.t2.a, cfg_.t2.b, cfg_.t2.c, cfg_.t2.d};
        for (const auto& p : v1)
            for (const auto& [n, d] : f2) add(n, d - n.dot(p));
        for (const auto& q : v2)
            for (const auto& [m, c] : f1) add(m, m.dot(q) - c);
        for (const auto& [p, a] : edges_of(v1))
            for (const auto& [q, b] : edges_of(v2)) {
                const Vec3 n = a.cross(b);
                add(n, n.dot(q - p));
            }
    } else {
        const auto ft = face_planes(cfg_.t1);
        std::vector<Vec3> vt{cfg_.t1.a, cfg_.t1.b, cfg_.t1.c, cfg_.t1.d};
        std::vector<Vec3> vp{cfg_.tau.a, cfg_.tau.b, cfg_.tau.c};
        const Vec3 nu = (vp[1] - vp[0]).cross(vp[2] - vp[0]).normalized();
        const double e = nu.dot(vp[0]);
        for (const auto& p : vp)
            for (const auto& [n, d] : ft) add(n, n.dot(p) - d);
        for (const auto& q : vt) add(nu, e - nu.dot(q));
        // Panel edges are taken cyclically.
        std::vector<std::pair<Vec3, Vec3>> pe;
        for (int k = 0; k < 3; ++k) pe.push_back({vp[k], vp[(k + 1) % 3] - vp[k]});
        for (const auto& [p, a] : pe)
            for (const auto& [q, b] : edges_of(vt)) {
                const Vec3 n = a.cross(b);
                add(n, n.dot(p - q));
            }
    }
}

double PolarCorrelation::correlation(const Vec3& u) const {
    if (!panel_) {
        std::vector<Tet4> tets{{{cfg_.t1.a, cfg_.t1.b, cfg_.t1.c, cfg_.t1.d}}}, scratch;
        // x + u in t2  <=>  n.x <= c - n.u
        for (const auto& [n, c] : face_planes(cfg_.t2)) {
            clip_tets(tets, n, c - n.dot(u), scratch);
            if (tets.empty()) return 0;
        }
        double sum = 0;
        for (const auto& t : tets)
            sum += integrate_tet(t, [&](const Vec3& x) {
                const Vec3 y = x + u;
                const double di = gi1_.dot(x) + bi1_ - gi2_.dot(y) - bi2_;
                const double dj = gj1_.dot(x) + bj1_ - gj2_.dot(y) - bj2_;
                return di * dj;
            });
        return sum;
    }
    std::vector<Vec3> poly{cfg_.tau.a, cfg_.tau.b, cfg_.tau.c}, scratch;
    // y - u in t  <=>  n.y <= c + n.u
    for (const auto& [n, c] : face_planes(cfg_.t1)) {
        clip_polygon(poly, n, c + n.dot(u), scratch);
        if (poly.size() < 3) return 0;
    }
    double sum = 0;
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        const Vec3& a = poly[0];
        const Vec3& b = poly[k];
        const Vec3& c = poly[k + 1];
        const double area = 0.5 * (b - a).cross(c - a).norm();
        auto f = [&](const Vec3& y) {
            const Vec3 x = y - u;
            return (gi1_.dot(x) + bi1_) * (gj1_.dot(x) + bj1_);
        };
        sum += area / 3 * (f(0.5 * (a + b)) + f(0.5 * (b + c)) + f(0.5 * (c + a)));
    }
    return sum;
}

namespace {

// All quadrature directions of the cube-face partition.
std::vector<Direction> sphere_directions(const std::vector<Vec3>& planes, int q, int m) {
    std::vector<Direction> dirs;
    const auto& g = gauss_rule(q);
    for (int axis = 0; axis < 3; ++axis)
        for (double sgn : {1.0, -1.0}) {
            const int b = (axis + 1) % 3, c = (axis + 2) % 3;
            auto F = [&](const Vec2& uv) {
                Vec3 f;
                f[axis] = sgn;
                f[b] = uv[0];
                f[c] = uv[1];
                return f;
            };
            std::vector<Poly2> polys{{Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)}}, next;
            for (const auto& N : planes) {
                const Vec3 line(sgn * N[axis], N[b], N[c]);
                next.clear();
                for (const auto& p : polys) split_polygon(p, line, next);
                polys.swap(next);
            }
            for (const auto& p : polys) {
                if (polygon_area(p) < 1e-14) continue;
                for (std::size_t k = 1; k + 1 < p.size(); ++k) {
                    const Vec2 A = p[0], B = p[k], C = p[k + 1];
                    // m^2 sub-triangles in barycentric lattice.
                    auto lat = [&](int i, int j) {
                        return A + (double(i) / m) * (B - A) + (double(j) / m) * (C - A);
                    };
                    std::vector<std::array<Vec2, 3>> subs;
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; i + j < m; ++j) {
                            subs.push_back({lat(i, j), lat(i + 1, j), lat(i, j + 1)});
                            if (i + j + 1 < m)
                                subs.push_back({lat(i + 1, j), lat(i + 1, j + 1), lat(i, j + 1)});
                        }
                    for (const auto& tri : subs) {
                        const Vec2 e1 = tri[1] - tri[0], e2 = tri[2] - tri[1];
                        const double jac2 = std::abs(e1[0] * e2[1] - e1[1] * e2[0]);
                        if (jac2 < 1e-300) continue;
                        for (int a = 0; a < q; ++a)
                            for (int bq = 0; bq < q; ++bq) {
                                const double s = g.nodes[a], t = g.nodes[bq];
                                const Vec2 uv = tri[0] + s * e1 + s * t * e2;
                                const Vec3 f = F(uv);
                                const double n = f.norm();
                                dirs.push_back({f / n, g.weights[a] * g.weights[bq] * s * jac2 /
                                                           (n * n * n)});
                            }
                    }
                }
            }
        }
    return dirs;
}

}  // namespace

long long PolarCorrelation::direction_count() const {
    return static_cast<long long>(
        sphere_directions(origin_planes_, opts_.angular_order, opts_.angular_subdiv).size());
}

std::vector<double> PolarCorrelation::evaluate(
    const std::vector<std::pair<double, double>>& s_eps) const {
    for (const auto& [s, eps] : s_eps) {
        if (!(s > 0 && s < 1)) throw InvalidParameter("s must lie in (0,1)");
        if (eps < 0 || (eps > 0 && cfg_.kind == CaseKind::TTIdentical))
            throw InvalidParameter("bad separation for " + to_string(cfg_.kind));
    }
    const auto dirs = sphere_directions(origin_planes_, opts_.angular_order, opts_.angular_subdiv);
    const auto& gr = gauss_rule(opts_.radial_order);
    const auto& V = cheb_to_monomial();
    const Vec3 v = cfg_.separation;
    const Vec3 n = cfg_.tau.n;
    std::vector<double> total(s_eps.size(), 0.0);
    std::vector<double> radii;
    std::vector<Segment> segs;
    for (const auto& dir : dirs) {
        const Vec3& w = dir.w;
        radii.assign(1, 0.0);
        for (const auto& e : events_) {
            const double den = e.normal.dot(w);
            if (std::abs(den) < 1e-14) continue;
            const double r = e.c / den;
            if (r > 1e-12 * scale_) radii.push_back(r);
        }
        std::sort(radii.begin(), radii.end());
        segs.clear();
        for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
            const double a = radii[k], b = radii[k + 1];
            if (b - a < 1e-13 * scale_) continue;
            Eigen::Matrix<double, 6, 1> vals;
            bool any = false;
            for (int j = 0; j < 6; ++j) {
                vals[j] = correlation((a + kCheb[j] * (b - a)) * w);
                any |= vals[j] != 0;
            }
            if (any) segs.push_back({a, b, V * vals});
        }
        if (segs.empty()) continue;
        const double wn = panel_ ? w.dot(n) : 0;
        for (std::size_t job = 0; job < s_eps.size(); ++job) {
            const double s = s_eps[job].first, eps = s_eps[job].second;
            const double ex = -1.5 - s;
            double acc = 0;
            for (const auto& sg : segs) {
                const double len = sg.b - sg.a;
                if (eps == 0 && sg.a == 0) {
                    // Exact moments of r^{-1-2s} (tet-tet) or r^{-2s} (tet-panel).
                    if (!panel_) {
                        for (int k = 2; k < 6; ++k)
                            acc += sg.coef[k] * std::pow(len, -2 * s) / (k - 2 * s);
                    } else {
                        for (int k = 0; k < 6; ++k)
                            acc += wn * sg.coef[k] * std::pow(len, 1 - 2 * s) / (k + 1 - 2 * s);
                    }
                    continue;
                }
                // Geometric grading from the nearest singular scale.
                double lo = sg.a;
                double sigma = std::max(sg.a, eps);
                while (lo < sg.b) {
                    double hi = lo == 0 ? sigma : (lo < sigma ? sigma : 2 * lo);
                    hi = std::min(hi, sg.b);
                    for (int q = 0; q < gr.n; ++q) {
                        const double r = lo + gr.nodes[q] * (hi - lo);
                        const double P = poly_eval(sg.coef, (r - sg.a) / len);
                        const Vec3 z = eps * v + r * w;
                        const double k = std::pow(z.squaredNorm(), ex) * r * r;
                        acc += gr.weights[q] * (hi - lo) * P * (panel_ ? z.dot(n) * k : k);
                    }
                    lo = hi;
                }
            }
            total[job] += dir.weight * acc;
        }
    }
    return total;
}

// ---------------------------------------------------------------------------
// Richardson extrapolation and the eps-separation reference
// ---------------------------------------------------------------------------

double richardson_gamma(CaseKind kind, double s) {
    switch (shared_vertex_count(kind)) {
        case 1: return 5 - 2 * s;
        case 2: return 4 - 2 * s;
        case 3: return 3 - 2 * s;
    }
    throw InvalidParameter("no contact exponent for " + to_string(kind));
}

namespace {

double fit_limit(const std::vector<double>& eps, const std::vector<double>& vals, double gamma,
                 std::size_t count, Eigen::VectorXd* coef_out) {
    const bool log_term = std::abs(gamma - std::round(gamma)) < 1e-6;
    const double e0 = eps.front();
    Eigen::MatrixXd A(count, 5);
    Eigen::VectorXd b(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double x = eps[k] / e0;  // scaled for conditioning
        const double g = log_term ? std::pow(x, gamma) * std::log(x) : std::pow(x, gamma);
        A.row(k) << 1, x, x * x, g, g * x;
        b[k] = vals[k];
    }
    Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    if (coef_out) *coef_out = c;
    return c[0];
}

}  // namespace

RichardsonResult richardson_fit(const std::vector<double>& eps, const std::vector<double>& values,
                                double gamma) {
    if (eps.size() != values.size() || eps.size() < 7)
        throw InvalidParameter("Richardson fit needs at least 7 points");
    for (std::size_t k = 1; k < eps.size(); ++k)
        if (!(eps[k] < eps[k - 1] && eps[k] > 0))
            throw InvalidParameter("eps list must be positive and decreasing");
    RichardsonResult r;
    r.eps = eps;
    r.values = values;
    Eigen::VectorXd c;
    r.limit = fit_limit(eps, values, gamma, eps.size(), &c);
    // Without the largest eps.
    std::vector<double> e2(eps.begin() + 1, eps.end()), v2(values.begin() + 1, values.end());
    r.error_estimate = std::abs(r.limit - fit_limit(e2, v2, gamma, e2.size(), nullptr));
    const double e0 = eps.front();
    const bool log_term = std::abs(gamma - std::round(gamma)) < 1e-6;
    for (std::size_t k = 0; k < eps.size(); ++k) {
        const double x = eps[k] / e0;
        const double g = log_term ? std::pow(x, gamma) * std::log(x) : std::pow(x, gamma);
        const double fit = c[0] + c[1] * x + c[2] * x * x + c[3] * g + c[4] * g * x;
        r.residual = std::max(r.residual, std::abs(fit - values[k]) / std::max(std::abs(r.limit), 1e-300));
    }
    for (std::size_t k = 1; k < eps.size(); ++k)
        if (std::abs(values[k] - r.limit) > std::abs(values[k - 1] - r.limit)) r.monotone = false;
    return r;
}

std::vector<double> default_eps_list() {
    std::vector<double> e;
    for (int k = 6; k <= 12; ++k) e.push_back(std::ldexp(1.0, -k));
    return e;
}

std::vector<RichardsonResult> eps_separation_reference(const TouchingConfig& c,
                                                       const std::vector<double>& s_list,
                                                       std::vector<double> eps_list,
                                                       const PolarOptions& opts) {
    const PolarCorrelation pc(c, opts);
    std::vector<RichardsonResult> out(s_list.size());
    if (c.kind == CaseKind::TTIdentical) {
        std::vector<std::pair<double, double>> jobs;
        for (double s : s_list) jobs.push_back({s, 0.0});
        const auto vals = pc.evaluate(jobs);
        for (std::size_t k = 0; k < s_list.size(); ++k) out[k].limit = vals[k];
        return out;
    }
    if (eps_list.empty()) eps_list = default_eps_list();
    std::vector<std::pair<double, double>> jobs;
    for (double s : s_list)
        for (double e : eps_list) jobs.push_back({s, e * c.h});
    const auto all = pc.evaluate(jobs);
    for (std::size_t k = 0; k < s_list.size(); ++k) {
        const std::vector<double> vals(all.begin() + k * eps_list.size(),
                                       all.begin() + (k + 1) * eps_list.size());
        if (std::all_of(vals.begin(), vals.end(), [](double v) { return v == 0; })) {
            out[k].eps = eps_list;
            out[k].values = vals;
            continue;
        }
        out[k] = richardson_fit(eps_list, vals, richardson_gamma(c.kind, s_list[k]));
    }
    return out;
}

RichardsonResult eps_separation_reference(const TouchingConfig& c, double s,
                                          std::vector<double> eps_list, const PolarOptions& opts) {
    return eps_separation_reference(c, std::vector<double>{s}, std::move(eps_list), opts)[0];
}

// ---------------------------------------------------------------------------
// Panel flux
// ---------------------------------------------------------------------------

namespace {

double triangle_rule(const Vec3& x, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& n,
                     double s) {
    const auto& g = gauss_rule(6);
    const Vec3 e1 = b - a, e2 = c - b;
    const double jac = e1.cross(e2).norm();
    double sum = 0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const double u = g.nodes[i], v = g.nodes[j];
            const Vec3 y = a + u * e1 + u * v * e2;
            const Vec3 d = y - x;
            sum += g.weights[i] * g.weights[j] * u * d.dot(n) * std::pow(d.squaredNorm(), -1.5 - s);
        }
    return sum * jac;
}

double adaptive_triangle(const Vec3& x, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& n,
                         double s, double whole, double tol, int depth) {
    const Vec3 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    const double q1 = triangle_rule(x, a, ab, ca, n, s), q2 = triangle_rule(x, ab, b, bc, n, s);
    const double q3 = triangle_rule(x, ca, bc, c, n, s), q4 = triangle_rule(x, ab, bc, ca, n, s);
    const double refined = q1 + q2 + q3 + q4;
    if (depth >= 14 || std::abs(refined - whole) <= tol) return refined;
    return adaptive_triangle(x, a, ab, ca, n, s, q1, tol / 4, depth + 1) +
           adaptive_triangle(x, ab, b, bc, n, s, q2, tol / 4, depth + 1) +
           adaptive_triangle(x, ca, bc, c, n, s, q3, tol / 4, depth + 1) +
           adaptive_triangle(x, ab, bc, ca, n, s, q4, tol / 4, depth + 1);
}

}  // namespace

double panel_flux_reference(const Vec3& point, const std::vector<Panel>& panels, double s,
                            double tol) {
    double h = 0;
    for (const auto& p : panels) h = std::max(h, diameter(p));
    double sum = 0;
    for (const auto& p : panels) {
        if (point_triangle_distance(point, p.a, p.b, p.c) < 1e-6 * h)
            throw OracleUnstable("point lies on a panel");
        const double whole = triangle_rule(point, p.a, p.b, p.c, p.n, s);
        sum += adaptive_triangle(point, p.a, p.b, p.c, p.n, s, whole,
                                 tol * std::max(std::abs(whole), 1e-300), 0);
    }
    return sum;
}

AdditivityResult subdivision_additivity(const Tetrahedron& t, int i, int j, double s, int n) {
    const auto ri = basis_restriction(t, i);
    const auto rj = basis_restriction(t, j);
    auto values = [&](const AffineRestriction& r, const Tetrahedron& e) {
        std::array<double, 4> v{};
        if (r.active)
            for (int k = 0; k < 4; ++k) v[k] = r(e[k], t.a);
        return v;
    };
    AdditivityResult res;
    const NodalPair pi{values(ri, t), values(ri, t)};
    const NodalPair pj{values(rj, t), values(rj, t)};
    res.direct = singular_integral(CaseKind::TTIdentical, t, t, pi, pj, s, n);

    Mesh m;
    m.vertices = {t.a, t.b, t.c, t.d};
    m.tets = {{0, 1, 2, 3}};
    m.finalize();
    red_refine(m, false);
    const int M = static_cast<int>(m.tets.size());
    for (int t1 = 0; t1 < M; ++t1)
        for (int t2 = 0; t2 < M; ++t2) {
            const auto al = classify_pair(m, t1, t2);
            const Tetrahedron e1 = aligned_tet(m, t1, al.perm1);
            const Tetrahedron e2 = aligned_tet(m, t2, al.perm2);
            const NodalPair ci{values(ri, e1), values(ri, e2)};
            const NodalPair cj{values(rj, e1), values(rj, e2)};
            res.summed += al.kind == CaseKind::TTDistant
                              ? distant_integral(e1, e2, ci, cj, s, n)
                              : singular_integral(al.kind, e1, e2, ci, cj, s, n);
        }
    const double scale = std::max(std::abs(res.direct), 1e-300);
    res.rel_err = (res.direct == 0 && res.summed == 0) ? 0 : std::abs(res.summed - res.direct) / scale;
    return res;
}

}  // namespace fl
