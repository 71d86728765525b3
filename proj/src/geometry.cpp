#include "fraclap/geometry.hpp"

#include "fraclap/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fl {

double diameter(const Tetrahedron& t) {
    double h = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) h = std::max(h, (t[i] - t[j]).norm());
    return h;
}

double diameter(const Panel& p) {
    return std::max({(p.a - p.b).norm(), (p.b - p.c).norm(), (p.c - p.a).norm()});
}

double volume(const Tetrahedron& t) {
    return std::abs((t.b - t.a).dot((t.c - t.a).cross(t.d - t.a))) / 6.0;
}

Vec3 centroid(const Tetrahedron& t) { return 0.25 * (t.a + t.b + t.c + t.d); }
Vec3 centroid(const Panel& p) { return (p.a + p.b + p.c) / 3.0; }

AffineMap3 tet_map(const Tetrahedron& t) {
    AffineMap3 m;
    m.M.col(0) = t.b - t.a;
    m.M.col(1) = t.c - t.b;
    m.M.col(2) = t.d - t.b;
    m.offset = t.a;
    const double h = diameter(t);
    if (!(h > 0) || std::abs(m.M.determinant()) < 1e-12 * h * h * h)
        throw DegenerateElement("|det M_t| below 1e-12 h^3");
    return m;
}

AffineMap2 panel_map(const Panel& p) {
    AffineMap2 m;
    m.M.col(0) = p.b - p.a;
    m.M.col(1) = p.c - p.b;
    m.offset = p.a;
    const double h = diameter(p);
    if (!(h > 0) || m.M.col(0).cross(m.M.col(1)).norm() < 1e-12 * h * h)
        throw DegenerateElement("panel area below 1e-12 h^2");
    return m;
}

namespace {

double angle_between(const Vec3& u, const Vec3& v) {
    const double c = u.dot(v) / (u.norm() * v.norm());
    return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace

ShapeMetrics shape_metrics(const Tetrahedron& t) {
    tet_map(t);  // degeneracy check
    ShapeMetrics s;
    s.h = diameter(t);
    s.volume = volume(t);
    double area = 0;
    double theta = M_PI;
    std::array<Vec3, 4> normals;  // outward normal of the face opposite vertex k
    for (int k = 0; k < 4; ++k) {
        std::array<Vec3, 3> f;
        for (int i = 0, m = 0; i < 4; ++i)
            if (i != k) f[m++] = t[i];
        area += 0.5 * (f[1] - f[0]).cross(f[2] - f[0]).norm();
        for (int i = 0; i < 3; ++i)
            theta = std::min(theta, angle_between(f[(i + 1) % 3] - f[i], f[(i + 2) % 3] - f[i]));
        normals[k] = oriented_normal(f[0], f[1], f[2], t[k]);
    }
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            theta = std::min(theta, M_PI - angle_between(normals[i], normals[j]));
    s.theta = theta;
    s.rho = 3.0 * s.volume / area;
    return s;
}

namespace {

template <class Map>
GramInfo gram_of(const Map& m) {
    const auto G = (m.M.transpose() * m.M).eval();
    Eigen::SelfAdjointEigenSolver<std::decay_t<decltype(G)>> es(G);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff(), std::sqrt(G.determinant())};
}

}  // namespace

GramInfo gram_scaling_check(const AffineMap3& m) { return gram_of(m); }
GramInfo gram_scaling_check(const AffineMap2& m) { return gram_of(m); }

Vec3 oriented_normal(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& away) {
    Vec3 n = (b - a).cross(c - a).normalized();
    if (n.dot((a + b + c) / 3.0 - away) < 0) n = -n;
    return n;
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    // Closest point on triangle by Voronoi regions (Ericson, Real-Time Collision Detection).
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return ap.norm();
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return bp.norm();
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return (p - (a + d1 / (d1 - d3) * ab)).norm();
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return cp.norm();
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return (p - (a + d2 / (d2 - d6) * ac)).norm();
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
        return (p - (b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b))).norm();
    const double den = 1.0 / (va + vb + vc);
    return (p - (a + ab * (vb * den) + ac * (vc * den))).norm();
}

double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
    const Vec3 d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
    const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
    const double c = d1.dot(r), b = d1.dot(d2);
    const double den = a * e - b * b;
    double s = den > 1e-14 * a * e ? std::clamp((b * f - c * e) / den, 0.0, 1.0) : 0.0;
    double t = (b * s + f) / e;
    if (t < 0) {
        t = 0;
        s = std::clamp(-c / a, 0.0, 1.0);
    } else if (t > 1) {
        t = 1;
        s = std::clamp((b - c) / a, 0.0, 1.0);
    }
    return (p0 + s * d1 - (q0 + t * d2)).norm();
}

namespace {

constexpr int kFace[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
constexpr int kEdge[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

double tet_point_face_min(const Tetrahedron& t, const Vec3& p) {
    double d = INFINITY;
    for (auto& f : kFace) d = std::min(d, point_triangle_distance(p, t[f[0]], t[f[1]], t[f[2]]));
    return d;
}

}  // namespace

double tet_distance(const Tetrahedron& t1, const Tetrahedron& t2) {
    double d = INFINITY;
    for (int k = 0; k < 4; ++k) {
        d = std::min(d, tet_point_face_min(t2, t1[k]));
        d = std::min(d, tet_point_face_min(t1, t2[k]));
    }
    for (auto& e : kEdge)
        for (auto& g : kEdge)
            d = std::min(d, segment_distance(t1[e[0]], t1[e[1]], t2[g[0]], t2[g[1]]));
    return d;
}

double tet_panel_distance(const Tetrahedron& t, const Panel& p) {
    double d = INFINITY;
    for (int k = 0; k < 4; ++k) d = std::min(d, point_triangle_distance(t[k], p.a, p.b, p.c));
    for (int k = 0; k < 3; ++k) d = std::min(d, tet_point_face_min(t, p[k]));
    for (auto& e : kEdge)
        for (int k = 0; k < 3; ++k)
            d = std::min(d, segment_distance(t[e[0]], t[e[1]], p[k], p[(k + 1) % 3]));
    return d;
}

}  // namespace fl
