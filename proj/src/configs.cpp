#include "fraclap/configs.hpp"

#include "fraclap/errors.hpp"

#include <algorithm>

namespace fl {

namespace {

const Vec3 P0(0, 0, 0), P1(1, 0, 0), P2(0.45, 0.85, 0);
const Vec3 B(0.4, 0.3, -0.8), U(0.5, 0.25, 0.75);
const Vec3 B1(0.3, 0.65, -0.7), B2(0.55, -0.6, -0.55);
const Vec3 U1(0.35, 0.6, 0.75), U2(0.65, -0.55, 0.6);
const Vec3 Bv1(0.9, 0.15, -0.45), Bv2(0.1, 0.85, -0.5), Bv3(0.35, 0.25, -0.95);
const Vec3 Uv1(0.85, -0.25, 0.5), Uv2(-0.15, 0.75, 0.6), Uv3(0.3, 0.15, 0.95);

// Nodal values of the hat at point `node` on the vertices of `t`.
std::array<double, 4> hat_on(const Tetrahedron& t, const Vec3& node) {
    std::array<double, 4> v{};
    for (int k = 0; k < 4; ++k) v[k] = (t[k] - node).norm() < 1e-14 ? 1.0 : 0.0;
    return v;
}

NodalPair hat_pair(const Tetrahedron& t1, const Tetrahedron& t2, const Vec3& node) {
    return {hat_on(t1, node), hat_on(t2, node)};
}

}  // namespace

TouchingConfig touching_config(CaseKind kind, double scale) {
    TouchingConfig c;
    c.kind = kind;
    auto tt = [&](Tetrahedron a, Tetrahedron b, const Vec3& ni, const Vec3& nj) {
        c.t1 = a;
        c.t2 = b;
        c.phi_i = hat_pair(a, b, ni);
        c.phi_j = hat_pair(a, b, nj);
    };
    auto tp = [&](Tetrahedron t, const Vec3& pa, const Vec3& pb, const Vec3& pc, const Vec3& ni,
                  const Vec3& nj) {
        c.t1 = t;
        c.tau = Panel{pa, pb, pc, oriented_normal(pa, pb, pc, centroid(t)), -1};
        c.phi_i.on1 = hat_on(t, ni);
        c.phi_j.on1 = hat_on(t, nj);
    };
    switch (kind) {
        case CaseKind::TTIdentical: {
            const Tetrahedron t{P0, P1, P2, U};
            tt(t, t, P0, P1);
            c.separation = Vec3::Zero();
            break;
        }
        case CaseKind::TTFace: tt({P0, P1, P2, B}, {P0, P1, P2, U}, U, B); break;
        case CaseKind::TTEdge: tt({P0, P1, B1, B2}, {P0, P1, U1, U2}, P0, U1); break;
        case CaseKind::TTVertex: tt({P0, Bv1, Bv2, Bv3}, {P0, Uv1, Uv2, Uv3}, P0, Bv1); break;
        case CaseKind::TPFace: tp({P0, P1, P2, B}, P0, P1, P2, B, B); break;
        case CaseKind::TPEdge: tp({P0, P1, B1, B2}, P0, P1, U1, B1, B1); break;
        case CaseKind::TPVertex: tp({P0, Bv1, Bv2, Bv3}, P0, Uv1, Uv2, Bv1, Bv2); break;
        default: throw InvalidParameter("no touching configuration for " + to_string(kind));
    }
    for (int k = 0; k < 4; ++k) {
        c.t1[k] *= scale;
        c.t2[k] *= scale;
    }
    c.tau.a *= scale;
    c.tau.b *= scale;
    c.tau.c *= scale;
    c.h = is_tet_panel(kind) ? std::max(diameter(c.t1), diameter(c.tau))
                             : std::max(diameter(c.t1), diameter(c.t2));
    return c;
}

TouchingConfig translated(const TouchingConfig& c, const Vec3& offset) {
    TouchingConfig r = c;
    for (int k = 0; k < 4; ++k) r.t2[k] += offset;
    r.tau.a += offset;
    r.tau.b += offset;
    r.tau.c += offset;
    return r;
}

double duffy_value(const TouchingConfig& c, double s, int n, PrefactorMode mode) {
    if (is_tet_panel(c.kind))
        return singular_integral(c.kind, c.t1, c.tau, c.phi_i.on1, c.phi_j.on1, s, n, mode);
    return singular_integral(c.kind, c.t1, c.t2, c.phi_i, c.phi_j, s, n);
}

}  // namespace fl
