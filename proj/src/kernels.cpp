#include "fraclap/kernels.hpp"

#include "fraclap/errors.hpp"

#include <cmath>

namespace fl {

double c_ds(double s) {
    if (!(s > 0 && s < 1)) throw InvalidParameter("s must lie in (0,1)");
    return std::pow(2.0, 2 * s) * std::tgamma(s + 1.5) / (std::pow(M_PI, 1.5) * std::tgamma(1 - s));
}

double kernel_constant(double s) { return s * c_ds(s); }

std::array<double, 4> AffineRestriction::nodal(const Tetrahedron& t) const {
    std::array<double, 4> v{};
    if (!active) return v;
    for (int k = 0; k < 4; ++k) v[k] = (*this)(t[k], t.a);
    return v;
}

AffineRestriction basis_restriction(const Tetrahedron& t, int local) {
    AffineRestriction r;
    if (local < 0) return r;
    if (local > 3) throw InvalidParameter("local vertex index outside 0..3");
    const auto m = tet_map(t);
    std::array<double, 4> v{};
    v[local] = 1;
    r.g = m.M.transpose().partialPivLu().solve(nodal_w(v));
    r.v0 = v[0];
    r.active = true;
    return r;
}

double difference_factor(const AffineRestriction& r1, const Mat3& M1, const AffineRestriction& r2,
                         const Mat3& M2, const Vec3& d1, const Vec3& d2) {
    double v = 0;
    if (r2.active) v += r2.g.dot(M2 * d2);
    if (r1.active) v -= r1.g.dot(M1 * d1);
    return v;
}

double tangential_mismatch(CaseKind kind, const AffineRestriction& r1, const Mat3& M1,
                           const AffineRestriction& r2, const Mat3& M2) {
    const int tangents = std::max(0, shared_vertex_count(kind) - 1);
    double worst = 0;
    for (int k = 0; k < std::min(tangents, 3); ++k) {
        const double a = r1.active ? r1.g.dot(M1.col(k)) : 0;
        const double b = r2.active ? r2.g.dot(M2.col(k)) : 0;
        worst = std::max(worst, std::abs(a - b));
    }
    return worst;
}

namespace {

Vec3 eval3(const std::array<Poly, 3>& p, const double* eta) {
    return Vec3(p[0](eta), p[1](eta), p[2](eta));
}

}  // namespace

double k1_eta(CaseKind kind, int m, const double* eta, const Mat3& M1, const Mat3& M2,
              const AffineRestriction& ri1, const AffineRestriction& ri2,
              const AffineRestriction& rj1, const AffineRestriction& rj2, double s) {
    const auto& sub = case_table(kind).subdomains.at(m);
    const Vec3 d1 = eval3(sub.d1, eta), d2 = eval3(sub.d2, eta);
    const double den = (M2 * d2 - M1 * d1).squaredNorm();
    if (den < 1e-300) throw IntegrandError("vanishing denominator in k1");
    return difference_factor(ri1, M1, ri2, M2, d1, d2) * difference_factor(rj1, M1, rj2, M2, d1, d2) *
           std::pow(den, -1.5 - s) * std::abs(M1.determinant()) * std::abs(M2.determinant()) *
           std::abs(sub.jac(eta));
}

double k2_eta(CaseKind kind, int m, const double* eta, const Mat3& Mt, const Mat32& Mtau,
              const Vec3& normal, const AffineRestriction& ri, const AffineRestriction& rj,
              double s) {
    const auto& sub = case_table(kind).subdomains.at(m);
    const Vec3 d1 = eval3(sub.d1, eta);
    const Vec2 d2(sub.d2[0](eta), sub.d2[1](eta));
    const Vec3 r = Mtau * d2 - Mt * d1;
    const double den = r.squaredNorm();
    if (den < 1e-300) throw IntegrandError("vanishing denominator in k2");
    const double fi = ri.active ? ri.g.dot(Mt * d1) : 0;
    const double fj = rj.active ? rj.g.dot(Mt * d1) : 0;
    return fi * fj * r.dot(normal) * std::pow(den, -1.5 - s) * std::abs(Mt.determinant()) *
           Mtau.col(0).cross(Mtau.col(1)).norm() * std::abs(sub.jac(eta));
}

}  // namespace fl
