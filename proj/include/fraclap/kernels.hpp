#pragma once

#include "fraclap/duffy.hpp"
#include "fraclap/geometry.hpp"

namespace fl {

// 2^{2s} Gamma(s+3/2) / (pi^{3/2} Gamma(1-s)).
double c_ds(double s);

// Normalisation used for the operator: s * c_ds(s) = 4^s Gamma(s+3/2) / (pi^{3/2} |Gamma(-s)|),
// the constant for which (-Delta)^s has symbol |xi|^{2s} and the closed-form ball
// solution holds.
double kernel_constant(double s);

// Hat function restricted to one tet: phi(x) = g.(x - a_t) + v0.
struct AffineRestriction {
    Vec3 g = Vec3::Zero();
    double v0 = 0;
    bool active = false;

    double operator()(const Vec3& x, const Vec3& a_t) const { return g.dot(x - a_t) + v0; }
    // Nodal values on the tet's vertices.
    std::array<double, 4> nodal(const Tetrahedron& t) const;
};

// Restriction of the hat of vertex `local` (0..3) of t; local < 0 gives an
// inactive restriction.
AffineRestriction basis_restriction(const Tetrahedron& t, int local);

// g2^T M2 d2 - g1^T M1 d1: the eta-part of phi(y) - phi(x) once the scaling
// variables are factored out.
double difference_factor(const AffineRestriction& r1, const Mat3& M1, const AffineRestriction& r2,
                         const Mat3& M2, const Vec3& d1, const Vec3& d2);

// Maximum tangential-gradient mismatch over the shared simplex of an aligned
// pair (0 for vertex and distant pairs).
double tangential_mismatch(CaseKind kind, const AffineRestriction& r1, const Mat3& M1,
                           const AffineRestriction& r2, const Mat3& M2);

// Single-point transformed integrands on subdomain m (reference path; the
// moment engine in duffy is the production path). No prefactor, no c_ds.
double k1_eta(CaseKind kind, int m, const double* eta, const Mat3& M1, const Mat3& M2,
              const AffineRestriction& ri1, const AffineRestriction& ri2,
              const AffineRestriction& rj1, const AffineRestriction& rj2, double s);
double k2_eta(CaseKind kind, int m, const double* eta, const Mat3& Mt, const Mat32& Mtau,
              const Vec3& normal, const AffineRestriction& ri, const AffineRestriction& rj,
              double s);

}  // namespace fl
