#pragma once

#include "fraclap/geometry.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fl {

enum class CaseKind {
    TTIdentical,
    TTFace,
    TTEdge,
    TTVertex,
    TPFace,
    TPEdge,
    TPVertex,
    TTDistant,
    TPDistant,
};

enum class PrefactorMode { Audit, Paper };

std::string to_string(CaseKind k);
CaseKind case_from_string(const std::string& name);  // "tt-face", ...; throws InvalidParameter
std::string to_string(PrefactorMode m);
PrefactorMode prefactor_mode_from_string(const std::string& name);

bool is_tet_panel(CaseKind k);
bool is_distant(CaseKind k);
int shared_vertex_count(CaseKind k);  // 4,3,2,1 (TT) / 3,2,1 (TP) / 0
CaseKind tt_kind_from_shared(int shared);
CaseKind tp_kind_from_shared(int shared);

// Polynomial in eta_1..eta_6 (sum of monomials).
struct Poly {
    struct Term {
        double c;
        std::array<std::uint8_t, 6> e;
    };
    std::vector<Term> terms;
    double operator()(const double* eta) const;
    // Parses products of `eK`, `(1-eK eL ...)`, signs and the constants 0 and 1,
    // e.g. "-e1 e2 (1-e3)".
    static Poly parse(const std::string& text);
};

struct SubdomainMap {
    std::array<Poly, 3> d1;  // point in the tet t1 (eta part)
    std::array<Poly, 3> d2;  // point in t2, or (y1, y2) in the panel (third unused)
    Poly jac;                // eta-Jacobian, nonnegative on the cube
    int symmetric_of = -1;   // this map is the swap (d2, d1) of subdomain `symmetric_of`
};

enum class Shift { None, Edge, Face };

struct DuffyCaseTable {
    CaseKind kind;
    int k_eta = 0;
    std::vector<SubdomainMap> subdomains;
    Shift shift = Shift::None;
    std::vector<int> xi_jac;          // xi_k exponents of the xi-Jacobian
    std::vector<int> paper_exponents; // p_k behind the printed prefactor prod 1/(p_k+1-2s)
    double symmetry_factor = 1;       // 2 for the identical case (9 of 18 stored)
};

const DuffyCaseTable& case_table(CaseKind kind);

// Sum over subdomains of the integral of the full Jacobian (kernel == 1).
double partition_volume(CaseKind kind, int n = 12);

// Homogeneity audit: measures, for each scaling variable, the degree of the
// full transformed integrand on a canonical configuration and returns
// p_k = xi-Jacobian degree + integrand degree + 2s. In strict mode throws
// ExponentMismatch when the audit disagrees with the printed exponents.
std::vector<int> xi_exponent_audit(CaseKind kind, bool strict = false);

double prefactor(CaseKind kind, double s, PrefactorMode mode);

// ---------------------------------------------------------------------------
// Moment engine. Every integral below is a quadratic form c_i^T G c_j in
// coefficient vectors built from nodal values of the basis functions on the
// canonically aligned elements; G collects the geometry and kernel.
//
//   TT singular: c = [w1; -w2],          G is 6x6
//   TT distant:  c = [v1(a1)-v2(a2); w1; -w2], G is 7x7
//   TP singular: c = w,                   G is 3x3
//   TP distant:  c = [v(a_t); w],         G is 4x4
//
// with w = (v_b - v_a, v_c - v_b, v_d - v_b) from the nodal values (v_a..v_d)
// on the aligned vertices. The TT forms give the raw integral
// int int [phi_i(x)-phi_i(y)][phi_j(x)-phi_j(y)] |x-y|^{-3-2s}; the TP forms
// give int_t phi_i phi_j(x) int_tau (y-x).n |x-y|^{-3-2s} ds_y dx.
// ---------------------------------------------------------------------------

using Moments6 = Eigen::Matrix<double, 6, 6>;
using Moments7 = Eigen::Matrix<double, 7, 7>;
using Moments3 = Eigen::Matrix<double, 3, 3>;
using Moments4 = Eigen::Matrix<double, 4, 4>;

Moments6 tt_singular_moments(CaseKind kind, const Mat3& M1, const Mat3& M2, double s, int n);
Moments7 tt_distant_moments(const AffineMap3& m1, const AffineMap3& m2, double s, int n);
Moments3 tp_singular_moments(CaseKind kind, const Mat3& Mt, const Mat32& Mtau, const Vec3& normal,
                             double s, int n, PrefactorMode mode);
Moments4 tp_distant_moments(const AffineMap3& mt, const AffineMap2& mtau, const Vec3& normal,
                            double s, int n);

// w-vector from nodal values on aligned vertices (a,b,c,d).
Vec3 nodal_w(const std::array<double, 4>& v);

// Convenience wrappers on aligned elements with nodal values of phi_i and phi_j.
// For singular kinds the shared vertices must be the leading ones in the same
// order; otherwise AlignmentError. Distant kinds require disjoint elements (WrongCase).
struct NodalPair {
    std::array<double, 4> on1{}, on2{};  // values at the vertices of element 1 / element 2
};

double singular_integral(CaseKind kind, const Tetrahedron& t1, const Tetrahedron& t2,
                         const NodalPair& phi_i, const NodalPair& phi_j, double s, int n);
double singular_integral(CaseKind kind, const Tetrahedron& t, const Panel& tau,
                         const std::array<double, 4>& phi_i, const std::array<double, 4>& phi_j,
                         double s, int n, PrefactorMode mode = PrefactorMode::Audit);
double distant_integral(const Tetrahedron& t1, const Tetrahedron& t2, const NodalPair& phi_i,
                        const NodalPair& phi_j, double s, int n);
double distant_integral(const Tetrahedron& t, const Panel& tau, const std::array<double, 4>& phi_i,
                        const std::array<double, 4>& phi_j, double s, int n);

// Number of integrand evaluations of one call (for statistics).
long long evaluation_count(CaseKind kind, int n);

}  // namespace fl
