#pragma once

#include "fraclap/configs.hpp"
#include "fraclap/geometry.hpp"

#include <vector>

namespace fl {

// Polar-correlation evaluation of touching-pair integrals, independent of the
// Duffy tables. With u = y' - x (y' in the untranslated second element) the
// integral becomes int K(eps v + u) W(u) du, where W is the correlation of the
// two elements weighted by the basis factors. Along a ray u = r w, W is a
// piecewise polynomial of degree <= 5 whose breakpoints are computed exactly;
// each piece is interpolated from Chebyshev samples of W, obtained by exact
// clipping and exact low-order cubature. The sphere is covered by the six cube
// faces, split along the great circles where W changes support.
struct PolarOptions {
    int angular_order = 8;  // collapsed Gauss points per direction of a sub-triangle
    int angular_subdiv = 2;  // each fan triangle is split into subdiv^2 pieces
    int radial_order = 10;   // Gauss points per graded radial interval
};

class PolarCorrelation {
public:
    PolarCorrelation(const TouchingConfig& config, const PolarOptions& opts = {});

    // Values I(eps) for every (s, eps) pair; eps is an absolute translation of
    // the second element along config.separation. eps must be 0 for tt-identical.
    std::vector<double> evaluate(const std::vector<std::pair<double, double>>& s_eps) const;
    double value(double s, double eps) const { return evaluate({{s, eps}})[0]; }

    // Correlation W(u) (exposed for tests).
    double correlation(const Vec3& u) const;
    long long direction_count() const;

private:
    struct Event {
        Vec3 normal;
        double c;
    };
    TouchingConfig cfg_;
    PolarOptions opts_;
    bool panel_;
    std::vector<Event> events_;        // planes N.u = c where W changes form
    std::vector<Vec3> origin_planes_;  // events with c == 0
    // Affine forms phi(x) = g.x + b of the basis restrictions.
    Vec3 gi1_, gj1_, gi2_, gj2_;
    double bi1_, bj1_, bi2_, bj2_;
    double scale_;
};

// Least-squares fit of I(eps) = I0 + c1 eps + c2 eps^2 + c3 eps^gamma + c4 eps^(gamma+1)
// (eps^gamma log eps when gamma is an integer); needs at least 7 points.
struct RichardsonResult {
    double limit = 0;
    double error_estimate = 0;  // |limit - limit without the largest eps|
    double residual = 0;        // max relative misfit of the fit
    bool monotone = true;       // |I(eps) - limit| decreases with eps
    std::vector<double> eps, values;
};

// Singular-behaviour exponent gamma of the contact: 5-2s (vertex), 4-2s (edge),
// 3-2s (face), for tet-tet and tet-panel pairs alike.
double richardson_gamma(CaseKind kind, double s);

RichardsonResult richardson_fit(const std::vector<double>& eps, const std::vector<double>& values,
                                double gamma);

// Default relative separations 2^-6 .. 2^-12.
std::vector<double> default_eps_list();

// eps-separation reference: translates the second element by eps*h along the
// separating direction for eps in eps_list, evaluates each separated integral
// with the polar correlation and extrapolates to eps=0. For tt-identical (no
// separating direction) the direct eps=0 value is returned.
RichardsonResult eps_separation_reference(const TouchingConfig& c, double s,
                                          std::vector<double> eps_list = {},
                                          const PolarOptions& opts = {});
// Same for several orders, sharing the correlation samples.
std::vector<RichardsonResult> eps_separation_reference(const TouchingConfig& c,
                                                       const std::vector<double>& s_list,
                                                       std::vector<double> eps_list = {},
                                                       const PolarOptions& opts = {});

// Flux of the tet-panel kernel through a closed triangulated surface seen
// from `point`: sum over panels of int (y-x).n |x-y|^{-3-2s} ds_y, by adaptive
// subdivision to relative tolerance `tol`. Throws OracleUnstable when the
// point lies within 1e-6 h of a panel.
double panel_flux_reference(const Vec3& point, const std::vector<Panel>& panels, double s,
                            double tol = 1e-10);

struct AdditivityResult {
    double direct = 0;
    double summed = 0;
    double rel_err = 0;  // relative to max(|direct|, tiny)
};

// I_{t,t} for the hats of local vertices i and j (-1: zero function) against
// the sum over all 64 ordered child pairs of one red refinement, each child
// pair classified and integrated by its own rule.
AdditivityResult subdivision_additivity(const Tetrahedron& t, int i, int j, double s, int n);

}  // namespace fl
