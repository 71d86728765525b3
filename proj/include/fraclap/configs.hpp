#pragma once

#include "fraclap/duffy.hpp"
#include "fraclap/geometry.hpp"

namespace fl {

// Canonical touching configurations, one per singular kind. Elements are
// aligned (shared vertices leading, same order). Element 1 lies in z <= 0 and
// element 2 (or the panel) in z >= 0, so translating the second element along
// +z separates the pair; the identical case has no separating direction.
//
// Basis choices: tt-face uses the hats of the two apices (their supports meet
// exactly in the common face); tp-edge uses i = j = a hat vanishing on the
// panel; the remaining cases mix shared and non-shared nodes.
struct TouchingConfig {
    CaseKind kind;
    Tetrahedron t1;
    Tetrahedron t2;      // TT only
    Panel tau;           // TP only
    NodalPair phi_i, phi_j;  // TP uses .on1 (values on the tet)
    Vec3 separation{0, 0, 1};
    double h = 1;        // diameter of the configuration
};

// `scale` multiplies all coordinates.
TouchingConfig touching_config(CaseKind kind, double scale = 1.0);

// Translate the second element by `offset` (TT: t2, TP: tau).
TouchingConfig translated(const TouchingConfig& c, const Vec3& offset);

// Direct evaluation of the configuration's integral by the Duffy rules.
double duffy_value(const TouchingConfig& c, double s, int n,
                   PrefactorMode mode = PrefactorMode::Audit);

}  // namespace fl
