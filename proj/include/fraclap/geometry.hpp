#pragma once

#include <Eigen/Dense>

#include <array>

namespace fl {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

struct Tetrahedron {
    Vec3 a, b, c, d;

    const Vec3& operator[](int k) const { return k == 0 ? a : k == 1 ? b : k == 2 ? c : d; }
    Vec3& operator[](int k) { return k == 0 ? a : k == 1 ? b : k == 2 ? c : d; }
};

// Triangle on the boundary of a tet region. `n` is the outward unit normal
// and `owner` the index of the tet the panel is a face of (-1 if free).
struct Panel {
    Vec3 a, b, c;
    Vec3 n;
    int owner = -1;

    const Vec3& operator[](int k) const { return k == 0 ? a : k == 1 ? b : c; }
};

// x = M x~ + offset, with M = [b-a, c-b, d-b]. The reference tet is
// {0 <= x3 <= x1 - x2, 0 <= x2 <= x1 <= 1} with vertices 0, e1, e1+e2, e1+e3.
struct AffineMap3 {
    Mat3 M;
    Vec3 offset;
    Vec3 operator()(const Vec3& x) const { return M * x + offset; }
};

// y = M y~ + offset, with M = [b-a, c-b]; reference triangle {0 <= y2 <= y1 <= 1}.
struct AffineMap2 {
    Mat32 M;
    Vec3 offset;
    Vec3 operator()(const Vec2& y) const { return M * y + offset; }
};

struct ShapeMetrics {
    double h = 0;        // diameter
    double theta = 0;    // min of face angles and dihedral angles (radians)
    double volume = 0;
    double rho = 0;      // insphere radius
};

AffineMap3 tet_map(const Tetrahedron& t);
AffineMap2 panel_map(const Panel& p);
ShapeMetrics shape_metrics(const Tetrahedron& t);

struct GramInfo {
    double lambda_min, lambda_max, gram_det_root;
};
GramInfo gram_scaling_check(const AffineMap3& m);
GramInfo gram_scaling_check(const AffineMap2& m);

double diameter(const Tetrahedron& t);
double diameter(const Panel& p);
double volume(const Tetrahedron& t);
Vec3 centroid(const Tetrahedron& t);
Vec3 centroid(const Panel& p);

// Unit normal of triangle (a,b,c) oriented away from `away`.
Vec3 oriented_normal(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& away);

// Euclidean distances between disjoint convex simplices (0 when touching).
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);
double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1);
double tet_distance(const Tetrahedron& t1, const Tetrahedron& t2);
double tet_panel_distance(const Tetrahedron& t, const Panel& p);

}  // namespace fl
