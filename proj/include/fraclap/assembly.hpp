#pragma once

#include "fraclap/duffy.hpp"
#include "fraclap/mesh.hpp"
#include "fraclap/quadrature.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <string>

namespace fl {

struct AssemblyStats {
    std::map<CaseKind, long long> pairs;  // element pairs actually integrated
    long long evaluations = 0;            // integrand evaluations
    long long skipped_pairs = 0;          // pairs without any interior vertex
    double seconds = 0;
};

struct StiffnessSystem {
    Eigen::MatrixXd A;
    Eigen::VectorXd g;
    std::vector<int> dof_vertex;  // row -> mesh vertex
    double s = 0.5;
    double h = 0;
    OrderPlan plan;
    PrefactorMode mode = PrefactorMode::Audit;
    AssemblyStats stats;
};

// Dense stiffness matrix of the fractional Laplacian with P1 hats on the
// interior vertices. The bilinear form is evaluated as
//   a_ij = c/2 sum_{t1,t2} int int (phi_i(x)-phi_i(y))(phi_j(x)-phi_j(y)) k
//        + c/(2s) sum_{t, tau on the mesh boundary} int_t phi_i phi_j int_tau (y-x).n k,
// with c = kernel_constant(s), every unordered tet pair computed once. Reductions are committed in a fixed
// order, so A is bitwise independent of `threads`. threads <= 0 uses all cores.
StiffnessSystem assemble_stiffness(const Mesh& mesh, double s, const OrderPlan& plan,
                                   PrefactorMode mode = PrefactorMode::Audit, int threads = 0);

// g_i = int f phi_i, order-4 collapsed Gauss per tet (exact for constant f).
Eigen::VectorXd assemble_load(const Mesh& mesh, const std::function<double(const Vec3&)>& f);

// Binary little-endian dump: 8-byte magic "FLMATRX1", int64 N, then N*N f64
// row-major. The JSON sidecar (path + ".json") records s, h, orders, mode and
// the pair histogram.
void write_matrix(const StiffnessSystem& sys, const std::string& path);
Eigen::MatrixXd read_matrix(const std::string& path);

std::string stats_json(const StiffnessSystem& sys);

int resolve_threads(int threads);

// Runs body(k) for k in [0, count) on `threads` workers (dynamic scheduling).
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace fl
