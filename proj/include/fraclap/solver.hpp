#pragma once

#include "fraclap/assembly.hpp"
#include "fraclap/mesh.hpp"

#include <Eigen/Dense>

#include <string>

namespace fl {

struct SolveReport {
    Eigen::VectorXd x;
    int iterations = 0;
    double residual = 0;  // relative
    bool used_cholesky = false;
};

// Jacobi-preconditioned CG to relative residual tol; falls back to a dense
// Cholesky solve when CG stalls. SolverError when A is not SPD.
SolveReport solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& g, double tol = 1e-10);

// Exact solution of (-Delta)^s u = 1 on the unit ball.
struct BallSolution {
    double s;
    explicit BallSolution(double s);
    double operator()(const Vec3& x) const;
    // a(u,u) in closed form: 2^{-2s} pi^{3/2} / (Gamma(1+s) Gamma(s+5/2)).
    double energy() const;
    // a(u,u) = int_B u dx by radial tanh-sinh quadrature (independent of the Gamma identity).
    double energy_radial() const;
};

struct EnergyError {
    double abs = 0;
    double rel = 0;
    double discrete_energy = 0;  // x^T A x
    double exact_energy = 0;
};

// e^2 = a(u,u) - x^T A x. Negative e^2 below -1e-10 a(u,u) signals an
// under-resolved quadrature and raises ConsistencyError.
EnergyError energy_error(const StiffnessSystem& sys, const Eigen::VectorXd& x);

// Piecewise-linear interpolant at a point (0 on boundary vertices). Throws
// OutOfDomain when the point is outside the mesh.
double eval_uh(const Mesh& mesh, const Eigen::VectorXd& x, const Vec3& point);

std::string solution_json(const Mesh& mesh, const StiffnessSystem& sys, const Eigen::VectorXd& x);

}  // namespace fl
