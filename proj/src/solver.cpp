#include "fraclap/solver.hpp"

#include "fraclap/errors.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <json.hpp>

#include <cmath>

namespace fl {

SolveReport solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& g, double tol) {
    const int N = static_cast<int>(A.rows());
    if (A.cols() != N || g.size() != N) throw InvalidParameter("system size mismatch");
    SolveReport rep;
    rep.x = Eigen::VectorXd::Zero(N);
    const double gnorm = g.norm();
    if (gnorm == 0) return rep;
    const Eigen::VectorXd diag = A.diagonal();
    if ((diag.array() <= 0).any()) throw SolverError("nonpositive diagonal entry");
    const Eigen::VectorXd dinv = diag.cwiseInverse();
    // Dense factorisation doubles as the SPD certificate (cheap at these sizes)
    // and as the fallback when CG stalls.
    const Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw SolverError("matrix is not positive definite");

    Eigen::VectorXd r = g;
    Eigen::VectorXd z = dinv.cwiseProduct(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    const int max_iter = std::max(100, 10 * N);
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd Ap = A * p;
        const double pAp = p.dot(Ap);
        if (!(pAp > 0)) break;
        const double alpha = rz / pAp;
        rep.x += alpha * p;
        r -= alpha * Ap;
        rep.iterations = it + 1;
        rep.residual = r.norm() / gnorm;
        if (rep.residual <= tol) return rep;
        z = dinv.cwiseProduct(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    rep.x = llt.solve(g);
    rep.residual = (A * rep.x - g).norm() / gnorm;
    rep.used_cholesky = true;
    return rep;
}

BallSolution::BallSolution(double s_) : s(s_) {
    if (!(s > 0 && s < 1)) throw InvalidParameter("s must lie in (0,1)");
}

double BallSolution::operator()(const Vec3& x) const {
    const double q = 1 - x.squaredNorm();
    if (q <= 0) return 0;
    return std::pow(2.0, -2 * s) / std::pow(std::tgamma(1 + s), 2) * std::pow(q, s);
}

double BallSolution::energy() const {
    return std::pow(2.0, -2 * s) * std::pow(M_PI, 1.5) / (std::tgamma(1 + s) * std::tgamma(s + 2.5));
}

double BallSolution::energy_radial() const {
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double c = std::pow(2.0, -2 * s) / std::pow(std::tgamma(1 + s), 2);
    const double radial = integrator.integrate(
        [this](double r) { return r * r * std::pow((1 - r) * (1 + r), s); }, 0.0, 1.0);
    return 4 * M_PI * c * radial;
}

EnergyError energy_error(const StiffnessSystem& sys, const Eigen::VectorXd& x) {
    EnergyError e;
    e.exact_energy = BallSolution(sys.s).energy();
    e.discrete_energy = x.dot(sys.A * x);
    const double e2 = e.exact_energy - e.discrete_energy;
    if (e2 < -1e-10 * e.exact_energy)
        throw ConsistencyError("x^T A x exceeds a(u,u) by " + std::to_string(-e2) +
                               "; raise the quadrature orders");
    e.abs = std::sqrt(std::max(e2, 0.0));
    e.rel = e.abs / std::sqrt(e.exact_energy);
    return e;
}

double eval_uh(const Mesh& mesh, const Eigen::VectorXd& x, const Vec3& point) {
    for (int t = 0; t < static_cast<int>(mesh.tets.size()); ++t) {
        const auto m = tet_map(mesh.tet(t));
        const Vec3 xh = m.M.partialPivLu().solve(point - m.offset);
        // Hats of a, b, c, d in reference coordinates.
        const std::array<double, 4> lam{1 - xh[0], xh[0] - xh[1] - xh[2], xh[1], xh[2]};
        const double tol = 1e-12;
        if (*std::min_element(lam.begin(), lam.end()) < -tol) continue;
        double v = 0;
        for (int k = 0; k < 4; ++k) {
            const int d = mesh.dof_of_vertex[mesh.tets[t][k]];
            if (d >= 0) v += lam[k] * x[d];
        }
        return v;
    }
    throw OutOfDomain("point outside the mesh");
}

std::string solution_json(const Mesh& mesh, const StiffnessSystem& sys, const Eigen::VectorXd& x) {
    nlohmann::json j;
    j["s"] = sys.s;
    j["h"] = sys.h;
    j["coefficients"] = std::vector<double>(x.data(), x.data() + x.size());
    j["dof_vertex"] = sys.dof_vertex;
    nlohmann::json pts = nlohmann::json::array();
    for (int v : sys.dof_vertex) pts.push_back({mesh.vertices[v][0], mesh.vertices[v][1], mesh.vertices[v][2]});
    j["dof_points"] = pts;
    j["error_normalization"] = "energy error divided by sqrt(a(u,u))";
    return j.dump();
}

}  // namespace fl
