#include "fraclap/assembly.hpp"

#include "fraclap/errors.hpp"
#include "fraclap/kernels.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

namespace fl {

int resolve_threads(int threads) {
    if (threads > 0) return threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::min(resolve_threads(threads), std::max(count, 1));
    if (threads <= 1) {
        for (int k = 0; k < count; ++k) body(k);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (int k = next++; k < count; k = next++) {
            try {
                body(k);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

namespace {

// Lower bound for the distance of two vertex sets from bounding spheres.
struct Sphere {
    Vec3 c;
    double r;
};

Sphere bounding_sphere(std::initializer_list<Vec3> v) {
    Vec3 c = Vec3::Zero();
    for (const auto& x : v) c += x;
    c /= static_cast<double>(v.size());
    double r = 0;
    for (const auto& x : v) r = std::max(r, (x - c).norm());
    return {c, r};
}

// Accumulates one block of contributions into a dense scratch matrix and
// remembers touched entries in first-touch order.
struct Scratch {
    Eigen::MatrixXd dense;
    std::vector<char> seen;
    std::vector<int> touched;
    int N = 0;

    void reset(int n) {
        N = n;
        if (dense.rows() != n) {
            dense = Eigen::MatrixXd::Zero(n, n);
            seen.assign(static_cast<std::size_t>(n) * n, 0);
        }
        touched.clear();
    }
    void add(int p, int q, double v) {
        if (p > q) std::swap(p, q);
        const int idx = p * N + q;
        if (!seen[idx]) {
            seen[idx] = 1;
            touched.push_back(idx);
        }
        dense(p, q) += v;
    }
    // Moves the block contributions out and clears the scratch.
    std::vector<std::pair<int, double>> drain() {
        std::vector<std::pair<int, double>> out;
        out.reserve(touched.size());
        for (int idx : touched) {
            const int p = idx / N, q = idx % N;
            out.push_back({idx, dense(p, q)});
            dense(p, q) = 0;
            seen[idx] = 0;
        }
        touched.clear();
        return out;
    }
};

struct BlockResult {
    std::vector<std::pair<int, double>> entries;
    std::map<CaseKind, long long> pairs;
    long long evaluations = 0;
    long long skipped = 0;
};

struct Context {
    const Mesh& mesh;
    double s;
    OrderPlan plan;
    PrefactorMode mode;
    double c;
    std::vector<Tetrahedron> tets;
    std::vector<Sphere> spheres;
    std::vector<double> diam;
    std::vector<char> has_dof;
    std::vector<std::array<int, 3>> faces;
    std::vector<Panel> panels;
    std::vector<Sphere> panel_spheres;
    std::vector<double> panel_diam;
};

int dof(const Context& ctx, int v) { return ctx.mesh.dof_of_vertex[v]; }

// Order for a separated pair, from a cheap lower bound when it is decisive.
int separated_order(int n_near, double rho, const Sphere& a, const Sphere& b, double h,
                    const std::function<double()>& exact) {
    const double lb = (a.c - b.c).norm() - a.r - b.r;
    if (lb >= 2 * h) return distant_order(n_near, rho, lb / h);
    return distant_order(n_near, rho, exact() / h);
}

void tt_pair(const Context& ctx, int t1, int t2, Scratch& acc, BlockResult& res) {
    const auto& v1 = ctx.mesh.tets[t1];
    const auto& v2 = ctx.mesh.tets[t2];
    PairAlignment al;
    int shared = 0;
    for (int a : v1)
        for (int b : v2) shared += (a == b);
    if (shared > 0) {
        al = classify_pair(ctx.mesh, t1, t2);
    } else {
        al.kind = CaseKind::TTDistant;
    }
    std::array<int, 4> g1, g2;  // aligned global vertices
    for (int k = 0; k < 4; ++k) {
        g1[k] = v1[al.perm1[k]];
        g2[k] = v2[al.perm2[k]];
    }
    // Interior vertices of the pair.
    std::array<int, 8> local;
    int nl = 0;
    for (int v : g1)
        if (dof(ctx, v) >= 0) local[nl++] = v;
    for (int v : g2)
        if (dof(ctx, v) >= 0 && std::find(local.begin(), local.begin() + nl, v) == local.begin() + nl)
            local[nl++] = v;
    if (nl == 0) {
        ++res.skipped;
        return;
    }
    const Tetrahedron T1 = aligned_tet(ctx.mesh, t1, al.perm1);
    const Tetrahedron T2 = aligned_tet(ctx.mesh, t2, al.perm2);
    const double factor = (t1 == t2 ? 0.5 : 1.0) * ctx.c;
    auto nodal = [&](const std::array<int, 4>& g, int v) {
        std::array<double, 4> out{};
        for (int k = 0; k < 4; ++k) out[k] = (g[k] == v) ? 1.0 : 0.0;
        return out;
    };
    int n;
    if (al.kind == CaseKind::TTDistant) {
        const double h = std::max(ctx.diam[t1], ctx.diam[t2]);
        n = ctx.plan.graded_distant
                ? separated_order(ctx.plan.n1, ctx.plan.rho1, ctx.spheres[t1], ctx.spheres[t2], h,
                                  [&] { return tet_distance(T1, T2); })
                : ctx.plan.n1;
        const Moments7 G = tt_distant_moments(tet_map(T1), tet_map(T2), ctx.s, n);
        std::array<Eigen::Matrix<double, 7, 1>, 8> cv;
        for (int k = 0; k < nl; ++k) {
            const auto a = nodal(g1, local[k]), b = nodal(g2, local[k]);
            cv[k] << a[0] - b[0], nodal_w(a), -nodal_w(b);
        }
        for (int p = 0; p < nl; ++p) {
            const Eigen::Matrix<double, 7, 1> Gp = G * cv[p];
            for (int q = 0; q < nl; ++q)
                if (dof(ctx, local[p]) <= dof(ctx, local[q]))
                    acc.add(dof(ctx, local[p]), dof(ctx, local[q]), factor * cv[q].dot(Gp));
        }
    } else {
        n = ctx.plan.n1;
        const Moments6 G = tt_singular_moments(al.kind, tet_map(T1).M, tet_map(T2).M, ctx.s, n);
        std::array<Eigen::Matrix<double, 6, 1>, 8> cv;
        for (int k = 0; k < nl; ++k) cv[k] << nodal_w(nodal(g1, local[k])), -nodal_w(nodal(g2, local[k]));
        for (int p = 0; p < nl; ++p) {
            const Eigen::Matrix<double, 6, 1> Gp = G * cv[p];
            for (int q = 0; q < nl; ++q)
                if (dof(ctx, local[p]) <= dof(ctx, local[q]))
                    acc.add(dof(ctx, local[p]), dof(ctx, local[q]), factor * cv[q].dot(Gp));
        }
    }
    res.pairs[al.kind]++;
    res.evaluations += evaluation_count(al.kind, n);
}

void tp_pair(const Context& ctx, int t, int f, Scratch& acc, BlockResult& res) {
    const auto& vt = ctx.mesh.tets[t];
    const auto& face = ctx.faces[f];
    int shared = 0;
    for (int a : vt)
        for (int b : face) shared += (a == b);
    PairAlignment al;
    if (shared > 0) {
        al = classify_tet_panel(ctx.mesh, t, face);
    } else {
        al.kind = CaseKind::TPDistant;
        al.perm2 = {0, 1, 2, -1};
    }
    std::array<int, 4> g;
    for (int k = 0; k < 4; ++k) g[k] = vt[al.perm1[k]];
    std::array<int, 4> local;
    int nl = 0;
    for (int v : g)
        if (dof(ctx, v) >= 0) local[nl++] = v;
    const Tetrahedron T = aligned_tet(ctx.mesh, t, al.perm1);
    const Vec3& pa = ctx.mesh.vertices[face[al.perm2[0]]];
    const Vec3& pb = ctx.mesh.vertices[face[al.perm2[1]]];
    const Vec3& pc = ctx.mesh.vertices[face[al.perm2[2]]];
    const Panel tau{pa, pb, pc, ctx.panels[f].n, ctx.panels[f].owner};
    const double factor = ctx.c / (2 * ctx.s);
    auto nodal = [&](int v) {
        std::array<double, 4> out{};
        for (int k = 0; k < 4; ++k) out[k] = (g[k] == v) ? 1.0 : 0.0;
        return out;
    };
    int n;
    if (al.kind == CaseKind::TPDistant) {
        const double h = std::max(ctx.diam[t], ctx.panel_diam[f]);
        n = ctx.plan.graded_distant
                ? separated_order(ctx.plan.n2, ctx.plan.rho2, ctx.spheres[t], ctx.panel_spheres[f], h,
                                  [&] { return tet_panel_distance(T, tau); })
                : ctx.plan.n2;
        const Moments4 G = tp_distant_moments(tet_map(T), panel_map(tau), tau.n, ctx.s, n);
        std::array<Eigen::Matrix<double, 4, 1>, 4> cv;
        for (int k = 0; k < nl; ++k) {
            const auto a = nodal(local[k]);
            cv[k] << a[0], nodal_w(a);
        }
        for (int p = 0; p < nl; ++p) {
            const Eigen::Matrix<double, 4, 1> Gp = G * cv[p];
            for (int q = 0; q < nl; ++q)
                if (dof(ctx, local[p]) <= dof(ctx, local[q]))
                    acc.add(dof(ctx, local[p]), dof(ctx, local[q]), factor * cv[q].dot(Gp));
        }
    } else {
        n = ctx.plan.n2;
        const Moments3 G =
            tp_singular_moments(al.kind, tet_map(T).M, panel_map(tau).M, tau.n, ctx.s, n, ctx.mode);
        std::array<Vec3, 4> cv;
        for (int k = 0; k < nl; ++k) cv[k] = nodal_w(nodal(local[k]));
        for (int p = 0; p < nl; ++p) {
            const Vec3 Gp = G * cv[p];
            for (int q = 0; q < nl; ++q)
                if (dof(ctx, local[p]) <= dof(ctx, local[q]))
                    acc.add(dof(ctx, local[p]), dof(ctx, local[q]), factor * cv[q].dot(Gp));
        }
    }
    res.pairs[al.kind]++;
    res.evaluations += evaluation_count(al.kind, n);
}

}  // namespace

StiffnessSystem assemble_stiffness(const Mesh& mesh, double s, const OrderPlan& plan,
                                   PrefactorMode mode, int threads) {
    const auto start = std::chrono::steady_clock::now();
    if (!(s > 0 && s < 1)) throw InvalidParameter("s must lie in (0,1)");
    const int N = mesh.dofs();
    if (N < 1) throw MeshError("mesh has no interior vertices");
    const int M = static_cast<int>(mesh.tets.size());

    Context ctx{mesh, s, plan, mode, kernel_constant(s), {}, {}, {}, {}, {}, {}, {}, {}};
    for (int t = 0; t < M; ++t) {
        ctx.tets.push_back(mesh.tet(t));
        const auto& T = ctx.tets.back();
        ctx.spheres.push_back(bounding_sphere({T.a, T.b, T.c, T.d}));
        ctx.diam.push_back(diameter(ctx.tets.back()));
        bool any = false;
        for (int v : mesh.tets[t]) any |= mesh.dof_of_vertex[v] >= 0;
        ctx.has_dof.push_back(any);
    }
    ctx.faces = mesh.boundary_faces();
    ctx.panels = mesh.boundary_panels();
    for (const auto& p : ctx.panels) {
        ctx.panel_spheres.push_back(bounding_sphere({p.a, p.b, p.c}));
        ctx.panel_diam.push_back(diameter(p));
    }

    StiffnessSystem sys;
    sys.A = Eigen::MatrixXd::Zero(N, N);
    sys.dof_vertex = mesh.dof_vertex;
    sys.s = s;
    sys.h = mesh.max_diameter();
    sys.plan = plan;
    sys.mode = mode;

    // Block k = all pairs (k, t2 >= k) and all (k, panel) pairs. Blocks run in
    // parallel within a batch and are committed in index order.
    const int nthreads = resolve_threads(threads);
    const int batch = 64;
    std::vector<Scratch> scratch(nthreads);
    std::vector<BlockResult> results(batch);
    std::mutex scratch_mutex;
    std::vector<int> free_scratch(nthreads);
    for (int k = 0; k < nthreads; ++k) free_scratch[k] = k;

    for (int b0 = 0; b0 < M; b0 += batch) {
        const int nb = std::min(batch, M - b0);
        parallel_for(nb, nthreads, [&](int k) {
            int slot;
            {
                std::lock_guard<std::mutex> lock(scratch_mutex);
                slot = free_scratch.back();
                free_scratch.pop_back();
            }
            Scratch& acc = scratch[slot];
            acc.reset(N);
            BlockResult res;
            const int t1 = b0 + k;
            try {
                for (int t2 = t1; t2 < M; ++t2) {
                    if (!ctx.has_dof[t1] && !ctx.has_dof[t2]) {
                        ++res.skipped;
                        continue;
                    }
                    tt_pair(ctx, t1, t2, acc, res);
                }
                if (ctx.has_dof[t1])
                    for (int f = 0; f < static_cast<int>(ctx.faces.size()); ++f)
                        tp_pair(ctx, t1, f, acc, res);
            } catch (...) {
                acc.drain();
                std::lock_guard<std::mutex> lock(scratch_mutex);
                free_scratch.push_back(slot);
                throw;
            }
            res.entries = acc.drain();
            results[k] = std::move(res);
            std::lock_guard<std::mutex> lock(scratch_mutex);
            free_scratch.push_back(slot);
        });
        for (int k = 0; k < nb; ++k) {
            auto& r = results[k];
            for (const auto& [idx, v] : r.entries) sys.A(idx / N, idx % N) += v;
            for (const auto& [kind, c] : r.pairs) sys.stats.pairs[kind] += c;
            sys.stats.evaluations += r.evaluations;
            sys.stats.skipped_pairs += r.skipped;
            r = BlockResult{};
        }
    }
    for (int p = 0; p < N; ++p)
        for (int q = p + 1; q < N; ++q) sys.A(q, p) = sys.A(p, q);
    sys.g = assemble_load(mesh, [](const Vec3&) { return 1.0; });
    sys.stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sys;
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const std::function<double(const Vec3&)>& f) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(mesh.dofs());
    const auto& r = gauss_rule(4);
    for (int t = 0; t < static_cast<int>(mesh.tets.size()); ++t) {
        const auto& v = mesh.tets[t];
        bool any = false;
        for (int x : v) any |= mesh.dof_of_vertex[x] >= 0;
        if (!any) continue;
        const auto m = tet_map(mesh.tet(t));
        const double det = std::abs(m.M.determinant());
        std::array<double, 4> acc{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k) {
                    const double e1 = r.nodes[i], e2 = r.nodes[j], e3 = r.nodes[k];
                    const Vec3 xh(e1, e1 * e2 * e3, e1 * e2 * (1 - e3));
                    const double w = r.weights[i] * r.weights[j] * r.weights[k] * e1 * e1 * e2;
                    const double fx = f(m(xh)) * w * det;
                    // Hats of the vertices a, b, c, d in reference coordinates.
                    acc[0] += fx * (1 - xh[0]);
                    acc[1] += fx * (xh[0] - xh[1] - xh[2]);
                    acc[2] += fx * xh[1];
                    acc[3] += fx * xh[2];
                }
        for (int k = 0; k < 4; ++k)
            if (mesh.dof_of_vertex[v[k]] >= 0) g[mesh.dof_of_vertex[v[k]]] += acc[k];
    }
    return g;
}

namespace {

constexpr char kMagic[9] = "FLMATRX1";

}  // namespace

std::string stats_json(const StiffnessSystem& sys) {
    nlohmann::json j;
    j["s"] = sys.s;
    j["h"] = sys.h;
    j["N"] = sys.A.rows();
    j["n1"] = sys.plan.n1;
    j["n2"] = sys.plan.n2;
    j["rho1"] = sys.plan.rho1;
    j["rho2"] = sys.plan.rho2;
    j["l"] = sys.plan.l;
    j["graded_distant"] = sys.plan.graded_distant;
    j["prefactor_mode"] = to_string(sys.mode);
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [k, c] : sys.stats.pairs) hist[to_string(k)] = c;
    j["pair_histogram"] = hist;
    j["evaluations"] = sys.stats.evaluations;
    j["skipped_pairs"] = sys.stats.skipped_pairs;
    j["assembly_seconds"] = sys.stats.seconds;
    return j.dump(2);
}

void write_matrix(const StiffnessSystem& sys, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    const std::int64_t N = sys.A.rows();
    out.write(kMagic, 8);
    out.write(reinterpret_cast<const char*>(&N), 8);
    // Eigen is column-major; A is symmetric, so the bytes equal the row-major dump.
    out.write(reinterpret_cast<const char*>(sys.A.data()), static_cast<std::streamsize>(8 * N * N));
    if (!out) throw IoError("write failed for " + path);
    std::ofstream side(path + ".json");
    if (!side) throw IoError("cannot write " + path + ".json");
    side << stats_json(sys) << "\n";
}

Eigen::MatrixXd read_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[8];
    std::int64_t N = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&N), 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0 || N < 0 || N > 100000)
        throw IoError("bad matrix header in " + path);
    Eigen::MatrixXd A(N, N);
    in.read(reinterpret_cast<char*>(A.data()), static_cast<std::streamsize>(8 * N * N));
    if (!in) throw IoError("truncated matrix file " + path);
    A.transposeInPlace();
    return A;
}

}  // namespace fl
