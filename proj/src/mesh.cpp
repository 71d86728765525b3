#include "fraclap/mesh.hpp"

#include "fraclap/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace fl {

namespace {

using Face = std::array<int, 3>;

Face sorted_face(int a, int b, int c) {
    Face f{a, b, c};
    std::sort(f.begin(), f.end());
    return f;
}

// Face k of a tet is the one opposite local vertex k.
Face tet_face(const std::array<int, 4>& t, int k) {
    return sorted_face(t[(k + 1) % 4], t[(k + 2) % 4], t[(k + 3) % 4]);
}

// face -> list of (tet, opposite vertex)
std::map<Face, std::vector<std::pair<int, int>>> face_map(const Mesh& m) {
    std::map<Face, std::vector<std::pair<int, int>>> faces;
    for (int t = 0; t < static_cast<int>(m.tets.size()); ++t)
        for (int k = 0; k < 4; ++k) faces[tet_face(m.tets[t], k)].push_back({t, m.tets[t][k]});
    return faces;
}

Panel make_panel(const Mesh& m, const Face& f, int owner, int opposite) {
    const Vec3& a = m.vertices[f[0]];
    const Vec3& b = m.vertices[f[1]];
    const Vec3& c = m.vertices[f[2]];
    return Panel{a, b, c, oriented_normal(a, b, c, m.vertices[opposite]), owner};
}

}  // namespace

Tetrahedron Mesh::tet(int k) const {
    const auto& t = tets.at(k);
    return {vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]};
}

double Mesh::max_diameter() const {
    double h = 0;
    for (int k = 0; k < static_cast<int>(tets.size()); ++k) h = std::max(h, diameter(tet(k)));
    return h;
}

void Mesh::finalize() {
    if (tets.empty()) throw MeshError("mesh has no tetrahedra");
    const int nv = static_cast<int>(vertices.size());
    for (auto& t : tets) {
        for (int v : t)
            if (v < 0 || v >= nv) throw MeshError("tet references missing vertex " + std::to_string(v));
        const Tetrahedron g{vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]};
        const double det = (g.b - g.a).dot((g.c - g.a).cross(g.d - g.a));
        const double h = diameter(g);
        if (std::abs(det) < 1e-12 * h * h * h) throw DegenerateElement("degenerate tet in mesh");
        if (det < 0) std::swap(t[2], t[3]);
    }
    vertex_tets.assign(nv, {});
    for (int k = 0; k < static_cast<int>(tets.size()); ++k)
        for (int v : tets[k]) vertex_tets[v].push_back(k);
    boundary.assign(nv, 0);
    std::map<std::pair<int, int>, int> boundary_edges;
    for (const auto& [f, owners] : face_map(*this)) {
        if (owners.size() > 2) throw MeshError("face shared by more than two tets");
        if (owners.size() == 1) {
            for (int v : f) boundary[v] = 1;
            boundary_edges[{f[0], f[1]}]++;
            boundary_edges[{f[0], f[2]}]++;
            boundary_edges[{f[1], f[2]}]++;
        }
    }
    for (const auto& [e, count] : boundary_edges)
        if (count != 2) throw MeshError("boundary surface is not closed (nonconforming mesh)");
    dof_of_vertex.assign(nv, -1);
    dof_vertex.clear();
    for (int v = 0; v < nv; ++v)
        if (!boundary[v] && !vertex_tets[v].empty()) {
            dof_of_vertex[v] = static_cast<int>(dof_vertex.size());
            dof_vertex.push_back(v);
        }
}

std::vector<std::array<int, 3>> Mesh::boundary_faces() const {
    std::vector<Face> out;
    for (const auto& [f, owners] : face_map(*this))
        if (owners.size() == 1) out.push_back(f);
    return out;
}

std::vector<Panel> Mesh::boundary_panels() const {
    std::vector<Panel> out;
    for (const auto& [f, owners] : face_map(*this))
        if (owners.size() == 1) out.push_back(make_panel(*this, f, owners[0].first, owners[0].second));
    return out;
}

// ---------------------------------------------------------------------------
// Gmsh 2.2 ASCII
// ---------------------------------------------------------------------------

Mesh load_msh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    Mesh m;
    std::string line;
    long lineno = 0;
    auto next = [&]() -> std::string& {
        if (!std::getline(in, line)) throw ParseError("unexpected end of file", lineno);
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    auto expect = [&](const std::string& tag) {
        if (next() != tag) throw ParseError("expected " + tag, lineno);
    };
    bool have_format = false, have_nodes = false, have_elements = false;
    std::map<long, int> node_index;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line == "$MeshFormat") {
            std::istringstream ss(next());
            double version;
            int type, size;
            if (!(ss >> version >> type >> size)) throw ParseError("bad format line", lineno);
            if (version < 2 || version >= 3 || type != 0)
                throw ParseError("only ASCII MSH 2.x is supported", lineno);
            expect("$EndMeshFormat");
            have_format = true;
        } else if (line == "$Nodes") {
            long count;
            if (!(std::istringstream(next()) >> count) || count < 0)
                throw ParseError("bad node count", lineno);
            for (long k = 0; k < count; ++k) {
                std::istringstream ss(next());
                long id;
                double x, y, z;
                if (!(ss >> id >> x >> y >> z)) throw ParseError("bad node line", lineno);
                if (!node_index.emplace(id, static_cast<int>(m.vertices.size())).second)
                    throw ParseError("duplicate node id " + std::to_string(id), lineno);
                m.vertices.emplace_back(x, y, z);
            }
            expect("$EndNodes");
            have_nodes = true;
        } else if (line == "$Elements") {
            if (!have_nodes) throw ParseError("$Elements before $Nodes", lineno);
            long count;
            if (!(std::istringstream(next()) >> count) || count < 0)
                throw ParseError("bad element count", lineno);
            for (long k = 0; k < count; ++k) {
                std::istringstream ss(next());
                long id;
                int type, ntags;
                if (!(ss >> id >> type >> ntags) || ntags < 0)
                    throw ParseError("bad element line", lineno);
                for (int t = 0; t < ntags; ++t) {
                    long tag;
                    if (!(ss >> tag)) throw ParseError("bad element tags", lineno);
                }
                if (type == 4) {
                    std::array<int, 4> t;
                    for (auto& v : t) {
                        long node;
                        if (!(ss >> node)) throw ParseError("bad tetrahedron nodes", lineno);
                        const auto it = node_index.find(node);
                        if (it == node_index.end())
                            throw ParseError("unknown node " + std::to_string(node), lineno);
                        v = it->second;
                    }
                    m.tets.push_back(t);
                } else if (type != 2) {
                    ++m.ignored_elements;
                }
            }
            expect("$EndElements");
            have_elements = true;
        } else if (line[0] == '$') {
            // Unknown section: skip to its end marker.
            const std::string end = "$End" + line.substr(1);
            while (next() != end) {
            }
        } else {
            throw ParseError("unexpected content '" + line + "'", lineno);
        }
    }
    if (!have_format || !have_nodes || !have_elements)
        throw ParseError("missing $MeshFormat, $Nodes or $Elements section", lineno);
    m.finalize();
    return m;
}

void write_msh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n" << mesh.vertices.size() << "\n";
    for (std::size_t k = 0; k < mesh.vertices.size(); ++k)
        out << k + 1 << " " << mesh.vertices[k][0] << " " << mesh.vertices[k][1] << " "
            << mesh.vertices[k][2] << "\n";
    out << "$EndNodes\n$Elements\n" << mesh.tets.size() << "\n";
    for (std::size_t k = 0; k < mesh.tets.size(); ++k) {
        out << k + 1 << " 4 2 0 1";
        for (int v : mesh.tets[k]) out << " " << v + 1;
        out << "\n";
    }
    out << "$EndElements\n";
}

// ---------------------------------------------------------------------------
// Ball mesh
// ---------------------------------------------------------------------------

void red_refine(Mesh& m, bool project_boundary) {
    std::map<std::pair<int, int>, int> mid;
    std::set<std::pair<int, int>> boundary_edges;
    for (const auto& f : m.boundary_faces()) {
        boundary_edges.insert({f[0], f[1]});
        boundary_edges.insert({f[0], f[2]});
        boundary_edges.insert({f[1], f[2]});
    }
    auto midpoint = [&](int a, int b) {
        const std::pair<int, int> e{std::min(a, b), std::max(a, b)};
        auto it = mid.find(e);
        if (it != mid.end()) return it->second;
        Vec3 p = 0.5 * (m.vertices[a] + m.vertices[b]);
        if (project_boundary && boundary_edges.count(e)) p.normalize();
        const int id = static_cast<int>(m.vertices.size());
        m.vertices.push_back(p);
        mid.emplace(e, id);
        return id;
    };
    std::vector<std::array<int, 4>> out;
    out.reserve(8 * m.tets.size());
    for (const auto& t : m.tets) {
        const int x0 = t[0], x1 = t[1], x2 = t[2], x3 = t[3];
        const int m01 = midpoint(x0, x1), m02 = midpoint(x0, x2), m03 = midpoint(x0, x3);
        const int m12 = midpoint(x1, x2), m13 = midpoint(x1, x3), m23 = midpoint(x2, x3);
        out.push_back({x0, m01, m02, m03});
        out.push_back({m01, x1, m12, m13});
        out.push_back({m02, m12, x2, m23});
        out.push_back({m03, m13, m23, x3});
        // Octahedron split along its shortest diagonal; the cycle lists the
        // four remaining vertices in order around the diagonal.
        const std::array<std::array<int, 6>, 3> diag{{{m01, m23, m02, m03, m13, m12},
                                                      {m02, m13, m01, m03, m23, m12},
                                                      {m03, m12, m01, m02, m23, m13}}};
        int best = 0;
        double len = 1e300;
        for (int d = 0; d < 3; ++d) {
            const double l = (m.vertices[diag[d][0]] - m.vertices[diag[d][1]]).norm();
            if (l < len - 1e-14) {
                len = l;
                best = d;
            }
        }
        const auto& D = diag[best];
        for (int k = 0; k < 4; ++k) out.push_back({D[0], D[1], D[2 + k], D[2 + (k + 1) % 4]});
    }
    m.tets.swap(out);
    m.finalize();
}

Mesh ball_mesh(int level, int max_level) {
    if (level < 0) throw InvalidParameter("negative refinement level");
    if (level > max_level)
        throw ResourceLimit("ball level " + std::to_string(level) + " exceeds the limit " +
                            std::to_string(max_level));
    Mesh m;
    m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0),
                  Vec3(0, -1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)};
    for (int sx : {1, 2})
        for (int sy : {3, 4})
            for (int sz : {5, 6}) m.tets.push_back({0, sx, sy, sz});
    m.finalize();
    for (int l = 0; l < level; ++l) red_refine(m, true);
    return m;
}

std::vector<Panel> icosphere(int level, double radius) {
    const double p = (1 + std::sqrt(5.0)) / 2;
    std::vector<Vec3> v = {{-1, p, 0}, {1, p, 0},  {-1, -p, 0}, {1, -p, 0},
                           {0, -1, p}, {0, 1, p},  {0, -1, -p}, {0, 1, -p},
                           {p, 0, -1}, {p, 0, 1},  {-p, 0, -1}, {-p, 0, 1}};
    for (auto& x : v) x.normalize();
    std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const std::pair<int, int> e{std::min(a, b), std::max(a, b)};
            auto it = mid.find(e);
            if (it != mid.end()) return it->second;
            v.push_back((0.5 * (v[a] + v[b])).normalized());
            return mid[e] = static_cast<int>(v.size()) - 1;
        };
        std::vector<std::array<int, 3>> g;
        for (const auto& t : f) {
            const int a = midpoint(t[0], t[1]), b = midpoint(t[1], t[2]), c = midpoint(t[2], t[0]);
            g.push_back({t[0], a, c});
            g.push_back({t[1], b, a});
            g.push_back({t[2], c, b});
            g.push_back({a, b, c});
        }
        f.swap(g);
    }
    std::vector<Panel> out;
    for (const auto& t : f) {
        const Vec3 a = radius * v[t[0]], b = radius * v[t[1]], c = radius * v[t[2]];
        out.push_back({a, b, c, oriented_normal(a, b, c, Vec3::Zero()), -1});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

namespace {

// Orders local indices: shared (by ascending global index) first, then the rest ascending.
template <std::size_t N>
std::array<int, 4> order_locals(const std::array<int, N>& verts, const std::vector<int>& shared) {
    std::array<int, 4> perm{0, 1, 2, 3};
    std::vector<std::pair<int, int>> keyed;  // (rank, local)
    for (int k = 0; k < static_cast<int>(N); ++k) {
        const bool s = std::find(shared.begin(), shared.end(), verts[k]) != shared.end();
        keyed.push_back({(s ? 0 : 1), k});
    }
    std::sort(keyed.begin(), keyed.end(), [&](auto x, auto y) {
        if (x.first != y.first) return x.first < y.first;
        return verts[x.second] < verts[y.second];
    });
    for (std::size_t k = 0; k < N; ++k) perm[k] = keyed[k].second;
    return perm;
}

}  // namespace

PairAlignment classify_pair(const Mesh& mesh, int t1, int t2) {
    const auto& a = mesh.tets.at(t1);
    const auto& b = mesh.tets.at(t2);
    std::vector<int> shared;
    for (int v : a)
        if (std::find(b.begin(), b.end(), v) != b.end()) shared.push_back(v);
    if (t1 != t2 && shared.size() == 4) throw MeshError("distinct tets with identical vertices");
    PairAlignment p;
    p.kind = tt_kind_from_shared(static_cast<int>(shared.size()));
    p.perm1 = order_locals(a, shared);
    p.perm2 = order_locals(b, shared);
    return p;
}

PairAlignment classify_tet_panel(const Mesh& mesh, int t, const std::array<int, 3>& face) {
    const auto& a = mesh.tets.at(t);
    std::vector<int> shared;
    for (int v : a)
        if (std::find(face.begin(), face.end(), v) != face.end()) shared.push_back(v);
    PairAlignment p;
    p.kind = tp_kind_from_shared(static_cast<int>(shared.size()));
    p.perm1 = order_locals(a, shared);
    p.perm2 = order_locals(face, shared);
    p.perm2[3] = -1;
    return p;
}

Tetrahedron aligned_tet(const Mesh& mesh, int t, const std::array<int, 4>& perm) {
    const auto& v = mesh.tets.at(t);
    return {mesh.vertices[v[perm[0]]], mesh.vertices[v[perm[1]]], mesh.vertices[v[perm[2]]],
            mesh.vertices[v[perm[3]]]};
}

SupportRegion support_region(const Mesh& mesh, int i, int j) {
    SupportRegion r;
    std::set<int> tets(mesh.vertex_tets.at(i).begin(), mesh.vertex_tets.at(i).end());
    tets.insert(mesh.vertex_tets.at(j).begin(), mesh.vertex_tets.at(j).end());
    r.tets.assign(tets.begin(), tets.end());
    std::map<Face, std::vector<std::pair<int, int>>> faces;
    for (int t : r.tets)
        for (int k = 0; k < 4; ++k) faces[tet_face(mesh.tets[t], k)].push_back({t, mesh.tets[t][k]});
    for (const auto& [f, owners] : faces)
        if (owners.size() == 1) {
            r.boundary_faces.push_back(f);
            r.boundary_panels.push_back(make_panel(mesh, f, owners[0].first, owners[0].second));
        }
    return r;
}

PairStats pair_worklist(const Mesh& mesh) {
    PairStats st;
    const long long M = static_cast<long long>(mesh.tets.size());
    long long touching = 0;
    for (int t = 0; t < M; ++t) {
        std::map<int, int> shared;
        for (int v : mesh.tets[t])
            for (int u : mesh.vertex_tets[v]) shared[u]++;
        for (const auto& [u, count] : shared) {
            st.histogram[tt_kind_from_shared(count)]++;
            ++touching;
        }
    }
    st.histogram[CaseKind::TTDistant] += M * M - touching;
    const auto faces = mesh.boundary_faces();
    long long tp_touching = 0;
    for (const auto& f : faces) {
        std::map<int, int> shared;
        for (int v : f)
            for (int u : mesh.vertex_tets[v]) shared[u]++;
        for (const auto& [u, count] : shared) {
            st.histogram[tp_kind_from_shared(count)]++;
            ++tp_touching;
        }
    }
    st.histogram[CaseKind::TPDistant] += M * static_cast<long long>(faces.size()) - tp_touching;
    return st;
}

std::string mesh_json(const Mesh& mesh) {
    nlohmann::json j;
    j["vertices"] = nlohmann::json::array();
    for (const auto& v : mesh.vertices) j["vertices"].push_back({v[0], v[1], v[2]});
    j["tets"] = mesh.tets;
    std::vector<int> flags(mesh.boundary.begin(), mesh.boundary.end());
    j["boundary"] = flags;
    return j.dump();
}

}  // namespace fl
