#pragma once

#include "fraclap/duffy.hpp"
#include "fraclap/geometry.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace fl {

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 4>> tets;
    // Derived by finalize().
    std::vector<char> boundary;                 // per vertex
    std::vector<std::vector<int>> vertex_tets;  // incidence
    std::vector<int> dof_of_vertex;             // -1 on the boundary
    std::vector<int> dof_vertex;                // dof -> vertex
    int ignored_elements = 0;                   // unknown element types skipped on load

    Tetrahedron tet(int k) const;
    int dofs() const { return static_cast<int>(dof_vertex.size()); }
    double max_diameter() const;

    // Orients tets positively, builds incidence, boundary flags and the dof
    // map, and checks conformity (closed boundary surface, faces shared by at
    // most two tets). Throws DegenerateElement or MeshError.
    void finalize();

    // Faces with exactly one incident tet, normals pointing out of the mesh.
    std::vector<Panel> boundary_panels() const;
    // Global vertex triples of boundary_panels(), same order.
    std::vector<std::array<int, 3>> boundary_faces() const;
};

Mesh load_msh(const std::string& path);
void write_msh(const Mesh& mesh, const std::string& path);

// One uniform red refinement (8 children per tet, octahedron split along its
// shortest diagonal). With project_boundary, new boundary vertices are pushed
// radially onto the unit sphere.
void red_refine(Mesh& m, bool project_boundary);

// Octahedral 8-tet ball refined `level` times (red refinement, shortest
// diagonal), boundary vertices projected onto the unit sphere.
Mesh ball_mesh(int level, int max_level = 5);

// Geodesic icosphere surface of the given radius: 20 * 4^level panels,
// normals pointing outwards.
std::vector<Panel> icosphere(int level, double radius = 1.0);

// Aligned pair: element k of the aligned tet is tets[t][perm[k]].
struct PairAlignment {
    CaseKind kind;
    std::array<int, 4> perm1{0, 1, 2, 3};
    std::array<int, 4> perm2{0, 1, 2, 3};  // panel alignment uses the first three
};

// Shared vertices first, ascending by global index, then the rest ascending.
PairAlignment classify_pair(const Mesh& mesh, int t1, int t2);
PairAlignment classify_tet_panel(const Mesh& mesh, int t, const std::array<int, 3>& face);

Tetrahedron aligned_tet(const Mesh& mesh, int t, const std::array<int, 4>& perm);

struct SupportRegion {
    std::vector<int> tets;
    std::vector<Panel> boundary_panels;
    std::vector<std::array<int, 3>> boundary_faces;
};

// Omega_ij = supp phi_i U supp phi_j for vertex indices i, j.
SupportRegion support_region(const Mesh& mesh, int i, int j);

struct PairStats {
    std::map<CaseKind, long long> histogram;  // ordered tet-tet pairs and tet x boundary-panel pairs
};

// Histogram of all ordered tet pairs and of all (tet, boundary panel) pairs.
PairStats pair_worklist(const Mesh& mesh);

std::string mesh_json(const Mesh& mesh);

}  // namespace fl
