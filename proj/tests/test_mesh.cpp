#include <doctest.h>

#include "fraclap/errors.hpp"
#include "fraclap/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

using namespace fl;

namespace {

double total_volume(const Mesh& m) {
    double v = 0;
    for (int k = 0; k < static_cast<int>(m.tets.size()); ++k) v += volume(m.tet(k));
    return v;
}

std::string write_temp(const std::string& name, const std::string& text) {
    const std::string path = "fraclap_test_" + name;
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST_CASE("ball levels: sizes, volumes and boundary placement") {
    const int dofs[] = {1, 7, 63};
    const int tets[] = {8, 64, 512};
    const double vol[] = {4.0 / 3, 2.943, 3.818};
    for (int level = 0; level <= 2; ++level) {
        CAPTURE(level);
        const Mesh m = ball_mesh(level);
        CHECK(m.dofs() == dofs[level]);
        CHECK(static_cast<int>(m.tets.size()) == tets[level]);
        CHECK(total_volume(m) == doctest::Approx(vol[level]).epsilon(1e-3));
        CHECK(total_volume(m) < 4 * M_PI / 3);
        for (int v = 0; v < static_cast<int>(m.vertices.size()); ++v) {
            if (m.boundary[v]) CHECK(m.vertices[v].norm() == doctest::Approx(1.0).epsilon(1e-14));
            else CHECK(m.vertices[v].norm() < 1 - 1e-3);
        }
        // Boundary panels close up: sum of area * normal vanishes.
        Vec3 flux = Vec3::Zero();
        for (const auto& p : m.boundary_panels()) flux += 0.5 * (p.b - p.a).cross(p.c - p.a).norm() * p.n;
        CHECK(flux.norm() < 1e-12);
    }
    CHECK_THROWS_AS(ball_mesh(-1), InvalidParameter);
    CHECK_THROWS_AS(ball_mesh(6), ResourceLimit);
}

TEST_CASE("octant pairs classify by shared vertices") {
    const Mesh m = ball_mesh(0);
    PairStats st = pair_worklist(m);
    CHECK(st.histogram[CaseKind::TTIdentical] == 8);
    CHECK(st.histogram[CaseKind::TTFace] == 24);
    CHECK(st.histogram[CaseKind::TTEdge] == 24);
    CHECK(st.histogram[CaseKind::TTVertex] == 8);
    CHECK(st.histogram[CaseKind::TTDistant] == 0);

    for (int t2 = 0; t2 < 8; ++t2) {
        const auto a = classify_pair(m, 0, t2);
        const int shared = shared_vertex_count(a.kind);
        // Shared vertices lead in both alignments and agree.
        for (int k = 0; k < shared; ++k) CHECK(m.tets[0][a.perm1[k]] == m.tets[t2][a.perm2[k]]);
        for (int k = 1; k < shared; ++k) CHECK(m.tets[0][a.perm1[k - 1]] < m.tets[0][a.perm1[k]]);
    }
}

TEST_CASE("level-1 pair histogram counts every ordered pair") {
    const Mesh m = ball_mesh(1);
    const auto st = pair_worklist(m);
    long long tt = 0, tp = 0;
    for (const auto& [kind, n] : st.histogram) (is_tet_panel(kind) ? tp : tt) += n;
    CHECK(tt == 64 * 64);
    CHECK(tp == 64 * static_cast<long long>(m.boundary_panels().size()));
}

TEST_CASE("tet-panel classification") {
    const Mesh m = ball_mesh(0);
    const auto faces = m.boundary_faces();
    REQUIRE(faces.size() == 8);
    int counts[3] = {0, 0, 0};
    for (int t = 0; t < 8; ++t) {
        const auto a = classify_tet_panel(m, t, faces[0]);
        CHECK(a.perm2[3] == -1);
        if (a.kind == CaseKind::TPFace) ++counts[0];
        if (a.kind == CaseKind::TPEdge) ++counts[1];
        if (a.kind == CaseKind::TPVertex) ++counts[2];
    }
    // One owner, three octants through an outer edge, three through a corner only.
    CHECK(counts[0] == 1);
    CHECK(counts[1] == 3);
    CHECK(counts[2] == 3);
}

TEST_CASE("msh round trip") {
    const Mesh m = ball_mesh(1);
    const std::string path = "fraclap_test_roundtrip.msh";
    write_msh(m, path);
    const Mesh r = load_msh(path);
    CHECK(r.vertices.size() == m.vertices.size());
    CHECK(r.tets.size() == m.tets.size());
    CHECK(r.dofs() == m.dofs());
    CHECK(total_volume(r) == doctest::Approx(total_volume(m)).epsilon(1e-12));
    std::remove(path.c_str());
}

TEST_CASE("msh errors carry line numbers") {
    const std::string bad = write_temp("bad.msh",
                                       "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n2\n"
                                       "1 0 0 0\n2 x 0 0\n$EndNodes\n");
    try {
        load_msh(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 7);
    }
    std::remove(bad.c_str());
    CHECK_THROWS_AS(load_msh("no/such/file.msh"), IoError);
}

TEST_CASE("mesh conformity and degeneracy checks") {
    Mesh flat;
    flat.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
    flat.tets = {{0, 1, 2, 3}};
    CHECK_THROWS_AS(flat.finalize(), DegenerateElement);

    Mesh fan;
    fan.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0.2, 0.2, 1), Vec3(0.2, 0.2, -1),
                    Vec3(1, 1, 0.5)};
    fan.tets = {{0, 1, 2, 3}, {0, 1, 2, 4}, {0, 1, 2, 5}};
    CHECK_THROWS_AS(fan.finalize(), MeshError);

    Mesh inverted;
    inverted.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 0, 1), Vec3(0, 1, 0)};
    inverted.tets = {{0, 1, 2, 3}};
    inverted.finalize();
    CHECK(tet_map(inverted.tet(0)).M.determinant() > 0);
}

TEST_CASE("icosphere panels") {
    const auto panels = icosphere(3);
    CHECK(panels.size() == 1280);
    double area = 0;
    for (const auto& p : panels) {
        CHECK(p.n.dot(centroid(p)) > 0);
        area += 0.5 * (p.b - p.a).cross(p.c - p.a).norm();
    }
    CHECK(area == doctest::Approx(4 * M_PI).epsilon(5e-3));
    CHECK(icosphere(1, 2.0)[0].a.norm() == doctest::Approx(2.0));
}

TEST_CASE("support region of a vertex pair") {
    const Mesh m = ball_mesh(1);
    const int i = m.dof_vertex[0];
    const auto r = support_region(m, i, i);
    CHECK(r.tets.size() == m.vertex_tets[i].size());
    CHECK(r.boundary_panels.size() == r.boundary_faces.size());
}
