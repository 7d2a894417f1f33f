#pragma once

// Verified fixtures: the join-of-two-cycles triangulation of S^3 with the
// unknot as one of the circles, its m=1 degeneration whose tetrahedra are
// all of the BDAA pattern, and the local BDAA coordinate configuration.

#include <random>

#include "tkf/covering.hpp"
#include "tkf/representation.hpp"
#include "tkf/triangulation.hpp"

namespace tkf {

struct Fixture {
    Pseudotriangulation pt;
    KnotMarking km;
    RepresentationSpec rep;
};

// S^3 as the join of an n-cycle (the knot, lifted to the z axis) and an
// m-cycle winding once around it.  n*m tetrahedra T_ij = (P_i, P_i+1, Q_j,
// Q_j+1); the closing edge of the Q-cycle carries the meridian generator,
// all other deck labels are empty.  Knot vertices are ids 0..n-1.
inline Fixture build_unknot_join(int n, int m, double phi) {
    if (n < 3 || m < 3) throw Error("build_unknot_join requires n, m >= 3");
    Fixture fx;
    fx.rep = RepresentationSpec::scalar(phi);
    const Word meridian = {1};

    std::vector<Tetrahedron> tets(n * m);
    std::vector<std::array<Gluing, 4>> glue(n * m);
    auto id = [&](int i, int j) { return ((i % n + n) % n) * m + ((j % m + m) % m); };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            Tetrahedron& t = tets[id(i, j)];
            t.vertex = {i, (i + 1) % n, n + j, n + (j + 1) % m};
            if (j == m - 1) t.deck[3] = meridian;

            Gluing& g0 = glue[id(i, j)][0];  // face opposite P_i
            g0.tet = id(i + 1, j);
            g0.face = 1;
            g0.cmap = {1, 0, 2, 3};
            Gluing& g1 = glue[id(i, j)][1];
            g1.tet = id(i - 1, j);
            g1.face = 0;
            g1.cmap = {1, 0, 2, 3};
            Gluing& g2 = glue[id(i, j)][2];  // face opposite Q_j
            g2.tet = id(i, j + 1);
            g2.face = 3;
            g2.cmap = {0, 1, 3, 2};
            Gluing& g3 = glue[id(i, j)][3];
            g3.tet = id(i, j - 1);
            g3.face = 2;
            g3.cmap = {0, 1, 3, 2};
        }
    fx.pt = from_gluing_data(std::move(tets), std::move(glue));

    std::vector<int> knot;
    for (int i = 0; i < n; ++i)
        knot.push_back(fx.pt.edge_class_of(id(i, 0), 0, 1));
    fx.km = make_knot_marking(fx.pt, knot);
    return fx;
}

// The m=1 degeneration of the join: n tetrahedra T_i = (P_i, P_i+1, A, A)
// whose AA edge winds once around the knot.  Every tetrahedron has the
// BDAA pattern of the knot moves; the two A-opposite faces of each
// tetrahedron are glued to each other.
inline Fixture build_bdaa_fixture(int n, double phi) {
    if (n < 2) throw Error("build_bdaa_fixture requires n >= 2");
    Fixture fx;
    fx.rep = RepresentationSpec::scalar(phi);
    const Word meridian = {1};

    std::vector<Tetrahedron> tets(n);
    std::vector<std::array<Gluing, 4>> glue(n);
    for (int i = 0; i < n; ++i) {
        tets[i].vertex = {i, (i + 1) % n, n, n};
        tets[i].deck[3] = meridian;
        glue[i][0] = {(i + 1) % n, 1, {1, 0, 2, 3}};
        glue[i][1] = {(i - 1 + n) % n, 0, {1, 0, 2, 3}};
        glue[i][2] = {i, 3, {0, 1, 3, 2}};
        glue[i][3] = {i, 2, {0, 1, 3, 2}};
    }
    fx.pt = from_gluing_data(std::move(tets), std::move(glue));

    std::vector<int> knot;
    for (int i = 0; i < n; ++i) knot.push_back(fx.pt.edge_class_of(i, 0, 1));
    fx.km = make_knot_marking(fx.pt, knot);
    return fx;
}

// Local BDAA coordinate configuration for the move-1->2 torsion relation:
// B, C, D distinct on the z axis, A generic off the axis, meridian a
// rotation about z through phi.
struct BdaaLocal {
    Vec3 a1;         // the base lift of A; the other is rot(z, phi) * a1
    double zb, zc, zd;
    RepresentationSpec rep;
};

inline BdaaLocal build_bdaa_local(double phi, std::uint64_t seed) {
    BdaaLocal out;
    out.rep = RepresentationSpec::scalar(phi);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
        out.a1 = Vec3(u(rng), u(rng), u(rng));
        if (out.a1.head<2>().norm() > 0.2) break;  // keep A safely off-axis
    }
    for (;;) {
        out.zb = u(rng);
        out.zc = u(rng);
        out.zd = u(rng);
        const double s =
            std::min({std::abs(out.zb - out.zc), std::abs(out.zc - out.zd),
                      std::abs(out.zb - out.zd)});
        if (s > 0.1) break;
    }
    return out;
}

}  // namespace tkf
