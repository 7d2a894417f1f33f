#pragma once

// Euclidean realization of the lift into the branched cover: base
// coordinates per vertex (one axis coordinate for knot vertices), corner
// positions via deck labels, lift consistency checks, general-position
// sampling, and per-edge deficit angles.

#include <optional>
#include <random>
#include <vector>

#include "tkf/errors.hpp"
#include "tkf/geometry.hpp"
#include "tkf/representation.hpp"
#include "tkf/triangulation.hpp"

namespace tkf {

// Euclidean data of one lift choice: a base position per vertex.  A knot
// vertex sits on its axis, pos = z * axis; off-knot vertices are free.
struct Realization {
    std::vector<Vec3> pos;
    std::vector<double> zcoord;  // axis coordinate; meaningful on the knot
    std::vector<Vec3> axis;      // unit axis per vertex; meaningful on the knot
    std::uint64_t seed = 0;

    void set_knot_coordinate(int v, double z) {
        zcoord[v] = z;
        pos[v] = z * axis[v];
    }
};

inline Vec3 corner_position(const Pseudotriangulation& pt,
                            const RepresentationSpec& rep,
                            const Realization& real, int tet, int corner) {
    const Tetrahedron& t = pt.tets[tet];
    if (t.deck[corner].empty()) return real.pos[t.vertex[corner]];
    return rep.evaluate(t.deck[corner]) * real.pos[t.vertex[corner]];
}

inline TetGeometry tet_geometry(const Pseudotriangulation& pt,
                                const RepresentationSpec& rep,
                                const Realization& real, int tet) {
    TetGeometry g;
    for (int c = 0; c < 4; ++c) g.corner[c] = corner_position(pt, rep, real, tet, c);
    return g;
}

struct LiftReport {
    double max_face_discrepancy = 0.0;  // worst pairing, relative
    double max_length_spread = 0.0;     // worst edge class, relative
    std::vector<double> edge_lengths;   // one representative length per class
};

// Checks that the realization is well defined in the quotient: glued faces
// are congruent and every edge class has a single length.  Throws
// InconsistentLift beyond `tol` (relative).
inline LiftReport validate_lift(const Pseudotriangulation& pt,
                                const RepresentationSpec& rep,
                                const Realization& real, double tol = 1e-9) {
    LiftReport out;
    std::vector<std::array<Vec3, 4>> pos(pt.num_tets());
    for (int t = 0; t < pt.num_tets(); ++t)
        for (int c = 0; c < 4; ++c) pos[t][c] = corner_position(pt, rep, real, t, c);

    for (int t = 0; t < pt.num_tets(); ++t)
        for (int f = 0; f < 4; ++f) {
            const Gluing& g = pt.glue[t][f];
            std::array<int, 3> fc{};
            int k = 0;
            for (int c = 0; c < 4; ++c)
                if (c != f) fc[k++] = c;
            double scale = 0.0, diff = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = i + 1; j < 3; ++j) {
                    const double a = (pos[t][fc[i]] - pos[t][fc[j]]).norm();
                    const double b = (pos[g.tet][g.cmap[fc[i]]] -
                                      pos[g.tet][g.cmap[fc[j]]])
                                         .norm();
                    scale = std::max({scale, a, b});
                    diff = std::max(diff, std::abs(a - b));
                }
            const double rel = diff / std::max(scale, 1e-300);
            out.max_face_discrepancy = std::max(out.max_face_discrepancy, rel);
            if (rel > tol)
                throw InconsistentLift(
                    "glued faces (" + std::to_string(t) + "," +
                    std::to_string(f) + ") <-> (" + std::to_string(g.tet) +
                    "," + std::to_string(g.face) + ") are not congruent");
        }

    out.edge_lengths.resize(pt.num_edges());
    for (int e = 0; e < pt.num_edges(); ++e) {
        const EdgeClass& ec = pt.edge_class(e);
        double lo = std::numeric_limits<double>::max(), hi = 0.0;
        for (auto [t, s] : ec.members) {
            const double l = (pos[t][kEdgeCorners[s][1]] -
                              pos[t][kEdgeCorners[s][0]])
                                 .norm();
            lo = std::min(lo, l);
            hi = std::max(hi, l);
        }
        const double rel = (hi - lo) / std::max(hi, 1e-300);
        out.max_length_spread = std::max(out.max_length_spread, rel);
        if (rel > tol)
            throw InconsistentLift("edge class " + std::to_string(e) +
                                   " has inconsistent lengths");
        out.edge_lengths[e] = (pos[ec.members.front().first]
                                   [kEdgeCorners[ec.members.front().second][1]] -
                               pos[ec.members.front().first]
                                   [kEdgeCorners[ec.members.front().second][0]])
                                  .norm();
    }
    return out;
}

struct DeficitReport {
    std::vector<double> raw;        // omega_b
    std::vector<double> deviation;  // wrapped difference from 0 or -+phi
    std::vector<int> knot_sign;     // s with omega = s*phi mod 2pi; 0 off knot
    double max_abs_deviation = 0.0;
};

// Deficit angle per edge class: minus the algebraic (volume-signed) sum of
// dihedral angles over all incident (tetrahedron, edge slot) pairs.  The
// deviation is reported modulo 2*pi against 0 off the knot and against the
// nearer of -phi and +phi on it.  Both signs occur on knot edges: the sign
// follows the spatial direction of the edge along its axis, and a closed
// edge path on a line cannot run monotonically, so a knot always realizes
// both.  Everything downstream is even in phi, so this is harmless.
inline DeficitReport deficit_angles(const Pseudotriangulation& pt,
                                    const KnotMarking& km,
                                    const RepresentationSpec& rep,
                                    const Realization& real,
                                    const GeometryTolerances& gtol = {}) {
    DeficitReport out;
    out.raw.assign(pt.num_edges(), 0.0);
    for (int t = 0; t < pt.num_tets(); ++t) {
        const TetGeometry g = tet_geometry(pt, rep, real, t);
        const auto th = signed_dihedral_angles(g, gtol);
        for (int s = 0; s < 6; ++s) out.raw[pt.edge_class_of(t, s)] -= th[s];
    }
    out.deviation.resize(pt.num_edges());
    out.knot_sign.assign(pt.num_edges(), 0);
    for (int e = 0; e < pt.num_edges(); ++e) {
        if (km.on_knot_edge(e)) {
            const double dm = wrap_angle(out.raw[e] + rep.phi);
            const double dp = wrap_angle(out.raw[e] - rep.phi);
            if (std::abs(dm) <= std::abs(dp)) {
                out.deviation[e] = dm;
                out.knot_sign[e] = -1;
            } else {
                out.deviation[e] = dp;
                out.knot_sign[e] = 1;
            }
        } else {
            out.deviation[e] = wrap_angle(out.raw[e]);
        }
        out.max_abs_deviation =
            std::max(out.max_abs_deviation, std::abs(out.deviation[e]));
    }
    return out;
}

struct SamplingOptions {
    double box_halfwidth = 1.0;
    int max_retries = 1000;
    // Quality floor on |6V| during rejection; keeps the linear algebra
    // well conditioned without affecting what counts as degenerate.
    double quality_floor = 1e-3;
    double lift_tol = 1e-9;
    double deficit_tol = 1e-9;
};

// Draws a random general-position realization: off-knot vertices uniform
// in the box, knot vertices uniform along their axes; rejects until every
// tetrahedron is safely nondegenerate.  Axes default to z (the scalar
// case); explicit representations may supply per-vertex axes.
inline Realization sample_general_position(
    const Pseudotriangulation& pt, const KnotMarking& km,
    const RepresentationSpec& rep, std::uint64_t seed,
    const SamplingOptions& opt = {},
    const std::optional<std::vector<Vec3>>& axes = std::nullopt) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-opt.box_halfwidth,
                                             opt.box_halfwidth);
    Realization real;
    real.seed = seed;
    real.pos.resize(pt.num_vertices());
    real.zcoord.assign(pt.num_vertices(), 0.0);
    real.axis.assign(pt.num_vertices(), Vec3::UnitZ());
    if (axes) real.axis = *axes;

    const double b = opt.box_halfwidth;
    const double floor6v = opt.quality_floor * b * b * b;
    for (int attempt = 0; attempt < opt.max_retries; ++attempt) {
        for (int v = 0; v < pt.num_vertices(); ++v) {
            if (km.on_knot_vertex(v)) {
                real.set_knot_coordinate(v, u(rng));
            } else {
                real.pos[v] = Vec3(u(rng), u(rng), u(rng));
            }
        }
        bool ok = true;
        for (int t = 0; t < pt.num_tets() && ok; ++t) {
            const TetGeometry g = tet_geometry(pt, rep, real, t);
            GeometryTolerances gtol;
            if (std::abs(6.0 * g.volume()) <=
                std::max(floor6v, gtol.eps_vol(g)))
                ok = false;
        }
        if (!ok) continue;
        validate_lift(pt, rep, real, opt.lift_tol);
        const auto def = deficit_angles(pt, km, rep, real);
        if (def.max_abs_deviation > opt.deficit_tol)
            throw InconsistentLift(
                "deficit angles deviate from their expected values (worst " +
                std::to_string(def.max_abs_deviation) +
                "): the lift data is inconsistent");
        return real;
    }
    throw SamplingExhausted("no general-position realization found in " +
                            std::to_string(opt.max_retries) + " attempts");
}

}  // namespace tkf
