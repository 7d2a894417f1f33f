#pragma once

// Combinatorial pseudotriangulations of S^3 with a marked knot: tetrahedra
// as ordered corner 4-tuples, face gluings with corner correspondences,
// derived edge/triangle classes, and the validity checks for the marked
// knot (conditions (a)-(c)).

#include <algorithm>
#include <array>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "tkf/errors.hpp"
#include "tkf/geometry.hpp"
#include "tkf/representation.hpp"

namespace tkf {

// One tetrahedron: corner slot c holds a vertex id and a deck label (a
// word in the representation's generators) describing which lift of the
// vertex this corner sees.  The corner order fixes the orientation up to
// even permutations.  Repeated vertex ids within one tetrahedron are legal.
struct Tetrahedron {
    std::array<int, 4> vertex{};
    std::array<Word, 4> deck{};
};

// Gluing partner of one face slot.  cmap[c] for corner c != face gives the
// partner corner slot; cmap[face] == partner face slot.
struct Gluing {
    int tet = -1;
    int face = -1;
    std::array<int, 4> cmap{{-1, -1, -1, -1}};
};

struct EdgeClass {
    std::vector<std::pair<int, int>> members;  // (tet, edge slot)
    int v0 = -1, v1 = -1;                      // endpoint vertex ids, v0 <= v1
    bool loop() const { return v0 == v1; }
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

inline int perm_sign(const std::array<int, 3>& p) {
    int inv = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (p[i] > p[j]) ++inv;
    return (inv % 2 == 0) ? 1 : -1;
}

}  // namespace detail

class Pseudotriangulation {
  public:
    std::vector<Tetrahedron> tets;
    // glue[t][f]: partner of face slot f (the face opposite corner f) of
    // tetrahedron t.
    std::vector<std::array<Gluing, 4>> glue;

    int num_tets() const { return static_cast<int>(tets.size()); }
    int num_vertices() const { return n_vertices_; }
    int num_edges() const { return static_cast<int>(edge_classes_.size()); }
    int num_triangles() const { return n_triangles_; }

    const std::vector<EdgeClass>& edge_classes() const { return edge_classes_; }
    const EdgeClass& edge_class(int id) const { return edge_classes_[id]; }
    int edge_class_of(int tet, int slot) const {
        return slot_class_[tet * 6 + slot];
    }
    int edge_class_of(int tet, int ci, int cj) const {
        return edge_class_of(tet, edge_slot(ci, cj));
    }

    // Recomputes derived data and checks all structural invariants.
    void derive() {
        validate_gluings();
        derive_edges();
        derive_vertices();
        check_orientation();
        check_euler();
    }

  private:
    int n_vertices_ = 0;
    int n_triangles_ = 0;
    std::vector<int> slot_class_;
    std::vector<EdgeClass> edge_classes_;

    static std::array<int, 3> face_corners(int f) {
        std::array<int, 3> out{};
        int k = 0;
        for (int c = 0; c < 4; ++c)
            if (c != f) out[k++] = c;
        return out;
    }

    void validate_gluings() {
        const int T = num_tets();
        if (static_cast<int>(glue.size()) != T)
            throw UngluedFace("gluing table size does not match tetrahedra");
        for (int t = 0; t < T; ++t) {
            for (int f = 0; f < 4; ++f) {
                const Gluing& g = glue[t][f];
                if (g.tet < 0 || g.tet >= T || g.face < 0 || g.face > 3)
                    throw UngluedFace("face (" + std::to_string(t) + "," +
                                      std::to_string(f) + ") is not glued");
                if (g.tet == t && g.face == f)
                    throw NonInvolutiveGluing(
                        "face (" + std::to_string(t) + "," + std::to_string(f) +
                        ") is glued to itself");
                const Gluing& back = glue[g.tet][g.face];
                if (back.tet != t || back.face != f)
                    throw NonInvolutiveGluing(
                        "gluing of face (" + std::to_string(t) + "," +
                        std::to_string(f) + ") is not an involution");
                for (int c = 0; c < 4; ++c) {
                    if (c == f) {
                        if (g.cmap[c] != g.face)
                            throw NonInvolutiveGluing(
                                "corner map of face (" + std::to_string(t) +
                                "," + std::to_string(f) +
                                ") does not send face slot to face slot");
                        continue;
                    }
                    const int c2 = g.cmap[c];
                    if (c2 < 0 || c2 > 3 || c2 == g.face ||
                        back.cmap[c2] != c)
                        throw NonInvolutiveGluing(
                            "corner maps of face pairing (" +
                            std::to_string(t) + "," + std::to_string(f) +
                            ") are not mutually inverse");
                    if (tets[t].vertex[c] != tets[g.tet].vertex[c2])
                        throw NonInvolutiveGluing(
                            "glued corners of face (" + std::to_string(t) +
                            "," + std::to_string(f) +
                            ") carry different vertex ids");
                }
            }
        }
        // Triangle classes: unordered pairs of face slots.
        int pairs = 0;
        for (int t = 0; t < T; ++t)
            for (int f = 0; f < 4; ++f) {
                const Gluing& g = glue[t][f];
                if (std::make_pair(t, f) <= std::make_pair(g.tet, g.face))
                    ++pairs;
            }
        n_triangles_ = pairs;
    }

    void derive_edges() {
        const int T = num_tets();
        detail::UnionFind uf(6 * T);
        for (int t = 0; t < T; ++t)
            for (int f = 0; f < 4; ++f) {
                const Gluing& g = glue[t][f];
                const auto fc = face_corners(f);
                for (int i = 0; i < 3; ++i)
                    for (int j = i + 1; j < 3; ++j)
                        uf.unite(t * 6 + edge_slot(fc[i], fc[j]),
                                 g.tet * 6 + edge_slot(g.cmap[fc[i]],
                                                       g.cmap[fc[j]]));
            }
        slot_class_.assign(6 * T, -1);
        edge_classes_.clear();
        for (int s = 0; s < 6 * T; ++s) {
            const int r = uf.find(s);
            if (slot_class_[r] < 0) {
                slot_class_[r] = static_cast<int>(edge_classes_.size());
                edge_classes_.emplace_back();
            }
            slot_class_[s] = slot_class_[r];
            auto& ec = edge_classes_[slot_class_[s]];
            ec.members.emplace_back(s / 6, s % 6);
        }
        for (auto& ec : edge_classes_) {
            std::sort(ec.members.begin(), ec.members.end());
            const auto [t, e] = ec.members.front();
            int a = tets[t].vertex[kEdgeCorners[e][0]];
            int b = tets[t].vertex[kEdgeCorners[e][1]];
            ec.v0 = std::min(a, b);
            ec.v1 = std::max(a, b);
        }
    }

    void derive_vertices() {
        std::set<int> ids;
        for (const auto& t : tets)
            for (int v : t.vertex) {
                if (v < 0) throw Error("negative vertex id");
                ids.insert(v);
            }
        n_vertices_ = static_cast<int>(ids.size());
        if (!ids.empty() && (*ids.rbegin() != n_vertices_ - 1))
            throw Error("vertex ids must be dense 0..N0-1");
    }

    void check_orientation() const {
        for (int t = 0; t < num_tets(); ++t)
            for (int f = 0; f < 4; ++f) {
                const Gluing& g = glue[t][f];
                const auto a = face_corners(f);
                const auto b = face_corners(g.face);
                // Position of each mapped corner in the partner's
                // ascending list.
                std::array<int, 3> img{};
                for (int i = 0; i < 3; ++i) {
                    const int c2 = g.cmap[a[i]];
                    img[i] = static_cast<int>(
                        std::find(b.begin(), b.end(), c2) - b.begin());
                }
                const int s1 = (f % 2 == 0) ? 1 : -1;
                const int s2 = (g.face % 2 == 0) ? 1 : -1;
                if (s1 * s2 * detail::perm_sign(img) != -1)
                    throw OrientationInconsistent(
                        "gluing of face (" + std::to_string(t) + "," +
                        std::to_string(f) +
                        ") preserves the induced face orientation");
            }
    }

    void check_euler() const {
        const int chi = num_vertices() - num_edges() + num_triangles() -
                        num_tets();
        if (chi != 0)
            throw Error("Euler characteristic " + std::to_string(chi) +
                        " != 0: not a closed 3-manifold complex");
    }
};

// Builds a pseudotriangulation from raw tetrahedron/gluing records,
// deriving edge and triangle classes and checking all invariants.
inline Pseudotriangulation from_gluing_data(
    std::vector<Tetrahedron> tets, std::vector<std::array<Gluing, 4>> glue) {
    Pseudotriangulation pt;
    pt.tets = std::move(tets);
    pt.glue = std::move(glue);
    pt.derive();
    return pt;
}

// Deck-label holonomy of an edge whose endpoints coincide: the word taking
// the lift at the first corner to the lift at the second.
inline Word edge_holonomy(const Pseudotriangulation& pt, int edge_class) {
    const EdgeClass& ec = pt.edge_class(edge_class);
    if (!ec.loop()) throw NotALoop("edge class has two distinct endpoints");
    const auto [t, e] = ec.members.front();
    const Word& gi = pt.tets[t].deck[kEdgeCorners[e][0]];
    const Word& gj = pt.tets[t].deck[kEdgeCorners[e][1]];
    return concat(gj, inverse(gi));
}

// Winding of a loop edge around the knot: the image of its holonomy in the
// abelianization of the knot group.
inline int meridian_winding(const Pseudotriangulation& pt, int edge_class) {
    return winding_number(edge_holonomy(pt, edge_class));
}

// The marked knot: an ordered cyclic list of edge classes.
struct KnotMarking {
    std::vector<int> knot_edges;     // cyclic order fixes the orientation
    std::vector<int> knot_vertices;  // cycle order, v[i] = start of edge i
    std::vector<char> vertex_on_knot;

    bool on_knot_edge(int edge_class) const {
        return std::find(knot_edges.begin(), knot_edges.end(), edge_class) !=
               knot_edges.end();
    }
    bool on_knot_vertex(int v) const { return vertex_on_knot[v] != 0; }
    int num_knot_vertices() const {
        return static_cast<int>(knot_vertices.size());
    }
};

inline KnotMarking make_knot_marking(const Pseudotriangulation& pt,
                                     const std::vector<int>& edge_classes) {
    if (edge_classes.size() < 2)
        throw KnotNotACycle("knot needs at least two edges");
    if (std::set<int>(edge_classes.begin(), edge_classes.end()).size() !=
        edge_classes.size())
        throw KnotNotACycle("duplicate edge class in knot");
    for (int e : edge_classes)
        if (pt.edge_class(e).loop())
            throw KnotNotACycle("knot edge " + std::to_string(e) +
                                " has coinciding endpoints");

    KnotMarking km;
    km.knot_edges = edge_classes;
    // Walk the cycle.  Start at the endpoint of edge 0 shared with the
    // last edge.
    const EdgeClass& e0 = pt.edge_class(edge_classes.front());
    const EdgeClass& el = pt.edge_class(edge_classes.back());
    int v = (e0.v0 == el.v0 || e0.v0 == el.v1) ? e0.v0 : e0.v1;
    for (int e : edge_classes) {
        const EdgeClass& ec = pt.edge_class(e);
        if (ec.v0 != v && ec.v1 != v)
            throw KnotNotACycle("knot edges do not form a connected cycle");
        km.knot_vertices.push_back(v);
        v = (ec.v0 == v) ? ec.v1 : ec.v0;
    }
    if (v != km.knot_vertices.front())
        throw KnotNotACycle("knot edge list does not close up");
    if (std::set<int>(km.knot_vertices.begin(), km.knot_vertices.end())
            .size() != km.knot_vertices.size())
        throw KnotNotACycle("knot cycle visits a vertex twice");
    km.vertex_on_knot.assign(pt.num_vertices(), 0);
    for (int kv : km.knot_vertices) km.vertex_on_knot[kv] = 1;
    return km;
}

struct ConditionReport {
    bool a = true;  // knot lies on edges: true by construction of the marking
    bool b = true;  // every tetrahedron has at most 2 knot vertices
    bool c = true;  // loop edges wind exactly once around the knot
    std::vector<std::string> failures;

    bool ok() const { return a && b && c; }
};

// Checks conditions (a)-(c) for a marked pseudotriangulation.  Condition
// (c) is checked for edges with coinciding endpoints: the holonomy must be
// a generator of the abelianization (winding +-1).
inline ConditionReport validate_knot_conditions(const Pseudotriangulation& pt,
                                                const KnotMarking& km) {
    ConditionReport rep;
    for (int t = 0; t < pt.num_tets(); ++t) {
        int k = 0;
        for (int c = 0; c < 4; ++c)
            if (km.on_knot_vertex(pt.tets[t].vertex[c])) ++k;
        if (k > 2) {
            rep.b = false;
            rep.failures.push_back("condition (b): tetrahedron " +
                                   std::to_string(t) + " has " +
                                   std::to_string(k) + " knot corners");
        }
    }
    for (int e = 0; e < pt.num_edges(); ++e) {
        if (!pt.edge_class(e).loop()) continue;
        const int w = meridian_winding(pt, e);
        if (w != 1 && w != -1) {
            rep.c = false;
            rep.failures.push_back(
                "condition (c): loop edge " + std::to_string(e) +
                " winds " + std::to_string(w) + " times around the knot");
        }
    }
    return rep;
}

}  // namespace tkf
