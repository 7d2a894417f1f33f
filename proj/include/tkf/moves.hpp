#pragma once

// Elementary rebuilding moves: bulk moves 2<->3 and 1<->4 away from the
// knot and the knot moves 1<->2 that split or merge a knot edge.  Each
// move returns a fresh complex, the remapped knot marking, and a
// realization updated in place (new vertices get coordinates, removed
// ones are dropped).

#include <map>
#include <optional>
#include <random>
#include <string>

#include "tkf/complex.hpp"
#include "tkf/covering.hpp"
#include "tkf/triangulation.hpp"

namespace tkf {

enum class MoveKind {
    bulk_2_3,
    bulk_3_2,
    bulk_1_4,
    bulk_4_1,
    knot_1_2,
    knot_2_1,
};

inline const char* to_string(MoveKind k) {
    switch (k) {
        case MoveKind::bulk_2_3: return "2-3";
        case MoveKind::bulk_3_2: return "3-2";
        case MoveKind::bulk_1_4: return "1-4";
        case MoveKind::bulk_4_1: return "4-1";
        case MoveKind::knot_1_2: return "knot-1-2";
        case MoveKind::knot_2_1: return "knot-2-1";
    }
    return "?";
}

struct MoveResult {
    Pseudotriangulation pt;
    KnotMarking km;
    Realization real;
};

namespace detail {

// Where a knot edge can be found after the move: either on a surviving
// tetrahedron (old id) or on one of the added ones (index before offset).
struct EdgeAnchor {
    int tet, ci, cj;
    bool added = false;
};

// Face-level relocation: where each external face of a removed
// tetrahedron lives in the added block and how its corners map there.
using FaceKey = std::pair<int, int>;  // (old tet, face slot)
using RelocMap = std::map<FaceKey, Gluing>;

inline std::array<int, 4> invert_cmap(const std::array<int, 4>& c) {
    std::array<int, 4> inv{};
    for (int i = 0; i < 4; ++i) inv[c[i]] = i;
    return inv;
}

inline std::array<int, 4> compose(const std::array<int, 4>& second,
                                  const std::array<int, 4>& first) {
    std::array<int, 4> out{};
    for (int i = 0; i < 4; ++i) out[i] = second[first[i]];
    return out;
}

inline bool is_removed(const std::vector<int>& removed, int t) {
    return std::find(removed.begin(), removed.end(), t) != removed.end();
}

// Anchors every knot edge.  Prefers a member on a surviving tetrahedron;
// otherwise pushes a member through a relocated face that contains both
// edge corners.  Edges in `skip` (consumed by the move itself) get a
// placeholder anchor.
inline std::vector<EdgeAnchor> anchor_knot_edges(
    const Pseudotriangulation& pt, const KnotMarking& km,
    const std::vector<int>& removed, const RelocMap& reloc,
    const std::vector<int>& skip = {}) {
    std::vector<EdgeAnchor> anchors;
    for (int e : km.knot_edges) {
        if (std::find(skip.begin(), skip.end(), e) != skip.end()) {
            anchors.push_back({-1, -1, -1, false});
            continue;
        }
        const EdgeClass& ec = pt.edge_class(e);
        std::optional<EdgeAnchor> found;
        for (const auto& [t, s] : ec.members) {
            const int ci = kEdgeCorners[s][0], cj = kEdgeCorners[s][1];
            if (!is_removed(removed, t)) {
                found = EdgeAnchor{t, ci, cj, false};
                break;
            }
            for (int f = 0; f < 4 && !found; ++f) {
                if (f == ci || f == cj) continue;
                const auto it = reloc.find({t, f});
                if (it == reloc.end()) continue;
                const Gluing& r = it->second;
                found = EdgeAnchor{r.tet, r.cmap[ci], r.cmap[cj], true};
            }
            if (found) break;
        }
        if (!found)
            throw MoveNotApplicable("a knot edge would be lost by the move");
        anchors.push_back(*found);
    }
    return anchors;
}

// Rebuilds the complex: drops `removed`, appends `added` (whose internal
// gluings use indices before the survivor offset), rewires every seam
// face through `reloc`, and optionally renumbers vertex ids past a
// dropped vertex.  Returns the new complex and the old->new tet id map.
inline std::pair<Pseudotriangulation, std::vector<int>> rebuild(
    const Pseudotriangulation& pt, const std::vector<int>& removed,
    std::vector<Tetrahedron> added,
    std::vector<std::array<Gluing, 4>> added_glue, const RelocMap& reloc,
    int drop_vertex = -1) {
    const int nt = pt.num_tets();
    std::vector<int> newid(nt, -1);
    std::vector<Tetrahedron> tets;
    std::vector<std::array<Gluing, 4>> glue;
    for (int t = 0; t < nt; ++t) {
        if (is_removed(removed, t)) continue;
        newid[t] = static_cast<int>(tets.size());
        tets.push_back(pt.tets[t]);
        glue.push_back(pt.glue[t]);
    }
    const int base = static_cast<int>(tets.size());
    for (size_t i = 0; i < added.size(); ++i) {
        tets.push_back(added[i]);
        auto g = added_glue[i];
        for (auto& gg : g)
            if (gg.tet >= 0) gg.tet += base;
        glue.push_back(g);
    }

    // Survivor faces pointing into the removed block go through reloc,
    // which also fills the backward gluing on the added side.
    for (int t = 0; t < nt; ++t) {
        if (newid[t] < 0) continue;
        for (int f = 0; f < 4; ++f) {
            const Gluing& g = pt.glue[t][f];
            Gluing& ng = glue[newid[t]][f];
            if (newid[g.tet] >= 0) {
                ng.tet = newid[g.tet];
                continue;
            }
            const auto it = reloc.find({g.tet, g.face});
            if (it == reloc.end())
                throw MoveNotApplicable(
                    "rebuild: missing relocation for a seam face");
            const Gluing& r = it->second;
            ng.tet = r.tet + base;
            ng.face = r.face;
            ng.cmap = compose(r.cmap, g.cmap);
            Gluing& back = glue[ng.tet][ng.face];
            back.tet = newid[t];
            back.face = f;
            back.cmap = invert_cmap(ng.cmap);
        }
    }
    // Seam faces whose old partner was itself removed: connect the two
    // relocated images directly.
    for (const auto& [key, r] : reloc) {
        const Gluing& g = pt.glue[key.first][key.second];
        if (newid[g.tet] >= 0) continue;
        const auto it2 = reloc.find({g.tet, g.face});
        if (it2 == reloc.end())
            throw MoveNotApplicable("rebuild: dangling seam face");
        const Gluing& r2 = it2->second;
        Gluing& ng = glue[r.tet + base][r.face];
        ng.tet = r2.tet + base;
        ng.face = r2.face;
        ng.cmap = compose(r2.cmap, compose(g.cmap, invert_cmap(r.cmap)));
    }

    if (drop_vertex >= 0) {
        for (auto& t : tets)
            for (auto& v : t.vertex) {
                if (v == drop_vertex)
                    throw MoveNotApplicable(
                        "rebuild: dropped vertex still referenced");
                if (v > drop_vertex) --v;
            }
    }
    return {from_gluing_data(std::move(tets), std::move(glue)), newid};
}

inline KnotMarking remark_knot(const Pseudotriangulation& npt,
                               const std::vector<int>& newid, int base,
                               const std::vector<EdgeAnchor>& anchors) {
    std::vector<int> edges;
    for (const EdgeAnchor& a : anchors)
        edges.push_back(npt.edge_class_of(
            a.added ? base + a.tet : newid[a.tet], a.ci, a.cj));
    return make_knot_marking(npt, edges);
}

// Word carrying corner data of the partner across the glued face (t, f)
// into the frame of t; needs an off-knot corner on the face, which the
// at-most-two-knot-corners condition supplies in every case we use.
inline Word transport_word(const Pseudotriangulation& pt,
                           const KnotMarking& km, int t, int f) {
    const Gluing& g = pt.glue[t][f];
    for (int c = 0; c < 4; ++c) {
        if (c == f) continue;
        if (km.on_knot_vertex(pt.tets[t].vertex[c])) continue;
        return reduced(concat(pt.tets[t].deck[c],
                              inverse(pt.tets[g.tet].deck[g.cmap[c]])));
    }
    throw MoveNotApplicable("no off-knot corner on the transported face");
}

inline int count_knot_corners(const Tetrahedron& t, const KnotMarking& km) {
    int n = 0;
    for (int c = 0; c < 4; ++c) n += km.on_knot_vertex(t.vertex[c]) ? 1 : 0;
    return n;
}

inline int perm4_sign(std::array<int, 4> p) {
    int inv = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (p[i] > p[j]) ++inv;
    return (inv % 2 == 0) ? 1 : -1;
}

}  // namespace detail

// 2->3: replaces the two distinct tetrahedra glued along face slot `face`
// of tetrahedron `tet` by three tetrahedra around the new edge joining
// their apexes.
inline MoveResult apply_2_3(const Pseudotriangulation& pt,
                            const KnotMarking& km,
                            const RepresentationSpec& rep,
                            const Realization& real, int tet, int face) {
    (void)rep;
    const Gluing g = pt.glue[tet][face];
    const int t2 = g.tet, f2 = g.face;
    if (t2 == tet)
        throw MoveNotApplicable("2->3 needs two distinct tetrahedra");

    // Even-ordered view of the first tetrahedron with its apex in front.
    std::array<int, 4> a{face, -1, -1, -1};
    int k = 1;
    for (int c = 0; c < 4; ++c)
        if (c != face) a[k++] = c;
    if (face % 2 != 0) std::swap(a[2], a[3]);

    const Word h = detail::transport_word(pt, km, tet, face);
    const Tetrahedron& T1 = pt.tets[tet];
    const Tetrahedron& T2 = pt.tets[t2];
    const int qv = T2.vertex[f2];
    const Word qw = reduced(concat(h, T2.deck[f2]));

    // N_i = [P, Q, a_(i+2), a_(i+3)] with face corner indices cyclic in
    // {1,2,3}; N_i omits face corner a_(i+1), replacing it by Q.
    std::vector<Tetrahedron> added(3);
    std::vector<std::array<Gluing, 4>> aglue(3);
    detail::RelocMap reloc;
    for (int i = 0; i < 3; ++i) {
        const int o = a[1 + i];            // omitted face corner
        const int v = a[1 + (i + 1) % 3];  // slot 2 source
        const int w = a[1 + (i + 2) % 3];  // slot 3 source
        Tetrahedron& N = added[i];
        N.vertex[0] = T1.vertex[face];
        N.deck[0] = T1.deck[face];
        N.vertex[1] = qv;
        N.deck[1] = qw;
        N.vertex[2] = T1.vertex[v];
        N.deck[2] = T1.deck[v];
        N.vertex[3] = T1.vertex[w];
        N.deck[3] = T1.deck[w];
        if (detail::count_knot_corners(N, km) > 2)
            throw WouldTouchKnot(
                "2->3 would give a tetrahedron three knot corners");
        // Face {P, Q, a_(i+2)} is opposite slot 3 here and opposite
        // slot 2 in N_(i+2), which carries a_(i+2) at slot 3.
        const int j = (i + 2) % 3;
        aglue[i][3] = {j, 2, {0, 1, 3, 2}};
        aglue[j][2] = {i, 3, {0, 1, 3, 2}};
        // External faces: the first tetrahedron's face opposite the
        // omitted corner becomes N_i's face opposite Q; the second's
        // image face becomes N_i's face opposite P.
        Gluing r1;
        r1.tet = i;
        r1.face = 1;
        r1.cmap[face] = 0;
        r1.cmap[v] = 2;
        r1.cmap[w] = 3;
        r1.cmap[o] = 1;
        reloc[{tet, o}] = r1;
        Gluing r2;
        r2.tet = i;
        r2.face = 0;
        r2.cmap[f2] = 1;
        r2.cmap[g.cmap[v]] = 2;
        r2.cmap[g.cmap[w]] = 3;
        r2.cmap[g.cmap[o]] = 0;
        reloc[{t2, g.cmap[o]}] = r2;
    }

    const std::vector<int> removed{tet, t2};
    const auto anchors = detail::anchor_knot_edges(pt, km, removed, reloc);
    auto [npt, newid] = detail::rebuild(pt, removed, std::move(added),
                                        std::move(aglue), reloc);
    const int base = npt.num_tets() - 3;
    MoveResult out{std::move(npt), {}, real};
    out.km = detail::remark_knot(out.pt, newid, base, anchors);
    return out;
}

// 3->2: inverse of 2->3 around an interior edge class with exactly three
// incidences in three distinct tetrahedra, not on the knot and not a loop.
inline MoveResult apply_3_2(const Pseudotriangulation& pt,
                            const KnotMarking& km,
                            const RepresentationSpec& rep,
                            const Realization& real, int edge) {
    (void)rep;
    if (km.on_knot_edge(edge))
        throw WouldTouchKnot("3->2 cannot remove a knot edge");
    const EdgeClass& ec = pt.edge_class(edge);
    if (ec.loop() || ec.members.size() != 3)
        throw MoveNotApplicable(
            "3->2 needs a non-loop edge with exactly three incidences");

    // Walk around the edge.  Each visited tetrahedron gets slots
    // [P, Q, U, V] with U = W_i and V = W_(i+1), the outer vertices; the
    // face opposite U leads to the next tetrahedron.
    std::array<int, 3> wt{}, wP{}, wQ{}, wU{}, wV{};
    {
        const auto [t0, s0] = ec.members.front();
        int p = kEdgeCorners[s0][0], q = kEdgeCorners[s0][1];
        if (pt.tets[t0].vertex[p] != ec.v0) std::swap(p, q);
        int u = -1, v = -1;
        for (int c = 0; c < 4; ++c)
            if (c != p && c != q) (u < 0 ? u : v) = c;
        if (detail::perm4_sign({p, q, u, v}) < 0) std::swap(u, v);
        int ct = t0, cp = p, cq = q, cu = u, cv = v;
        for (int i = 0; i < 3; ++i) {
            wt[i] = ct;
            wP[i] = cp;
            wQ[i] = cq;
            wU[i] = cu;
            wV[i] = cv;
            const Gluing& gg = pt.glue[ct][cu];
            const int np = gg.cmap[cp], nq = gg.cmap[cq], nu = gg.cmap[cv];
            cv = gg.face;
            ct = gg.tet;
            cp = np;
            cq = nq;
            cu = nu;
        }
        if (ct != t0 || cp != p || cq != q || cu != u || cv != v)
            throw MoveNotApplicable(
                "3->2: the edge star does not close after three steps");
        if (wt[0] == wt[1] || wt[0] == wt[2] || wt[1] == wt[2])
            throw MoveNotApplicable("3->2 needs three distinct tetrahedra");
    }

    const Tetrahedron& TA = pt.tets[wt[0]];
    const Tetrahedron& TB = pt.tets[wt[1]];
    // W_2 comes from the second tetrahedron, transported into the frame
    // of the first across their shared face (opposite U of the first).
    const Word hAB = detail::transport_word(pt, km, wt[0], wU[0]);

    Tetrahedron NP, NQ;  // [P, W0, W1, W2] and [Q, W0, W2, W1]
    NP.vertex[0] = TA.vertex[wP[0]];
    NP.deck[0] = TA.deck[wP[0]];
    NQ.vertex[0] = TA.vertex[wQ[0]];
    NQ.deck[0] = TA.deck[wQ[0]];
    NP.vertex[1] = NQ.vertex[1] = TA.vertex[wU[0]];
    NP.deck[1] = NQ.deck[1] = TA.deck[wU[0]];
    NP.vertex[2] = NQ.vertex[3] = TA.vertex[wV[0]];
    NP.deck[2] = NQ.deck[3] = TA.deck[wV[0]];
    NP.vertex[3] = NQ.vertex[2] = TB.vertex[wV[1]];
    NP.deck[3] = NQ.deck[2] = reduced(concat(hAB, TB.deck[wV[1]]));
    if (detail::count_knot_corners(NP, km) > 2 ||
        detail::count_knot_corners(NQ, km) > 2)
        throw WouldTouchKnot(
            "3->2 would give a tetrahedron three knot corners");

    std::vector<std::array<Gluing, 4>> aglue(2);
    aglue[0][0] = {1, 0, {0, 1, 3, 2}};
    aglue[1][0] = {0, 0, {0, 1, 3, 2}};

    detail::RelocMap reloc;
    const std::array<int, 3> np_of{1, 2, 3};  // W index -> slot in NP
    const std::array<int, 3> nq_of{1, 3, 2};  // W index -> slot in NQ
    for (int i = 0; i < 3; ++i) {
        // Tetrahedron i carries W_i at U and W_(i+1) at V; its faces
        // opposite Q and P relocate onto NP and NQ, both landing on the
        // face opposite the missing W_(i+2).
        Gluing rp;
        rp.tet = 0;
        rp.face = np_of[(i + 2) % 3];
        rp.cmap[wP[i]] = 0;
        rp.cmap[wU[i]] = np_of[i];
        rp.cmap[wV[i]] = np_of[(i + 1) % 3];
        rp.cmap[wQ[i]] = rp.face;
        reloc[{wt[i], wQ[i]}] = rp;
        Gluing rq;
        rq.tet = 1;
        rq.face = nq_of[(i + 2) % 3];
        rq.cmap[wQ[i]] = 0;
        rq.cmap[wU[i]] = nq_of[i];
        rq.cmap[wV[i]] = nq_of[(i + 1) % 3];
        rq.cmap[wP[i]] = rq.face;
        reloc[{wt[i], wP[i]}] = rq;
    }

    const std::vector<int> removed{wt[0], wt[1], wt[2]};
    const auto anchors = detail::anchor_knot_edges(pt, km, removed, reloc);
    auto [npt, newid] = detail::rebuild(pt, removed, {NP, NQ},
                                        std::move(aglue), reloc);
    const int base = npt.num_tets() - 2;
    MoveResult out{std::move(npt), {}, real};
    out.km = detail::remark_knot(out.pt, newid, base, anchors);
    return out;
}

// 1->4: cones tetrahedron `tet` to an interior point with barycentric
// coordinates `bary` (positive, summing to one).  The new vertex is
// off-knot and gets the highest id.
inline MoveResult apply_1_4(const Pseudotriangulation& pt,
                            const KnotMarking& km,
                            const RepresentationSpec& rep,
                            const Realization& real, int tet,
                            const std::array<double, 4>& bary) {
    const Tetrahedron& T = pt.tets[tet];
    Vec3 p = Vec3::Zero();
    for (int c = 0; c < 4; ++c)
        p += bary[c] * corner_position(pt, rep, real, tet, c);
    const int nv = pt.num_vertices();

    std::vector<Tetrahedron> added(4);
    std::vector<std::array<Gluing, 4>> aglue(4);
    detail::RelocMap reloc;
    for (int i = 0; i < 4; ++i) {
        added[i] = T;
        added[i].vertex[i] = nv;
        added[i].deck[i] = {};
        for (int j = 0; j < 4; ++j) {
            if (j == i) continue;
            std::array<int, 4> cm{0, 1, 2, 3};
            std::swap(cm[i], cm[j]);
            aglue[i][j] = {j, i, cm};
        }
        reloc[{tet, i}] = {i, i, {0, 1, 2, 3}};
    }
    const auto anchors = detail::anchor_knot_edges(pt, km, {tet}, reloc);
    auto [npt, newid] =
        detail::rebuild(pt, {tet}, std::move(added), std::move(aglue), reloc);
    const int base = npt.num_tets() - 4;
    MoveResult out{std::move(npt), {}, real};
    out.real.pos.push_back(p);
    out.real.zcoord.push_back(0.0);
    out.real.axis.push_back(Vec3::UnitZ());
    out.km = detail::remark_knot(out.pt, newid, base, anchors);
    return out;
}

// 4->1: removes an off-knot vertex whose star is the cone over the
// boundary of a tetrahedron, merging the four incident tetrahedra.
inline MoveResult apply_4_1(const Pseudotriangulation& pt,
                            const KnotMarking& km,
                            const RepresentationSpec& rep,
                            const Realization& real, int vertex) {
    (void)rep;
    if (km.on_knot_vertex(vertex))
        throw WouldTouchKnot("4->1 cannot remove a knot vertex");
    std::vector<std::pair<int, int>> occ;
    for (int t = 0; t < pt.num_tets(); ++t)
        for (int c = 0; c < 4; ++c)
            if (pt.tets[t].vertex[c] == vertex) occ.push_back({t, c});
    if (occ.size() != 4)
        throw MoveNotApplicable(
            "4->1 needs a vertex with exactly four incident corners");
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (occ[i].first == occ[j].first)
                throw MoveNotApplicable(
                    "4->1: the star tetrahedra are not distinct");
    auto star_slot = [&](int t) -> int {
        for (auto [tt, cc] : occ)
            if (tt == t) return cc;
        return -1;
    };
    // Every face containing the vertex must glue within the star, vertex
    // slot to vertex slot.
    for (auto [t, c] : occ)
        for (int f = 0; f < 4; ++f) {
            if (f == c) continue;
            const Gluing& gg = pt.glue[t][f];
            const int cs = star_slot(gg.tet);
            if (cs < 0 || gg.cmap[c] != cs)
                throw MoveNotApplicable("4->1: the star is not a cone");
        }

    const auto [t0, c0] = occ[0];
    const int d0 = c0 == 0 ? 1 : 0;
    const Gluing& gd = pt.glue[t0][d0];
    const Word h = detail::transport_word(pt, km, t0, d0);
    Tetrahedron NT = pt.tets[t0];
    NT.vertex[c0] = pt.tets[gd.tet].vertex[gd.face];
    NT.deck[c0] = reduced(concat(h, pt.tets[gd.tet].deck[gd.face]));
    if (detail::count_knot_corners(NT, km) > 2)
        throw WouldTouchKnot(
            "4->1 would give a tetrahedron three knot corners");

    detail::RelocMap reloc;
    std::vector<int> removed;
    for (auto [t, c] : occ) removed.push_back(t);
    reloc[{t0, c0}] = {0, c0, {0, 1, 2, 3}};
    for (int dd = 0; dd < 4; ++dd) {
        if (dd == c0) continue;
        const Gluing& g = pt.glue[t0][dd];
        const int cs = star_slot(g.tet);
        Gluing r;
        r.tet = 0;
        r.face = dd;
        for (int x = 0; x < 4; ++x) r.cmap[g.cmap[x]] = x;
        r.cmap[g.face] = c0;  // the far apex sits where the vertex was
        r.cmap[cs] = dd;
        reloc[{g.tet, cs}] = r;
    }

    const auto anchors = detail::anchor_knot_edges(pt, km, removed, reloc);
    auto [npt, newid] =
        detail::rebuild(pt, removed, {NT}, {std::array<Gluing, 4>{}}, reloc,
                        vertex);
    const int base = npt.num_tets() - 1;
    MoveResult out{std::move(npt), {}, real};
    out.real.pos.erase(out.real.pos.begin() + vertex);
    out.real.zcoord.erase(out.real.zcoord.begin() + vertex);
    out.real.axis.erase(out.real.axis.begin() + vertex);
    out.km = detail::remark_knot(out.pt, newid, base, anchors);
    return out;
}

namespace detail {

// The local pattern of the knot moves: one knot edge BD on a single
// tetrahedron BDAA whose A-opposite faces are glued to each other and
// whose AA edge winds once around the knot.
struct KnotEdgePattern {
    int tet, sB, sD, sA1, sA2;
};

inline KnotEdgePattern knot_edge_pattern(const Pseudotriangulation& pt,
                                         const KnotMarking& km, int edge) {
    if (!km.on_knot_edge(edge))
        throw MoveNotApplicable("the edge is not a knot edge");
    const EdgeClass& ec = pt.edge_class(edge);
    if (ec.members.size() != 1)
        throw MoveNotApplicable(
            "the knot move needs the knot edge on a single tetrahedron");
    const auto [t, slot] = ec.members.front();
    KnotEdgePattern p;
    p.tet = t;
    p.sB = kEdgeCorners[slot][0];
    p.sD = kEdgeCorners[slot][1];
    p.sA1 = p.sA2 = -1;
    for (int c = 0; c < 4; ++c)
        if (c != p.sB && c != p.sD) (p.sA1 < 0 ? p.sA1 : p.sA2) = c;
    const Tetrahedron& T = pt.tets[t];
    if (T.vertex[p.sA1] != T.vertex[p.sA2])
        throw MoveNotApplicable("the knot move needs a BDAA tetrahedron");
    const Gluing& ga = pt.glue[t][p.sA1];
    if (ga.tet != t || ga.face != p.sA2)
        throw MoveNotApplicable(
            "the knot move needs the A-opposite faces glued to each other");
    const int w = meridian_winding(pt, pt.edge_class_of(t, p.sA1, p.sA2));
    if (w != 1 && w != -1)
        throw MoveNotApplicable("the AA edge must wind once around the knot");
    return p;
}

}  // namespace detail

// Knot 1->2: splits the knot edge `edge` (the BD edge of a BDAA
// tetrahedron with self-glued A-opposite faces) by a new knot vertex C at
// fraction `s` of the axis segment from B to D.
inline MoveResult apply_knot_1_2(const Pseudotriangulation& pt,
                                 const KnotMarking& km,
                                 const RepresentationSpec& rep,
                                 const Realization& real, int edge,
                                 double s = 0.5) {
    (void)rep;
    const auto p = detail::knot_edge_pattern(pt, km, edge);
    const Tetrahedron& T = pt.tets[p.tet];
    const Gluing ga = pt.glue[p.tet][p.sA1];
    const int vB = T.vertex[p.sB], vD = T.vertex[p.sD];
    const int nv = pt.num_vertices();

    Tetrahedron T1 = T, T2 = T;  // BCAA and CDAA
    T1.vertex[p.sD] = nv;
    T2.vertex[p.sB] = nv;
    std::vector<std::array<Gluing, 4>> aglue(2);
    aglue[0][p.sA1] = {0, p.sA2, ga.cmap};
    aglue[0][p.sA2] = {0, p.sA1, detail::invert_cmap(ga.cmap)};
    aglue[1][p.sA1] = {1, p.sA2, ga.cmap};
    aglue[1][p.sA2] = {1, p.sA1, detail::invert_cmap(ga.cmap)};
    // New internal face CAA: T1 opposite B meets T2 opposite D.
    {
        std::array<int, 4> cm{};
        cm[p.sB] = p.sD;
        cm[p.sD] = p.sB;
        cm[p.sA1] = p.sA1;
        cm[p.sA2] = p.sA2;
        aglue[0][p.sB] = {1, p.sD, cm};
        aglue[1][p.sD] = {0, p.sB, cm};
    }
    detail::RelocMap reloc;
    reloc[{p.tet, p.sD}] = {0, p.sD, {0, 1, 2, 3}};  // BAA stays with T1
    reloc[{p.tet, p.sB}] = {1, p.sB, {0, 1, 2, 3}};  // DAA goes to T2

    const auto anchors =
        detail::anchor_knot_edges(pt, km, {p.tet}, reloc, {edge});
    auto [npt, newid] =
        detail::rebuild(pt, {p.tet}, {T1, T2}, std::move(aglue), reloc);
    const int base = npt.num_tets() - 2;
    MoveResult out{std::move(npt), {}, real};
    out.real.pos.push_back(Vec3::Zero());
    out.real.zcoord.push_back(0.0);
    out.real.axis.push_back(real.axis[vB]);
    out.real.set_knot_coordinate(
        nv, (1.0 - s) * real.zcoord[vB] + s * real.zcoord[vD]);

    // The split edge anchors onto both halves; the order follows the
    // knot orientation through B.
    std::vector<int> edges;
    const int eBC = out.pt.edge_class_of(base + 0, p.sB, p.sD);
    const int eCD = out.pt.edge_class_of(base + 1, p.sB, p.sD);
    for (size_t i = 0; i < km.knot_edges.size(); ++i) {
        if (km.knot_edges[i] != edge) {
            const auto& a = anchors[i];
            edges.push_back(out.pt.edge_class_of(
                a.added ? base + a.tet : newid[a.tet], a.ci, a.cj));
        } else if (km.knot_vertices[i] == vB) {
            edges.push_back(eBC);
            edges.push_back(eCD);
        } else {
            edges.push_back(eCD);
            edges.push_back(eBC);
        }
    }
    out.km = make_knot_marking(out.pt, edges);
    return out;
}

// Knot 2->1: merges the two knot edges at knot vertex `vertex`, which
// must occur in exactly two tetrahedra forming the split pattern above.
inline MoveResult apply_knot_2_1(const Pseudotriangulation& pt,
                                 const KnotMarking& km,
                                 const RepresentationSpec& rep,
                                 const Realization& real, int vertex) {
    (void)rep;
    if (!km.on_knot_vertex(vertex))
        throw MoveNotApplicable("knot 2->1 needs a knot vertex");
    if (km.knot_edges.size() <= 2)
        throw MoveNotApplicable("knot 2->1 would leave fewer than two edges");
    std::vector<std::pair<int, int>> occ;
    for (int t = 0; t < pt.num_tets(); ++t)
        for (int c = 0; c < 4; ++c)
            if (pt.tets[t].vertex[c] == vertex) occ.push_back({t, c});
    if (occ.size() != 2 || occ[0].first == occ[1].first)
        throw MoveNotApplicable(
            "knot 2->1 needs the vertex in exactly two tetrahedra");

    // The incoming and outgoing knot edges must each match the split
    // pattern on its own tetrahedron.
    const int iv = static_cast<int>(
        std::find(km.knot_vertices.begin(), km.knot_vertices.end(), vertex) -
        km.knot_vertices.begin());
    const int K = km.num_knot_vertices();
    const int eIn = km.knot_edges[(iv + K - 1) % K];  // ends at the vertex
    const int eOut = km.knot_edges[iv];               // starts at the vertex
    const auto pIn = detail::knot_edge_pattern(pt, km, eIn);
    const auto pOut = detail::knot_edge_pattern(pt, km, eOut);
    const int t1 = pIn.tet, t2 = pOut.tet;
    if (t1 == t2)
        throw MoveNotApplicable("knot 2->1: edges share one tetrahedron");
    // In t1 the vertex plays one end of its pattern edge, in t2 the other.
    int c1 = pIn.sD, b1 = pIn.sB;
    if (pt.tets[t1].vertex[c1] != vertex) std::swap(c1, b1);
    int c2 = pOut.sB, d2 = pOut.sD;
    if (pt.tets[t2].vertex[c2] != vertex) std::swap(c2, d2);
    const Gluing gi = pt.glue[t1][b1];
    if (gi.tet != t2 || gi.face != d2 || gi.cmap[c1] != c2)
        throw MoveNotApplicable(
            "knot 2->1: the two tetrahedra do not share the middle face");

    const Word h = detail::transport_word(pt, km, t1, b1);
    Tetrahedron NT = pt.tets[t1];
    NT.vertex[c1] = pt.tets[t2].vertex[d2];
    NT.deck[c1] = reduced(concat(h, pt.tets[t2].deck[d2]));

    // The A-opposite self-gluing of the first tetrahedron persists.
    std::array<Gluing, 4> nglue{};
    const Gluing gaA = pt.glue[t1][pIn.sA1];
    nglue[pIn.sA1] = {0, pIn.sA2, gaA.cmap};
    nglue[pIn.sA2] = {0, pIn.sA1, detail::invert_cmap(gaA.cmap)};

    detail::RelocMap reloc;
    reloc[{t1, c1}] = {0, c1, {0, 1, 2, 3}};
    {
        Gluing r;
        r.tet = 0;
        r.face = b1;
        for (int x = 0; x < 4; ++x) r.cmap[gi.cmap[x]] = x;
        r.cmap[d2] = c1;
        r.cmap[c2] = b1;
        reloc[{t2, c2}] = r;
    }

    const std::vector<int> removed{t1, t2};
    const auto anchors =
        detail::anchor_knot_edges(pt, km, removed, reloc, {eIn, eOut});
    auto [npt, newid] =
        detail::rebuild(pt, removed, {NT}, {nglue}, reloc, vertex);
    const int base = npt.num_tets() - 1;
    MoveResult out{std::move(npt), {}, real};
    out.real.pos.erase(out.real.pos.begin() + vertex);
    out.real.zcoord.erase(out.real.zcoord.begin() + vertex);
    out.real.axis.erase(out.real.axis.begin() + vertex);

    const int eBD =
        out.pt.edge_class_of(base, std::min(b1, c1), std::max(b1, c1));
    std::vector<int> edges;
    for (size_t i = 0; i < km.knot_edges.size(); ++i) {
        if (km.knot_edges[i] == eIn)
            edges.push_back(eBD);
        else if (km.knot_edges[i] == eOut)
            continue;
        else {
            const auto& a = anchors[i];
            edges.push_back(out.pt.edge_class_of(
                a.added ? base + a.tet : newid[a.tet], a.ci, a.cj));
        }
    }
    out.km = make_knot_marking(out.pt, edges);
    return out;
}

// Local torsion ratio of the knot edge split.  tau1 is the torsion of the
// one-term complex of the split tetrahedron (the omega/l derivative of
// its own edge); tau2 the torsion of the three-edge complex of the two
// replacement tetrahedra, with the new vertex coordinate at both ends.
// Their ratio matches the factor the global torsion picks up, which in
// turn is fixed by invariance of I: the volume factors of the changed
// tetrahedra over the squared length of the new off-knot edge and one
// knot-vertex power of 2(1-cos phi).
struct KnotMoveFactorCheck {
    double tau_before = 0.0;
    double tau_after = 0.0;
    double tau1 = 0.0;
    double tau2 = 0.0;
    double local_ratio = 0.0;      // tau2 / tau1
    double global_ratio = 0.0;     // tau_after / tau_before, same geometry
    double predicted_ratio = 0.0;  // 6V' 6V'' / (6V l_CA^2 2(1-cos phi))
    MoveResult after;
};

inline KnotMoveFactorCheck check_knot_move_factor(
    const Pseudotriangulation& pt, const KnotMarking& km,
    const RepresentationSpec& rep, const Realization& real, int edge,
    double s = 0.5, std::uint64_t chain_seed = 0) {
    const auto p = detail::knot_edge_pattern(pt, km, edge);
    std::mt19937_64 rng(chain_seed);

    KnotMoveFactorCheck out;
    {
        const ComplexMatrices m = assemble(pt, km, rep, real);
        out.tau_before =
            torsion_of_acyclic_complex({m.a3, m.a2, m.a1,
                                        MatX(m.a2.transpose()),
                                        MatX(m.a3.transpose())},
                                       0, &rng);
        // One-term complex of the split tetrahedron alone.
        const TetGeometry g = tet_geometry(pt, rep, real, p.tet);
        const double sign = g.volume() > 0 ? 1.0 : -1.0;
        const int slot = edge_slot(p.sB, p.sD);
        MatX m5(1, 1);
        m5(0, 0) = -sign * dtheta_dlength(g.edge_lengths())(slot, slot);
        out.tau1 = torsion_of_acyclic_complex({m5}, 2, &rng);
    }

    out.after = apply_knot_1_2(pt, km, rep, real, edge, s);
    const Pseudotriangulation& npt = out.after.pt;
    const int base = npt.num_tets() - 2;
    const int nv = npt.num_vertices() - 1;
    {
        const ComplexMatrices m = assemble(npt, out.after.km, rep,
                                           out.after.real);
        out.tau_after =
            torsion_of_acyclic_complex({m.a3, m.a2, m.a1,
                                        MatX(m.a2.transpose()),
                                        MatX(m.a3.transpose())},
                                       0, &rng);
        // Three-edge complex of the replacement pair: the edges at the
        // new vertex (two knot halves and the new off-knot edge), whose
        // angle sums come only from the two new tetrahedra.
        const std::array<int, 3> rows{
            npt.edge_class_of(base + 0, p.sB, p.sD),
            npt.edge_class_of(base + 1, p.sB, p.sD),
            npt.edge_class_of(base + 0, std::min(p.sD, p.sA1),
                              std::max(p.sD, p.sA1))};
        const int zc = m.coords.offset[nv];
        MatX m1(3, 1), m2(3, 3);
        for (int i = 0; i < 3; ++i) {
            m1(i, 0) = m.a2(rows[i], zc);
            for (int j = 0; j < 3; ++j) m2(i, j) = m.a1(rows[i], rows[j]);
        }
        out.tau2 = torsion_of_acyclic_complex(
            {m1, m2, MatX(m1.transpose())}, 1, &rng);

        const double v0 =
            6.0 * tet_geometry(pt, rep, real, p.tet).volume();
        const double v1 =
            6.0 * tet_geometry(npt, rep, out.after.real, base + 0).volume();
        const double v2 =
            6.0 * tet_geometry(npt, rep, out.after.real, base + 1).volume();
        const double lca = m.edge_length[rows[2]];
        out.predicted_ratio =
            v1 * v2 /
            (v0 * lca * lca * 2.0 * (1.0 - std::cos(rep.phi)));
    }
    out.local_ratio = out.tau2 / out.tau1;
    out.global_ratio = out.tau_after / out.tau_before;
    return out;
}

// One entry of a replayable move log.
struct MoveLogEntry {
    MoveKind kind{};
    int target = 0;  // tet (2-3, 1-4), edge class (3-2, knot 1-2),
                     // vertex (4-1, knot 2-1)
    int face = 0;    // 2-3 only
    std::array<double, 4> bary{};  // 1-4 only
    double split = 0.5;            // knot 1-2 only
};

inline MoveResult apply_move(const Pseudotriangulation& pt,
                             const KnotMarking& km,
                             const RepresentationSpec& rep,
                             const Realization& real,
                             const MoveLogEntry& e) {
    switch (e.kind) {
        case MoveKind::bulk_2_3:
            return apply_2_3(pt, km, rep, real, e.target, e.face);
        case MoveKind::bulk_3_2:
            return apply_3_2(pt, km, rep, real, e.target);
        case MoveKind::bulk_1_4:
            return apply_1_4(pt, km, rep, real, e.target, e.bary);
        case MoveKind::bulk_4_1:
            return apply_4_1(pt, km, rep, real, e.target);
        case MoveKind::knot_1_2:
            return apply_knot_1_2(pt, km, rep, real, e.target, e.split);
        case MoveKind::knot_2_1:
            return apply_knot_2_1(pt, km, rep, real, e.target);
    }
    throw Error("unknown move kind");
}

struct MoveSequenceResult {
    Pseudotriangulation pt;
    KnotMarking km;
    Realization real;
    std::vector<MoveLogEntry> log;       // applied moves, replayable
    std::vector<std::string> rejected;   // attempts that did not apply
};

// Applies `count` random moves drawn from `kinds`, skipping and logging
// inapplicable attempts.  Deterministic in `seed`.
inline MoveSequenceResult random_move_sequence(
    const Pseudotriangulation& pt0, const KnotMarking& km0,
    const RepresentationSpec& rep, const Realization& real0, int count,
    std::uint64_t seed,
    std::vector<MoveKind> kinds = {MoveKind::bulk_2_3, MoveKind::bulk_3_2,
                                   MoveKind::bulk_1_4, MoveKind::bulk_4_1,
                                   MoveKind::knot_1_2,
                                   MoveKind::knot_2_1}) {
    std::mt19937_64 rng(seed);
    MoveSequenceResult r{pt0, km0, real0, {}, {}};
    std::uniform_real_distribution<double> u01(0.15, 0.85);
    int guard = 0;
    while (static_cast<int>(r.log.size()) < count) {
        if (++guard > 200 * count)
            throw MoveNotApplicable(
                "random_move_sequence: no applicable move found");
        MoveLogEntry e;
        e.kind = kinds[rng() % kinds.size()];
        switch (e.kind) {
            case MoveKind::bulk_2_3:
                e.target = static_cast<int>(rng() % r.pt.num_tets());
                e.face = static_cast<int>(rng() % 4);
                break;
            case MoveKind::bulk_3_2:
            case MoveKind::knot_1_2:
                e.target = static_cast<int>(rng() % r.pt.num_edges());
                e.split = u01(rng);
                break;
            case MoveKind::bulk_1_4: {
                e.target = static_cast<int>(rng() % r.pt.num_tets());
                double sum = 0.0;
                for (auto& b : e.bary) sum += (b = u01(rng));
                for (auto& b : e.bary) b /= sum;
                break;
            }
            case MoveKind::bulk_4_1:
            case MoveKind::knot_2_1:
                e.target = static_cast<int>(rng() % r.pt.num_vertices());
                break;
        }
        try {
            MoveResult mr = apply_move(r.pt, r.km, rep, r.real, e);
            validate_lift(mr.pt, rep, mr.real);
            // A combinatorially legal move can still produce a flat or
            // collapsed tetrahedron (e.g. a 2-3 whose two apexes lift to
            // the same point); reject those outright, with some margin so
            // the torsion stays well conditioned.
            GeometryTolerances quality;
            quality.eps_vol_rel = 1e-6;
            for (int t = 0; t < mr.pt.num_tets(); ++t)
                require_nondegenerate(tet_geometry(mr.pt, rep, mr.real, t),
                                      quality);
            r.pt = std::move(mr.pt);
            r.km = std::move(mr.km);
            r.real = std::move(mr.real);
            r.log.push_back(e);
        } catch (const Error& ex) {
            r.rejected.push_back(std::string(to_string(e.kind)) + " at " +
                                 std::to_string(e.target) + ": " + ex.what());
        }
    }
    return r;
}

}  // namespace tkf
