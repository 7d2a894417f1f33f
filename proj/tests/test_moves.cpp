#include <catch2/catch_amalgamated.hpp>

#include "tkf/builders.hpp"
#include "tkf/invariant.hpp"
#include "tkf/moves.hpp"

using namespace tkf;

namespace {

double invariant_of(const Pseudotriangulation& pt, const KnotMarking& km,
                    const RepresentationSpec& rep, std::uint64_t seed) {
    const InvariantResult r = invariant_multi_sample(pt, km, rep, 3, seed);
    return r.mean;
}

}  // namespace

TEST_CASE("2-3 adds one tetrahedron and one edge, 3-2 undoes it") {
    const Fixture fx = build_unknot_join(3, 3, 1.1);
    const Realization real = sample_general_position(fx.pt, fx.km, fx.rep, 5);
    const MoveResult m = apply_2_3(fx.pt, fx.km, fx.rep, real, 1, 2);
    CHECK(m.pt.num_tets() == fx.pt.num_tets() + 1);
    CHECK(m.pt.num_edges() == fx.pt.num_edges() + 1);
    CHECK(m.pt.num_vertices() == fx.pt.num_vertices());
    CHECK(m.km.num_knot_vertices() == fx.km.num_knot_vertices());
    validate_lift(m.pt, fx.rep, m.real);
    CHECK(validate_knot_conditions(m.pt, m.km).ok());

    // The new edge joins the two apexes and has exactly three incidences.
    bool undone = false;
    for (int e = 0; e < m.pt.num_edges() && !undone; ++e) {
        try {
            const MoveResult back = apply_3_2(m.pt, m.km, fx.rep, m.real, e);
            CHECK(back.pt.num_tets() == fx.pt.num_tets());
            CHECK(back.pt.num_edges() == fx.pt.num_edges());
            validate_lift(back.pt, fx.rep, back.real);
            undone = true;
        } catch (const Error&) {
        }
    }
    CHECK(undone);
}

TEST_CASE("1-4 cones a tetrahedron, 4-1 removes the new vertex") {
    const Fixture fx = build_unknot_join(3, 3, 1.1);
    const Realization real = sample_general_position(fx.pt, fx.km, fx.rep, 5);
    const MoveResult m =
        apply_1_4(fx.pt, fx.km, fx.rep, real, 2, {0.3, 0.3, 0.2, 0.2});
    CHECK(m.pt.num_tets() == fx.pt.num_tets() + 3);
    CHECK(m.pt.num_edges() == fx.pt.num_edges() + 4);
    CHECK(m.pt.num_vertices() == fx.pt.num_vertices() + 1);
    CHECK(m.real.pos.size() == real.pos.size() + 1);
    validate_lift(m.pt, fx.rep, m.real);
    CHECK(validate_knot_conditions(m.pt, m.km).ok());

    const MoveResult back =
        apply_4_1(m.pt, m.km, fx.rep, m.real, m.pt.num_vertices() - 1);
    CHECK(back.pt.num_tets() == fx.pt.num_tets());
    CHECK(back.pt.num_edges() == fx.pt.num_edges());
    CHECK(back.pt.num_vertices() == fx.pt.num_vertices());
    validate_lift(back.pt, fx.rep, back.real);
}

TEST_CASE("knot 1-2 splits an edge, knot 2-1 merges it back") {
    const Fixture fx = build_bdaa_fixture(3, 1.1);
    const Realization real = sample_general_position(fx.pt, fx.km, fx.rep, 5);
    const MoveResult m =
        apply_knot_1_2(fx.pt, fx.km, fx.rep, real, fx.km.knot_edges[1], 0.4);
    CHECK(m.pt.num_tets() == fx.pt.num_tets() + 1);
    CHECK(m.pt.num_edges() == fx.pt.num_edges() + 2);
    CHECK(m.km.num_knot_vertices() == fx.km.num_knot_vertices() + 1);
    validate_lift(m.pt, fx.rep, m.real);
    CHECK(validate_knot_conditions(m.pt, m.km).ok());
    // The new vertex lies on its axis between the old endpoints.
    const int nv = m.pt.num_vertices() - 1;
    CHECK(m.km.on_knot_vertex(nv));

    const MoveResult back = apply_knot_2_1(m.pt, m.km, fx.rep, m.real, nv);
    CHECK(back.pt.num_tets() == fx.pt.num_tets());
    CHECK(back.pt.num_edges() == fx.pt.num_edges());
    CHECK(back.km.num_knot_vertices() == fx.km.num_knot_vertices());
    validate_lift(back.pt, fx.rep, back.real);
}

TEST_CASE("guards reject moves that would break the marked knot") {
    const Fixture fx = build_unknot_join(3, 3, 1.1);
    const Realization real = sample_general_position(fx.pt, fx.km, fx.rep, 5);
    // Faces 0 and 1 of the join tetrahedra are opposite knot vertices, so
    // the flip would give a tetrahedron with three knot corners.
    CHECK_THROWS_AS(apply_2_3(fx.pt, fx.km, fx.rep, real, 0, 0),
                    WouldTouchKnot);
    CHECK_THROWS_AS(apply_3_2(fx.pt, fx.km, fx.rep, real, fx.km.knot_edges[0]),
                    WouldTouchKnot);
    CHECK_THROWS_AS(
        apply_4_1(fx.pt, fx.km, fx.rep, real, fx.km.knot_vertices[0]),
        WouldTouchKnot);
    // The last vertex of the join fixture is off the knot.
    CHECK_THROWS_AS(apply_knot_2_1(fx.pt, fx.km, fx.rep, real,
                                   fx.pt.num_vertices() - 1),
                    MoveNotApplicable);
}

TEST_CASE("the invariant is stable under single bulk moves") {
    const Fixture fx = build_unknot_join(3, 3, 1.3);
    const Realization real = sample_general_position(fx.pt, fx.km, fx.rep, 5);
    const double before = invariant_of(fx.pt, fx.km, fx.rep, 300);

    SECTION("2-3") {
        const MoveResult m = apply_2_3(fx.pt, fx.km, fx.rep, real, 4, 3);
        CHECK(invariant_of(m.pt, m.km, fx.rep, 301) ==
              Catch::Approx(before).epsilon(1e-9));
    }
    SECTION("1-4") {
        const MoveResult m =
            apply_1_4(fx.pt, fx.km, fx.rep, real, 7, {0.4, 0.2, 0.2, 0.2});
        CHECK(invariant_of(m.pt, m.km, fx.rep, 302) ==
              Catch::Approx(before).epsilon(1e-9));
    }
}

TEST_CASE("the invariant is stable under knot moves") {
    const Fixture fx = build_bdaa_fixture(4, 0.9);
    const Realization real = sample_general_position(fx.pt, fx.km, fx.rep, 5);
    const double before = invariant_of(fx.pt, fx.km, fx.rep, 300);
    MoveResult m =
        apply_knot_1_2(fx.pt, fx.km, fx.rep, real, fx.km.knot_edges[0], 0.5);
    CHECK(invariant_of(m.pt, m.km, fx.rep, 301) ==
          Catch::Approx(before).epsilon(1e-9));
    const MoveResult back =
        apply_knot_2_1(m.pt, m.km, fx.rep, m.real, m.pt.num_vertices() - 1);
    CHECK(invariant_of(back.pt, back.km, fx.rep, 302) ==
          Catch::Approx(before).epsilon(1e-9));
}

TEST_CASE("the invariant survives a long random move sequence") {
    const Fixture fx = build_unknot_join(3, 3, 1.3);
    const Realization real = sample_general_position(fx.pt, fx.km, fx.rep, 5);
    const double before = invariant_of(fx.pt, fx.km, fx.rep, 300);
    const MoveSequenceResult seq =
        random_move_sequence(fx.pt, fx.km, fx.rep, real, 20, 424242);
    CHECK(seq.log.size() == 20);
    CHECK(validate_knot_conditions(seq.pt, seq.km).ok());
    CHECK(invariant_of(seq.pt, seq.km, fx.rep, 301) ==
          Catch::Approx(before).epsilon(1e-9));

    // Replaying the log gives the same complex.
    Pseudotriangulation pt = fx.pt;
    KnotMarking km = fx.km;
    Realization r = real;
    for (const MoveLogEntry& e : seq.log) {
        MoveResult mr = apply_move(pt, km, fx.rep, r, e);
        pt = std::move(mr.pt);
        km = std::move(mr.km);
        r = std::move(mr.real);
    }
    CHECK(pt.num_tets() == seq.pt.num_tets());
    CHECK(pt.num_edges() == seq.pt.num_edges());
    CHECK(km.knot_edges == seq.km.knot_edges);
}

TEST_CASE("random sequences with knot moves keep the value") {
    const Fixture fx = build_bdaa_fixture(3, 1.3);
    const Realization real = sample_general_position(fx.pt, fx.km, fx.rep, 5);
    const double before = invariant_of(fx.pt, fx.km, fx.rep, 300);
    const MoveSequenceResult seq =
        random_move_sequence(fx.pt, fx.km, fx.rep, real, 12, 7);
    int knot_moves = 0;
    for (const MoveLogEntry& e : seq.log)
        knot_moves += (e.kind == MoveKind::knot_1_2 ||
                       e.kind == MoveKind::knot_2_1)
                          ? 1
                          : 0;
    INFO("knot moves applied: " << knot_moves);
    CHECK(knot_moves >= 1);
    CHECK(invariant_of(seq.pt, seq.km, fx.rep, 301) ==
          Catch::Approx(before).epsilon(1e-9));
}

TEST_CASE("the knot move factorizes through the local complexes") {
    const Fixture fx = build_bdaa_fixture(3, 1.3);
    const Realization real =
        sample_general_position(fx.pt, fx.km, fx.rep, 11);
    for (std::uint64_t chain : {0ull, 5ull, 9ull}) {
        const KnotMoveFactorCheck c = check_knot_move_factor(
            fx.pt, fx.km, fx.rep, real, fx.km.knot_edges[1], 0.35, chain);
        CHECK(c.local_ratio ==
              Catch::Approx(c.global_ratio).epsilon(1e-8));
        CHECK(c.global_ratio ==
              Catch::Approx(c.predicted_ratio).epsilon(1e-8));
    }
    // The same identity on a bigger complex and a different edge.
    const Fixture fy = build_bdaa_fixture(5, 0.8);
    const Realization ry = sample_general_position(fy.pt, fy.km, fy.rep, 3);
    const KnotMoveFactorCheck c = check_knot_move_factor(
        fy.pt, fy.km, fy.rep, ry, fy.km.knot_edges[3], 0.6, 1);
    CHECK(c.local_ratio == Catch::Approx(c.global_ratio).epsilon(1e-8));
    CHECK(c.global_ratio == Catch::Approx(c.predicted_ratio).epsilon(1e-8));
}
