#include <catch2/catch_amalgamated.hpp>

#include "tkf/builders.hpp"
#include "tkf/complex.hpp"

using namespace tkf;

namespace {

struct Assembled {
    Fixture fx;
    Realization real;
    ComplexMatrices m;
};

Assembled assembled_join(int n, int m, double phi, std::uint64_t seed) {
    Assembled out{build_unknot_join(n, m, phi), {}, {}};
    out.real = sample_general_position(out.fx.pt, out.fx.km, out.fx.rep, seed);
    out.m = assemble(out.fx.pt, out.fx.km, out.fx.rep, out.real);
    return out;
}

// Lengths of all edge classes as a plain function of the coordinate vector,
// for differencing against the assembled d(l)/d(x).
std::vector<double> lengths_at(const Fixture& fx, const Realization& base,
                               const CoordIndex& ci,
                               const Eigen::VectorXd& x) {
    Realization r = base;
    for (int v = 0; v < fx.pt.num_vertices(); ++v) {
        if (fx.km.on_knot_vertex(v))
            r.set_knot_coordinate(v, x[ci.offset[v]]);
        else
            r.pos[v] = Vec3(x[ci.offset[v]], x[ci.offset[v] + 1],
                            x[ci.offset[v] + 2]);
    }
    std::vector<double> out(fx.pt.num_edges());
    for (int e = 0; e < fx.pt.num_edges(); ++e) {
        const auto [t, s] = fx.pt.edge_class(e).members.front();
        const Vec3 p =
            corner_position(fx.pt, fx.rep, r, t, kEdgeCorners[s][0]);
        const Vec3 q =
            corner_position(fx.pt, fx.rep, r, t, kEdgeCorners[s][1]);
        out[e] = (q - p).norm();
    }
    return out;
}

Eigen::VectorXd coords_of(const Fixture& fx, const Realization& real,
                          const CoordIndex& ci) {
    Eigen::VectorXd x(ci.n_x);
    for (int v = 0; v < fx.pt.num_vertices(); ++v) {
        if (fx.km.on_knot_vertex(v)) {
            x[ci.offset[v]] = real.zcoord[v];
        } else {
            for (int k = 0; k < 3; ++k)
                x[ci.offset[v] + k] = real.pos[v][k];
        }
    }
    return x;
}

// Deficit angles as a plain function of the vector of edge-class lengths,
// with the tetrahedron orientation signs frozen at the base configuration.
std::vector<double> deficits_from_lengths(const Fixture& fx,
                                          const Realization& base,
                                          const std::vector<double>& l) {
    std::vector<double> omega(fx.pt.num_edges(), 0.0);
    for (int t = 0; t < fx.pt.num_tets(); ++t) {
        const TetGeometry g = tet_geometry(fx.pt, fx.rep, base, t);
        const double sign = g.volume() > 0 ? 1.0 : -1.0;
        std::array<double, 6> tl{};
        for (int s = 0; s < 6; ++s) tl[s] = l[fx.pt.edge_class_of(t, s)];
        const auto th = angles_from_lengths(tl);
        for (int s = 0; s < 6; ++s)
            omega[fx.pt.edge_class_of(t, s)] -= sign * th[s];
    }
    return omega;
}

}  // namespace

TEST_CASE("assembled matrices have the expected shapes") {
    const Assembled a = assembled_join(3, 3, M_PI / 2, 11);
    CHECK(a.m.n_a() == 2);
    CHECK(a.m.n_x() == 12);  // 3 knot vertices + 3 free ones
    CHECK(a.m.n_edges() == 15);
    CHECK(a.m.a3.rows() == 12);
    CHECK(a.m.a2.rows() == 15);
    CHECK(a.m.a1.rows() == 15);
    CHECK(a.m.a1.cols() == 15);
}

TEST_CASE("the complex is acyclic with the expected ranks") {
    const Assembled a = assembled_join(3, 3, M_PI / 2, 11);
    const AcyclicityReport rep = check_acyclic(a.m);
    CHECK(rep.rank_a3 == 2);
    CHECK(rep.rank_a2 == 10);
    CHECK(rep.rank_a1 == 5);
    CHECK(rep.resid_a1a2 < 1e-9);
    CHECK(rep.resid_a2a3 < 1e-9);
    CHECK(rep.asymmetry < 1e-9);
}

TEST_CASE("d(l)/d(x) matches central differences of the lengths") {
    const Assembled a = assembled_join(3, 4, 1.1, 5);
    const Eigen::VectorXd x0 = coords_of(a.fx, a.real, a.m.coords);
    const double h = 1e-6;
    for (int j = 0; j < a.m.n_x(); ++j) {
        Eigen::VectorXd xp = x0, xm = x0;
        xp[j] += h;
        xm[j] -= h;
        const auto lp = lengths_at(a.fx, a.real, a.m.coords, xp);
        const auto lm = lengths_at(a.fx, a.real, a.m.coords, xm);
        for (int e = 0; e < a.m.n_edges(); ++e) {
            const double fd = (lp[e] - lm[e]) / (2 * h);
            CHECK(a.m.a2(e, j) == Catch::Approx(fd).margin(1e-6));
        }
    }
}

TEST_CASE("d(omega)/d(l) matches central differences of the deficits") {
    const Assembled a = assembled_join(3, 3, 0.9, 21);
    const double h = 1e-6;
    for (int j = 0; j < a.m.n_edges(); ++j) {
        std::vector<double> lp = a.m.edge_length, lm = a.m.edge_length;
        lp[j] += h;
        lm[j] -= h;
        const auto wp = deficits_from_lengths(a.fx, a.real, lp);
        const auto wm = deficits_from_lengths(a.fx, a.real, lm);
        for (int e = 0; e < a.m.n_edges(); ++e) {
            const double fd = (wp[e] - wm[e]) / (2 * h);
            CHECK(a.m.a1(e, j) == Catch::Approx(fd).margin(1e-5));
        }
    }
}

TEST_CASE("d(x)/d(z,phi) is the translation-rotation family") {
    const Assembled a = assembled_join(3, 3, 2.0, 3);
    const Eigen::VectorXd x0 = coords_of(a.fx, a.real, a.m.coords);
    const double h = 1e-6;
    // Column 0: shift everything by h along z.
    Realization shifted = a.real;
    for (int v = 0; v < a.fx.pt.num_vertices(); ++v) {
        if (a.fx.km.on_knot_vertex(v))
            shifted.set_knot_coordinate(v, a.real.zcoord[v] + h);
        else
            shifted.pos[v] = a.real.pos[v] + h * Vec3::UnitZ();
    }
    Eigen::VectorXd xs = coords_of(a.fx, shifted, a.m.coords);
    for (int i = 0; i < a.m.n_x(); ++i)
        CHECK(a.m.a3(i, 0) ==
              Catch::Approx((xs[i] - x0[i]) / h).margin(1e-9));
    // Column 1: rotate everything about z by h.
    Realization rot = a.real;
    const Mat3 r = axis_angle_rotation(Vec3::UnitZ(), h);
    for (int v = 0; v < a.fx.pt.num_vertices(); ++v)
        if (!a.fx.km.on_knot_vertex(v)) rot.pos[v] = r * a.real.pos[v];
    Eigen::VectorXd xr = coords_of(a.fx, rot, a.m.coords);
    for (int i = 0; i < a.m.n_x(); ++i)
        CHECK(a.m.a3(i, 1) ==
              Catch::Approx((xr[i] - x0[i]) / h).margin(1e-5));
}

TEST_CASE("torsion does not depend on the minor chain, sign included") {
    const Assembled a = assembled_join(3, 3, M_PI / 2, 17);
    const TorsionResult base = torsion_eq3(a.m);
    CHECK(std::isfinite(base.tau));
    CHECK(base.tau != 0.0);
    std::mt19937_64 rng(99);
    std::set<std::vector<int>> chains;
    for (int k = 0; k < 40; ++k) {
        const TorsionResult r = torsion_eq3(a.m, &rng);
        CHECK(r.tau == Catch::Approx(base.tau).epsilon(1e-8));
        chains.insert(r.a2_rows);
    }
    CHECK(chains.size() >= 5);  // genuinely distinct index choices
}

TEST_CASE("squared-minor torsion equals the generic chained torsion") {
    for (std::uint64_t seed : {2u, 7u, 13u}) {
        const Assembled a = assembled_join(3, 3, 1.3, seed);
        const TorsionResult r = torsion_eq3(a.m);
        const double generic = torsion_of_acyclic_complex(
            {a.m.a3, a.m.a2, a.m.a1, a.m.a2.transpose(),
             a.m.a3.transpose()},
            0);
        CHECK(generic == Catch::Approx(r.tau).epsilon(1e-8));
    }
}

TEST_CASE("generic torsion on small hand complexes") {
    SECTION("0 -> R -> R -> 0 with multiplication by 2") {
        MatX f(1, 1);
        f << 2.0;
        CHECK(torsion_of_acyclic_complex({f}) == Catch::Approx(2.0));
    }
    SECTION("0 -> R^2 -> R^2 -> 0 with diag(2,3)") {
        MatX f = MatX::Zero(2, 2);
        f(0, 0) = 2.0;
        f(1, 1) = 3.0;
        CHECK(torsion_of_acyclic_complex({f}) == Catch::Approx(6.0));
    }
    SECTION("0 -> R -> R^2 -> R -> 0") {
        // image of f is the kernel of g
        MatX f(2, 1), g(1, 2);
        f << 3.0, 0.0;
        g << 0.0, 5.0;
        // f contributes its pivot minor, g the complementary one; the
        // alternation places f in the numerator at base degree 1.
        const double tau = torsion_of_acyclic_complex({f, g});
        CHECK(tau == Catch::Approx(3.0 / 5.0));
    }
    SECTION("degree shift flips the exponents") {
        MatX f(1, 1);
        f << 2.0;
        CHECK(torsion_of_acyclic_complex({f}, 2) == Catch::Approx(0.5));
    }
    SECTION("a non-exact chain is rejected") {
        MatX f = MatX::Zero(2, 2);
        f(0, 0) = 1.0;  // rank 1, cannot be exact at the right end
        CHECK_THROWS_AS(torsion_of_acyclic_complex({f}), Error);
    }
}

TEST_CASE("empty assembly branch for nonscalar representations") {
    Fixture fx = build_unknot_join(3, 3, M_PI / 2);
    fx.rep.generators.push_back(
        {"n", Vec3::UnitX()});  // second generator off-axis
    CHECK_FALSE(fx.rep.is_scalar());
    const Realization real =
        sample_general_position(fx.pt, fx.km, fx.rep, 4);
    const ComplexMatrices m = assemble(fx.pt, fx.km, fx.rep, real);
    CHECK(m.n_a() == 0);
    CHECK(m.a3.rows() == m.n_x());
}
