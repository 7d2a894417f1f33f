#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tkf/geometry.hpp"

using namespace tkf;

namespace {

TetGeometry random_tet(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
        TetGeometry t;
        for (int c = 0; c < 4; ++c)
            t.corner[c] = Vec3(u(rng), u(rng), u(rng));
        if (std::abs(6.0 * t.volume()) > 1e-2) return t;
    }
}

TetGeometry regular_tet() {
    TetGeometry t;
    t.corner = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1),
                Vec3(-1, -1, 1)};
    return t;
}

TetGeometry unit_corner_tet() {
    TetGeometry t;
    t.corner = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    return t;
}

// Independent oracle: central finite differences of angles-from-lengths.
Mat6 dtheta_dlength_fd(const std::array<double, 6>& l, double h = 1e-6) {
    Mat6 j;
    for (int b = 0; b < 6; ++b) {
        auto lp = l, lm = l;
        lp[b] += h;
        lm[b] -= h;
        const auto tp = angles_from_lengths(lp);
        const auto tm = angles_from_lengths(lm);
        for (int a = 0; a < 6; ++a) j(a, b) = (tp[a] - tm[a]) / (2 * h);
    }
    return j;
}

}  // namespace

TEST_CASE("oriented volume") {
    const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0), d(0, 0, 1);
    CHECK(oriented_volume(a, b, c, d) == Catch::Approx(1.0 / 6.0));
    CHECK(oriented_volume(a, c, b, d) == Catch::Approx(-1.0 / 6.0));
    CHECK(oriented_volume(a, b, c, Vec3(2, 3, 0)) == Catch::Approx(0.0));
}

TEST_CASE("signed dihedral angles") {
    SECTION("regular tetrahedron: all angles arccos(1/3), signed by volume") {
        TetGeometry t = regular_tet();
        const double expect = std::acos(1.0 / 3.0);
        const double s = t.volume() > 0 ? 1.0 : -1.0;
        for (double th : signed_dihedral_angles(t))
            CHECK(th == Catch::Approx(s * expect).epsilon(1e-12));

        TetGeometry mirror = t;
        for (auto& p : mirror.corner) p.z() = -p.z();
        for (double th : signed_dihedral_angles(mirror))
            CHECK(th == Catch::Approx(-s * expect).epsilon(1e-12));
    }
    SECTION("unit corner tetrahedron: right angle along each axis edge") {
        const auto th = signed_dihedral_angles(unit_corner_tet());
        CHECK(std::abs(th[edge_slot(0, 1)]) ==
              Catch::Approx(M_PI / 2).epsilon(1e-12));
    }
    SECTION("degenerate input is rejected") {
        TetGeometry t;
        t.corner = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0),
                    Vec3(1, 1, 0)};
        CHECK_THROWS_AS(signed_dihedral_angles(t), DegenerateTetrahedron);
    }
}

TEST_CASE("rotation preserves lengths, volumes and angles") {
    std::mt19937_64 rng(7);
    const Mat3 r = axis_angle_rotation(Vec3(1, 2, 3), 0.9);
    for (int it = 0; it < 20; ++it) {
        TetGeometry t = random_tet(rng);
        TetGeometry tr;
        for (int c = 0; c < 4; ++c) tr.corner[c] = r * t.corner[c];
        CHECK(tr.volume() == Catch::Approx(t.volume()).epsilon(1e-12));
        const auto a = signed_dihedral_angles(t);
        const auto b = signed_dihedral_angles(tr);
        for (int e = 0; e < 6; ++e) {
            CHECK(tr.edge_length(e) ==
                  Catch::Approx(t.edge_length(e)).epsilon(1e-12));
            CHECK(b[e] == Catch::Approx(a[e]).epsilon(1e-12));
        }
    }
}

TEST_CASE("dtheta/dlength") {
    std::mt19937_64 rng(42);
    SECTION("matches the finite-difference oracle on random tetrahedra") {
        for (int it = 0; it < 100; ++it) {
            const auto l = random_tet(rng).edge_lengths();
            const Mat6 j = dtheta_dlength(l);
            const Mat6 jfd = dtheta_dlength_fd(l);
            const double scale = j.cwiseAbs().maxCoeff();
            CHECK((j - jfd).cwiseAbs().maxCoeff() < 1e-6 * scale);
        }
    }
    SECTION("Schlaefli identity holds column-wise") {
        for (int it = 0; it < 100; ++it) {
            TetGeometry t = random_tet(rng);
            const auto l = t.edge_lengths();
            const Mat6 j = dtheta_dlength(l);
            const double scale = j.cwiseAbs().maxCoeff();
            for (int b = 0; b < 6; ++b) {
                double s = 0;
                for (int a = 0; a < 6; ++a) s += l[a] * j(a, b);
                CHECK(std::abs(s) < 1e-9 * std::max(scale, 1.0));
            }
        }
    }
    SECTION("is symmetric") {
        for (int it = 0; it < 20; ++it) {
            const Mat6 j = dtheta_dlength(random_tet(rng).edge_lengths());
            CHECK((j - j.transpose()).cwiseAbs().maxCoeff() <
                  1e-9 * j.cwiseAbs().maxCoeff());
        }
    }
    SECTION("angles from lengths match angles from coordinates") {
        for (int it = 0; it < 20; ++it) {
            TetGeometry t = random_tet(rng);
            const auto from_l = angles_from_lengths(t.edge_lengths());
            const auto from_p = unsigned_dihedral_angles(t);
            for (int e = 0; e < 6; ++e)
                CHECK(from_l[e] == Catch::Approx(from_p[e]).epsilon(1e-9));
        }
    }
}

TEST_CASE("dlength/dpoints") {
    const auto [gp, gq] = dlength_dpoints(Vec3(0, 3, 4), Vec3(0, 0, 0));
    CHECK(gp.isApprox(Vec3(0, 0.6, 0.8), 1e-12));
    CHECK(gq.isApprox(Vec3(0, -0.6, -0.8), 1e-12));
    CHECK_THROWS_AS(dlength_dpoints(Vec3(1, 2, 3), Vec3(1, 2, 3)),
                    CoincidentPoints);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int it = 0; it < 20; ++it) {
        const Vec3 p(u(rng), u(rng), u(rng)), q(u(rng), u(rng), u(rng));
        const auto [dp, dq] = dlength_dpoints(p, q);
        const double h = 1e-7;
        for (int k = 0; k < 3; ++k) {
            Vec3 pp = p, pm = p;
            pp[k] += h;
            pm[k] -= h;
            const double fd = ((pp - q).norm() - (pm - q).norm()) / (2 * h);
            CHECK(dp[k] == Catch::Approx(fd).margin(1e-8));
        }
        (void)dq;
    }
}

TEST_CASE("wrap_angle reduces into (-pi, pi]") {
    CHECK(wrap_angle(M_PI) == Catch::Approx(M_PI));
    CHECK(wrap_angle(-M_PI) == Catch::Approx(M_PI));
    CHECK(wrap_angle(2 * M_PI + 0.25) == Catch::Approx(0.25));
    CHECK(wrap_angle(-7 * M_PI) == Catch::Approx(M_PI));
}
