#pragma once

// Euclidean geometry of tetrahedra: oriented volumes, signed dihedral
// angles, and the analytic derivatives that feed the Jacobians of the
// acyclic complex.

#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "tkf/errors.hpp"

namespace tkf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Canonical ordering of the six edge slots of a tetrahedron with corner
// slots 0..3.  Used everywhere an edge of a tetrahedron is indexed.
inline constexpr std::array<std::array<int, 2>, 6> kEdgeCorners = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

inline int edge_slot(int a, int b) {
    if (a > b) std::swap(a, b);
    for (int e = 0; e < 6; ++e)
        if (kEdgeCorners[e][0] == a && kEdgeCorners[e][1] == b) return e;
    return -1;
}

// Oriented volume V_ABCD = (1/6) det[B-A, C-A, D-A].  Odd corner
// permutations flip the sign; zero is a legal return for degenerate input.
inline double oriented_volume(const Vec3& a, const Vec3& b, const Vec3& c,
                              const Vec3& d) {
    return (b - a).cross(c - a).dot(d - a) / 6.0;
}

// Rotation about a unit axis through the origin.
inline Mat3 axis_angle_rotation(const Vec3& axis, double angle) {
    return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

namespace detail {

// Forward-mode scalar carrying N partial derivatives.  Enough operations
// for length/angle formulas; derivatives come out exact to rounding.
template <int N>
struct Dual {
    double v = 0.0;
    std::array<double, N> d{};

    Dual() = default;
    Dual(double val) : v(val) {}  // NOLINT: implicit constants
    static Dual seed(double val, int i) {
        Dual x(val);
        x.d[i] = 1.0;
        return x;
    }

    Dual operator-() const {
        Dual r(-v);
        for (int i = 0; i < N; ++i) r.d[i] = -d[i];
        return r;
    }
    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (int i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (int i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
    friend Dual operator+(Dual a, const Dual& b) { return a += b; }
    friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
    friend Dual operator*(const Dual& a, const Dual& b) {
        Dual r(a.v * b.v);
        for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
        return r;
    }
    friend Dual operator/(const Dual& a, const Dual& b) {
        Dual r(a.v / b.v);
        const double inv2 = 1.0 / (b.v * b.v);
        for (int i = 0; i < N; ++i)
            r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv2;
        return r;
    }
    friend Dual sqrt(const Dual& a) {
        Dual r(std::sqrt(a.v));
        const double s = 0.5 / r.v;
        for (int i = 0; i < N; ++i) r.d[i] = s * a.d[i];
        return r;
    }
    friend Dual acos(const Dual& a) {
        Dual r(std::acos(a.v));
        const double s = -1.0 / std::sqrt(1.0 - a.v * a.v);
        for (int i = 0; i < N; ++i) r.d[i] = s * a.d[i];
        return r;
    }
};

template <typename T>
using V3 = Eigen::Matrix<T, 3, 1>;

template <typename T>
T dot(const V3<T>& a, const V3<T>& b) {
    return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

template <typename T>
V3<T> cross(const V3<T>& a, const V3<T>& b) {
    V3<T> r;
    r(0) = a(1) * b(2) - a(2) * b(1);
    r(1) = a(2) * b(0) - a(0) * b(2);
    r(2) = a(0) * b(1) - a(1) * b(0);
    return r;
}

// Rebuilds corner coordinates from the six edge lengths (slot order
// kEdgeCorners): corner 0 at the origin, corner 1 on the x axis, corner 2
// in the xy plane.  Standard Cayley-Menger style reconstruction; valid for
// nondegenerate length sets, and produces the positively oriented copy.
template <typename T>
std::array<V3<T>, 4> corners_from_lengths(const std::array<T, 6>& l) {
    const T l01 = l[0], l02 = l[1], l03 = l[2], l12 = l[3], l13 = l[4],
            l23 = l[5];
    std::array<V3<T>, 4> p;
    p[0] = V3<T>{T(0.0), T(0.0), T(0.0)};
    p[1] = V3<T>{l01, T(0.0), T(0.0)};
    const T x2 = (l01 * l01 + l02 * l02 - l12 * l12) / (T(2.0) * l01);
    const T y2 = sqrt(l02 * l02 - x2 * x2);
    p[2] = V3<T>{x2, y2, T(0.0)};
    const T x3 = (l01 * l01 + l03 * l03 - l13 * l13) / (T(2.0) * l01);
    const T y3 =
        (l03 * l03 - l23 * l23 + l02 * l02 - T(2.0) * x3 * x2) / (T(2.0) * y2);
    const T z3 = sqrt(l03 * l03 - x3 * x3 - y3 * y3);
    p[3] = V3<T>{x3, y3, z3};
    return p;
}

// Unsigned dihedral angle at edge slot e from corner coordinates: the
// angle in (0, pi) between the projections of the two opposite corners
// onto the plane orthogonal to the edge.
template <typename T>
T dihedral_angle(const std::array<V3<T>, 4>& p, int e) {
    const int i = kEdgeCorners[e][0], j = kEdgeCorners[e][1];
    int k = -1, m = -1;
    for (int c = 0; c < 4; ++c)
        if (c != i && c != j) (k < 0 ? k : m) = c;
    const V3<T> u = p[j] - p[i];
    const T un = sqrt(dot(u, u));
    V3<T> a = p[k] - p[i];
    V3<T> b = p[m] - p[i];
    const T au = dot(a, u) / (un * un);
    const T bu = dot(b, u) / (un * un);
    for (int c = 0; c < 3; ++c) {
        a(c) = a(c) - au * u(c);
        b(c) = b(c) - bu * u(c);
    }
    const T ca = dot(a, b) / (sqrt(dot(a, a)) * sqrt(dot(b, b)));
    return acos(ca);
}

template <typename T>
std::array<T, 6> angles_from_lengths(const std::array<T, 6>& l) {
    const auto p = corners_from_lengths(l);
    std::array<T, 6> th;
    for (int e = 0; e < 6; ++e) th[e] = dihedral_angle(p, e);
    return th;
}

}  // namespace detail

// Geometry of one tetrahedron given by its four (lifted) corner points.
struct TetGeometry {
    std::array<Vec3, 4> corner;

    double volume() const {
        return oriented_volume(corner[0], corner[1], corner[2], corner[3]);
    }
    double edge_length(int e) const {
        return (corner[kEdgeCorners[e][1]] - corner[kEdgeCorners[e][0]]).norm();
    }
    std::array<double, 6> edge_lengths() const {
        std::array<double, 6> l;
        for (int e = 0; e < 6; ++e) l[e] = edge_length(e);
        return l;
    }
    double max_edge_length() const {
        double m = 0;
        for (int e = 0; e < 6; ++e) m = std::max(m, edge_length(e));
        return m;
    }
};

struct GeometryTolerances {
    // Degeneracy threshold on |6V|, relative to (max edge length)^3.
    double eps_vol_rel = 1e-10;

    double eps_vol(const TetGeometry& t) const {
        const double s = t.max_edge_length();
        return eps_vol_rel * s * s * s;
    }
};

inline void require_nondegenerate(const TetGeometry& t,
                                  const GeometryTolerances& tol = {}) {
    if (std::abs(6.0 * t.volume()) < tol.eps_vol(t))
        throw DegenerateTetrahedron("tetrahedron is degenerate: |6V| = " +
                                    std::to_string(std::abs(6.0 * t.volume())));
}

// Unsigned dihedral angles, one per edge slot, each in (0, pi).
inline std::array<double, 6> unsigned_dihedral_angles(const TetGeometry& t) {
    std::array<detail::V3<double>, 4> p;
    for (int c = 0; c < 4; ++c) p[c] = t.corner[c];
    std::array<double, 6> th;
    for (int e = 0; e < 6; ++e) th[e] = detail::dihedral_angle(p, e);
    return th;
}

// Dihedral angles carrying the sign of the oriented volume.
inline std::array<double, 6> signed_dihedral_angles(
    const TetGeometry& t, const GeometryTolerances& tol = {}) {
    require_nondegenerate(t, tol);
    const double s = t.volume() > 0 ? 1.0 : -1.0;
    auto th = unsigned_dihedral_angles(t);
    for (auto& x : th) x *= s;
    return th;
}

// Unsigned dihedral angles as a function of the six edge lengths alone.
inline std::array<double, 6> angles_from_lengths(const std::array<double, 6>& l) {
    return detail::angles_from_lengths<double>(l);
}

// Jacobian d(theta_a)/d(l_b) of the unsigned dihedral angles with respect
// to the edge lengths, the tetrahedron being determined by its lengths.
// Computed by forward-mode differentiation through the length-based
// reconstruction; satisfies the Schlaefli identity sum_a l_a dtheta_a = 0
// column-wise and is symmetric.
inline Mat6 dtheta_dlength(const std::array<double, 6>& l) {
    using D = detail::Dual<6>;
    std::array<D, 6> ld;
    for (int e = 0; e < 6; ++e) ld[e] = D::seed(l[e], e);
    const auto th = detail::angles_from_lengths<D>(ld);
    Mat6 J;
    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) J(a, b) = th[a].d[b];
    return J;
}

inline Mat6 dtheta_dlength(const TetGeometry& t,
                           const GeometryTolerances& tol = {}) {
    require_nondegenerate(t, tol);
    return dtheta_dlength(t.edge_lengths());
}

// Gradient of |P-Q| in the six endpoint coordinates: the unit vector
// (P-Q)/|P-Q| paired with P and its negation paired with Q.
inline std::pair<Vec3, Vec3> dlength_dpoints(const Vec3& p, const Vec3& q) {
    const Vec3 d = p - q;
    const double n = d.norm();
    if (n == 0.0) throw CoincidentPoints("dlength_dpoints: P == Q");
    return {d / n, -d / n};
}

// Reduce x modulo 2*pi into (-pi, pi].
inline double wrap_angle(double x) {
    const double two_pi = 2.0 * M_PI;
    x = std::fmod(x, two_pi);
    if (x <= -M_PI) x += two_pi;
    if (x > M_PI) x -= two_pi;
    return x;
}

}  // namespace tkf
