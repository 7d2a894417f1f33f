#pragma once

// The acyclic complex of geometric differentials: assembly of the three
// Jacobian blocks d(x)/d(z,phi), d(l)/d(x), d(omega)/d(l), numerical
// acyclicity checks, and torsion via chained minors.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tkf/covering.hpp"
#include "tkf/errors.hpp"
#include "tkf/triangulation.hpp"

namespace tkf {

using MatX = Eigen::MatrixXd;

// Row indexing of the coordinate space (dx): three rows per off-knot
// vertex, one axis-coordinate row per knot vertex, vertices in id order.
struct CoordIndex {
    std::vector<int> offset;  // per vertex
    std::vector<int> width;   // 3 off the knot, 1 on it
    int n_x = 0;

    CoordIndex() = default;
    CoordIndex(const Pseudotriangulation& pt, const KnotMarking& km) {
        offset.resize(pt.num_vertices());
        width.resize(pt.num_vertices());
        for (int v = 0; v < pt.num_vertices(); ++v) {
            offset[v] = n_x;
            width[v] = km.on_knot_vertex(v) ? 1 : 3;
            n_x += width[v];
        }
    }
};

struct ComplexMatrices {
    MatX a3;  // d(x)/d(z or phi): n_x x n_a, n_a in {0, 2}
    MatX a2;  // d(l)/d(x):        N1 x n_x
    MatX a1;  // d(omega)/d(l):    N1 x N1, symmetric
    CoordIndex coords;
    std::vector<double> edge_length;  // per edge class

    int n_a() const { return static_cast<int>(a3.cols()); }
    int n_x() const { return static_cast<int>(a2.cols()); }
    int n_edges() const { return static_cast<int>(a2.rows()); }
};

inline ComplexMatrices assemble(const Pseudotriangulation& pt,
                                const KnotMarking& km,
                                const RepresentationSpec& rep,
                                const Realization& real,
                                const GeometryTolerances& gtol = {}) {
    ComplexMatrices m;
    m.coords = CoordIndex(pt, km);
    const int nx = m.coords.n_x;
    const int ne = pt.num_edges();

    const LiftReport lift = validate_lift(pt, rep, real);
    m.edge_length = lift.edge_lengths;

    // A2: gradient of each edge-class length through the base coordinates
    // of its endpoints, by the chain rule through the deck rotations.
    m.a2 = MatX::Zero(ne, nx);
    for (int e = 0; e < ne; ++e) {
        const auto [t, s] = pt.edge_class(e).members.front();
        const int ci = kEdgeCorners[s][0], cj = kEdgeCorners[s][1];
        const Vec3 p = corner_position(pt, rep, real, t, ci);
        const Vec3 q = corner_position(pt, rep, real, t, cj);
        const auto [up, uq] = dlength_dpoints(p, q);
        for (auto [corner, u] : {std::pair{ci, up}, std::pair{cj, uq}}) {
            const int v = pt.tets[t].vertex[corner];
            const Mat3 r = rep.evaluate(pt.tets[t].deck[corner]);
            if (km.on_knot_vertex(v)) {
                m.a2(e, m.coords.offset[v]) += u.dot(r * real.axis[v]);
            } else {
                const Vec3 g = r.transpose() * u;
                for (int k = 0; k < 3; ++k)
                    m.a2(e, m.coords.offset[v] + k) += g[k];
            }
        }
    }

    // A1: per-tetrahedron angle/length Jacobians accumulated over edge
    // classes with the volume sign.
    m.a1 = MatX::Zero(ne, ne);
    for (int t = 0; t < pt.num_tets(); ++t) {
        const TetGeometry g = tet_geometry(pt, rep, real, t);
        require_nondegenerate(g, gtol);
        const double sign = g.volume() > 0 ? 1.0 : -1.0;
        const Mat6 d = dtheta_dlength(g.edge_lengths());
        for (int p = 0; p < 6; ++p)
            for (int q = 0; q < 6; ++q)
                m.a1(pt.edge_class_of(t, p), pt.edge_class_of(t, q)) -=
                    sign * d(p, q);
    }

    // A3: the global translation along z and rotation about z, in the
    // scalar case; the empty matrix otherwise.
    if (rep.is_scalar()) {
        for (const auto& gen : rep.generators)
            if (gen.axis.cross(Vec3::UnitZ()).norm() > 1e-12)
                throw Error("scalar representations must rotate about z");
        m.a3 = MatX::Zero(nx, 2);
        for (int v = 0; v < pt.num_vertices(); ++v) {
            if (km.on_knot_vertex(v)) {
                m.a3(m.coords.offset[v], 0) = Vec3::UnitZ().dot(real.axis[v]);
            } else {
                const Vec3& x = real.pos[v];
                m.a3(m.coords.offset[v] + 2, 0) = 1.0;
                m.a3(m.coords.offset[v] + 0, 1) = -x.y();
                m.a3(m.coords.offset[v] + 1, 1) = x.x();
            }
        }
    } else {
        m.a3 = MatX::Zero(nx, 0);
    }
    return m;
}

struct AcyclicityReport {
    double resid_a1a2 = 0.0;  // relative infinity norms
    double resid_a2a3 = 0.0;
    double asymmetry = 0.0;
    int rank_a3 = 0, rank_a2 = 0, rank_a1 = 0;
    double gap_a3 = 0.0, gap_a2 = 0.0, gap_a1 = 0.0;  // sv gap at the cut
};

namespace detail {

inline double inf_norm(const MatX& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
}

inline std::pair<int, double> numerical_rank(const MatX& a, double rel_tol) {
    if (a.size() == 0) return {0, 0.0};
    Eigen::JacobiSVD<MatX> svd(a);
    const auto& sv = svd.singularValues();
    const double cut = rel_tol * sv(0);
    int r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    const double below = (r < sv.size()) ? sv(r) : 0.0;
    const double gap = (r > 0 && below > 0) ? sv(r - 1) / below
                       : std::numeric_limits<double>::infinity();
    return {r, gap};
}

}  // namespace detail

// Verifies that consecutive arrows compose to zero and that the numerical
// ranks are exactly those of an acyclic complex.
inline AcyclicityReport check_acyclic(const ComplexMatrices& m,
                                      double resid_tol = 1e-9,
                                      double rank_tol = 1e-8) {
    AcyclicityReport rep;
    const double s1 = detail::inf_norm(m.a1), s2 = detail::inf_norm(m.a2),
                 s3 = detail::inf_norm(m.a3);
    rep.resid_a1a2 = detail::inf_norm(m.a1 * m.a2) / std::max(s1 * s2, 1e-300);
    if (m.n_a() > 0)
        rep.resid_a2a3 =
            detail::inf_norm(m.a2 * m.a3) / std::max(s2 * s3, 1e-300);
    rep.asymmetry =
        detail::inf_norm(m.a1 - m.a1.transpose()) / std::max(s1, 1e-300);
    if (rep.resid_a1a2 > resid_tol || rep.resid_a2a3 > resid_tol)
        throw NotAComplex("consecutive arrows do not compose to zero "
                          "(residuals " + std::to_string(rep.resid_a1a2) +
                          ", " + std::to_string(rep.resid_a2a3) + ")");
    if (rep.asymmetry > resid_tol)
        throw NotAComplex("d(omega)/d(l) is not symmetric (relative "
                          "asymmetry " + std::to_string(rep.asymmetry) + ")");

    std::tie(rep.rank_a3, rep.gap_a3) = detail::numerical_rank(m.a3, rank_tol);
    std::tie(rep.rank_a2, rep.gap_a2) = detail::numerical_rank(m.a2, rank_tol);
    std::tie(rep.rank_a1, rep.gap_a1) = detail::numerical_rank(m.a1, rank_tol);
    const int na = m.n_a(), nx = m.n_x(), n1 = m.n_edges();
    if (rep.rank_a3 != na || rep.rank_a2 != nx - na ||
        rep.rank_a1 != n1 - nx + na)
        throw NotAcyclic("numerical ranks (" + std::to_string(rep.rank_a3) +
                         "," + std::to_string(rep.rank_a2) + "," +
                         std::to_string(rep.rank_a1) + ") differ from (" +
                         std::to_string(na) + "," + std::to_string(nx - na) +
                         "," + std::to_string(n1 - nx + na) + ")");
    return rep;
}

namespace detail {

// Greedy pivoted row selection: Gaussian elimination on A(:, cols)
// choosing, at every step, a row of near-maximal remaining pivot.  With an
// engine, picks uniformly among rows within `relax` of the best pivot,
// which enumerates distinct admissible minor chains.
inline std::vector<int> select_pivot_rows(const MatX& a,
                                          const std::vector<int>& cols,
                                          std::mt19937_64* rng = nullptr,
                                          double relax = 0.25) {
    const int k = static_cast<int>(cols.size());
    MatX w(a.rows(), k);
    for (int j = 0; j < k; ++j) w.col(j) = a.col(cols[j]);
    std::vector<char> used(a.rows(), 0);
    std::vector<int> rows;
    const double scale = w.size() ? w.cwiseAbs().maxCoeff() : 0.0;
    for (int j = 0; j < k; ++j) {
        double best = 0.0;
        for (int r = 0; r < a.rows(); ++r)
            if (!used[r]) best = std::max(best, std::abs(w(r, j)));
        if (best <= 1e-12 * scale)
            throw SingularMinorChain(
                "no nonsingular minor chain at tolerance (stage " +
                std::to_string(j) + ")");
        int pick = -1;
        if (rng) {
            std::vector<int> cands;
            for (int r = 0; r < a.rows(); ++r)
                if (!used[r] && std::abs(w(r, j)) >= relax * best)
                    cands.push_back(r);
            pick = cands[(*rng)() % cands.size()];
        } else {
            for (int r = 0; r < a.rows(); ++r)
                if (!used[r] && std::abs(w(r, j)) == best) pick = r;
        }
        used[pick] = 1;
        for (int r = 0; r < a.rows(); ++r)
            if (!used[r]) {
                const double f = w(r, j) / w(pick, j);
                w.row(r) -= f * w.row(pick);
            }
        rows.push_back(pick);
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

inline MatX submatrix(const MatX& a, const std::vector<int>& rows,
                      const std::vector<int>& cols) {
    MatX out(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j)
            out(i, j) = a(rows[i], cols[j]);
    return out;
}

inline double det(const MatX& a) {
    if (a.rows() == 0) return 1.0;  // the empty minor equals unity
    return Eigen::FullPivLU<MatX>(a).determinant();
}

inline std::vector<int> complement(int n, const std::vector<int>& s) {
    std::vector<char> in(n, 0);
    for (int i : s) in[i] = 1;
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (!in[i]) out.push_back(i);
    return out;
}

}  // namespace detail

struct TorsionResult {
    double tau = 0.0;
    std::vector<int> a3_rows;   // coordinate rows of the d(x)/d(z,phi) minor
    std::vector<int> a2_rows;   // edge rows R of the d(l)/d(x) minor
    std::vector<int> a2_cols;   // coordinate columns C, complement of a3_rows
    std::vector<int> a1_rows;   // complement edge set, symmetric A1 minor
    double minor_a3 = 1.0, minor_a2 = 1.0, minor_a1 = 1.0;
};

// Torsion by the squared-minor formula: tau = (minor A2)^2 /
// ((minor A1) (minor A3)^2), with the chained choice of index sets and all
// sets in ascending order.  Empty minors equal one.  An engine varies the
// admissible chain; the result does not depend on it, sign included.
inline TorsionResult torsion_eq3(const ComplexMatrices& m,
                                 std::mt19937_64* rng = nullptr,
                                 int retries = 32) {
    const int na = m.n_a(), nx = m.n_x(), ne = m.n_edges();
    std::vector<int> all_coords(nx);
    std::iota(all_coords.begin(), all_coords.end(), 0);

    std::mt19937_64 fallback(12345);
    for (int attempt = 0; attempt < retries; ++attempt) {
        std::mt19937_64* engine = rng ? rng : (attempt ? &fallback : nullptr);
        TorsionResult res;
        if (na > 0) {
            std::vector<int> a3cols(na);
            std::iota(a3cols.begin(), a3cols.end(), 0);
            // Select coordinate rows making the A3 block nonsingular.
            res.a3_rows = detail::select_pivot_rows(m.a3, a3cols, engine);
            res.minor_a3 = detail::det(detail::submatrix(m.a3, res.a3_rows, a3cols));
        }
        res.a2_cols = detail::complement(nx, res.a3_rows);
        try {
            res.a2_rows = detail::select_pivot_rows(m.a2, res.a2_cols, engine);
        } catch (const SingularMinorChain&) {
            if (attempt + 1 == retries) throw;
            continue;
        }
        res.minor_a2 =
            detail::det(detail::submatrix(m.a2, res.a2_rows, res.a2_cols));
        res.a1_rows = detail::complement(ne, res.a2_rows);
        res.minor_a1 =
            detail::det(detail::submatrix(m.a1, res.a1_rows, res.a1_rows));
        const double scale = detail::inf_norm(m.a1);
        const int k = static_cast<int>(res.a1_rows.size());
        if (std::abs(res.minor_a1) <= std::pow(1e-12 * std::max(scale, 1.0), k)) {
            if (attempt + 1 == retries)
                throw SingularMinorChain("A1 complement minor is singular");
            continue;
        }
        res.tau = res.minor_a2 * res.minor_a2 /
                  (res.minor_a1 * res.minor_a3 * res.minor_a3);
        return res;
    }
    throw SingularMinorChain("no admissible minor chain found");
}

// Torsion of a generic acyclic complex of based spaces, given the maps
// V_0 -> V_1 -> ... -> V_k in order.  The first space sits at homological
// degree `base_degree`.  At each target space the factor is the full
// determinant of the square matrix whose columns are the mapped basis
// vectors not consumed upstream followed by the standard basis vectors
// left over downstream; this carries the subset permutation signs that a
// bare minor product drops, so the result is chain independent with its
// sign.  A factor at an even target degree enters the numerator, at an odd
// one the denominator.
inline double torsion_of_acyclic_complex(const std::vector<MatX>& maps,
                                         int base_degree = 1,
                                         std::mt19937_64* rng = nullptr) {
    double tau = 1.0;
    std::vector<int> prev_rows;  // rows chosen in the previous target space
    for (size_t i = 0; i < maps.size(); ++i) {
        const MatX& f = maps[i];
        if (i > 0 && f.cols() != maps[i - 1].rows())
            throw Error("torsion: map dimensions do not chain");
        const std::vector<int> avail =
            detail::complement(static_cast<int>(f.cols()), prev_rows);
        std::vector<int> rows;
        if (!avail.empty()) rows = detail::select_pivot_rows(f, avail, rng);
        const std::vector<int> leftover =
            detail::complement(static_cast<int>(f.rows()), rows);
        MatX full(f.rows(), avail.size() + leftover.size());
        for (size_t j = 0; j < avail.size(); ++j)
            full.col(static_cast<int>(j)) = f.col(avail[j]);
        full.rightCols(leftover.size()).setZero();
        for (size_t j = 0; j < leftover.size(); ++j)
            full(leftover[j], static_cast<int>(avail.size() + j)) = 1.0;
        if (full.rows() != full.cols())
            throw NotAcyclic("torsion: stage " + std::to_string(i) +
                             " has mismatched rank profile");
        const double factor = detail::det(full);
        const int target = base_degree + static_cast<int>(i) + 1;
        if (target % 2 == 0)
            tau *= factor;
        else
            tau /= factor;
        prev_rows = rows;
    }
    if (!maps.empty() &&
        static_cast<int>(prev_rows.size()) != maps.back().rows())
        throw NotAcyclic("torsion: complex is not exact at its last space");
    return tau;
}

}  // namespace tkf
