#pragma once

// Evaluation of the knot invariant: torsion times the squared off-knot
// edge lengths over the signed tetrahedron volumes, with the knot-vertex
// power factor; plus the multi-sample stability check.

#include <cmath>
#include <vector>

#include "tkf/complex.hpp"
#include "tkf/covering.hpp"

namespace tkf {

struct InvariantResult {
    double value = 0.0;           // I(K)
    double tau = 0.0;             // torsion of the complex
    double prod_l2 = 1.0;         // product of l^2 over off-knot edges
    double prod_6v = 1.0;         // signed product of 6V over tetrahedra
    double power_factor = 1.0;    // (-1)^N1 (2(1-cos phi))^(N0^knot)
    double phi = 0.0;
    int n0_knot = 0;
    std::vector<std::uint64_t> seeds;
    double mean = 0.0;                // across samples
    double max_rel_deviation = 0.0;   // across samples
};

inline InvariantResult compute_invariant(const Pseudotriangulation& pt,
                                         const KnotMarking& km,
                                         const RepresentationSpec& rep,
                                         const Realization& real,
                                         const GeometryTolerances& gtol = {}) {
    const ComplexMatrices m = assemble(pt, km, rep, real, gtol);
    check_acyclic(m);
    const TorsionResult tr = torsion_eq3(m);

    InvariantResult out;
    out.tau = tr.tau;
    out.phi = rep.phi;
    out.n0_knot = km.num_knot_vertices();
    out.seeds = {real.seed};
    for (int e = 0; e < pt.num_edges(); ++e)
        if (!km.on_knot_edge(e))
            out.prod_l2 *= m.edge_length[e] * m.edge_length[e];
    for (int t = 0; t < pt.num_tets(); ++t)
        out.prod_6v *= 6.0 * tet_geometry(pt, rep, real, t).volume();
    // Normalization of the torsion computed here: each knot vertex added
    // by a knot move multiplies tau by 1/(2(1-cos phi)) times the length
    // and volume factors, and each 2->3 move (one extra edge) flips its
    // sign, so the compensating factor is (-1)^(N1) (2(1-cos phi))^(N0
    // knot).  Anchored by the unknot value -4(1-cos phi)^2; checked to be
    // stable under all six elementary moves.
    const int n1 = pt.num_edges();
    out.power_factor = (n1 % 2 == 0 ? 1.0 : -1.0) *
                       std::pow(2.0 * (1.0 - std::cos(rep.phi)), out.n0_knot);
    out.value = out.tau * out.prod_l2 / out.prod_6v * out.power_factor;
    out.mean = out.value;
    if (!std::isfinite(out.value) || out.value == 0.0)
        throw InvariantUnstable("invariant evaluated to " +
                                std::to_string(out.value));
    return out;
}

// Evaluates the invariant over independent realizations and checks that
// the spread stays within tolerance.
inline InvariantResult invariant_multi_sample(
    const Pseudotriangulation& pt, const KnotMarking& km,
    const RepresentationSpec& rep, int n_samples, std::uint64_t base_seed,
    const SamplingOptions& opt = {}, double spread_tol = 1e-6) {
    if (n_samples < 2)
        throw Error("invariant_multi_sample requires n_samples >= 2");
    InvariantResult agg;
    std::vector<double> values;
    for (int s = 0; s < n_samples; ++s) {
        const Realization real =
            sample_general_position(pt, km, rep, base_seed + s, opt);
        InvariantResult one = compute_invariant(pt, km, rep, real);
        if (s == 0) agg = one;
        agg.seeds.push_back(real.seed);
        values.push_back(one.value);
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    agg.mean = mean;
    for (double v : values)
        agg.max_rel_deviation = std::max(
            agg.max_rel_deviation, std::abs(v - mean) / std::abs(mean));
    if (agg.max_rel_deviation > spread_tol)
        throw InvariantUnstable(
            "invariant varies across realizations (max relative deviation " +
            std::to_string(agg.max_rel_deviation) + ")");
    return agg;
}

}  // namespace tkf
