// tkf command line: validate marked pseudotriangulations, evaluate the
// knot invariant with its factor breakdown, inspect the differential
// complex, replay or generate move sequences, and emit fixtures.

#include <cinttypes>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "tkf/builders.hpp"
#include "tkf/complex.hpp"
#include "tkf/invariant.hpp"
#include "tkf/io.hpp"
#include "tkf/moves.hpp"

namespace {

using namespace tkf;

TkfDocument load(const std::string& path) {
    return parse_tkf(read_text_file(path));
}

void print_invariant(const InvariantResult& r) {
    std::printf("I            = %.15g\n", r.value);
    std::printf("  tau        = %.15g\n", r.tau);
    std::printf("  prod l^2   = %.15g  (off-knot edges)\n", r.prod_l2);
    std::printf("  prod 6V    = %.15g  (signed)\n", r.prod_6v);
    std::printf("  power      = %.15g  ((-1)^N1 (2(1-cos phi))^%d)\n",
                r.power_factor, r.n0_knot);
    if (r.seeds.size() > 1)
        std::printf("  samples    = %zu, mean %.15g, max rel dev %.3g\n",
                    r.seeds.size() - 1, r.mean, r.max_rel_deviation);
}

int cmd_validate(const std::string& in, std::uint64_t seed, double tol) {
    const TkfDocument doc = load(in);
    const ConditionReport cr = validate_knot_conditions(doc.pt, doc.km);
    for (const std::string& f : cr.failures)
        std::printf("FAIL %s\n", f.c_str());
    SamplingOptions opt;
    opt.lift_tol = tol;
    const Realization real =
        sample_general_position(doc.pt, doc.km, doc.rep, seed, opt, doc.axes);
    const LiftReport lift = validate_lift(doc.pt, doc.rep, real, tol);
    const DeficitReport def = deficit_angles(doc.pt, doc.km, doc.rep, real);
    std::printf(
        "ok: %d tetrahedra, %d edges, %d vertices (%d on the knot)\n",
        doc.pt.num_tets(), doc.pt.num_edges(), doc.pt.num_vertices(),
        doc.km.num_knot_vertices());
    std::printf("  face discrepancy %.3g, length spread %.3g, "
                "worst deficit deviation %.3g\n",
                lift.max_face_discrepancy, lift.max_length_spread,
                def.max_abs_deviation);
    return cr.ok() ? 0 : 1;
}

int cmd_invariant(const std::string& in, int samples, std::uint64_t seed,
                  double tol) {
    const TkfDocument doc = load(in);
    const InvariantResult r =
        invariant_multi_sample(doc.pt, doc.km, doc.rep, samples, seed);
    print_invariant(r);
    return 0;
}

int cmd_check_complex(const std::string& in, std::uint64_t seed,
                      double tol) {
    const TkfDocument doc = load(in);
    const Realization real = sample_general_position(
        doc.pt, doc.km, doc.rep, seed, {}, doc.axes);
    const ComplexMatrices m = assemble(doc.pt, doc.km, doc.rep, real);
    const AcyclicityReport rep = check_acyclic(m);
    std::printf("spaces       : 0 -> %d -> %d -> %d -> %d -> %d -> 0\n",
                m.n_a(), m.n_x(), m.n_edges(), m.n_x(), m.n_a());
    std::printf("ranks        : %d, %d, %d\n", rep.rank_a3, rep.rank_a2,
                rep.rank_a1);
    std::printf("residuals    : a1*a2 %.3g, a2*a3 %.3g, asymmetry %.3g\n",
                rep.resid_a1a2, rep.resid_a2a3, rep.asymmetry);
    (void)tol;
    const TorsionResult tr = torsion_eq3(m);
    std::printf("torsion      = %.15g\n", tr.tau);
    return 0;
}

int cmd_local_ratio(double phi, std::uint64_t seed, double tol) {
    const Fixture fx = build_bdaa_fixture(3, phi);
    const Realization real =
        sample_general_position(fx.pt, fx.km, fx.rep, seed);
    const KnotMoveFactorCheck c = check_knot_move_factor(
        fx.pt, fx.km, fx.rep, real, fx.km.knot_edges[0], 0.5, seed);
    const double rel_lg =
        std::abs(c.local_ratio / c.global_ratio - 1.0);
    const double rel_gp =
        std::abs(c.global_ratio / c.predicted_ratio - 1.0);
    std::printf("tau1 (one-tetrahedron complex) = %.15g\n", c.tau1);
    std::printf("tau2 (split-pair complex)      = %.15g\n", c.tau2);
    std::printf("local ratio tau2/tau1          = %.15g\n", c.local_ratio);
    std::printf("global torsion ratio           = %.15g\n", c.global_ratio);
    std::printf("predicted factor               = %.15g\n",
                c.predicted_ratio);
    std::printf("relative errors: local/global %.3g, global/predicted %.3g\n",
                rel_lg, rel_gp);
    return (rel_lg < tol && rel_gp < tol) ? 0 : 1;
}

int cmd_apply_moves(const std::string& in, const std::string& log_path,
                    int random_count, std::uint64_t seed, int samples,
                    double tol, const std::string& out,
                    const std::string& log_out) {
    const TkfDocument doc = load(in);
    const InvariantResult before =
        invariant_multi_sample(doc.pt, doc.km, doc.rep, samples, seed);
    Realization real = sample_general_position(doc.pt, doc.km, doc.rep,
                                               seed, {}, doc.axes);
    (void)tol;

    Pseudotriangulation pt = doc.pt;
    KnotMarking km = doc.km;
    std::vector<MoveLogEntry> log;
    if (!log_path.empty()) {
        log = parse_move_log(read_text_file(log_path));
        for (const MoveLogEntry& e : log) {
            MoveResult mr = apply_move(pt, km, doc.rep, real, e);
            pt = std::move(mr.pt);
            km = std::move(mr.km);
            real = std::move(mr.real);
        }
        std::printf("replayed %zu moves\n", log.size());
    } else {
        MoveSequenceResult seq = random_move_sequence(
            doc.pt, doc.km, doc.rep, real, random_count, seed);
        std::printf("applied %zu random moves (%zu attempts rejected)\n",
                    seq.log.size(), seq.rejected.size());
        pt = std::move(seq.pt);
        km = std::move(seq.km);
        real = std::move(seq.real);
        log = std::move(seq.log);
    }

    const InvariantResult after =
        invariant_multi_sample(pt, km, doc.rep, samples, seed + 1);
    std::printf("I before = %.15g\n", before.mean);
    std::printf("I after  = %.15g\n", after.mean);
    const double rel = std::abs(after.mean / before.mean - 1.0);
    std::printf("relative change %.3g\n", rel);
    if (!out.empty())
        write_text_file(out, serialize_tkf({pt, km, doc.rep, doc.axes}));
    if (!log_out.empty()) write_text_file(log_out, serialize_move_log(log));
    return rel < 1e-6 ? 0 : 1;
}

int cmd_build_fixture(const std::string& kind, int n, int m, double phi,
                      const std::string& out) {
    Fixture fx;
    if (kind == "unknot-join")
        fx = build_unknot_join(n, m, phi);
    else if (kind == "bdaa")
        fx = build_bdaa_fixture(n, phi);
    else
        throw Error("unknown fixture kind '" + kind +
                    "' (expected unknot-join or bdaa)");
    const std::string text = serialize_tkf({fx.pt, fx.km, fx.rep, {}});
    if (out.empty())
        std::fputs(text.c_str(), stdout);
    else
        write_text_file(out, text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Euclidean geometric knot invariant toolkit"};
    app.require_subcommand(1);

    std::string in, out, log_path, log_out, kind;
    std::uint64_t seed = 1;
    int samples = 3, n = 3, m = 3, random_count = 10;
    double tol = 1e-9, phi = M_PI / 2;

    auto add_common = [&](CLI::App* c, bool needs_input) {
        if (needs_input)
            c->add_option("input", in, "tkf file")->required();
        c->add_option("--seed", seed, "rng seed");
        c->add_option("--tol", tol, "tolerance");
        return c;
    };

    auto* v = add_common(app.add_subcommand("validate",
                                            "check structure, knot "
                                            "conditions and the lift"),
                         true);
    auto* iv = add_common(
        app.add_subcommand("invariant", "evaluate I with factor breakdown"),
        true);
    iv->add_option("--samples", samples, "independent realizations");
    auto* cc = add_common(
        app.add_subcommand("check-complex", "acyclicity and rank report"),
        true);
    auto* lr = add_common(
        app.add_subcommand("local-ratio",
                           "torsion ratio of the knot edge split"),
        false);
    lr->add_option("--phi", phi, "rotation angle");
    auto* am = add_common(
        app.add_subcommand("apply-moves",
                           "replay a move log or apply random moves"),
        true);
    am->add_option("--log", log_path, "move log to replay");
    am->add_option("--random", random_count, "number of random moves");
    am->add_option("--samples", samples, "independent realizations");
    am->add_option("--out", out, "write the resulting tkf here");
    am->add_option("--log-out", log_out, "write the applied move log here");
    auto* bf = app.add_subcommand("build-fixture", "emit a fixture as tkf");
    bf->add_option("kind", kind, "unknot-join or bdaa")->required();
    bf->add_option("n", n, "knot cycle size");
    bf->add_option("m", m, "second cycle size (unknot-join)");
    bf->add_option("--phi", phi, "rotation angle");
    bf->add_option("--out", out, "output path (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (v->parsed()) return cmd_validate(in, seed, tol);
        if (iv->parsed()) return cmd_invariant(in, samples, seed, tol);
        if (cc->parsed()) return cmd_check_complex(in, seed, tol);
        if (lr->parsed()) return cmd_local_ratio(phi, seed, tol * 10.0);
        if (am->parsed())
            return cmd_apply_moves(in, log_path, random_count, seed, samples,
                                   tol, out, log_out);
        if (bf->parsed()) return cmd_build_fixture(kind, n, m, phi, out);
    } catch (const tkf::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
