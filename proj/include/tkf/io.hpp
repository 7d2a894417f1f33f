#pragma once

// TKF file format (JSON): serialization of a marked pseudotriangulation
// with its representation, and of replayable move logs.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tkf/errors.hpp"
#include "tkf/moves.hpp"
#include "tkf/triangulation.hpp"

namespace tkf {

struct TkfDocument {
    Pseudotriangulation pt;
    KnotMarking km;
    RepresentationSpec rep;
    // Per-vertex axes, meaningful on the knot; omitted for the scalar
    // representation (everything sits on the z axis).
    std::optional<std::vector<Vec3>> axes;
};

namespace detail {

using nlohmann::json;

inline json axis_json(const Vec3& a) { return json::array({a.x(), a.y(), a.z()}); }

inline Vec3 axis_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3)
        throw ParseError("axis must be an array of 3 reals");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace detail

inline std::string serialize_tkf(const TkfDocument& doc) {
    using nlohmann::json;
    const Pseudotriangulation& pt = doc.pt;
    json j;
    j["format"] = "tkf-1";

    if (doc.rep.is_scalar() && doc.rep.generators.size() == 1 &&
        doc.rep.generators[0].name == "m" && !doc.axes) {
        j["representation"] = {{"kind", "scalar"}, {"phi", doc.rep.phi}};
    } else {
        json gens = json::object();
        for (const Generator& g : doc.rep.generators)
            gens[g.name] = {{"axis", detail::axis_json(g.axis)},
                            {"angle", doc.rep.phi}};
        j["representation"] = {{"kind", "explicit"}, {"generators", gens}};
    }

    json verts = json::array();
    for (int v = 0; v < pt.num_vertices(); ++v) {
        json jv = {{"id", v}, {"on_knot", doc.km.on_knot_vertex(v)}};
        if (doc.axes) jv["axis"] = detail::axis_json((*doc.axes)[v]);
        verts.push_back(jv);
    }
    j["vertices"] = verts;

    json tets = json::array();
    for (int t = 0; t < pt.num_tets(); ++t) {
        json corners = json::array();
        for (int c = 0; c < 4; ++c)
            corners.push_back(
                {{"vertex", pt.tets[t].vertex[c]},
                 {"deck", doc.rep.format_word(pt.tets[t].deck[c])}});
        tets.push_back({{"id", t}, {"corners", corners}});
    }
    j["tetrahedra"] = tets;

    json gluings = json::array();
    for (int t = 0; t < pt.num_tets(); ++t)
        for (int f = 0; f < 4; ++f) {
            const Gluing& g = pt.glue[t][f];
            if (std::make_pair(t, f) > std::make_pair(g.tet, g.face))
                continue;
            json cm = json::array();
            for (int c = 0; c < 4; ++c)
                if (c != f) cm.push_back(json::array({c, g.cmap[c]}));
            gluings.push_back({{"tet", t},
                               {"face", f},
                               {"to_tet", g.tet},
                               {"to_face", g.face},
                               {"corner_map", cm}});
        }
    j["gluings"] = gluings;

    json knot = json::array();
    for (size_t i = 0; i < doc.km.knot_edges.size(); ++i) {
        const EdgeClass& ec = pt.edge_class(doc.km.knot_edges[i]);
        const auto [t, s] = ec.members.front();
        knot.push_back(
            {{"tet", t},
             {"corner_pair",
              json::array({kEdgeCorners[s][0], kEdgeCorners[s][1]})}});
    }
    j["knot_edges"] = knot;
    return j.dump(2) + "\n";
}

inline TkfDocument parse_tkf(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "tkf-1")
            throw ParseError("unsupported format tag");

        TkfDocument doc;
        const json& r = j.at("representation");
        const std::string kind = r.at("kind").get<std::string>();
        if (kind == "scalar") {
            doc.rep = RepresentationSpec::scalar(r.at("phi").get<double>());
        } else if (kind == "explicit") {
            std::vector<Generator> gens;
            double phi = 0.0;
            bool first = true;
            for (const auto& [name, g] : r.at("generators").items()) {
                gens.push_back({name,
                                detail::axis_from_json(g.at("axis"))});
                const double a = g.at("angle").get<double>();
                if (first) {
                    phi = a;
                    first = false;
                } else if (a != phi) {
                    throw ParseError(
                        "all generator angles must coincide in tkf-1");
                }
            }
            doc.rep = RepresentationSpec(std::move(gens), phi);
        } else {
            throw ParseError("unknown representation kind '" + kind + "'");
        }

        const json& jv = j.at("vertices");
        std::vector<char> on_knot(jv.size(), 0);
        std::vector<Vec3> axes(jv.size(), Vec3::UnitZ());
        bool any_axis = false;
        for (const json& v : jv) {
            const int id = v.at("id").get<int>();
            if (id < 0 || id >= static_cast<int>(jv.size()))
                throw ParseError("vertex ids must be dense 0..N-1");
            on_knot[id] = v.at("on_knot").get<bool>() ? 1 : 0;
            if (v.contains("axis")) {
                axes[id] = detail::axis_from_json(v.at("axis"));
                any_axis = true;
            }
        }

        std::vector<Tetrahedron> tets(j.at("tetrahedra").size());
        for (const json& t : j.at("tetrahedra")) {
            const int id = t.at("id").get<int>();
            if (id < 0 || id >= static_cast<int>(tets.size()))
                throw ParseError("tetrahedron ids must be dense 0..N-1");
            const json& corners = t.at("corners");
            if (corners.size() != 4)
                throw ParseError("a tetrahedron needs exactly 4 corners");
            for (int c = 0; c < 4; ++c) {
                tets[id].vertex[c] = corners[c].at("vertex").get<int>();
                tets[id].deck[c] = doc.rep.parse_word(
                    corners[c].at("deck").get<std::string>());
            }
        }

        std::vector<std::array<Gluing, 4>> glue(tets.size());
        for (const json& g : j.at("gluings")) {
            const int t = g.at("tet").get<int>(), f = g.at("face").get<int>();
            const int t2 = g.at("to_tet").get<int>(),
                      f2 = g.at("to_face").get<int>();
            if (t < 0 || t >= static_cast<int>(glue.size()) || t2 < 0 ||
                t2 >= static_cast<int>(glue.size()) || f < 0 || f > 3 ||
                f2 < 0 || f2 > 3)
                throw ParseError("gluing record out of range");
            std::array<int, 4> cmap{{-1, -1, -1, -1}};
            cmap[f] = f2;
            for (const json& pair : g.at("corner_map")) {
                if (!pair.is_array() || pair.size() != 2)
                    throw ParseError("corner_map entries must be pairs");
                const int a = pair[0].get<int>(), b = pair[1].get<int>();
                if (a < 0 || a > 3 || b < 0 || b > 3)
                    throw ParseError("corner_map entry out of range");
                cmap[a] = b;
            }
            glue[t][f] = {t2, f2, cmap};
            std::array<int, 4> inv{{-1, -1, -1, -1}};
            for (int c = 0; c < 4; ++c)
                if (cmap[c] >= 0) inv[cmap[c]] = c;
            glue[t2][f2] = {t, f, inv};
        }

        doc.pt = from_gluing_data(std::move(tets), std::move(glue));
        if (static_cast<int>(jv.size()) != doc.pt.num_vertices())
            throw ParseError("vertex list does not match the tetrahedra");

        std::vector<int> knot;
        for (const json& k : j.at("knot_edges")) {
            const int t = k.at("tet").get<int>();
            const json& cp = k.at("corner_pair");
            if (!cp.is_array() || cp.size() != 2)
                throw ParseError("corner_pair must be a pair");
            knot.push_back(doc.pt.edge_class_of(t, cp[0].get<int>(),
                                                cp[1].get<int>()));
        }
        doc.km = make_knot_marking(doc.pt, knot);
        for (int v = 0; v < doc.pt.num_vertices(); ++v)
            if (doc.km.on_knot_vertex(v) != (on_knot[v] != 0))
                throw ParseError("on_knot flags disagree with knot_edges");
        if (any_axis) doc.axes = std::move(axes);
        return doc;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed tkf document: ") + e.what());
    }
}

inline std::string serialize_move_log(const std::vector<MoveLogEntry>& log) {
    using nlohmann::json;
    json moves = json::array();
    for (const MoveLogEntry& e : log) {
        json m = {{"kind", to_string(e.kind)}, {"target", e.target}};
        if (e.kind == MoveKind::bulk_2_3) m["face"] = e.face;
        if (e.kind == MoveKind::bulk_1_4)
            m["bary"] = json::array(
                {e.bary[0], e.bary[1], e.bary[2], e.bary[3]});
        if (e.kind == MoveKind::knot_1_2) m["split"] = e.split;
        moves.push_back(m);
    }
    json j = {{"format", "tkf-moves-1"}, {"moves", moves}};
    return j.dump(2) + "\n";
}

inline std::vector<MoveLogEntry> parse_move_log(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "tkf-moves-1")
            throw ParseError("unsupported move log format tag");
        std::vector<MoveLogEntry> log;
        for (const json& m : j.at("moves")) {
            MoveLogEntry e;
            const std::string kind = m.at("kind").get<std::string>();
            if (kind == "2-3")
                e.kind = MoveKind::bulk_2_3;
            else if (kind == "3-2")
                e.kind = MoveKind::bulk_3_2;
            else if (kind == "1-4")
                e.kind = MoveKind::bulk_1_4;
            else if (kind == "4-1")
                e.kind = MoveKind::bulk_4_1;
            else if (kind == "knot-1-2")
                e.kind = MoveKind::knot_1_2;
            else if (kind == "knot-2-1")
                e.kind = MoveKind::knot_2_1;
            else
                throw ParseError("unknown move kind '" + kind + "'");
            e.target = m.at("target").get<int>();
            if (m.contains("face")) e.face = m.at("face").get<int>();
            if (m.contains("split")) e.split = m.at("split").get<double>();
            if (m.contains("bary"))
                for (int i = 0; i < 4; ++i)
                    e.bary[i] = m.at("bary")[i].get<double>();
            log.push_back(e);
        }
        return log;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed move log: ") + e.what());
    }
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path,
                            const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << text;
}

}  // namespace tkf
