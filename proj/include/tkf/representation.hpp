#pragma once

// Knot-group representation into SO(3) and symbolic deck-transformation
// words over its named meridian generators.  Words are kept symbolic so
// that holonomy and winding checks are exact.

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tkf/errors.hpp"
#include "tkf/geometry.hpp"

namespace tkf {

// A word in the generators: nonzero entries, +(g+1) for generator g,
// -(g+1) for its inverse.  The empty word is the identity (base lift).
using Word = std::vector<int>;

inline Word reduced(Word w) {
    Word out;
    for (int s : w) {
        if (!out.empty() && out.back() == -s)
            out.pop_back();
        else
            out.push_back(s);
    }
    return out;
}

inline Word inverse(const Word& w) {
    Word out(w.rbegin(), w.rend());
    for (int& s : out) s = -s;
    return out;
}

inline Word concat(const Word& a, const Word& b) {
    Word out = a;
    out.insert(out.end(), b.begin(), b.end());
    return reduced(out);
}

// Exponent sum over all generators; the image of the word in the
// abelianization of the knot group.
inline int winding_number(const Word& w) {
    int n = 0;
    for (int s : w) n += (s > 0) ? 1 : -1;
    return n;
}

struct Generator {
    std::string name;
    Vec3 axis;  // unit, through the origin
};

// Representation f: pi(K) -> SO(3); every meridian generator maps to a
// rotation through the common angle phi about its own axis.
struct RepresentationSpec {
    std::vector<Generator> generators;
    double phi = 0.0;

    RepresentationSpec() = default;
    RepresentationSpec(std::vector<Generator> gens, double angle)
        : generators(std::move(gens)), phi(angle) {
        if (std::abs(wrap_angle(phi)) < 1e-12)
            throw Error("representation is trivial: phi = 0 (mod 2pi)");
        for (auto& g : generators) {
            if (g.axis.norm() == 0.0)
                throw Error("generator '" + g.name + "' has zero axis");
            g.axis.normalize();
        }
    }

    static RepresentationSpec scalar(double angle) {
        return RepresentationSpec({{"m", Vec3::UnitZ()}}, angle);
    }

    // Scalar iff all generator axes coincide (up to sign).
    bool is_scalar() const {
        for (size_t i = 1; i < generators.size(); ++i)
            if (generators[i].axis.cross(generators[0].axis).norm() > 1e-12)
                return false;
        return true;
    }

    int generator_index(const std::string& name) const {
        for (size_t i = 0; i < generators.size(); ++i)
            if (generators[i].name == name) return static_cast<int>(i);
        throw Error("unknown generator '" + name + "'");
    }

    Mat3 rotation(int letter) const {
        const int g = std::abs(letter) - 1;
        if (g < 0 || g >= static_cast<int>(generators.size()))
            throw Error("deck word refers to unknown generator index");
        return axis_angle_rotation(generators[g].axis,
                                   letter > 0 ? phi : -phi);
    }

    Mat3 evaluate(const Word& w) const {
        Mat3 r = Mat3::Identity();
        for (int s : w) r = r * rotation(s);
        return r;
    }

    Word parse_word(const std::string& text) const {
        Word w;
        std::istringstream in(text);
        std::string tok;
        while (in >> tok) {
            int sign = 1;
            if (tok.size() > 3 && tok.substr(tok.size() - 3) == "^-1") {
                sign = -1;
                tok = tok.substr(0, tok.size() - 3);
            }
            w.push_back(sign * (generator_index(tok) + 1));
        }
        return reduced(w);
    }

    std::string format_word(const Word& w) const {
        std::string out;
        for (int s : w) {
            if (!out.empty()) out += ' ';
            out += generators[std::abs(s) - 1].name;
            if (s < 0) out += "^-1";
        }
        return out;
    }
};

}  // namespace tkf
