#pragma once

#include <stdexcept>
#include <string>

namespace tkf {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// -- combinatorial input -----------------------------------------------------
struct UngluedFace : Error { using Error::Error; };
struct NonInvolutiveGluing : Error { using Error::Error; };
struct OrientationInconsistent : Error { using Error::Error; };
struct KnotNotACycle : Error { using Error::Error; };

// -- geometry ----------------------------------------------------------------
struct DegenerateTetrahedron : Error { using Error::Error; };
struct CoincidentPoints : Error { using Error::Error; };

// -- covering / lift ---------------------------------------------------------
struct InconsistentLift : Error { using Error::Error; };
struct NotALoop : Error { using Error::Error; };
struct SamplingExhausted : Error { using Error::Error; };

// -- linear algebra ----------------------------------------------------------
struct NotAComplex : Error { using Error::Error; };
struct NotAcyclic : Error { using Error::Error; };
struct SingularMinorChain : Error { using Error::Error; };

// -- invariant / moves -------------------------------------------------------
struct InvariantUnstable : Error { using Error::Error; };
struct MoveNotApplicable : Error { using Error::Error; };
struct WouldTouchKnot : Error { using Error::Error; };

// -- io ----------------------------------------------------------------------
struct ParseError : Error { using Error::Error; };

}  // namespace tkf
