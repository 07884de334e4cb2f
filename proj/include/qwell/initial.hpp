#ifndef QWELL_INITIAL_HPP
#define QWELL_INITIAL_HPP

#include "qwell/problem.hpp"

#include <cstdint>

namespace qwell {

enum class InitKind {
    Diagonal,      // director (1,1,0)/sqrt(2)
    DiagonalAlt,   // director (1,-1,0)/sqrt(2)
    Rotated,       // director angle rotating by pi between y = -1 and y = +1
    RotatedX,      // rotating between x = -1 and x = +1
    WORS,          // constant-eigenframe cross with defect lines on the diagonals
    Mixed,         // mixed_top above z = eps/2, mixed_bottom below
    EscapedMinus,  // -1 in-plane vortex escaping into z near the axis
    EscapedPlus,
    Isotropic,
    Random,
};

struct InitialCondition {
    InitKind kind = InitKind::Diagonal;
    InitKind mixed_top = InitKind::Diagonal;
    InitKind mixed_bottom = InitKind::DiagonalAlt;
    std::uint64_t seed = 1;
};

const char* to_string(InitKind k);
InitKind init_kind_from_string(const std::string& s);

// Analytic profile before band projection (Random has no pointwise profile
// and is generated directly in coefficient space).
QTensor initial_profile(const InitialCondition& ic, const WellProblem& prob,
                        double x, double y, double z);

// Profile evaluated at the quadrature nodes and projected onto the band.
SpectralField make_initial(const InitialCondition& ic, const WellProblem& prob);

}

#endif
