#ifndef QWELL_CLASSIFY_HPP
#define QWELL_CLASSIFY_HPP

#include "qwell/problem.hpp"

#include <string>

// Mechanized taxonomy of converged well configurations. Thresholds are fixed
// here so classifications are reproducible; they separate the families by
// orders of magnitude on converged fields.

namespace qwell {

enum class SolutionClass {
    WORS,
    Diagonal,
    Rotated,
    Mixed3D,
    BD,
    EscapedPlus,
    EscapedMinus,
    Unknown,
};

const char* to_string(SolutionClass c);

enum class SliceClass { DiagonalNE, DiagonalNW, Other };

struct ClassifyFeatures {
    double z_variation = 0.0;      // mean |dQ/dz|^2
    double q1_diag_sup = 0.0;      // axis-frame q1 on the square diagonals
    double q2_sup = 0.0;           // axis-frame q2 over the sampled volume
    double q2_mid_sup = 0.0;       // axis-frame q2 on the midplane
    double q45_sup = 0.0;          // out-of-plane couplings
    double center_q3 = 0.0;        // axis-frame q3 at the well centre
    double boundary_winding = 0.0; // of the doubled director angle, inset loop
    double center_winding = 0.0;   // of the doubled director angle, core circle
    double angle_coverage = 0.0;   // fraction of director angles hit on the loop
    double sign_pattern_frac = 1.0;
    double director_dev_diag = 0.0;    // mean angle from the NE diagonal (rad)
    double boundary_dev_diag = 0.0;    // same, boundary loop only
    SliceClass top = SliceClass::Other;
    SliceClass bottom = SliceClass::Other;
};

SolutionClass classify(const SpectralField& f, const WellProblem& prob,
                       ClassifyFeatures* features = nullptr);

}

#endif
