#ifndef QWELL_PROBLEM_HPP
#define QWELL_PROBLEM_HPP

#include "qwell/spectral.hpp"
#include "qwell/tensor.hpp"

#include <memory>

namespace qwell {

enum class LateralVariant { FullTarget, Relaxed };

struct AnchoringConfig {
    // Dimensional anchoring strengths, J/m^2. The dimensionless weights are
    // omega_i = W_i lambda / L and w_z = W_z lambda / L.
    double W1 = 1e-2;   // lateral walls y = +-1 (preferred director x)
    double W2 = 1e-2;   // lateral walls x = +-1 (preferred director y)
    double Wz = 1e-2;   // top and bottom plates
    double alpha_z = 1.0, gamma_z = 1.0;

    LateralVariant lateral = LateralVariant::FullTarget;
    double alpha = 1.0, gamma = 1.0;  // Relaxed variant weights

    void validate() const;
};

// Geometry, material, anchoring and discretization of one well computation.
// The well is (-1,1)^2 x (0,eps) in units of the cross-section scale lambda,
// with lambda_bar_sq = 2 C lambda^2 / L and eps = h / lambda.
struct WellProblem {
    double lambda_bar_sq = 5.0;
    double eps = 1.0;
    double delta = 0.1;  // corner-smoothing width of the wall profile g
    MaterialParams material = default_material();
    AnchoringConfig anchoring;
    std::shared_ptr<const SpectralGrid> grid;

    double lambda_m() const;       // cross-section scale in metres
    double bulk_factor() const { return lambda_bar_sq / (2.0 * material.C); }
    double omega1() const { return anchoring.W1 * lambda_m() / material.L_elastic; }
    double omega2() const { return anchoring.W2 * lambda_m() / material.L_elastic; }
    double wz() const { return anchoring.Wz * lambda_m() / material.L_elastic; }
    double s_plus() const { return qwell::s_plus(material); }

    void validate() const;

    static WellProblem make(double lambda_bar_sq, double eps,
                            const AnchoringConfig& anchoring = {},
                            const MaterialParams& material = default_material(),
                            Basis1D bx = {BasisKind::Chebyshev, 16},
                            Basis1D by = {BasisKind::Chebyshev, 16},
                            Basis1D bz = {BasisKind::Chebyshev, 8});
};

struct EnergyBreakdown {
    double elastic = 0.0;
    double bulk = 0.0;
    double surface_lateral = 0.0;
    double surface_topbottom = 0.0;
    double total = 0.0;
};

// Wall profile: s_plus on [-1+delta, 1-delta], 0 at +-1, quintic-smoothstep
// ramp (C^2) across the collars.
double g_profile(double x, double s_plus, double delta);

}

#endif
