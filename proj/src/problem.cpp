#include "qwell/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace qwell {

void AnchoringConfig::validate() const {
    if (W1 < 0.0 || W2 < 0.0 || Wz < 0.0)
        throw std::domain_error("AnchoringConfig: anchoring strengths must be >= 0");
    if (Wz > 0.0 && (alpha_z <= 0.0 || gamma_z <= 0.0))
        throw std::domain_error("AnchoringConfig: alpha_z, gamma_z must be positive");
    if (lateral == LateralVariant::Relaxed && (alpha <= 0.0 || gamma < 0.0))
        throw std::domain_error("AnchoringConfig: relaxed weights out of range");
}

double WellProblem::lambda_m() const {
    return std::sqrt(lambda_bar_sq * material.L_elastic / (2.0 * material.C));
}

void WellProblem::validate() const {
    material.validate();
    anchoring.validate();
    if (!(lambda_bar_sq > 0.0)) throw std::domain_error("WellProblem: lambda_bar_sq > 0");
    if (!(eps > 0.0)) throw std::domain_error("WellProblem: eps > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("WellProblem: delta in (0,1)");
    if (!grid) throw std::domain_error("WellProblem: missing grid");
}

WellProblem WellProblem::make(double lambda_bar_sq, double eps,
                              const AnchoringConfig& anchoring,
                              const MaterialParams& material,
                              Basis1D bx, Basis1D by, Basis1D bz) {
    WellProblem p;
    p.lambda_bar_sq = lambda_bar_sq;
    p.eps = eps;
    p.material = material;
    p.anchoring = anchoring;
    p.grid = std::make_shared<SpectralGrid>(SpectralGrid::make(bx, by, bz, eps));
    p.validate();
    return p;
}

double g_profile(double x, double s_plus, double delta) {
    const double a = std::abs(x);
    if (a >= 1.0) return 0.0;
    if (a <= 1.0 - delta) return s_plus;
    const double u = (1.0 - a) / delta;  // 0 at the wall end, 1 at the plateau
    const double s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
    return s_plus * s;
}

}
