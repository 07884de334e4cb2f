#ifndef QWELL_STABILITY_HPP
#define QWELL_STABILITY_HPP

#include "qwell/energy.hpp"

#include <cstdint>
#include <vector>

// Local-stability certification: smallest eigenvalue of the energy Hessian
// in the coefficient-space metric, via central-difference Hessian actions.

namespace qwell {

enum class EigenMethod { GradientFlow, Lanczos };

struct StabilityReport {
    double lambda1 = 0.0;
    EigenMethod method = EigenMethod::GradientFlow;
    double residual = 0.0;        // |H v - lambda1 v|
    bool stable = false;          // lambda1 > stab_tol
    bool converged = false;
    int iterations = 0;
    int hessian_applies = 0;
    double stab_tol = 0.0;        // 1e-6 x typical Hessian diagonal scale
    double lambda_max_est = 0.0;
    double lambda1_cross = 0.0;   // other method's estimate (certify only)
    std::vector<double> eigenvector;
};

// Central-difference Hessian action (grad F(p + l v) - grad F(p - l v)) / 2l.
// l <= 0 selects the default 1e-4 (1 + |p|) / |v|.
void hessian_vec(EnergyModel& model, const std::vector<double>& p,
                 const std::vector<double>& v, std::vector<double>& out, double l = 0.0);

StabilityReport smallest_eigenvalue(const WellProblem& prob, const std::vector<double>& p,
                                    EigenMethod method, std::uint64_t seed = 2024);

// Runs the gradient flow and cross-checks against Lanczos; the report carries
// both estimates.
StabilityReport certify_stability(const WellProblem& prob, const std::vector<double>& p,
                                  std::uint64_t seed = 2024);

}

#endif
