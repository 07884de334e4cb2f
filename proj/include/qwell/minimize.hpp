#ifndef QWELL_MINIMIZE_HPP
#define QWELL_MINIMIZE_HPP

#include "qwell/energy.hpp"
#include "qwell/initial.hpp"
#include "qwell/lbfgs.hpp"

#include <string>

namespace qwell {

struct MinimizeResult {
    SpectralField field;
    EnergyBreakdown breakdown;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<LbfgsTraceRow> trace;
};

MinimizeResult minimize_well(const WellProblem& prob, const SpectralField& start,
                             const LbfgsOptions& opts = {});
MinimizeResult minimize_well(const WellProblem& prob, const InitialCondition& ic,
                             const LbfgsOptions& opts = {});

// CSV iterate log: iter,energy,grad_norm,step
void write_iterate_log(const std::vector<LbfgsTraceRow>& trace, const std::string& path);

// Mean of |dQ/dz|^2 over the well (volume quadrature).
double mean_dz_sq(const SpectralField& f);

// Sup of |Q| (Frobenius) over the collocation nodes.
double sup_norm_Q(const SpectralField& f);

// Explicit uniform bound M on |Q| for weak-anchoring equilibria: the larger
// of the quartic-positivity radius shifted by s_plus/2 and
// (sqrt(2/3) + 1/2) s_plus.
double max_principle_bound(const MaterialParams& m);

// Per-coefficient Hessian diagonal estimate (elastic + bulk + surface
// stiffness scales); used to seed quasi-Newton and eigen iterations.
std::vector<double> hessian_diag_estimate(const WellProblem& prob);

}

#endif
