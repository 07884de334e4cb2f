#ifndef QWELL_LBFGS_HPP
#define QWELL_LBFGS_HPP

#include <functional>
#include <vector>

// Limited-memory BFGS with a strong-Wolfe line search, plus a projected
// variant (Armijo backtracking along the projected path) for bound
// constraints handled by clamping.

namespace qwell {

struct LbfgsOptions {
    int memory = 10;
    double grad_tol = 1e-8;   // sup-norm stopping threshold
    int max_iters = 20000;
    double c1 = 1e-4;         // sufficient decrease
    double c2 = 0.9;          // curvature
    int max_line_evals = 60;

    void validate() const;  // throws std::invalid_argument
};

struct LbfgsTraceRow {
    int iter;
    double energy;
    double grad_norm;  // sup-norm
    double step;
};

struct LbfgsOutcome {
    std::vector<double> x;
    double f = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    bool line_search_failed = false;
    std::vector<LbfgsTraceRow> trace;
};

// objective(x, grad) -> f with grad overwritten (same size as x).
using Objective = std::function<double(const std::vector<double>&, std::vector<double>&)>;
// project(x): clamp x onto the feasible set in place.
using Projection = std::function<void(std::vector<double>&)>;

// h0_diag, when given, seeds the two-loop recursion with a diagonal inverse
// Hessian estimate (rescaled by the usual secant factor each iteration).
LbfgsOutcome lbfgs_minimize(const Objective& objective, std::vector<double> x0,
                            const LbfgsOptions& opts, const Projection* project = nullptr,
                            const std::vector<double>* h0_diag = nullptr);

}

#endif
