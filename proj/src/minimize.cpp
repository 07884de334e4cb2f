#include "qwell/minimize.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace qwell {

// Diagonal Hessian estimate per coefficient: elastic stiffness of the basis
// product plus bulk and surface curvature scales. The spectral operator
// spans several decades of stiffness, so both the minimizer and the
// eigenvalue iterations are seeded from this.
std::vector<double> hessian_diag_estimate(const WellProblem& prob) {
    const SpectralGrid& g = *prob.grid;
    auto moments = [](const GridAxis& a, std::vector<double>& b, std::vector<double>& dd) {
        const int nf = a.nf();
        b.assign(nf, 0.0);
        dd.assign(nf, 0.0);
        for (int k = 0; k < nf; ++k)
            for (int q = 0; q < a.nq; ++q) {
                b[k] += a.w[q] * a.S[q * nf + k] * a.S[q * nf + k];
                dd[k] += a.w[q] * a.D[q * nf + k] * a.D[q * nf + k];
            }
    };
    std::vector<double> bx, ax, by, ay, bz, az;
    moments(g.ax, bx, ax);
    moments(g.ay, by, ay);
    moments(g.az, bz, az);

    auto wall_sq = [](const GridAxis& a, bool max_side, int k) {
        const int q = (a.basis.kind == BasisKind::Fourier) ? 0 : (max_side ? a.nq - 1 : 0);
        const double v = a.S[static_cast<std::size_t>(q) * a.nf() + k];
        return v * v;
    };

    const double sp = s_plus(prob.material);
    const double bulk_curv =
        prob.bulk_factor() * 2.0 * (std::abs(prob.material.A) + prob.material.B * sp);
    const double om1 = prob.anchoring.W1 > 0 ? prob.omega1() : 0.0;
    const double om2 = prob.anchoring.W2 > 0 ? prob.omega2() : 0.0;
    const double wza = prob.anchoring.Wz > 0
                           ? prob.wz() * std::max(prob.anchoring.alpha_z, prob.anchoring.gamma_z)
                           : 0.0;

    const int fx = g.ax.nf(), fy = g.ay.nf(), fz = g.az.nf();
    std::vector<double> diag(static_cast<std::size_t>(prob.grid->dof_total()));
    std::size_t idx = 0;
    for (int c = 0; c < 5; ++c)
        for (int l = 0; l < fx; ++l)
            for (int m = 0; m < fy; ++m)
                for (int n = 0; n < fz; ++n) {
                    double v = 2.0 * (ax[l] * by[m] * bz[n] + bx[l] * ay[m] * bz[n] +
                                      bx[l] * by[m] * az[n]);
                    v += bulk_curv * bx[l] * by[m] * bz[n];
                    v += 2.0 * om1 * (wall_sq(g.ay, false, m) + wall_sq(g.ay, true, m)) *
                         bx[l] * bz[n];
                    v += 2.0 * om2 * (wall_sq(g.ax, false, l) + wall_sq(g.ax, true, l)) *
                         by[m] * bz[n];
                    v += 2.0 * wza * (wall_sq(g.az, false, n) + wall_sq(g.az, true, n)) *
                         bx[l] * by[m];
                    diag[idx++] = v;
                }
    return diag;
}

MinimizeResult minimize_well(const WellProblem& prob, const SpectralField& start,
                             const LbfgsOptions& opts) {
    if (!start.grid || !start.grid->same_layout(*prob.grid))
        throw std::invalid_argument("minimize_well: start field grid differs from problem");
    EnergyModel model(prob);
    // Optimize the energy above the uniform bulk minimum: the constant shift
    // keeps line-search decreases resolvable in double precision.
    const double fb_min =
        bulk_potential(QTensor::uniaxial(prob.s_plus(), {1.0, 0.0, 0.0}), prob.material);
    const double e_ref = prob.bulk_factor() * fb_min * 4.0 * prob.eps;
    Objective obj = [&model, e_ref](const std::vector<double>& x, std::vector<double>& g) {
        return model.energy_grad(x, g) - e_ref;
    };
    std::vector<double> h0 = hessian_diag_estimate(prob);
    for (auto& v : h0) v = 1.0 / std::max(v, 1e-300);
    LbfgsOutcome out = lbfgs_minimize(obj, start.coeffs, opts, nullptr, &h0);

    MinimizeResult r;
    r.field = SpectralField::zeros(prob.grid);
    r.field.coeffs = std::move(out.x);
    model.energy(r.field.coeffs, &r.breakdown);
    r.grad_norm = out.grad_norm;
    r.iterations = out.iterations;
    r.converged = out.converged;
    r.trace = std::move(out.trace);
    return r;
}

MinimizeResult minimize_well(const WellProblem& prob, const InitialCondition& ic,
                             const LbfgsOptions& opts) {
    return minimize_well(prob, make_initial(ic, prob), opts);
}

void write_iterate_log(const std::vector<LbfgsTraceRow>& trace, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.precision(17);
    os << "iter,energy,grad_norm,step\n";
    for (const auto& row : trace)
        os << row.iter << ',' << row.energy << ',' << row.grad_norm << ',' << row.step << '\n';
}

double mean_dz_sq(const SpectralField& f) {
    const SpectralGrid& g = *f.grid;
    CollocationValues cv = synthesize(f);
    const std::size_t n = static_cast<std::size_t>(g.n_nodes_total());
    std::vector<double> density(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d1 = cv.dz[0][i], d2 = cv.dz[1][i], d3 = cv.dz[2][i],
                     d4 = cv.dz[3][i], d5 = cv.dz[4][i];
        density[i] = 2.0 * (d1 * d1 + d4 * d4 + d1 * d4 + d2 * d2 + d3 * d3 + d5 * d5);
    }
    return g.integrate_volume(density) / (4.0 * g.eps);
}

double sup_norm_Q(const SpectralField& f) {
    CollocationValues cv = synthesize(f);
    const std::size_t n = cv.v[0].size();
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        QTensor q;
        for (int c = 0; c < 5; ++c) q[c] = cv.v[c][i];
        sup = std::max(sup, q.norm());
    }
    return sup;
}

double max_principle_bound(const MaterialParams& m) {
    const double sp = s_plus(m);
    const double root23 = std::sqrt(2.0 / 3.0);
    // Scalar lower bound of the quartic right-hand side driving the maximum
    // principle; positive beyond its largest root.
    auto phi = [&](double r) {
        return m.A * r * r - m.B * r * r * r / std::sqrt(6.0) + m.C * r * r * r * r
             + 0.5 * sp * (-(std::abs(m.A) + m.C * r * r) * root23 * r
                           - (2.0 / 3.0) * m.B * r * r + (m.B / 3.0) * r * r);
    };
    const double rmax = 20.0 * sp + 1.0;
    double last_cross = 0.0;
    const int steps = 200000;
    double prev = phi(0.0);
    for (int i = 1; i <= steps; ++i) {
        const double r = rmax * i / steps;
        const double cur = phi(r);
        if (prev <= 0.0 && cur > 0.0) last_cross = r;
        prev = cur;
    }
    const double m1 = last_cross;
    return std::max(m1 + 0.5 * sp, (root23 + 0.5) * sp);
}

}
