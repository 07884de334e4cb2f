#include "qwell/lbfgs.hpp"

#include "qwell/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace qwell {

void LbfgsOptions::validate() const {
    if (memory < 1) throw std::invalid_argument("LbfgsOptions: memory >= 1");
    if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0))
        throw std::invalid_argument("LbfgsOptions: need 0 < c1 < c2 < 1");
    if (!(grad_tol > 0.0) || max_iters < 1 || max_line_evals < 2)
        throw std::invalid_argument("LbfgsOptions: bad tolerances");
}

namespace {

double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

struct Pair {
    std::vector<double> s, y;
    double rho;
};

// Cubic minimizer of a Hermite interpolant on [a, b] (Nocedal & Wright).
double cubic_step(double a, double fa, double ga, double b, double fb, double gb) {
    const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - ga * gb;
    if (disc < 0.0) return 0.5 * (a + b);
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    double t = b - (b - a) * (gb + d2 - d1) / (gb - ga + 2.0 * d2);
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (!(t > lo && t < hi)) t = 0.5 * (a + b);
    return t;
}

}

LbfgsOutcome lbfgs_minimize(const Objective& objective, std::vector<double> x0,
                            const LbfgsOptions& opts, const Projection* project,
                            const std::vector<double>* h0_diag) {
    opts.validate();
    const auto& K = kern::active_ops();
    const std::size_t n = x0.size();
    if (h0_diag && h0_diag->size() != n)
        throw std::invalid_argument("lbfgs: h0 diagonal size mismatch");

    LbfgsOutcome out;
    if (project) (*project)(x0);
    std::vector<double> x = std::move(x0);
    std::vector<double> g(n), gn(n), xn(n), d(n), pg(n);
    double f = objective(x, g);
    if (!std::isfinite(f)) throw std::invalid_argument("lbfgs: initial energy not finite");

    // With constraints the stopping norm is the projected gradient
    // x - P(x - g); it coincides with g where the bound is inactive.
    auto eff_grad_sup = [&](const std::vector<double>& xc, const std::vector<double>& gc) {
        if (!project) return sup_norm(gc);
        pg.resize(n);
        for (std::size_t i = 0; i < n; ++i) pg[i] = xc[i] - gc[i];
        (*project)(pg);
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(xc[i] - pg[i]));
        return m;
    };

    std::deque<Pair> hist;
    double gsup = eff_grad_sup(x, g);
    out.trace.push_back({0, f, gsup, 0.0});

    // Strong Wolfe bracket + zoom along d; returns the accepted step or 0.
    double fn = f;
    auto wolfe_search = [&](double a0, double dg) -> double {
        double a_prev = 0.0, f_prev = f, g_prev = dg;
        double a = a0;
        double a_lo = 0.0, a_hi = 0.0, f_lo = 0.0, g_lo = 0.0, f_hi = 0.0, g_hi = 0.0;
        bool bracketed = false;
        int evals = 0;
        while (evals < opts.max_line_evals) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + a * d[i];
            fn = objective(xn, gn);
            ++evals;
            const double dgn = K.dot(n, d.data(), gn.data());
            if (fn > f + opts.c1 * a * dg || (evals > 1 && fn >= f_prev)) {
                a_lo = a_prev; f_lo = f_prev; g_lo = g_prev;
                a_hi = a; f_hi = fn; g_hi = dgn;
                bracketed = true;
                break;
            }
            if (std::abs(dgn) <= -opts.c2 * dg) return fn <= f ? a : 0.0;
            if (dgn >= 0.0) {
                a_lo = a; f_lo = fn; g_lo = dgn;
                a_hi = a_prev; f_hi = f_prev; g_hi = g_prev;
                bracketed = true;
                break;
            }
            a_prev = a; f_prev = fn; g_prev = dgn;
            a *= 2.0;
        }
        if (!bracketed) return 0.0;
        while (evals < opts.max_line_evals) {
            const double width = std::abs(a_hi - a_lo);
            if (!(width > 1e-16 * (1.0 + std::abs(a_lo)))) break;
            a = cubic_step(a_lo, f_lo, g_lo, a_hi, f_hi, g_hi);
            const double lo = std::min(a_lo, a_hi), hi = std::max(a_lo, a_hi);
            a = std::clamp(a, lo + 0.05 * width, hi - 0.05 * width);
            for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + a * d[i];
            fn = objective(xn, gn);
            ++evals;
            const double dgn = K.dot(n, d.data(), gn.data());
            if (fn > f + opts.c1 * a * dg || fn >= f_lo) {
                a_hi = a; f_hi = fn; g_hi = dgn;
            } else {
                if (std::abs(dgn) <= -opts.c2 * dg) return fn <= f ? a : 0.0;
                if (dgn * (a_hi - a_lo) >= 0.0) {
                    a_hi = a_lo; f_hi = f_lo; g_hi = g_lo;
                }
                a_lo = a; f_lo = fn; g_lo = dgn;
            }
        }
        // bracket exhausted; take the better endpoint when it is a genuine
        // Armijo point (tail progress at the arithmetic floor)
        if (f_lo < f && a_lo > 0.0) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + a_lo * d[i];
            fn = objective(xn, gn);
            if (fn <= f_lo) return a_lo;
        }
        return 0.0;
    };

    int iter = 0;
    for (; iter < opts.max_iters && gsup > opts.grad_tol; ++iter) {
        // two-loop recursion
        d.assign(g.begin(), g.end());
        std::vector<double> alpha(hist.size());
        for (int i = static_cast<int>(hist.size()) - 1; i >= 0; --i) {
            alpha[i] = hist[i].rho * K.dot(n, hist[i].s.data(), d.data());
            K.axpy(n, -alpha[i], hist[i].y.data(), d.data());
        }
        if (h0_diag) {
            double gamma = 1.0;
            if (!hist.empty()) {
                const Pair& last = hist.back();
                double yhy = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    yhy += last.y[i] * (*h0_diag)[i] * last.y[i];
                if (yhy > 0.0) gamma = 1.0 / (last.rho * yhy);
            }
            for (std::size_t i = 0; i < n; ++i) d[i] *= gamma * (*h0_diag)[i];
        } else if (!hist.empty()) {
            const Pair& last = hist.back();
            const double yy = K.dot(n, last.y.data(), last.y.data());
            if (yy > 0.0) K.scal(n, 1.0 / (last.rho * yy), d.data());
        }
        for (std::size_t i = 0; i < hist.size(); ++i) {
            const double beta = hist[i].rho * K.dot(n, hist[i].y.data(), d.data());
            K.axpy(n, alpha[i] - beta, hist[i].s.data(), d.data());
        }
        K.scal(n, -1.0, d.data());

        bool accepted = false;
        double step = 0.0;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            if (attempt == 1) {
                // quasi-Newton direction degenerated: restart from raw
                // steepest descent, whose directional decrease stays
                // certifiable the longest
                hist.clear();
                d.assign(g.begin(), g.end());
                K.scal(n, -1.0, d.data());
            }
            const double dg = K.dot(n, d.data(), g.data());
            const double dnorm = std::sqrt(K.dot(n, d.data(), d.data()));
            const double gnorm = std::sqrt(K.dot(n, g.data(), g.data()));
            if (!(dg < -1e-12 * dnorm * gnorm)) continue;  // not a usable descent direction
            double a0 = 1.0;
            if (iter == 0 && attempt == 0 && !h0_diag)
                a0 = std::min(1.0, 1.0 / std::max(1e-12, sup_norm(g)));
            step = wolfe_search(a0, dg);
            accepted = step > 0.0;
        }

        if (accepted && project) {
            // clamp the accepted iterate onto the feasible set; when the
            // bound actually bites, re-evaluate there and drop the history
            std::vector<double> xp = xn;
            (*project)(xp);
            bool moved = false;
            for (std::size_t i = 0; i < n && !moved; ++i) moved = xp[i] != xn[i];
            if (moved) {
                xn.swap(xp);
                fn = objective(xn, gn);
                hist.clear();
                if (fn > f) {
                    accepted = false;
                    double a = step;
                    for (int evals = 0; evals < opts.max_line_evals; ++evals) {
                        for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + a * d[i];
                        (*project)(xn);
                        double dec = 0.0;
                        for (std::size_t i = 0; i < n; ++i) dec += g[i] * (xn[i] - x[i]);
                        fn = objective(xn, gn);
                        if (dec < 0.0 && fn <= f + opts.c1 * dec) {
                            accepted = true;
                            break;
                        }
                        a *= 0.5;
                    }
                    step = a;
                }
            }
        }

        if (!accepted) {
            out.line_search_failed = true;
            break;
        }

        Pair p;
        p.s.resize(n);
        p.y.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            p.s[i] = xn[i] - x[i];
            p.y[i] = gn[i] - g[i];
        }
        const double sy = K.dot(n, p.s.data(), p.y.data());
        const double ss = K.dot(n, p.s.data(), p.s.data());
        const double yy = K.dot(n, p.y.data(), p.y.data());
        if (sy > 1e-10 * std::sqrt(ss * yy) && sy > 0.0) {
            p.rho = 1.0 / sy;
            hist.push_back(std::move(p));
            if (static_cast<int>(hist.size()) > opts.memory) hist.pop_front();
        }

        x.swap(xn);
        g.swap(gn);
        f = fn;
        gsup = eff_grad_sup(x, g);
        out.trace.push_back({iter + 1, f, gsup, step});
    }

    out.x = std::move(x);
    out.f = f;
    out.grad_norm = gsup;
    out.iterations = iter;
    out.converged = gsup <= opts.grad_tol;
    return out;
}

}
