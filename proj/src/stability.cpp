#include "qwell/stability.hpp"

#include "qwell/kernels.hpp"
#include "qwell/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qwell {

namespace {

double norm2(const std::vector<double>& v) {
    return std::sqrt(kern::active_ops().dot(v.size(), v.data(), v.data()));
}

void normalize(std::vector<double>& v) {
    const double n = norm2(v);
    if (n > 0.0) kern::active_ops().scal(v.size(), 1.0 / n, v.data());
}

std::vector<double> random_unit(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    normalize(v);
    return v;
}

struct HessOp {
    EnergyModel& model;
    const std::vector<double>& p;
    double pnorm;
    int applies = 0;
    std::vector<double> xp, gp, gm;

    HessOp(EnergyModel& m, const std::vector<double>& point)
        : model(m), p(point), pnorm(0.0) {
        pnorm = std::sqrt(kern::active_ops().dot(p.size(), p.data(), p.data()));
    }

    void apply(const std::vector<double>& v, std::vector<double>& out, double l = 0.0) {
        const auto& K = kern::active_ops();
        const std::size_t n = p.size();
        const double vnorm = std::sqrt(K.dot(n, v.data(), v.data()));
        if (vnorm == 0.0) throw std::invalid_argument("hessian_vec: v must be nonzero");
        if (l <= 0.0) l = 1e-4 * (1.0 + pnorm) / vnorm;
        xp.resize(n);
        for (std::size_t i = 0; i < n; ++i) xp[i] = p[i] + l * v[i];
        model.energy_grad(xp, gp);
        for (std::size_t i = 0; i < n; ++i) xp[i] = p[i] - l * v[i];
        model.energy_grad(xp, gm);
        out.resize(n);
        const double inv = 1.0 / (2.0 * l);
        for (std::size_t i = 0; i < n; ++i) out[i] = (gp[i] - gm[i]) * inv;
        ++applies;
    }
};

// Largest-magnitude eigenvalue estimate by power iteration (the Hessian
// spectrum here is dominated by its positive end).
double estimate_lambda_max(HessOp& op, std::size_t n, std::uint64_t seed) {
    std::vector<double> v = random_unit(n, seed ^ 0x9e3779b97f4a7c15ULL), hv;
    double lam = 1.0;
    for (int it = 0; it < 12; ++it) {
        op.apply(v, hv);
        lam = std::abs(kern::active_ops().dot(n, hv.data(), v.data()));
        v = hv;
        normalize(v);
    }
    return std::max(lam, 1e-30);
}

// Mean Hessian diagonal estimate (Hutchinson probe with a Rademacher vector).
double estimate_diag_scale(HessOp& op, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
    std::vector<double> v(n), hv;
    for (auto& x : v) x = (rng() & 1u) ? 1.0 : -1.0;
    op.apply(v, hv);
    return std::abs(kern::active_ops().dot(n, hv.data(), v.data())) / static_cast<double>(n);
}

// Smallest eigenpair of a symmetric tridiagonal matrix: Sturm-sequence
// bisection for the value, inverse iteration for the vector.
double tridiag_smallest(const std::vector<double>& alpha, const std::vector<double>& beta,
                        std::vector<double>& y) {
    const int m = static_cast<int>(alpha.size());
    auto count_below = [&](double x) {
        int count = 0;
        double d = 1.0;
        for (int i = 0; i < m; ++i) {
            const double b2 = i == 0 ? 0.0 : beta[i - 1] * beta[i - 1];
            d = alpha[i] - x - b2 / (d == 0.0 ? 1e-300 : d);
            if (d < 0.0) ++count;
        }
        return count;
    };
    double lo = alpha[0], hi = alpha[0];
    for (int i = 0; i < m; ++i) {
        const double r = (i > 0 ? std::abs(beta[i - 1]) : 0.0) +
                         (i + 1 < m ? std::abs(beta[i]) : 0.0);
        lo = std::min(lo, alpha[i] - r);
        hi = std::max(hi, alpha[i] + r);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    const double theta = 0.5 * (lo + hi);

    y.assign(m, 1.0 / std::sqrt(static_cast<double>(m)));
    std::vector<double> dl(m), du(m), dd(m);
    const double shift = theta - 1e-10 * (1.0 + std::abs(theta));
    for (int pass = 0; pass < 3; ++pass) {
        for (int i = 0; i < m; ++i) {
            dd[i] = alpha[i] - shift;
            dl[i] = i > 0 ? beta[i - 1] : 0.0;
            du[i] = i + 1 < m ? beta[i] : 0.0;
        }
        std::vector<double> rhs = y;
        for (int i = 1; i < m; ++i) {
            const double w = dl[i] / (dd[i - 1] == 0.0 ? 1e-300 : dd[i - 1]);
            dd[i] -= w * du[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        y[m - 1] = rhs[m - 1] / (dd[m - 1] == 0.0 ? 1e-300 : dd[m - 1]);
        for (int i = m - 2; i >= 0; --i)
            y[i] = (rhs[i] - du[i] * y[i + 1]) / (dd[i] == 0.0 ? 1e-300 : dd[i]);
        double n2 = 0.0;
        for (double v : y) n2 += v * v;
        const double inv = 1.0 / std::sqrt(n2);
        for (double& v : y) v *= inv;
    }
    return theta;
}

// Eigenvalues/vectors of a small dense symmetric matrix by cyclic Jacobi.
void small_jacobi(int m, double* a, double* q, int lda) {
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) q[i * lda + j] = (i == j) ? 1.0 : 0.0;
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < m - 1; ++i)
            for (int j = i + 1; j < m; ++j) off += std::abs(a[i * lda + j]);
        if (off < 1e-14) break;
        for (int i = 0; i < m - 1; ++i)
            for (int j = i + 1; j < m; ++j) {
                if (a[i * lda + j] == 0.0) continue;
                const double theta = (a[j * lda + j] - a[i * lda + i]) / (2.0 * a[i * lda + j]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < m; ++k) {
                    const double aki = a[k * lda + i], akj = a[k * lda + j];
                    a[k * lda + i] = c * aki - s * akj;
                    a[k * lda + j] = s * aki + c * akj;
                }
                for (int k = 0; k < m; ++k) {
                    const double aik = a[i * lda + k], ajk = a[j * lda + k];
                    a[i * lda + k] = c * aik - s * ajk;
                    a[j * lda + k] = s * aik + c * ajk;
                }
                for (int k = 0; k < m; ++k) {
                    const double qki = q[k * lda + i], qkj = q[k * lda + j];
                    q[k * lda + i] = c * qki - s * qkj;
                    q[k * lda + j] = s * qki + c * qkj;
                }
            }
    }
}

// Normalized Rayleigh-quotient descent of the block form: each step the new
// iterates are the locally optimal combinations (Rayleigh-Ritz) over
// span{V, P (HV - V Theta), previous step}. A small block wades through the
// clustered bottom of the spectrum far faster than a single vector; the
// reported quantity is still the plain coefficient-space Rayleigh quotient.
StabilityReport run_gradient_flow(HessOp& op, std::size_t n, std::uint64_t seed,
                                  double lam_max, const std::vector<double>* precond) {
    const auto& K = kern::active_ops();
    StabilityReport rep;
    rep.method = EigenMethod::GradientFlow;
    rep.lambda_max_est = lam_max;

    constexpr int nb = 4;
    constexpr int mcap = 3 * nb;
    std::vector<std::vector<double>> V(nb), HV(nb), P, HP;
    for (int b = 0; b < nb; ++b) {
        V[b] = random_unit(n, seed + 101 * static_cast<std::uint64_t>(b));
        for (int c = 0; c < b; ++c)
            K.axpy(n, -K.dot(n, V[b].data(), V[c].data()), V[c].data(), V[b].data());
        normalize(V[b]);
        HV[b].resize(n);
        op.apply(V[b], HV[b]);
    }
    double theta0 = K.dot(n, HV[0].data(), V[0].data());
    const double rtol_step = 1e-8 * std::max(std::abs(theta0), 1.0);
    std::vector<double> r(n);
    const int max_iters = 1000;
    int it = 0;
    int settled = 0;
    double resid0 = 0.0;
    for (; it < max_iters; ++it) {
        // Ritz values of the current block
        std::vector<double> theta(nb);
        for (int b = 0; b < nb; ++b) theta[b] = K.dot(n, HV[b].data(), V[b].data());
        for (std::size_t i = 0; i < n; ++i) r[i] = HV[0][i] - theta[0] * V[0][i];
        resid0 = norm2(r);
        if (resid0 <= 3e-3 * std::max(std::abs(theta[0]), 1e-4 * lam_max)) {
            theta0 = theta[0];
            rep.converged = true;
            break;
        }

        // candidate basis: V, preconditioned residuals, previous directions.
        // Orthonormalization coefficients are replayed on the stored H
        // products, so only the residual block needs fresh Hessian actions.
        std::vector<std::vector<double>> S, HS;
        auto push = [&](std::vector<double> w, std::vector<double>* hw) {
            std::vector<double> hwv;
            const bool have = hw != nullptr;
            if (have) hwv = std::move(*hw);
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t s = 0; s < S.size(); ++s) {
                    const double c = K.dot(n, w.data(), S[s].data());
                    K.axpy(n, -c, S[s].data(), w.data());
                    if (have) K.axpy(n, -c, HS[s].data(), hwv.data());
                }
                const double nn = norm2(w);
                if (nn < 1e-10) return;
                K.scal(n, 1.0 / nn, w.data());
                if (have) K.scal(n, 1.0 / nn, hwv.data());
            }
            if (!have) {
                hwv.resize(n);
                op.apply(w, hwv);
            }
            S.push_back(std::move(w));
            HS.push_back(std::move(hwv));
        };
        for (int b = 0; b < nb; ++b) {
            std::vector<double> hv = HV[b];
            push(V[b], &hv);
        }
        for (int b = 0; b < nb; ++b) {
            std::vector<double> z(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double res = HV[b][i] - theta[b] * V[b][i];
                z[i] = precond ? (*precond)[i] * res : res;
            }
            push(std::move(z), nullptr);
        }
        for (std::size_t b = 0; b < P.size(); ++b) {
            std::vector<double> hp = HP.size() > b ? std::move(HP[b]) : std::vector<double>();
            push(std::move(P[b]), hp.empty() ? nullptr : &hp);
        }

        const int m = static_cast<int>(S.size());
        double A[mcap * mcap] = {0}, Q[mcap * mcap] = {0};
        for (int i = 0; i < m; ++i)
            for (int j = 0; j <= i; ++j)
                A[i * mcap + j] = A[j * mcap + i] = K.dot(n, HS[i].data(), S[j].data());
        small_jacobi(m, A, Q, mcap);
        int order[mcap];
        for (int i = 0; i < m; ++i) order[i] = i;
        std::sort(order, order + m,
                  [&](int a1, int a2) { return A[a1 * mcap + a1] < A[a2 * mcap + a2]; });

        std::vector<std::vector<double>> Vn(nb), HVn(nb), Pn(nb), HPn(nb);
        for (int b = 0; b < nb; ++b) {
            Vn[b].assign(n, 0.0);
            HVn[b].assign(n, 0.0);
            Pn[b].assign(n, 0.0);
            HPn[b].assign(n, 0.0);
            const int col = order[std::min(b, m - 1)];
            for (int i = 0; i < m; ++i) {
                const double c = Q[i * mcap + col];
                K.axpy(n, c, S[i].data(), Vn[b].data());
                K.axpy(n, c, HS[i].data(), HVn[b].data());
                if (i >= nb) {
                    K.axpy(n, c, S[i].data(), Pn[b].data());
                    K.axpy(n, c, HS[i].data(), HPn[b].data());
                }
            }
        }
        const double thetan = A[order[0] * mcap + order[0]];
        const double dR = std::abs(theta[0] - thetan);
        V.swap(Vn);
        HV.swap(HVn);
        P.swap(Pn);
        HP.swap(HPn);
        theta0 = thetan;
        if (dR < rtol_step) {
            if (++settled >= 8) {  // quotient stationary per unit step
                rep.converged = true;
                ++it;
                break;
            }
        } else {
            settled = 0;
        }
    }
    normalize(V[0]);
    op.apply(V[0], HV[0]);
    theta0 = K.dot(n, HV[0].data(), V[0].data());
    for (std::size_t i = 0; i < n; ++i) r[i] = HV[0][i] - theta0 * V[0][i];
    rep.lambda1 = theta0;
    rep.residual = norm2(r);
    rep.iterations = it;
    rep.eigenvector = std::move(V[0]);
    return rep;
}

StabilityReport run_lanczos(HessOp& op, std::size_t n, std::uint64_t seed, double lam_max,
                            const std::vector<double>* start) {
    const auto& K = kern::active_ops();
    StabilityReport rep;
    rep.method = EigenMethod::Lanczos;
    rep.lambda_max_est = lam_max;

    const int m_max = static_cast<int>(std::min<std::size_t>(n, 400));
    std::vector<std::vector<double>> V;
    std::vector<double> alpha, beta, y;
    if (start && start->size() == n) {
        std::vector<double> v0 = *start;
        normalize(v0);
        V.push_back(std::move(v0));
    } else {
        V.push_back(random_unit(n, seed));
    }
    std::vector<double> w(n);
    double theta = 0.0, resid = 0.0;
    int j = 0;
    for (; j < m_max; ++j) {
        op.apply(V[j], w);
        const double a = K.dot(n, w.data(), V[j].data());
        alpha.push_back(a);
        K.axpy(n, -a, V[j].data(), w.data());
        if (j > 0) K.axpy(n, -beta[j - 1], V[j - 1].data(), w.data());
        for (const auto& vk : V) {  // full reorthogonalization
            const double c = K.dot(n, w.data(), vk.data());
            K.axpy(n, -c, vk.data(), w.data());
        }
        const double b = norm2(w);
        theta = tridiag_smallest(alpha, beta, y);
        resid = std::abs(b * y.back());
        if (resid <= 1e-4 * std::max(1.0, std::abs(theta)) || b < 1e-13 * lam_max) {
            rep.converged = true;
            ++j;
            break;
        }
        beta.push_back(b);
        std::vector<double> next = w;
        K.scal(n, 1.0 / b, next.data());
        V.push_back(std::move(next));
    }
    rep.lambda1 = theta;
    rep.residual = resid;
    rep.iterations = j;
    // assemble the Ritz vector for reporting
    rep.eigenvector.assign(n, 0.0);
    for (std::size_t k = 0; k < y.size() && k < V.size(); ++k)
        K.axpy(n, y[k], V[k].data(), rep.eigenvector.data());
    normalize(rep.eigenvector);
    return rep;
}

std::vector<double> eigen_precond(const WellProblem& prob) {
    std::vector<double> p = hessian_diag_estimate(prob);
    for (auto& v : p) v = 1.0 / std::max(v, 1e-300);
    return p;
}

}

void hessian_vec(EnergyModel& model, const std::vector<double>& p,
                 const std::vector<double>& v, std::vector<double>& out, double l) {
    HessOp op(model, p);
    op.apply(v, out, l);
}

StabilityReport smallest_eigenvalue(const WellProblem& prob, const std::vector<double>& p,
                                    EigenMethod method, std::uint64_t seed) {
    EnergyModel model(prob);
    HessOp op(model, p);
    const std::size_t n = p.size();
    const double lam_max = estimate_lambda_max(op, n, seed);
    const double diag_scale = estimate_diag_scale(op, n, seed);
    StabilityReport rep;
    if (method == EigenMethod::GradientFlow) {
        const std::vector<double> pc = eigen_precond(prob);
        rep = run_gradient_flow(op, n, seed, lam_max, &pc);
    } else {
        // seed Lanczos with a short preconditioned descent so the Krylov
        // space starts inside the soft subspace
        const std::vector<double> pc = eigen_precond(prob);
        StabilityReport warm = run_gradient_flow(op, n, seed, lam_max, &pc);
        rep = run_lanczos(op, n, seed, lam_max, &warm.eigenvector);
    }
    rep.stab_tol = 1e-6 * diag_scale;
    rep.stable = rep.lambda1 > rep.stab_tol;
    rep.hessian_applies = op.applies;
    return rep;
}

StabilityReport certify_stability(const WellProblem& prob, const std::vector<double>& p,
                                  std::uint64_t seed) {
    EnergyModel model(prob);
    HessOp op(model, p);
    const std::size_t n = p.size();
    const double lam_max = estimate_lambda_max(op, n, seed);
    const double diag_scale = estimate_diag_scale(op, n, seed);
    const std::vector<double> pc = eigen_precond(prob);
    StabilityReport rep = run_gradient_flow(op, n, seed, lam_max, &pc);
    StabilityReport cross = run_lanczos(op, n, seed, lam_max, &rep.eigenvector);
    rep.lambda1_cross = cross.lambda1;
    rep.stab_tol = 1e-6 * diag_scale;
    rep.stable = rep.lambda1 > rep.stab_tol;
    rep.hessian_applies = op.applies;
    return rep;
}

}
