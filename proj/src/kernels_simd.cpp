#include "qwell/kernels.hpp"

// SIMD kernel variant built on std::experimental::simd. This translation unit
// is compiled with the target ISA enabled (AVX2+FMA on x86_64, NEON baseline
// on aarch64), so native_simd<double> maps to the wide registers. The
// dispatcher only hands out this table after a CPU feature check.

#include <experimental/simd>

namespace stdx = std::experimental;

namespace qwell::kern::simd {

using vd = stdx::native_simd<double>;
constexpr std::size_t W = vd::size();

inline vd load(const double* p) { return vd(p, stdx::element_aligned); }
inline void store(double* p, vd v) { v.copy_to(p, stdx::element_aligned); }

static void gemm(std::size_t m, std::size_t n, std::size_t k,
                 const double* a, const double* b, double* c, bool accumulate) {
    const std::size_t nv = n - n % (2 * W);
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        if (!accumulate)
            for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        const double* ai = a + i * k;
        for (std::size_t l = 0; l < k; ++l) {
            const vd al(ai[l]);
            const double* bl = b + l * n;
            std::size_t j = 0;
            for (; j < nv; j += 2 * W) {
                store(ci + j, load(ci + j) + al * load(bl + j));
                store(ci + j + W, load(ci + j + W) + al * load(bl + j + W));
            }
            for (; j < n; ++j) ci[j] += ai[l] * bl[j];
        }
    }
}

static double dot(std::size_t n, const double* x, const double* y) {
    vd acc(0.0);
    std::size_t i = 0;
    for (; i + W <= n; i += W) acc += load(x + i) * load(y + i);
    double s = stdx::reduce(acc);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

static void axpy(std::size_t n, double alpha, const double* x, double* y) {
    const vd a(alpha);
    std::size_t i = 0;
    for (; i + W <= n; i += W) store(y + i, load(y + i) + a * load(x + i));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

static void scal(std::size_t n, double alpha, double* x) {
    const vd a(alpha);
    std::size_t i = 0;
    for (; i + W <= n; i += W) store(x + i, a * load(x + i));
    for (; i < n; ++i) x[i] *= alpha;
}

template <bool WithGrad>
static double bulk_impl(std::size_t n, const double* const p[5], const double* w,
                        double A, double B, double C, double factor, double* const g[5]) {
    vd acc(0.0);
    double tail = 0.0;
    const vd vA(A), vB(B), vC(C), vfac(factor);
    std::size_t i = 0;
    for (; i + W <= n; i += W) {
        const vd p1 = load(p[0] + i), p2 = load(p[1] + i), p3 = load(p[2] + i);
        const vd p4 = load(p[3] + i), p5 = load(p[4] + i), wi = load(w + i);
        const vd q33 = -p1 - p4;
        const vd t2 = 2.0 * (p1 * p1 + p4 * p4 + p1 * p4 + p2 * p2 + p3 * p3 + p5 * p5);
        const vd det = p1 * (p4 * q33 - p5 * p5) - p2 * (p2 * q33 - p5 * p3)
                     + p3 * (p2 * p5 - p4 * p3);
        const vd t3 = 3.0 * det;
        acc += wi * (0.5 * vA * t2 - (vB / 3.0) * t3 + 0.25 * vC * t2 * t2);
        if constexpr (WithGrad) {
            const vd s11 = p1 * p1 + p2 * p2 + p3 * p3;
            const vd s12 = p1 * p2 + p2 * p4 + p3 * p5;
            const vd s13 = p1 * p3 + p2 * p5 + p3 * q33;
            const vd s22 = p2 * p2 + p4 * p4 + p5 * p5;
            const vd s23 = p2 * p3 + p4 * p5 + p5 * q33;
            const vd s33 = p3 * p3 + p5 * p5 + q33 * q33;
            const vd lin = vA + vC * t2;
            const vd fw = vfac * wi;
            store(g[0] + i, load(g[0] + i) + fw * (lin * (p1 - q33) - vB * (s11 - s33)));
            store(g[1] + i, load(g[1] + i) + fw * 2.0 * (lin * p2 - vB * s12));
            store(g[2] + i, load(g[2] + i) + fw * 2.0 * (lin * p3 - vB * s13));
            store(g[3] + i, load(g[3] + i) + fw * (lin * (p4 - q33) - vB * (s22 - s33)));
            store(g[4] + i, load(g[4] + i) + fw * 2.0 * (lin * p5 - vB * s23));
        }
    }
    for (; i < n; ++i) {
        const double p1 = p[0][i], p2 = p[1][i], p3 = p[2][i], p4 = p[3][i], p5 = p[4][i];
        const double q33 = -p1 - p4;
        const double t2 = 2.0 * (p1 * p1 + p4 * p4 + p1 * p4 + p2 * p2 + p3 * p3 + p5 * p5);
        const double det = p1 * (p4 * q33 - p5 * p5) - p2 * (p2 * q33 - p5 * p3)
                         + p3 * (p2 * p5 - p4 * p3);
        const double t3 = 3.0 * det;
        tail += w[i] * (0.5 * A * t2 - (B / 3.0) * t3 + 0.25 * C * t2 * t2);
        if constexpr (WithGrad) {
            const double s11 = p1 * p1 + p2 * p2 + p3 * p3;
            const double s12 = p1 * p2 + p2 * p4 + p3 * p5;
            const double s13 = p1 * p3 + p2 * p5 + p3 * q33;
            const double s22 = p2 * p2 + p4 * p4 + p5 * p5;
            const double s23 = p2 * p3 + p4 * p5 + p5 * q33;
            const double s33 = p3 * p3 + p5 * p5 + q33 * q33;
            const double lin = A + C * t2;
            const double fw = factor * w[i];
            g[0][i] += fw * (lin * (p1 - q33) - B * (s11 - s33));
            g[1][i] += fw * 2.0 * (lin * p2 - B * s12);
            g[2][i] += fw * 2.0 * (lin * p3 - B * s13);
            g[3][i] += fw * (lin * (p4 - q33) - B * (s22 - s33));
            g[4][i] += fw * 2.0 * (lin * p5 - B * s23);
        }
    }
    return stdx::reduce(acc) + tail;
}

static double bulk_energy(std::size_t n, const double* const p[5], const double* w,
                          double A, double B, double C) {
    return bulk_impl<false>(n, p, w, A, B, C, 0.0, nullptr);
}

static double bulk_energy_grad(std::size_t n, const double* const p[5], const double* w,
                               double A, double B, double C, double factor, double* const g[5]) {
    return bulk_impl<true>(n, p, w, A, B, C, factor, g);
}

template <bool WithGrad>
static double elastic_impl(std::size_t n, const double* const d[5], const double* w,
                           double factor, double* const g[5]) {
    vd acc(0.0);
    double tail = 0.0;
    const vd vfac(factor);
    std::size_t i = 0;
    for (; i + W <= n; i += W) {
        const vd d1 = load(d[0] + i), d2 = load(d[1] + i), d3 = load(d[2] + i);
        const vd d4 = load(d[3] + i), d5 = load(d[4] + i), wi = load(w + i);
        acc += wi * (d1 * d1 + d4 * d4 + d1 * d4 + d2 * d2 + d3 * d3 + d5 * d5);
        if constexpr (WithGrad) {
            const vd fw = vfac * wi;
            store(g[0] + i, load(g[0] + i) + fw * (2.0 * d1 + d4));
            store(g[1] + i, load(g[1] + i) + fw * 2.0 * d2);
            store(g[2] + i, load(g[2] + i) + fw * 2.0 * d3);
            store(g[3] + i, load(g[3] + i) + fw * (2.0 * d4 + d1));
            store(g[4] + i, load(g[4] + i) + fw * 2.0 * d5);
        }
    }
    for (; i < n; ++i) {
        const double d1 = d[0][i], d2 = d[1][i], d3 = d[2][i], d4 = d[3][i], d5 = d[4][i];
        tail += w[i] * (d1 * d1 + d4 * d4 + d1 * d4 + d2 * d2 + d3 * d3 + d5 * d5);
        if constexpr (WithGrad) {
            const double fw = factor * w[i];
            g[0][i] += fw * (2.0 * d1 + d4);
            g[1][i] += fw * 2.0 * d2;
            g[2][i] += fw * 2.0 * d3;
            g[3][i] += fw * (2.0 * d4 + d1);
            g[4][i] += fw * 2.0 * d5;
        }
    }
    return stdx::reduce(acc) + tail;
}

static double elastic_energy(std::size_t n, const double* const d[5], const double* w) {
    return elastic_impl<false>(n, d, w, 0.0, nullptr);
}

static double elastic_energy_grad(std::size_t n, const double* const d[5], const double* w,
                                  double factor, double* const g[5]) {
    return elastic_impl<true>(n, d, w, factor, g);
}

}

namespace qwell::kern {

const Ops& simd_variant_ops() {
    static const Ops ops = {
        simd::gemm, simd::dot, simd::axpy, simd::scal,
        simd::bulk_energy, simd::bulk_energy_grad,
        simd::elastic_energy, simd::elastic_energy_grad,
#if defined(__AVX2__)
        "avx2",
#elif defined(__aarch64__)
        "neon",
#else
        "simd",
#endif
    };
    return ops;
}

}
