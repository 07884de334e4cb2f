#include "qwell/kernels.hpp"

// Reference kernels. Keep these straightforward: they are the ground truth
// the SIMD variant is equivalence-tested against.

namespace qwell::kern::scalar {

static void gemm(std::size_t m, std::size_t n, std::size_t k,
                 const double* a, const double* b, double* c, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        if (!accumulate)
            for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        const double* ai = a + i * k;
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = ai[l];
            if (ail == 0.0) continue;
            const double* bl = b + l * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
        }
    }
}

static double dot(std::size_t n, const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

static void axpy(std::size_t n, double alpha, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

static void scal(std::size_t n, double alpha, double* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

// Q = [[p1,p2,p3],[p2,p4,p5],[p3,p5,-p1-p4]]
static double bulk_energy(std::size_t n, const double* const p[5], const double* w,
                          double A, double B, double C) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p1 = p[0][i], p2 = p[1][i], p3 = p[2][i], p4 = p[3][i], p5 = p[4][i];
        const double q33 = -p1 - p4;
        const double t2 = 2.0 * (p1 * p1 + p4 * p4 + p1 * p4 + p2 * p2 + p3 * p3 + p5 * p5);
        const double det = p1 * (p4 * q33 - p5 * p5) - p2 * (p2 * q33 - p5 * p3)
                         + p3 * (p2 * p5 - p4 * p3);
        const double t3 = 3.0 * det;  // tr Q^3 for traceless Q
        e += w[i] * (0.5 * A * t2 - (B / 3.0) * t3 + 0.25 * C * t2 * t2);
    }
    return e;
}

static double bulk_energy_grad(std::size_t n, const double* const p[5], const double* w,
                               double A, double B, double C, double factor, double* const g[5]) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p1 = p[0][i], p2 = p[1][i], p3 = p[2][i], p4 = p[3][i], p5 = p[4][i];
        const double q33 = -p1 - p4;
        const double t2 = 2.0 * (p1 * p1 + p4 * p4 + p1 * p4 + p2 * p2 + p3 * p3 + p5 * p5);
        const double det = p1 * (p4 * q33 - p5 * p5) - p2 * (p2 * q33 - p5 * p3)
                         + p3 * (p2 * p5 - p4 * p3);
        const double t3 = 3.0 * det;
        e += w[i] * (0.5 * A * t2 - (B / 3.0) * t3 + 0.25 * C * t2 * t2);

        const double s11 = p1 * p1 + p2 * p2 + p3 * p3;          // (Q^2)_11
        const double s12 = p1 * p2 + p2 * p4 + p3 * p5;
        const double s13 = p1 * p3 + p2 * p5 + p3 * q33;
        const double s22 = p2 * p2 + p4 * p4 + p5 * p5;
        const double s23 = p2 * p3 + p4 * p5 + p5 * q33;
        const double s33 = p3 * p3 + p5 * p5 + q33 * q33;

        const double lin = A + C * t2;                           // coefficient of Q
        const double fw = factor * w[i];
        g[0][i] += fw * (lin * (p1 - q33) - B * (s11 - s33));
        g[1][i] += fw * 2.0 * (lin * p2 - B * s12);
        g[2][i] += fw * 2.0 * (lin * p3 - B * s13);
        g[3][i] += fw * (lin * (p4 - q33) - B * (s22 - s33));
        g[4][i] += fw * 2.0 * (lin * p5 - B * s23);
    }
    return e;
}

static double elastic_energy(std::size_t n, const double* const d[5], const double* w) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d1 = d[0][i], d2 = d[1][i], d3 = d[2][i], d4 = d[3][i], d5 = d[4][i];
        e += w[i] * (d1 * d1 + d4 * d4 + d1 * d4 + d2 * d2 + d3 * d3 + d5 * d5);
    }
    return e;
}

static double elastic_energy_grad(std::size_t n, const double* const d[5], const double* w,
                                  double factor, double* const g[5]) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d1 = d[0][i], d2 = d[1][i], d3 = d[2][i], d4 = d[3][i], d5 = d[4][i];
        e += w[i] * (d1 * d1 + d4 * d4 + d1 * d4 + d2 * d2 + d3 * d3 + d5 * d5);
        const double fw = factor * w[i];
        g[0][i] += fw * (2.0 * d1 + d4);
        g[1][i] += fw * 2.0 * d2;
        g[2][i] += fw * 2.0 * d3;
        g[3][i] += fw * (2.0 * d4 + d1);
        g[4][i] += fw * 2.0 * d5;
    }
    return e;
}

}

namespace qwell::kern {

const Ops& scalar_ops() {
    static const Ops ops = {
        scalar::gemm, scalar::dot, scalar::axpy, scalar::scal,
        scalar::bulk_energy, scalar::bulk_energy_grad,
        scalar::elastic_energy, scalar::elastic_energy_grad,
        "scalar",
    };
    return ops;
}

}
