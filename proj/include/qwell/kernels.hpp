#ifndef QWELL_KERNELS_HPP
#define QWELL_KERNELS_HPP

#include <cstddef>
#include <string>

// Hot numerical loops, provided as a scalar reference implementation and a
// SIMD variant selected at runtime. Both obey identical contracts; the SIMD
// path may reassociate sums, so results agree to rounding, not bitwise.

namespace qwell::kern {

struct Ops {
    // C (MxN, row-major) = A (MxK) * B (KxN), overwriting or accumulating.
    void (*gemm)(std::size_t m, std::size_t n, std::size_t k,
                 const double* a, const double* b, double* c, bool accumulate);

    double (*dot)(std::size_t n, const double* x, const double* y);
    void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
    void (*scal)(std::size_t n, double alpha, double* x);

    // Landau-de Gennes bulk density f_b = A/2 tr Q^2 - B/3 tr Q^3 + C/4 (tr Q^2)^2
    // evaluated at every node of a five-component field; returns sum_i w[i]*f_b[i].
    double (*bulk_energy)(std::size_t n, const double* const p[5], const double* w,
                          double A, double B, double C);

    // Same sum, and additionally g[c][i] += factor*w[i] * d f_b / d p_c.
    double (*bulk_energy_grad)(std::size_t n, const double* const p[5], const double* w,
                               double A, double B, double C, double factor, double* const g[5]);

    // One Cartesian direction of the elastic density: sum_i w[i] * e(d[.][i]) with
    // e = d1^2 + d4^2 + d1 d4 + d2^2 + d3^2 + d5^2  (equals 1/2 |dQ|^2 in matrix form).
    double (*elastic_energy)(std::size_t n, const double* const d[5], const double* w);
    double (*elastic_energy_grad)(std::size_t n, const double* const d[5], const double* w,
                                  double factor, double* const g[5]);

    const char* name;
};

const Ops& scalar_ops();

// nullptr when this build/CPU has no SIMD variant.
const Ops* simd_ops_or_null();

// Active table: SIMD when available unless QWELL_KERNELS=scalar is set.
const Ops& active_ops();

std::string active_name();

}

#endif
