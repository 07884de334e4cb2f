#ifndef QWELL_TENSOR_HPP
#define QWELL_TENSOR_HPP

#include <array>
#include <cmath>

// Q-tensor algebra: five-component representation of symmetric traceless
// 3x3 matrices, the thermotropic bulk potential and its gradient, order
// parameters, eigenframes, and the change of basis between the axis frame
// (x,y,z) and the diagonal frame (n1,n2,z) with n1 = (-1,1,0)/sqrt(2),
// n2 = (1,1,0)/sqrt(2).

namespace qwell {

struct MaterialParams {
    double A;          // rescaled temperature, J/m^3 (< 0 in scope)
    double B;          // bulk constant, J/m^3 (> 0)
    double C;          // bulk constant, J/m^3 (> 0)
    double L_elastic;  // one-constant elastic constant, J/m (> 0)

    void validate() const;  // throws std::domain_error on violated ranges
};

// Standard constants of the confined-nematic literature; A pinned to -B^2/(3C)
// unless overridden.
MaterialParams default_material();

// Entries (Q11, Q12, Q13, Q22, Q23); Q33 = -p1 - p4.
struct QTensor {
    std::array<double, 5> p{};

    double& operator[](int i) { return p[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return p[static_cast<std::size_t>(i)]; }

    double q33() const { return -p[0] - p[3]; }

    QTensor operator+(const QTensor& o) const;
    QTensor operator-(const QTensor& o) const;
    QTensor operator*(double s) const;

    // tr Q^2 = |Q|^2 (Frobenius)
    double norm2() const;
    double norm() const { return std::sqrt(norm2()); }
    double trace3() const;  // tr Q^3

    std::array<std::array<double, 3>, 3> matrix() const;
    static QTensor from_matrix(const std::array<std::array<double, 3>, 3>& m);

    // s (n x n - I/3)
    static QTensor uniaxial(double s, const std::array<double, 3>& n);
};

// Coefficients in the diagonal-frame basis
//   q1 (n1xn1 - n2xn2), q2 (n1xn2 + n2xn1), q3 (2 zxz - n1xn1 - n2xn2),
//   q4 (xxz + zxx),     q5 (yxz + zxy).
struct FrameComponents {
    std::array<double, 5> q{};
    double& operator[](int i) { return q[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return q[static_cast<std::size_t>(i)]; }
};

// Same five coefficients in the axis-frame basis
//   q1 (xxx - yxy), q2 (xxy + yxx), q3 (2 zxz - xxx - yxy), q4, q5 as above.
struct AxisComponents {
    std::array<double, 5> q{};
    double& operator[](int i) { return q[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return q[static_cast<std::size_t>(i)]; }
};

// Larger root of A - B s/3 + 2C s^2/3 = 0; order parameter of the bulk
// minimizers. Throws std::domain_error when C = 0.
double s_plus(const MaterialParams& m);
double s_minus(const MaterialParams& m);

// f_b = A/2 tr Q^2 - B/3 tr Q^3 + C/4 (tr Q^2)^2
double bulk_potential(const QTensor& q, const MaterialParams& m);

// Traceless projection of df_b/dQ: A Q - B (Q^2 - I |Q|^2/3) + C |Q|^2 Q.
QTensor bulk_gradient(const QTensor& q, const MaterialParams& m);

// beta^2 = 1 - 6 (tr Q^3)^2 / |Q|^6 in [0,1]; 0 below the isotropic
// threshold |Q| < tol_iso. Throws std::logic_error on out-of-range values
// beyond 1e-9 of the endpoints (cannot happen for valid inputs).
double biaxiality(const QTensor& q, double tol_iso = 1e-9);

struct EigenFrame {
    std::array<double, 3> eigenvalues;                 // descending, sum 0
    std::array<std::array<double, 3>, 3> directors;    // orthonormal rows
    const std::array<double, 3>& director() const { return directors[0]; }
};

// Eigen-decomposition by cyclic Jacobi sweeps; the leading eigenvector is
// sign-normalized so its largest-magnitude component is positive.
EigenFrame eigen_frame(const QTensor& q);

FrameComponents to_frame(const QTensor& q);
QTensor from_frame(const FrameComponents& f);

AxisComponents to_axis(const QTensor& q);
QTensor from_axis(const AxisComponents& a);

}

#endif
