#include "qwell/tensor.hpp"

#include <algorithm>
#include <stdexcept>

namespace qwell {

void MaterialParams::validate() const {
    if (!(B > 0.0) || !(C > 0.0) || !(L_elastic > 0.0))
        throw std::domain_error("MaterialParams: B, C, L must be positive");
    if (!(A < 0.0))
        throw std::domain_error("MaterialParams: A must be negative (below supercooling)");
}

MaterialParams default_material() {
    MaterialParams m;
    m.B = 0.64e4;
    m.C = 0.35e4;
    m.L_elastic = 1e-11;
    m.A = -m.B * m.B / (3.0 * m.C);
    return m;
}

QTensor QTensor::operator+(const QTensor& o) const {
    QTensor r;
    for (int i = 0; i < 5; ++i) r.p[i] = p[i] + o.p[i];
    return r;
}

QTensor QTensor::operator-(const QTensor& o) const {
    QTensor r;
    for (int i = 0; i < 5; ++i) r.p[i] = p[i] - o.p[i];
    return r;
}

QTensor QTensor::operator*(double s) const {
    QTensor r;
    for (int i = 0; i < 5; ++i) r.p[i] = p[i] * s;
    return r;
}

double QTensor::norm2() const {
    const double p1 = p[0], p2 = p[1], p3 = p[2], p4 = p[3], p5 = p[4];
    return 2.0 * (p1 * p1 + p4 * p4 + p1 * p4 + p2 * p2 + p3 * p3 + p5 * p5);
}

double QTensor::trace3() const {
    const double p1 = p[0], p2 = p[1], p3 = p[2], p4 = p[3], p5 = p[4];
    const double z = -p1 - p4;
    const double det = p1 * (p4 * z - p5 * p5) - p2 * (p2 * z - p5 * p3)
                     + p3 * (p2 * p5 - p4 * p3);
    return 3.0 * det;
}

std::array<std::array<double, 3>, 3> QTensor::matrix() const {
    return {{{p[0], p[1], p[2]}, {p[1], p[3], p[4]}, {p[2], p[4], -p[0] - p[3]}}};
}

QTensor QTensor::from_matrix(const std::array<std::array<double, 3>, 3>& m) {
    QTensor q;
    q.p = {m[0][0], m[0][1], m[0][2], m[1][1], m[1][2]};
    return q;
}

QTensor QTensor::uniaxial(double s, const std::array<double, 3>& n) {
    const double nn = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
    const double inv = 1.0 / std::sqrt(nn);
    const double nx = n[0] * inv, ny = n[1] * inv, nz = n[2] * inv;
    QTensor q;
    q.p = {s * (nx * nx - 1.0 / 3.0), s * nx * ny, s * nx * nz,
           s * (ny * ny - 1.0 / 3.0), s * ny * nz};
    return q;
}

double s_plus(const MaterialParams& m) {
    if (m.C == 0.0) throw std::domain_error("s_plus: C must be nonzero");
    return (m.B + std::sqrt(m.B * m.B + 24.0 * std::abs(m.A) * m.C)) / (4.0 * m.C);
}

double s_minus(const MaterialParams& m) {
    if (m.C == 0.0) throw std::domain_error("s_minus: C must be nonzero");
    return (m.B - std::sqrt(m.B * m.B + 24.0 * std::abs(m.A) * m.C)) / (4.0 * m.C);
}

double bulk_potential(const QTensor& q, const MaterialParams& m) {
    const double t2 = q.norm2();
    const double t3 = q.trace3();
    return 0.5 * m.A * t2 - (m.B / 3.0) * t3 + 0.25 * m.C * t2 * t2;
}

QTensor bulk_gradient(const QTensor& q, const MaterialParams& m) {
    const double p1 = q[0], p2 = q[1], p3 = q[2], p4 = q[3], p5 = q[4];
    const double z = -p1 - p4;
    const double t2 = q.norm2();
    // Q^2 entries
    const double s11 = p1 * p1 + p2 * p2 + p3 * p3;
    const double s12 = p1 * p2 + p2 * p4 + p3 * p5;
    const double s13 = p1 * p3 + p2 * p5 + p3 * z;
    const double s22 = p2 * p2 + p4 * p4 + p5 * p5;
    const double s23 = p2 * p3 + p4 * p5 + p5 * z;
    const double lin = m.A + m.C * t2;
    QTensor g;
    g.p = {lin * p1 - m.B * (s11 - t2 / 3.0),
           lin * p2 - m.B * s12,
           lin * p3 - m.B * s13,
           lin * p4 - m.B * (s22 - t2 / 3.0),
           lin * p5 - m.B * s23};
    return g;
}

double biaxiality(const QTensor& q, double tol_iso) {
    const double t2 = q.norm2();
    if (std::sqrt(t2) < tol_iso) return 0.0;
    const double t3 = q.trace3();
    double b2 = 1.0 - 6.0 * t3 * t3 / (t2 * t2 * t2);
    if (b2 < -1e-9 || b2 > 1.0 + 1e-9)
        throw std::logic_error("biaxiality out of [0,1]");
    return std::clamp(b2, 0.0, 1.0);
}

EigenFrame eigen_frame(const QTensor& q) {
    // cyclic Jacobi on the 3x3 symmetric matrix
    auto a = q.matrix();
    double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off < 1e-15 * (1.0 + std::abs(a[0][0]) + std::abs(a[1][1]) + std::abs(a[2][2])))
            break;
        for (int p = 0; p < 2; ++p) {
            for (int r = p + 1; r < 3; ++r) {
                if (a[p][r] == 0.0) continue;
                const double theta = (a[r][r] - a[p][p]) / (2.0 * a[p][r]);
                const double t = (theta >= 0 ? 1.0 : -1.0)
                               / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p], akr = a[k][r];
                    a[k][p] = c * akp - s * akr;
                    a[k][r] = s * akp + c * akr;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k], ark = a[r][k];
                    a[p][k] = c * apk - s * ark;
                    a[r][k] = s * apk + c * ark;
                }
                for (int k = 0; k < 3; ++k) {
                    const double vkp = v[k][p], vkr = v[k][r];
                    v[k][p] = c * vkp - s * vkr;
                    v[k][r] = s * vkp + c * vkr;
                }
            }
        }
    }
    int order[3] = {0, 1, 2};
    std::sort(order, order + 3, [&](int i, int j) { return a[i][i] > a[j][j]; });
    EigenFrame f;
    for (int i = 0; i < 3; ++i) {
        const int k = order[i];
        f.eigenvalues[i] = a[k][k];
        f.directors[i] = {v[0][k], v[1][k], v[2][k]};
    }
    for (auto& d : f.directors) {
        int imax = 0;
        for (int i = 1; i < 3; ++i)
            if (std::abs(d[i]) > std::abs(d[imax])) imax = i;
        if (d[imax] < 0.0)
            for (auto& c : d) c = -c;
    }
    return f;
}

// Diagonal-frame basis tensors in matrix entries:
//   E1 = [[0,-1,0],[-1,0,0],[0,0,0]]     E2 = [[-1,0,0],[0,1,0],[0,0,0]]
//   E3 = [[-1,0,0],[0,-1,0],[0,0,2]]     E4, E5 shared with the axis frame.
FrameComponents to_frame(const QTensor& q) {
    FrameComponents f;
    f.q = {-q[1], 0.5 * (q[3] - q[0]), -0.5 * (q[0] + q[3]), q[2], q[4]};
    return f;
}

QTensor from_frame(const FrameComponents& f) {
    QTensor q;
    q.p = {-f[1] - f[2], -f[0], f[3], f[1] - f[2], f[4]};
    return q;
}

AxisComponents to_axis(const QTensor& q) {
    AxisComponents a;
    a.q = {0.5 * (q[0] - q[3]), q[1], -0.5 * (q[0] + q[3]), q[2], q[4]};
    return a;
}

QTensor from_axis(const AxisComponents& a) {
    QTensor q;
    q.p = {a[0] - a[2], a[1], a[3], -a[0] - a[2], a[4]};
    return q;
}

}
