#include "qwell/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace qwell {

namespace {

constexpr double pi = 3.14159265358979323846;

// Clenshaw-Curtis weights on n+1 Gauss-Lobatto nodes, exact for polynomials
// of degree n.
std::vector<double> cc_weights(int npts) {
    const int n = npts - 1;
    std::vector<double> w(npts);
    if (n == 0) {
        w[0] = 2.0;
        return w;
    }
    for (int j = 0; j <= n; ++j) {
        const double theta = pi * j / n;
        double s = 1.0;
        for (int k = 1; k <= n / 2; ++k) {
            const double gamma = (2 * k == n) ? 0.5 : 1.0;
            s -= gamma * 2.0 * std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
        }
        const double cj = (j == 0 || j == n) ? 1.0 : 2.0;
        w[j] = cj * s / n;
    }
    return w;
}

// Value/first/second derivative of T_k at t by the three-term recurrences.
void cheb_all(int nmax, double t, double* T, double* dT, double* ddT) {
    T[0] = 1.0; dT[0] = 0.0; ddT[0] = 0.0;
    if (nmax == 1) return;
    T[1] = t; dT[1] = 1.0; ddT[1] = 0.0;
    for (int k = 2; k < nmax; ++k) {
        T[k] = 2.0 * t * T[k - 1] - T[k - 2];
        dT[k] = 2.0 * T[k - 1] + 2.0 * t * dT[k - 1] - dT[k - 2];
        ddT[k] = 4.0 * dT[k - 1] + 2.0 * t * ddT[k - 1] - ddT[k - 2];
    }
}

// Cholesky solve of the small SPD system M X = R (M nf x nf, R nf x nq).
void spd_solve(int n, std::vector<double>& m, std::vector<double>& r, int rcols) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = m[i * n + j];
            for (int k = 0; k < j; ++k) s -= m[i * n + k] * m[j * n + k];
            if (i == j) {
                if (s <= 0.0) throw std::runtime_error("spectral basis Gram matrix not SPD");
                m[i * n + i] = std::sqrt(s);
            } else {
                m[i * n + j] = s / m[j * n + j];
            }
        }
    }
    for (int c = 0; c < rcols; ++c) {
        for (int i = 0; i < n; ++i) {
            double s = r[i * rcols + c];
            for (int k = 0; k < i; ++k) s -= m[i * n + k] * r[k * rcols + c];
            r[i * rcols + c] = s / m[i * n + i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = r[i * rcols + c];
            for (int k = i + 1; k < n; ++k) s -= m[k * n + i] * r[k * rcols + c];
            r[i * rcols + c] = s / m[i * n + i];
        }
    }
}

void build_axis(GridAxis& a, bool z_direction, double eps, int quad_factor) {
    const int nf = a.basis.n_funcs();
    if (nf < 1) throw std::invalid_argument("Basis1D: need at least one mode");
    a.nq = quad_factor * nf;
    if (a.basis.kind == BasisKind::Chebyshev && a.nq < 2) a.nq = 2;

    a.t.resize(a.nq);
    a.x.resize(a.nq);
    a.w.resize(a.nq);
    a.S.assign(static_cast<std::size_t>(a.nq) * nf, 0.0);
    a.D.assign(a.S.size(), 0.0);
    a.D2.assign(a.S.size(), 0.0);

    if (a.basis.kind == BasisKind::Chebyshev) {
        // ascending Gauss-Lobatto nodes
        const int n = a.nq - 1;
        auto wcc = cc_weights(a.nq);
        for (int j = 0; j < a.nq; ++j) {
            a.t[j] = -std::cos(pi * j / n);
            a.w[j] = wcc[j];
        }
        if (z_direction) {
            a.dt_dx = 2.0 / eps;
            for (int j = 0; j < a.nq; ++j) {
                a.x[j] = eps * (a.t[j] + 1.0) / 2.0;
                a.w[j] *= eps / 2.0;
            }
        } else {
            a.dt_dx = 1.0;
            a.x = a.t;
        }
        std::vector<double> T(nf), dT(nf), ddT(nf);
        for (int j = 0; j < a.nq; ++j) {
            cheb_all(nf, a.t[j], T.data(), dT.data(), ddT.data());
            for (int k = 0; k < nf; ++k) {
                a.S[j * nf + k] = T[k];
                a.D[j * nf + k] = dT[k] * a.dt_dx;
                a.D2[j * nf + k] = ddT[k] * a.dt_dx * a.dt_dx;
            }
        }
    } else {
        if (z_direction) throw std::invalid_argument("Fourier basis not supported in z");
        const int L = a.basis.n_modes;
        a.dt_dx = pi;  // t = pi (x + 1), x in [-1, 1)
        for (int j = 0; j < a.nq; ++j) {
            a.t[j] = 2.0 * pi * j / a.nq;
            a.x[j] = a.t[j] / pi - 1.0;
            a.w[j] = 2.0 / a.nq;  // (2 pi / nq) / dt_dx
        }
        for (int j = 0; j < a.nq; ++j) {
            for (int k = 0; k < nf; ++k) {
                const int l = k - (L - 1);
                const double t = a.t[j];
                double v, dv, ddv;
                if (l >= 0) {
                    v = std::cos(l * t); dv = -l * std::sin(l * t); ddv = -l * l * v;
                } else {
                    const int al = -l;
                    v = std::sin(al * t); dv = al * std::cos(al * t); ddv = -al * al * v;
                }
                a.S[j * nf + k] = v;
                a.D[j * nf + k] = dv * a.dt_dx;
                a.D2[j * nf + k] = ddv * a.dt_dx * a.dt_dx;
            }
        }
    }

    a.ST.resize(a.S.size());
    a.DT.resize(a.S.size());
    for (int j = 0; j < a.nq; ++j)
        for (int k = 0; k < nf; ++k) {
            a.ST[static_cast<std::size_t>(k) * a.nq + j] = a.S[j * nf + k];
            a.DT[static_cast<std::size_t>(k) * a.nq + j] = a.D[j * nf + k];
        }

    // P = (S^T W S)^{-1} S^T W
    std::vector<double> gram(static_cast<std::size_t>(nf) * nf, 0.0);
    a.P.assign(static_cast<std::size_t>(nf) * a.nq, 0.0);
    for (int i = 0; i < nf; ++i) {
        for (int j = 0; j < nf; ++j) {
            double s = 0.0;
            for (int q = 0; q < a.nq; ++q) s += a.S[q * nf + i] * a.w[q] * a.S[q * nf + j];
            gram[i * nf + j] = s;
        }
        for (int q = 0; q < a.nq; ++q)
            a.P[static_cast<std::size_t>(i) * a.nq + q] = a.S[q * nf + i] * a.w[q];
    }
    spd_solve(nf, gram, a.P, a.nq);
}

}

void GridAxis::eval_row(double x_phys, double* s_row, double* d_row) const {
    const int n = nf();
    if (basis.kind == BasisKind::Chebyshev) {
        const double t_loc = (dt_dx == 1.0) ? x_phys : x_phys * dt_dx - 1.0;
        std::vector<double> T(n), dT(n), ddT(n);
        cheb_all(n, t_loc, T.data(), dT.data(), ddT.data());
        for (int k = 0; k < n; ++k) {
            s_row[k] = T[k];
            if (d_row) d_row[k] = dT[k] * dt_dx;
        }
    } else {
        const int L = basis.n_modes;
        const double t_loc = (x_phys + 1.0) * pi;
        for (int k = 0; k < n; ++k) {
            const int l = k - (L - 1);
            if (l >= 0) {
                s_row[k] = std::cos(l * t_loc);
                if (d_row) d_row[k] = -l * std::sin(l * t_loc) * dt_dx;
            } else {
                s_row[k] = std::sin(-l * t_loc);
                if (d_row) d_row[k] = -l * std::cos(-l * t_loc) * dt_dx;
            }
        }
    }
}

SpectralGrid SpectralGrid::make(Basis1D bx, Basis1D by, Basis1D bz, double eps,
                                int quad_factor) {
    if (!(eps > 0.0)) throw std::invalid_argument("SpectralGrid: eps must be positive");
    if (bz.kind != BasisKind::Chebyshev)
        throw std::invalid_argument("SpectralGrid: z basis must be Chebyshev");
    if (quad_factor < 2) throw std::invalid_argument("SpectralGrid: quad_factor >= 2 required");
    SpectralGrid g;
    g.eps = eps;
    g.ax.basis = bx;
    g.ay.basis = by;
    g.az.basis = bz;
    build_axis(g.ax, false, eps, quad_factor);
    build_axis(g.ay, false, eps, quad_factor);
    build_axis(g.az, true, eps, quad_factor);
    return g;
}

double SpectralGrid::integrate_volume(const double* density) const {
    double total = 0.0;
    std::size_t idx = 0;
    for (int i = 0; i < ax.nq; ++i) {
        double sx = 0.0;
        for (int j = 0; j < ay.nq; ++j) {
            double sy = 0.0;
            for (int k = 0; k < az.nq; ++k) sy += az.w[k] * density[idx++];
            sx += ay.w[j] * sy;
        }
        total += ax.w[i] * sx;
    }
    return total;
}

int SpectralGrid::face_nodes(Face f) const {
    switch (f) {
        case Face::XMin: case Face::XMax: return ay.nq * az.nq;
        case Face::YMin: case Face::YMax: return ax.nq * az.nq;
        default: return ax.nq * ay.nq;
    }
}

std::size_t SpectralGrid::face_node_index(Face f, int m) const {
    auto boundary = [](const GridAxis& a, bool max_side) {
        if (a.basis.kind == BasisKind::Fourier) return 0;  // both walls alias node 0
        return max_side ? a.nq - 1 : 0;
    };
    switch (f) {
        case Face::XMin: return node_index(boundary(ax, false), m / az.nq, m % az.nq);
        case Face::XMax: return node_index(boundary(ax, true), m / az.nq, m % az.nq);
        case Face::YMin: return node_index(m / az.nq, boundary(ay, false), m % az.nq);
        case Face::YMax: return node_index(m / az.nq, boundary(ay, true), m % az.nq);
        case Face::ZMin: return node_index(m / ay.nq, m % ay.nq, 0);
        default:         return node_index(m / ay.nq, m % ay.nq, az.nq - 1);
    }
}

double SpectralGrid::integrate_face(Face f, const double* density) const {
    const GridAxis* t1 = nullptr;
    const GridAxis* t2 = nullptr;
    switch (f) {
        case Face::XMin: case Face::XMax: t1 = &ay; t2 = &az; break;
        case Face::YMin: case Face::YMax: t1 = &ax; t2 = &az; break;
        case Face::ZMin: case Face::ZMax: t1 = &ax; t2 = &ay; break;
        default: throw std::invalid_argument("integrate_face: unknown face");
    }
    double total = 0.0;
    int m = 0;
    for (int i = 0; i < t1->nq; ++i) {
        double s = 0.0;
        for (int j = 0; j < t2->nq; ++j) s += t2->w[j] * density[m++];
        total += t1->w[i] * s;
    }
    return total;
}

bool SpectralGrid::same_layout(const SpectralGrid& o) const {
    auto eq = [](const GridAxis& a, const GridAxis& b) {
        return a.basis.kind == b.basis.kind && a.basis.n_modes == b.basis.n_modes &&
               a.nq == b.nq;
    };
    return eq(ax, o.ax) && eq(ay, o.ay) && eq(az, o.az) && eps == o.eps;
}

SpectralField SpectralField::zeros(std::shared_ptr<const SpectralGrid> g) {
    SpectralField f;
    f.grid = std::move(g);
    f.coeffs.assign(static_cast<std::size_t>(f.grid->dof_total()), 0.0);
    return f;
}

void CollocationValues::resize(const SpectralGrid& g) {
    nx = g.ax.nq; ny = g.ay.nq; nz = g.az.nq;
    const std::size_t n = static_cast<std::size_t>(nx) * ny * nz;
    for (int c = 0; c < 5; ++c) {
        v[c].assign(n, 0.0);
        dx[c].assign(n, 0.0);
        dy[c].assign(n, 0.0);
        dz[c].assign(n, 0.0);
    }
}

}
