#include "qwell/classify.hpp"

#include "qwell/minimize.hpp"
#include "qwell/tensor.hpp"

#include <cmath>

namespace qwell {

namespace {

constexpr double pi = 3.14159265358979323846;

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

QTensor q_at(const LatticeValues& lv, int ix, int iy, int iz, int ny, int nz) {
    QTensor q;
    const std::size_t idx = (static_cast<std::size_t>(ix) * ny + iy) * nz + iz;
    for (int c = 0; c < 5; ++c) q[c] = lv.v[c][idx];
    return q;
}

// In-plane director angle doubled (line field well defined mod pi).
double doubled_angle(const QTensor& q) {
    const auto ef = eigen_frame(q);
    const auto& n = ef.director();
    return 2.0 * std::atan2(n[1], n[0]);
}

// Total winding (in turns) of the doubled angle along a closed point loop.
double loop_winding(const SpectralField& f, const std::vector<double>& xs,
                    const std::vector<double>& ys, double z) {
    double total = 0.0, prev = 0.0;
    for (std::size_t i = 0; i <= xs.size(); ++i) {
        const std::size_t k = i % xs.size();
        const auto p = evaluate_at(f, xs[k], ys[k], z);
        QTensor q;
        for (int c = 0; c < 5; ++c) q[c] = p[c];
        const double a = doubled_angle(q);
        if (i > 0) {
            double d = a - prev;
            while (d > pi) d -= 2.0 * pi;
            while (d < -pi) d += 2.0 * pi;
            total += d;
        }
        prev = a;
    }
    return total / (2.0 * pi);
}

// Angular distance of the in-plane director from the NE diagonal, mod pi.
double diag_deviation(const QTensor& q) {
    const auto ef = eigen_frame(q);
    const auto& n = ef.director();
    const double in_plane = std::hypot(n[0], n[1]);
    if (in_plane < 0.2) return 0.5 * pi;  // escaped toward z: maximal deviation
    double d = std::atan2(n[1], n[0]) - 0.25 * pi;
    while (d > 0.5 * pi) d -= pi;
    while (d < -0.5 * pi) d += pi;
    return std::abs(d);
}

SliceClass slice_class(const SpectralField& f, double z, double sp) {
    // mean doubled angle over the central region
    const auto xs = linspace(-0.5, 0.5, 9);
    double cx = 0.0, sx = 0.0;
    double q45 = 0.0;
    for (double x : xs)
        for (double y : xs) {
            const auto p = evaluate_at(f, x, y, z);
            QTensor q;
            for (int c = 0; c < 5; ++c) q[c] = p[c];
            if (q.norm() < 0.05 * sp) continue;
            const double a = doubled_angle(q);
            cx += std::cos(a);
            sx += std::sin(a);
            q45 = std::max(q45, std::max(std::abs(p[2]), std::abs(p[4])));
        }
    if (q45 > 0.1 * sp) return SliceClass::Other;
    const double mean = std::atan2(sx, cx);  // doubled angle in (-pi, pi]
    const double tol = 2.0 * (25.0 * pi / 180.0);
    double dne = mean - 0.5 * pi;  // doubled angle of the (1,1) diagonal
    while (dne > pi) dne -= 2.0 * pi;
    while (dne < -pi) dne += 2.0 * pi;
    double dnw = mean + 0.5 * pi;
    while (dnw > pi) dnw -= 2.0 * pi;
    while (dnw < -pi) dnw += 2.0 * pi;
    if (std::abs(dne) < tol) return SliceClass::DiagonalNE;
    if (std::abs(dnw) < tol) return SliceClass::DiagonalNW;
    return SliceClass::Other;
}

}

const char* to_string(SolutionClass c) {
    switch (c) {
        case SolutionClass::WORS: return "WORS";
        case SolutionClass::Diagonal: return "Diagonal";
        case SolutionClass::Rotated: return "Rotated";
        case SolutionClass::Mixed3D: return "Mixed3D";
        case SolutionClass::BD: return "BD";
        case SolutionClass::EscapedPlus: return "EscapedPlus";
        case SolutionClass::EscapedMinus: return "EscapedMinus";
        default: return "Unknown";
    }
}

SolutionClass classify(const SpectralField& f, const WellProblem& prob,
                       ClassifyFeatures* features) {
    const double sp = prob.s_plus();
    const double eps = prob.eps;
    ClassifyFeatures ft;

    ft.z_variation = mean_dz_sq(f);

    const int ns = 41, nzs = 9;
    const auto xs = linspace(-0.95, 0.95, ns);
    const auto zs = linspace(0.05 * eps, 0.95 * eps, nzs);
    const LatticeValues lv = evaluate_on_lattice(f, xs, xs, zs);

    long pattern_ok = 0, pattern_n = 0;
    double dev_sum = 0.0;
    long dev_n = 0;
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j)
            for (int k = 0; k < nzs; ++k) {
                const QTensor q = q_at(lv, i, j, k, ns, nzs);
                const AxisComponents a = to_axis(q);
                ft.q2_sup = std::max(ft.q2_sup, std::abs(a[1]));
                ft.q45_sup = std::max(ft.q45_sup,
                                      std::max(std::abs(a[3]), std::abs(a[4])));
                if (std::abs(a[0]) > 0.05 * sp) {
                    ++pattern_n;
                    const double d = (xs[j] * xs[j] - xs[i] * xs[i]);
                    // lattice index i runs over x, j over y: pattern (y^2-x^2) q1 >= 0
                    if (d * a[0] >= 0.0 || std::abs(d) < 1e-6) ++pattern_ok;
                }
                if (q.norm() > 0.05 * sp) {
                    dev_sum += diag_deviation(q);
                    ++dev_n;
                }
            }
    ft.sign_pattern_frac = pattern_n ? static_cast<double>(pattern_ok) / pattern_n : 1.0;
    ft.director_dev_diag = dev_n ? dev_sum / dev_n : 0.0;

    {
        const auto pc = evaluate_at(f, 0.0, 0.0, 0.5 * eps);
        ft.center_q3 = -0.5 * (pc[0] + pc[3]);
    }

    // axis-frame q1 along the two diagonals, all heights
    for (double t : linspace(-0.9, 0.9, 25))
        for (double z : zs)
            for (double s : {1.0, -1.0}) {
                const auto p = evaluate_at(f, t, s * t, z);
                ft.q1_diag_sup = std::max(ft.q1_diag_sup, 0.5 * std::abs(p[0] - p[3]));
            }

    // midplane q2 (axis frame)
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j) {
            const auto p = evaluate_at(f, xs[i], xs[j], 0.5 * eps);
            ft.q2_mid_sup = std::max(ft.q2_mid_sup, std::abs(p[1]));
        }

    // boundary loop at mid-height, inset
    {
        std::vector<double> lx, ly;
        const int per_side = 24;
        const double r = 0.9;
        for (int i = 0; i < per_side; ++i) { lx.push_back(-r + 2 * r * i / per_side); ly.push_back(-r); }
        for (int i = 0; i < per_side; ++i) { lx.push_back(r); ly.push_back(-r + 2 * r * i / per_side); }
        for (int i = 0; i < per_side; ++i) { lx.push_back(r - 2 * r * i / per_side); ly.push_back(r); }
        for (int i = 0; i < per_side; ++i) { lx.push_back(-r); ly.push_back(r - 2 * r * i / per_side); }
        ft.boundary_winding = loop_winding(f, lx, ly, 0.5 * eps);
        double dev = 0.0;
        bool bins[12] = {};
        for (std::size_t i = 0; i < lx.size(); ++i) {
            const auto p = evaluate_at(f, lx[i], ly[i], 0.5 * eps);
            QTensor q;
            for (int c = 0; c < 5; ++c) q[c] = p[c];
            dev += diag_deviation(q);
            double a = doubled_angle(q);  // in (-2pi, 2pi]
            while (a < 0.0) a += 2.0 * pi;
            bins[std::min(11, static_cast<int>(a / (2.0 * pi) * 12.0))] = true;
        }
        ft.boundary_dev_diag = dev / static_cast<double>(lx.size());
        int hit = 0;
        for (bool b : bins) hit += b ? 1 : 0;
        ft.angle_coverage = hit / 12.0;
    }

    // small circle around the core
    {
        std::vector<double> cx, cy;
        for (int i = 0; i < 72; ++i) {
            cx.push_back(0.35 * std::cos(2.0 * pi * i / 72));
            cy.push_back(0.35 * std::sin(2.0 * pi * i / 72));
        }
        ft.center_winding = loop_winding(f, cx, cy, 0.5 * eps);
    }

    ft.top = slice_class(f, 0.95 * eps, sp);
    ft.bottom = slice_class(f, 0.05 * eps, sp);

    if (features) *features = ft;

    // escaped configurations carry out-of-plane couplings and positive q3 at
    // the core
    if (ft.q45_sup > 0.05 * sp && ft.center_q3 > 0.02 * sp) {
        return ft.center_winding > 0.0 ? SolutionClass::EscapedPlus
                                       : SolutionClass::EscapedMinus;
    }

    // weak-anchoring equilibria carry thin corner layers near the plates, so
    // the z-invariance gate is loose; truly mixed 3D states sit decades
    // higher. The derivative is scaled by the half-height so thin boxes are
    // judged by their total variation across the plates.
    const double half_h = 0.5 * eps;
    const bool z_inv = ft.z_variation * half_h * half_h < 1e-2 * sp * sp;
    if (!z_inv) {
        const bool distinct =
            (ft.top == SliceClass::DiagonalNE && ft.bottom == SliceClass::DiagonalNW) ||
            (ft.top == SliceClass::DiagonalNW && ft.bottom == SliceClass::DiagonalNE);
        if (distinct && ft.q2_mid_sup < 1e-2 * sp) return SolutionClass::Mixed3D;
        return SolutionClass::Unknown;
    }

    const bool constant_frame = ft.q2_sup < 1e-2 * sp && ft.q45_sup < 1e-2 * sp;
    if (constant_frame && ft.q1_diag_sup < 1e-3 * sp && ft.sign_pattern_frac > 0.98 &&
        ft.center_q3 < 0.0)
        return SolutionClass::WORS;
    if (constant_frame) return SolutionClass::BD;
    // rotated states sweep the whole circle of director angles along the
    // boundary loop; diagonal states cluster around one diagonal
    if (ft.angle_coverage > 0.7) return SolutionClass::Rotated;
    if (ft.director_dev_diag < 30.0 * pi / 180.0) return SolutionClass::Diagonal;
    return SolutionClass::Unknown;
}

}
