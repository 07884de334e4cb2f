#include "qwell/initial.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace qwell {

namespace {

constexpr double pi = 3.14159265358979323846;

// Harmonic director angle on the cross-section: 5-point Laplace solve with
// Dirichlet edge data, SOR-iterated to rounding level. The edge data rotate
// the angle by pi between one pair of opposite edges and interpolate
// linearly on the other pair.
class HarmonicTheta {
public:
    explicit HarmonicTheta(bool pair_is_y) {
        const int n = n_;
        theta_.assign(static_cast<std::size_t>(n) * n, 0.0);
        auto at = [&](int i, int j) -> double& { return theta_[i * n + j]; };
        auto coord = [&](int i) { return -1.0 + 2.0 * i / (n - 1); };
        for (int i = 0; i < n; ++i) {
            const double ramp = pi * (coord(i) + 1.0) / 2.0;
            if (pair_is_y) {
                at(i, 0) = 0.0;
                at(i, n - 1) = pi;
                at(0, i) = ramp;       // x = -1, ramp in y
                at(n - 1, i) = ramp;   // x = +1
            } else {
                at(0, i) = 0.0;
                at(n - 1, i) = pi;
                at(i, 0) = ramp;
                at(i, n - 1) = ramp;
            }
        }
        // seed interior with the linear interpolant, then relax
        for (int i = 1; i < n - 1; ++i)
            for (int j = 1; j < n - 1; ++j)
                at(i, j) = pi * ((pair_is_y ? coord(j) : coord(i)) + 1.0) / 2.0;
        const double omega = 1.9;
        for (int sweep = 0; sweep < 20000; ++sweep) {
            double resid = 0.0;
            for (int i = 1; i < n - 1; ++i)
                for (int j = 1; j < n - 1; ++j) {
                    const double upd =
                        0.25 * (at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1));
                    const double d = upd - at(i, j);
                    at(i, j) += omega * d;
                    resid = std::max(resid, std::abs(d));
                }
            if (resid < 1e-13) break;
        }
    }

    double operator()(double x, double y) const {
        const int n = n_;
        const double fx = (x + 1.0) * 0.5 * (n - 1);
        const double fy = (y + 1.0) * 0.5 * (n - 1);
        const int i = std::min(n - 2, std::max(0, static_cast<int>(fx)));
        const int j = std::min(n - 2, std::max(0, static_cast<int>(fy)));
        const double u = fx - i, v = fy - j;
        auto at = [&](int a, int b) { return theta_[a * n + b]; };
        return (1 - u) * (1 - v) * at(i, j) + u * (1 - v) * at(i + 1, j) +
               (1 - u) * v * at(i, j + 1) + u * v * at(i + 1, j + 1);
    }

private:
    static constexpr int n_ = 65;
    std::vector<double> theta_;
};

const HarmonicTheta& theta_y() {
    static const HarmonicTheta t(true);
    return t;
}
const HarmonicTheta& theta_x() {
    static const HarmonicTheta t(false);
    return t;
}

QTensor escaped_profile(double x, double y, double sp, int charge) {
    // Core width and gauge chosen so the seed lands in the escaped basin at
    // the default resolution: the radial gauge with a narrow core relaxes
    // back to planar states.
    const double rc = charge > 0 ? 0.4 : 0.6;
    const double r = std::hypot(x, y);
    const double psi = 0.5 * pi * std::exp(-r / rc);  // tilt out of plane
    const double phi = std::atan2(y, x);
    const double chi = (charge > 0 ? phi : -phi) + 0.5 * pi;
    const std::array<double, 3> n = {std::cos(psi) * std::cos(chi),
                                     std::cos(psi) * std::sin(chi), std::sin(psi)};
    return QTensor::uniaxial(sp, n);
}

}

const char* to_string(InitKind k) {
    switch (k) {
        case InitKind::Diagonal: return "diagonal";
        case InitKind::DiagonalAlt: return "diagonal_alt";
        case InitKind::Rotated: return "rotated";
        case InitKind::RotatedX: return "rotated_x";
        case InitKind::WORS: return "wors";
        case InitKind::Mixed: return "mixed";
        case InitKind::EscapedMinus: return "escaped_minus";
        case InitKind::EscapedPlus: return "escaped_plus";
        case InitKind::Isotropic: return "isotropic";
        default: return "random";
    }
}

InitKind init_kind_from_string(const std::string& s) {
    if (s == "diagonal") return InitKind::Diagonal;
    if (s == "diagonal_alt") return InitKind::DiagonalAlt;
    if (s == "rotated") return InitKind::Rotated;
    if (s == "rotated_x") return InitKind::RotatedX;
    if (s == "wors") return InitKind::WORS;
    if (s == "mixed") return InitKind::Mixed;
    if (s == "escaped_minus") return InitKind::EscapedMinus;
    if (s == "escaped_plus") return InitKind::EscapedPlus;
    if (s == "isotropic") return InitKind::Isotropic;
    if (s == "random") return InitKind::Random;
    throw std::invalid_argument("unknown initial condition '" + s + "'");
}

QTensor initial_profile(const InitialCondition& ic, const WellProblem& prob,
                        double x, double y, double z) {
    const double sp = prob.s_plus();
    switch (ic.kind) {
        case InitKind::Diagonal:
            return QTensor::uniaxial(sp, {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0});
        case InitKind::DiagonalAlt:
            return QTensor::uniaxial(sp, {1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0});
        case InitKind::Rotated: {
            const double th = theta_y()(x, y);
            return QTensor::uniaxial(sp, {std::cos(th), std::sin(th), 0.0});
        }
        case InitKind::RotatedX: {
            const double th = theta_x()(x, y) + 0.5 * pi;
            return QTensor::uniaxial(sp, {std::cos(th), std::sin(th), 0.0});
        }
        case InitKind::WORS: {
            // order field vanishing on the square diagonals, ramp width delta
            const double d = std::abs(std::abs(x) - std::abs(y)) / std::sqrt(2.0);
            const double sgn = (y * y > x * x) ? 1.0 : (y * y < x * x ? -1.0 : 0.0);
            AxisComponents a;
            a.q = {0.5 * sp * sgn * std::min(1.0, d / prob.delta), 0.0,
                   -prob.material.B / (6.0 * prob.material.C), 0.0, 0.0};
            return from_axis(a);
        }
        case InitKind::Mixed: {
            InitialCondition sub = ic;
            sub.kind = (z >= 0.5 * prob.eps) ? ic.mixed_top : ic.mixed_bottom;
            if (sub.kind == InitKind::Mixed)
                throw std::invalid_argument("mixed initial condition cannot nest");
            return initial_profile(sub, prob, x, y, z);
        }
        case InitKind::EscapedMinus:
            return escaped_profile(x, y, sp, -1);
        case InitKind::EscapedPlus:
            return escaped_profile(x, y, sp, +1);
        case InitKind::Isotropic:
            return QTensor{};
        default:
            throw std::invalid_argument("random initial condition has no pointwise profile");
    }
}

SpectralField make_initial(const InitialCondition& ic, const WellProblem& prob) {
    const SpectralGrid& g = *prob.grid;
    if (ic.kind == InitKind::Random) {
        SpectralField f = SpectralField::zeros(prob.grid);
        std::mt19937_64 rng(ic.seed);
        std::normal_distribution<double> dist(0.0, 1.0);
        const double sp = prob.s_plus();
        const int fx = g.ax.nf(), fy = g.ay.nf(), fz = g.az.nf();
        std::size_t idx = 0;
        for (int c = 0; c < 5; ++c)
            for (int l = 0; l < fx; ++l)
                for (int m = 0; m < fy; ++m)
                    for (int n = 0; n < fz; ++n) {
                        const double decay = 1.0 + l * l + m * m + n * n;
                        f.coeffs[idx++] = 0.25 * sp * dist(rng) / decay;
                    }
        return f;
    }
    std::array<std::vector<double>, 5> vals;
    const std::size_t n = static_cast<std::size_t>(g.n_nodes_total());
    for (auto& v : vals) v.resize(n);
    std::size_t idx = 0;
    for (int i = 0; i < g.ax.nq; ++i)
        for (int j = 0; j < g.ay.nq; ++j)
            for (int k = 0; k < g.az.nq; ++k) {
                const QTensor q = initial_profile(ic, prob, g.ax.x[i], g.ay.x[j], g.az.x[k]);
                for (int c = 0; c < 5; ++c) vals[c][idx] = q[c];
                ++idx;
            }
    return analyze(prob.grid, vals);
}

}
