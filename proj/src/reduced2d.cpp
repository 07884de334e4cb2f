#include "qwell/reduced2d.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace qwell {

namespace {

constexpr double pi = 3.14159265358979323846;

int half_width(const Grid2D& g) { return g.n - 1; }  // N: coordinates a_i = 2i - N in [-N, N]

int ai(const Grid2D& g, int i) { return 2 * i - half_width(g); }

int eta_ticks(const Grid2D& g) {
    // eta as a count of 2/N steps: eta = 2*k/N
    return static_cast<int>(std::lround(g.eta * half_width(g) / 2.0));
}

}

Grid2D Grid2D::make(Domain2DKind kind, int n, double eta) {
    if (n < 9 || n % 2 == 0)
        throw std::invalid_argument("Grid2D: n must be odd and >= 9");
    Grid2D g;
    g.kind = kind;
    g.n = n;
    g.eta = eta;
    g.h = 2.0 / (n - 1);
    const int N = n - 1;
    int keta = 0;
    if (kind == Domain2DKind::TruncatedDiamond) {
        if (!(eta > 0.0 && eta < 0.5))
            throw std::invalid_argument("Grid2D: eta must lie in (0, 0.5)");
        keta = static_cast<int>(std::lround(eta * N / 2.0));
        if (keta < 1 || std::abs(2.0 * keta / N - eta) > 1e-12)
            throw std::invalid_argument("Grid2D: eta must be a multiple of the grid spacing");
    }
    g.type.assign(static_cast<std::size_t>(n) * n, NodeType::Exterior);
    for (int i = 0; i < n; ++i) {
        const int a = 2 * i - N;
        for (int j = 0; j < n; ++j) {
            const int b = 2 * j - N;
            if (kind == Domain2DKind::FullSquare) {
                const bool inside = std::abs(a) <= N && std::abs(b) <= N;
                if (!inside) continue;
                const bool bdry = std::abs(a) == N || std::abs(b) == N;
                g.type[g.id(i, j)] = bdry ? NodeType::Boundary : NodeType::Interior;
            } else {
                const int lim = N - 2 * keta;
                const bool inside = std::abs(a) <= lim && std::abs(b) <= lim &&
                                    std::abs(a + b) <= N && std::abs(a - b) <= N;
                if (!inside) continue;
                const bool bdry = std::abs(a) == lim || std::abs(b) == lim ||
                                  std::abs(a + b) == N || std::abs(a - b) == N;
                g.type[g.id(i, j)] = bdry ? NodeType::Boundary : NodeType::Interior;
            }
        }
    }
    return g;
}

bool Grid2D::interior_off_boundary(int i, int j) const {
    if (at(i, j) != NodeType::Interior) return false;
    return at(i - 1, j) == NodeType::Interior && at(i + 1, j) == NodeType::Interior &&
           at(i, j - 1) == NodeType::Interior && at(i, j + 1) == NodeType::Interior;
}

double q1_boundary(const Grid2D& g, int i, int j, double s_plus) {
    const int N = half_width(g);
    const int a = ai(g, i), b = ai(g, j);
    const double x = g.coord(i), y = g.coord(j);
    if (g.kind == Domain2DKind::FullSquare) {
        // tangent data: +s/2 on y = +-1, -s/2 on x = +-1, corner collars ramp
        // linearly to zero
        auto ramp = [&](double t) {
            const double d = 1.0 - std::abs(t);
            return d >= g.eta ? 1.0 : d / g.eta;
        };
        if (std::abs(b) == N) return 0.5 * s_plus * ramp(x);
        return -0.5 * s_plus * ramp(y);
    }
    const int lim = N - 2 * eta_ticks(g);
    // long edges first: the tangent datum with the sign pattern xy q1 >= 0
    if (a + b == N || a + b == -N) return 0.5 * s_plus;    // first/third-quadrant edges
    if (b - a == N || a - b == N) return -0.5 * s_plus;    // second/fourth-quadrant edges
    const double g0 = 0.5 * s_plus / g.eta;
    if (a == lim) return g0 * y;      // right short edge
    if (a == -lim) return -g0 * y;    // left
    if (b == lim) return g0 * x;      // top
    if (b == -lim) return -g0 * x;    // bottom
    throw std::logic_error("q1_boundary: node is not on the boundary");
}

LbfgsOptions reduced_default_options() {
    LbfgsOptions o;
    // sup-norm of the nodal gradient; tighter thresholds fall below the
    // double-precision decrease floor of the discrete energy
    o.grad_tol = 2e-7;
    o.max_iters = 30000;
    return o;
}

namespace {

struct PotentialTerms {
    double f;
    double d1, d2, d3;
};

inline PotentialTerms potential(double q1, double q2, double q3, const MaterialParams& m) {
    const double t = q1 * q1 + q2 * q2 + 3.0 * q3 * q3;
    const double planar = q1 * q1 + q2 * q2;
    PotentialTerms p;
    p.f = m.A * t + 2.0 * m.B * q3 * planar - 2.0 * m.B * q3 * q3 * q3 + m.C * t * t;
    const double lin = 2.0 * (m.A + 2.0 * m.B * q3 + 2.0 * m.C * t);
    p.d1 = lin * q1;
    p.d2 = lin * q2;
    p.d3 = 6.0 * m.A * q3 + 2.0 * m.B * planar - 6.0 * m.B * q3 * q3 + 12.0 * m.C * q3 * t;
    return p;
}

// Discrete J on full arrays; accumulates dE/d(node value) into g1/g2/g3 when
// given (boundary and exterior entries included; caller masks).
double j_energy(const Grid2D& g, const MaterialParams& m, double lambda_bar_sq,
                const std::vector<double>& q1, const std::vector<double>& q2,
                const std::vector<double>& q3,
                std::vector<double>* g1, std::vector<double>* g2, std::vector<double>* g3) {
    const int n = g.n;
    const double bf = lambda_bar_sq / (2.0 * m.C);
    const double h2 = g.h * g.h;
    double e = 0.0;
    auto edge = [&](std::size_t pa, std::size_t pb) {
        const double d1 = q1[pa] - q1[pb];
        const double d2 = q2[pa] - q2[pb];
        const double d3 = q3[pa] - q3[pb];
        e += d1 * d1 + d2 * d2 + 3.0 * d3 * d3;
        if (g1) {
            (*g1)[pa] += 2.0 * d1; (*g1)[pb] -= 2.0 * d1;
            (*g2)[pa] += 2.0 * d2; (*g2)[pb] -= 2.0 * d2;
            (*g3)[pa] += 6.0 * d3; (*g3)[pb] -= 6.0 * d3;
        }
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (g.at(i, j) == Grid2D::NodeType::Exterior) continue;
            const std::size_t p = g.id(i, j);
            if (i + 1 < n && g.at(i + 1, j) != Grid2D::NodeType::Exterior)
                edge(p, g.id(i + 1, j));
            if (j + 1 < n && g.at(i, j + 1) != Grid2D::NodeType::Exterior)
                edge(p, g.id(i, j + 1));
            if (g.at(i, j) == Grid2D::NodeType::Interior) {
                const PotentialTerms pt = potential(q1[p], q2[p], q3[p], m);
                e += bf * h2 * pt.f;
                if (g1) {
                    (*g1)[p] += bf * h2 * pt.d1;
                    (*g2)[p] += bf * h2 * pt.d2;
                    (*g3)[p] += bf * h2 * pt.d3;
                }
            }
        }
    return e;
}

void install_boundary(const Grid2D& g, double sp, std::vector<double>& q1,
                      std::vector<double>& q2, std::vector<double>& q3) {
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            if (g.at(i, j) == Grid2D::NodeType::Boundary) {
                const std::size_t p = g.id(i, j);
                q1[p] = q1_boundary(g, i, j, sp);
                q2[p] = 0.0;
                q3[p] = -sp / 6.0;
            }
}

double sign_pattern(const Grid2D& g, int i, int j) {
    if (g.kind == Domain2DKind::TruncatedDiamond) {
        const double v = g.coord(i) * g.coord(j);
        return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
    }
    const double v = g.coord(j) * g.coord(j) - g.coord(i) * g.coord(i);
    return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
}

}

double reduced_energy(const ReducedState& s) {
    return j_energy(s.grid, s.material, s.lambda_bar_sq, s.q1, s.q2, s.q3,
                    nullptr, nullptr, nullptr);
}

double reduced_energy_grad(const ReducedState& s, std::vector<double>& g1,
                           std::vector<double>& g2, std::vector<double>& g3) {
    g1.assign(s.q1.size(), 0.0);
    g2.assign(s.q1.size(), 0.0);
    g3.assign(s.q1.size(), 0.0);
    return j_energy(s.grid, s.material, s.lambda_bar_sq, s.q1, s.q2, s.q3, &g1, &g2, &g3);
}

ReducedState minimize_J(const Grid2D& grid, const MaterialParams& m, double lambda_bar_sq,
                        bool constrain_q3_nonpositive, ReducedInit init, std::uint64_t seed,
                        const LbfgsOptions& opts) {
    m.validate();
    const double sp = s_plus(m);
    const std::size_t nn = grid.type.size();
    ReducedState st;
    st.grid = grid;
    st.material = m;
    st.lambda_bar_sq = lambda_bar_sq;
    st.q1.assign(nn, 0.0);
    st.q2.assign(nn, 0.0);
    st.q3.assign(nn, 0.0);
    install_boundary(grid, sp, st.q1, st.q2, st.q3);

    std::vector<std::size_t> internal;
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j)
            if (grid.at(i, j) == Grid2D::NodeType::Interior) internal.push_back(grid.id(i, j));
    const std::size_t ni = internal.size();

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j) {
            if (grid.at(i, j) != Grid2D::NodeType::Interior) continue;
            const std::size_t p = grid.id(i, j);
            const double x = grid.coord(i), y = grid.coord(j);
            switch (init) {
                case ReducedInit::WorsLike: {
                    double ramp, sgn;
                    if (grid.kind == Domain2DKind::TruncatedDiamond) {
                        ramp = std::min(1.0, std::min(std::abs(x), std::abs(y)) / 0.25);
                        sgn = sign_pattern(grid, i, j);
                    } else {
                        ramp = std::min(1.0, std::abs(std::abs(x) - std::abs(y)) / 0.25);
                        sgn = sign_pattern(grid, i, j);
                    }
                    st.q1[p] = 0.5 * sp * sgn * ramp;
                    st.q2[p] = 0.0;
                    st.q3[p] = -sp / 6.0;
                    break;
                }
                case ReducedInit::DiagonalLike:
                    st.q1[p] = 0.0;
                    st.q2[p] = grid.kind == Domain2DKind::TruncatedDiamond ? -0.5 * sp
                                                                           : 0.5 * sp;
                    st.q3[p] = -sp / 6.0;
                    break;
                case ReducedInit::Random:
                    st.q1[p] = 0.5 * sp * uni(rng);
                    st.q2[p] = 0.5 * sp * uni(rng);
                    st.q3[p] = -sp / 6.0 + sp * 0.1 * uni(rng);
                    break;
                default:
                    st.q1[p] = 0.0;
                    st.q2[p] = 0.0;
                    st.q3[p] = -sp / 6.0;
            }
        }

    std::vector<double> x0(3 * ni);
    for (std::size_t k = 0; k < ni; ++k) {
        x0[k] = st.q1[internal[k]];
        x0[ni + k] = st.q2[internal[k]];
        x0[2 * ni + k] = st.q3[internal[k]];
    }

    std::vector<double> g1(nn), g2(nn), g3(nn);
    Objective obj = [&](const std::vector<double>& x, std::vector<double>& grad) {
        for (std::size_t k = 0; k < ni; ++k) {
            st.q1[internal[k]] = x[k];
            st.q2[internal[k]] = x[ni + k];
            st.q3[internal[k]] = x[2 * ni + k];
        }
        std::fill(g1.begin(), g1.end(), 0.0);
        std::fill(g2.begin(), g2.end(), 0.0);
        std::fill(g3.begin(), g3.end(), 0.0);
        const double e = j_energy(grid, m, lambda_bar_sq, st.q1, st.q2, st.q3, &g1, &g2, &g3);
        grad.resize(3 * ni);
        for (std::size_t k = 0; k < ni; ++k) {
            grad[k] = g1[internal[k]];
            grad[ni + k] = g2[internal[k]];
            grad[2 * ni + k] = g3[internal[k]];
        }
        return e;
    };

    LbfgsOutcome out;
    if (constrain_q3_nonpositive) {
        Projection proj = [&](std::vector<double>& x) {
            for (std::size_t k = 2 * ni; k < 3 * ni; ++k) x[k] = std::min(x[k], 0.0);
        };
        out = lbfgs_minimize(obj, std::move(x0), opts, &proj);
    } else {
        out = lbfgs_minimize(obj, std::move(x0), opts);
    }

    for (std::size_t k = 0; k < ni; ++k) {
        st.q1[internal[k]] = out.x[k];
        st.q2[internal[k]] = out.x[ni + k];
        st.q3[internal[k]] = out.x[2 * ni + k];
    }
    st.energy = out.f;
    st.grad_norm = out.grad_norm;
    st.iterations = out.iterations;
    st.converged = out.converged;
    double q3max = -1e300;
    for (const std::size_t p : internal) q3max = std::max(q3max, st.q3[p]);
    st.delta0 = -q3max;
    return st;
}

ReducedState solve_wors_quadrant(const Grid2D& grid, const MaterialParams& m,
                                 double lambda_bar_sq, const LbfgsOptions& opts) {
    if (grid.kind != Domain2DKind::TruncatedDiamond)
        throw std::invalid_argument("solve_wors_quadrant: truncated-diamond domain only");
    m.validate();
    const double sp = s_plus(m);
    const int n = grid.n;
    const int N = n - 1;
    const std::size_t nn = grid.type.size();

    // octant representatives: 0 <= a_i <= a_j (x <= y within the first quadrant)
    std::vector<int> q1_dof(nn, -1), q3_dof(nn, -1);
    std::vector<std::size_t> q1_nodes, q3_nodes;
    for (int i = 0; i < n; ++i) {
        const int a = 2 * i - N;
        if (a < 0) continue;
        for (int j = 0; j < n; ++j) {
            const int b = 2 * j - N;
            if (b < a) continue;
            if (grid.at(i, j) == Grid2D::NodeType::Exterior) continue;
            const std::size_t p = grid.id(i, j);
            if (grid.at(i, j) == Grid2D::NodeType::Interior) {
                q3_dof[p] = static_cast<int>(q3_nodes.size());
                q3_nodes.push_back(p);
                if (a > 0) {  // q1 pinned to zero on the axes
                    q1_dof[p] = static_cast<int>(q1_nodes.size());
                    q1_nodes.push_back(p);
                }
            }
        }
    }
    const std::size_t n1 = q1_nodes.size(), n3 = q3_nodes.size();

    // mirror map: node -> (octant representative, q1 sign)
    std::vector<std::size_t> rep(nn, 0);
    std::vector<double> sgn(nn, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (grid.at(i, j) == Grid2D::NodeType::Exterior) continue;
            const int a = std::abs(2 * i - N), b = std::abs(2 * j - N);
            const int ra = std::min(a, b), rb = std::max(a, b);
            const int ri = (ra + N) / 2, rj = (rb + N) / 2;
            rep[grid.id(i, j)] = grid.id(ri, rj);
            const int prod = (2 * i - N) * (2 * j - N);
            sgn[grid.id(i, j)] = prod > 0 ? 1.0 : (prod < 0 ? -1.0 : 0.0);
        }

    ReducedState st;
    st.grid = grid;
    st.material = m;
    st.lambda_bar_sq = lambda_bar_sq;
    st.q1.assign(nn, 0.0);
    st.q2.assign(nn, 0.0);
    st.q3.assign(nn, 0.0);
    install_boundary(grid, sp, st.q1, st.q2, st.q3);

    std::vector<double> x0(n1 + n3);
    for (std::size_t k = 0; k < n1; ++k) {
        const std::size_t p = q1_nodes[k];
        const double x = grid.coord(static_cast<int>(p) / n);
        x0[k] = 0.5 * sp * std::min(1.0, x / 0.25);
    }
    for (std::size_t k = 0; k < n3; ++k) x0[n1 + k] = -sp / 6.0;

    std::vector<double> g1(nn), g2(nn), g3(nn);
    auto expand = [&](const std::vector<double>& x) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (grid.at(i, j) != Grid2D::NodeType::Interior) continue;
                const std::size_t p = grid.id(i, j);
                const std::size_t r = rep[p];
                st.q3[p] = q3_dof[r] >= 0 ? x[n1 + q3_dof[r]] : st.q3[r];
                st.q1[p] = q1_dof[r] >= 0 ? sgn[p] * x[q1_dof[r]] : 0.0;
            }
    };
    // The quadrant functional: one quarter of the reflected full-domain
    // energy, so gradient magnitudes match the per-quadrant scale.
    Objective obj = [&](const std::vector<double>& x, std::vector<double>& grad) {
        expand(x);
        std::fill(g1.begin(), g1.end(), 0.0);
        std::fill(g2.begin(), g2.end(), 0.0);
        std::fill(g3.begin(), g3.end(), 0.0);
        const double e = j_energy(grid, m, lambda_bar_sq, st.q1, st.q2, st.q3, &g1, &g2, &g3);
        grad.assign(n1 + n3, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (grid.at(i, j) != Grid2D::NodeType::Interior) continue;
                const std::size_t p = grid.id(i, j);
                const std::size_t r = rep[p];
                if (q3_dof[r] >= 0) grad[n1 + q3_dof[r]] += 0.25 * g3[p];
                if (q1_dof[r] >= 0) grad[q1_dof[r]] += 0.25 * sgn[p] * g1[p];
            }
        return 0.25 * e;
    };
    Projection proj = [&](std::vector<double>& x) {
        for (std::size_t k = n1; k < n1 + n3; ++k) x[k] = std::min(x[k], 0.0);
    };
    LbfgsOutcome out = lbfgs_minimize(obj, std::move(x0), opts, &proj);
    expand(out.x);
    st.energy = out.f;
    st.grad_norm = out.grad_norm;
    st.iterations = out.iterations;
    st.converged = out.converged;
    double q3max = -1e300;
    for (const std::size_t p : q3_nodes) q3max = std::max(q3max, st.q3[p]);
    st.delta0 = -q3max;
    return st;
}

BoundsReport verify_bounds(const ReducedState& s) {
    const Grid2D& g = s.grid;
    const MaterialParams& m = s.material;
    const double sp = s_plus(m), sm = s_minus(m);
    const double acrit = -m.B * m.B / (3.0 * m.C);
    const double tol = 1e-8;

    double max_t = -1e300, max_planar_minus = -1e300;
    double q3min = 1e300, q3max = -1e300, q3dev = 0.0, pattern_min = 1e300;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            if (!g.interior_off_boundary(i, j)) continue;
            const std::size_t p = g.id(i, j);
            const double q1 = s.q1[p], q2 = s.q2[p], q3 = s.q3[p];
            max_t = std::max(max_t, q1 * q1 + q2 * q2 + 3.0 * q3 * q3);
            max_planar_minus = std::max(max_planar_minus, q1 * q1 + q2 * q2 - 9.0 * q3 * q3);
            q3min = std::min(q3min, q3);
            q3max = std::max(q3max, q3);
            q3dev = std::max(q3dev, std::abs(q3 + sp / 6.0));
            pattern_min = std::min(pattern_min, sign_pattern(g, i, j) * q1);
        }

    BoundsReport rep;
    rep.q3_min = q3min;
    rep.q3_max = q3max;
    auto add = [&](const std::string& name, double value, double bound, bool pass) {
        rep.checks.push_back({name, value, bound, pass});
        rep.all_pass = rep.all_pass && pass;
    };
    add("q3_negative", q3max, 0.0, q3max < tol);
    add("norm_sq_le_splus_sq_over_3", max_t, sp * sp / 3.0, max_t <= sp * sp / 3.0 + tol);
    add("planar_lt_9q3sq", max_planar_minus, 0.0, max_planar_minus < tol);
    const bool special = std::abs(s.material.A - acrit) <= 1e-12 * std::abs(acrit);
    double lo, hi;
    if (m.A >= acrit) {  // -B^2/3C <= A < 0
        lo = -sp / 6.0;
        hi = sm / 3.0;
    } else {
        lo = sm / 3.0;
        hi = -sp / 6.0;
    }
    add("q3_lower_regime", q3min, lo, q3min >= lo - tol);
    add("q3_upper_regime", q3max, hi, q3max <= hi + tol);
    if (special) add("q3_constant_at_special_temperature", q3dev, 1e-6, q3dev <= 1e-6);
    add("sign_pattern_xy_q1", pattern_min, 0.0, pattern_min >= -tol);
    return rep;
}

std::string BoundsReport::to_json() const {
    std::ostringstream os;
    os.precision(16);
    os << "{\n  \"all_pass\": " << (all_pass ? "true" : "false") << ",\n";
    os << "  \"q3_min\": " << q3_min << ",\n  \"q3_max\": " << q3_max << ",\n";
    os << "  \"checks\": [\n";
    for (std::size_t k = 0; k < checks.size(); ++k) {
        const auto& c = checks[k];
        os << "    {\"name\": \"" << c.name << "\", \"value\": " << c.value
           << ", \"bound\": " << c.bound << ", \"pass\": " << (c.pass ? "true" : "false")
           << "}" << (k + 1 < checks.size() ? "," : "") << "\n";
    }
    os << "  ]\n}\n";
    return os.str();
}

double second_variation_H(const ReducedState& s, const std::vector<double>& phi) {
    const Grid2D& g = s.grid;
    if (phi.size() != s.q1.size())
        throw std::invalid_argument("second_variation_H: phi size mismatch");
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            if (g.at(i, j) == Grid2D::NodeType::Boundary && phi[g.id(i, j)] != 0.0)
                throw std::invalid_argument("second_variation_H: phi must vanish on the boundary");
    const MaterialParams& m = s.material;
    const double bf = s.lambda_bar_sq / (2.0 * m.C);
    const double h2 = g.h * g.h;
    double e = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            if (g.at(i, j) == Grid2D::NodeType::Exterior) continue;
            const std::size_t p = g.id(i, j);
            if (i + 1 < g.n && g.at(i + 1, j) != Grid2D::NodeType::Exterior) {
                const double d = phi[p] - phi[g.id(i + 1, j)];
                e += d * d;
            }
            if (j + 1 < g.n && g.at(i, j + 1) != Grid2D::NodeType::Exterior) {
                const double d = phi[p] - phi[g.id(i, j + 1)];
                e += d * d;
            }
            if (g.at(i, j) == Grid2D::NodeType::Interior) {
                const double q1 = s.q1[p], q3 = s.q3[p];
                const double factor =
                    m.A + 2.0 * m.B * q3 + 2.0 * m.C * (q1 * q1 + 3.0 * q3 * q3);
                e += bf * h2 * phi[p] * phi[p] * factor;
            }
        }
    return e;
}

std::vector<double> centered_bump(const Grid2D& g, double radius) {
    std::vector<double> phi(g.type.size(), 0.0);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            if (g.at(i, j) != Grid2D::NodeType::Interior) continue;
            const double r = std::hypot(g.coord(i), g.coord(j));
            if (r >= radius) continue;
            const double c = std::cos(0.5 * pi * r / radius);
            phi[g.id(i, j)] = c * c;
        }
    return phi;
}

Reduced3DResult wors_constrained_3d(const Grid2D& grid, const MaterialParams& m,
                                    double lambda_bar_sq, double eps, double wz_alpha,
                                    int nz, const LbfgsOptions& opts) {
    if (grid.kind != Domain2DKind::TruncatedDiamond)
        throw std::invalid_argument("wors_constrained_3d: truncated-diamond domain only");
    if (nz < 5) throw std::invalid_argument("wors_constrained_3d: nz >= 5");
    m.validate();
    const double sp = s_plus(m);
    const int n = grid.n;
    const int N = n - 1;
    const double hz = eps / (nz - 1);
    const double h2 = grid.h * grid.h;
    const double bf = lambda_bar_sq / (2.0 * m.C);

    // octant dof layout as in the 2D quadrant solver, replicated over levels
    std::vector<int> q1_col(grid.type.size(), -1), q3_col(grid.type.size(), -1);
    std::vector<std::size_t> q1_nodes, q3_nodes;
    for (int i = 0; i < n; ++i) {
        const int a = 2 * i - N;
        if (a < 0) continue;
        for (int j = 0; j < n; ++j) {
            const int b = 2 * j - N;
            if (b < a) continue;
            if (grid.at(i, j) != Grid2D::NodeType::Interior) continue;
            const std::size_t p = grid.id(i, j);
            q3_col[p] = static_cast<int>(q3_nodes.size());
            q3_nodes.push_back(p);
            if (a > 0) {
                q1_col[p] = static_cast<int>(q1_nodes.size());
                q1_nodes.push_back(p);
            }
        }
    }
    const std::size_t n1 = q1_nodes.size(), n3 = q3_nodes.size();
    const std::size_t dof = (n1 + n3) * nz;

    std::vector<std::size_t> rep(grid.type.size(), 0);
    std::vector<double> sgn(grid.type.size(), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (grid.at(i, j) == Grid2D::NodeType::Exterior) continue;
            const int a = std::abs(2 * i - N), b = std::abs(2 * j - N);
            const int ra = std::min(a, b), rb = std::max(a, b);
            rep[grid.id(i, j)] = grid.id((ra + N) / 2, (rb + N) / 2);
            const int prod = (2 * i - N) * (2 * j - N);
            sgn[grid.id(i, j)] = prod > 0 ? 1.0 : (prod < 0 ? -1.0 : 0.0);
        }

    Reduced3DResult res;
    res.grid = grid;
    res.nz = nz;
    res.eps = eps;
    res.hz = hz;
    const std::size_t nnz = grid.type.size() * static_cast<std::size_t>(nz);
    res.q1.assign(nnz, 0.0);
    res.q3.assign(nnz, 0.0);
    auto vid = [&](std::size_t p, int k) { return p * nz + k; };

    // lateral Dirichlet data, all levels
    std::vector<double> q1b(grid.type.size(), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (grid.at(i, j) == Grid2D::NodeType::Boundary)
                q1b[grid.id(i, j)] = q1_boundary(grid, i, j, sp);

    auto expand = [&](const std::vector<double>& x) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (grid.at(i, j) == Grid2D::NodeType::Exterior) continue;
                const std::size_t p = grid.id(i, j);
                if (grid.at(i, j) == Grid2D::NodeType::Boundary) {
                    for (int k = 0; k < nz; ++k) {
                        res.q1[vid(p, k)] = q1b[p];
                        res.q3[vid(p, k)] = -sp / 6.0;
                    }
                    continue;
                }
                const std::size_t r = rep[p];
                for (int k = 0; k < nz; ++k) {
                    res.q3[vid(p, k)] = x[(n1 + q3_col[r]) * nz + static_cast<std::size_t>(k)];
                    res.q1[vid(p, k)] =
                        q1_col[r] >= 0
                            ? sgn[p] * x[static_cast<std::size_t>(q1_col[r]) * nz + k]
                            : 0.0;
                }
            }
    };

    std::vector<double> gq1(nnz), gq3(nnz);
    Objective obj = [&](const std::vector<double>& x, std::vector<double>& grad) {
        expand(x);
        std::fill(gq1.begin(), gq1.end(), 0.0);
        std::fill(gq3.begin(), gq3.end(), 0.0);
        double e = 0.0;
        for (int k = 0; k < nz; ++k) {
            const double tz = (k == 0 || k == nz - 1) ? 0.5 : 1.0;
            const double cz = hz * tz;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (grid.at(i, j) == Grid2D::NodeType::Exterior) continue;
                    const std::size_t p = grid.id(i, j);
                    const std::size_t v = vid(p, k);
                    // in-plane edges
                    auto edge = [&](std::size_t pb) {
                        const std::size_t vb = vid(pb, k);
                        const double d1 = res.q1[v] - res.q1[vb];
                        const double d3 = res.q3[v] - res.q3[vb];
                        e += cz * (d1 * d1 + 3.0 * d3 * d3);
                        gq1[v] += cz * 2.0 * d1; gq1[vb] -= cz * 2.0 * d1;
                        gq3[v] += cz * 6.0 * d3; gq3[vb] -= cz * 6.0 * d3;
                    };
                    if (i + 1 < n && grid.at(i + 1, j) != Grid2D::NodeType::Exterior)
                        edge(grid.id(i + 1, j));
                    if (j + 1 < n && grid.at(i, j + 1) != Grid2D::NodeType::Exterior)
                        edge(grid.id(i, j + 1));
                    // vertical edges
                    if (k + 1 < nz) {
                        const std::size_t vu = vid(p, k + 1);
                        const double c = h2 / hz;
                        const double d1 = res.q1[vu] - res.q1[v];
                        const double d3 = res.q3[vu] - res.q3[v];
                        e += c * (d1 * d1 + 3.0 * d3 * d3);
                        gq1[vu] += c * 2.0 * d1; gq1[v] -= c * 2.0 * d1;
                        gq3[vu] += c * 6.0 * d3; gq3[v] -= c * 6.0 * d3;
                    }
                    // potential
                    if (grid.at(i, j) == Grid2D::NodeType::Interior) {
                        const PotentialTerms pt = potential(res.q1[v], 0.0, res.q3[v], m);
                        e += bf * h2 * cz * pt.f;
                        gq1[v] += bf * h2 * cz * pt.d1;
                        gq3[v] += bf * h2 * cz * pt.d3;
                    }
                    // plate surface term
                    if (k == 0 || k == nz - 1) {
                        const double d = res.q3[v] + sp / 6.0;
                        e += 4.0 * wz_alpha * h2 * d * d;
                        gq3[v] += 8.0 * wz_alpha * h2 * d;
                    }
                }
        }
        grad.assign(dof, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (grid.at(i, j) != Grid2D::NodeType::Interior) continue;
                const std::size_t p = grid.id(i, j);
                const std::size_t r = rep[p];
                for (int k = 0; k < nz; ++k) {
                    grad[(n1 + q3_col[r]) * nz + static_cast<std::size_t>(k)] +=
                        0.25 * gq3[vid(p, k)];
                    if (q1_col[r] >= 0)
                        grad[static_cast<std::size_t>(q1_col[r]) * nz + k] +=
                            0.25 * sgn[p] * gq1[vid(p, k)];
                }
            }
        return 0.25 * e;  // quadrant-column share of the reflected energy
    };

    std::vector<double> x0(dof, 0.0);
    for (std::size_t c = 0; c < n1; ++c) {
        const double x = grid.coord(static_cast<int>(q1_nodes[c]) / n);
        for (int k = 0; k < nz; ++k)
            x0[c * nz + k] = 0.5 * sp * std::min(1.0, x / 0.25);
    }
    for (std::size_t c = 0; c < n3; ++c)
        for (int k = 0; k < nz; ++k) x0[(n1 + c) * nz + k] = -sp / 6.0;

    Projection proj = [&](std::vector<double>& x) {
        for (std::size_t k = n1 * nz; k < dof; ++k) x[k] = std::min(x[k], 0.0);
    };
    LbfgsOutcome out = lbfgs_minimize(obj, std::move(x0), opts, &proj);
    expand(out.x);
    res.energy = out.f;
    res.grad_norm = out.grad_norm;
    res.iterations = out.iterations;
    res.converged = out.converged;

    res.q3_max = -1e300;
    res.z_variation = 0.0;
    res.boundary_residual = 0.0;
    const double robin = 4.0 * wz_alpha / 3.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (grid.at(i, j) != Grid2D::NodeType::Interior) continue;
            const std::size_t p = grid.id(i, j);
            for (int k = 0; k < nz; ++k) {
                res.q3_max = std::max(res.q3_max, res.q3[vid(p, k)]);
                res.z_variation = std::max(
                    res.z_variation,
                    std::max(std::abs(res.q1[vid(p, k)] - res.q1[vid(p, 0)]),
                             std::abs(res.q3[vid(p, k)] - res.q3[vid(p, 0)])));
            }
            // Robin condition at the plates, second-order one-sided derivative
            const double dtop = (3.0 * res.q3[vid(p, nz - 1)] - 4.0 * res.q3[vid(p, nz - 2)] +
                                 res.q3[vid(p, nz - 3)]) / (2.0 * hz);
            const double dbot = (3.0 * res.q3[vid(p, 0)] - 4.0 * res.q3[vid(p, 1)] +
                                 res.q3[vid(p, 2)]) / (2.0 * hz);
            res.boundary_residual = std::max(
                res.boundary_residual,
                std::max(std::abs(dtop + robin * (res.q3[vid(p, nz - 1)] + sp / 6.0)),
                         std::abs(dbot + robin * (res.q3[vid(p, 0)] + sp / 6.0))));
        }
    return res;
}

double slice_difference(const Reduced3DResult& r, const ReducedState& s2d, int level) {
    if (r.grid.n != s2d.grid.n)
        throw std::invalid_argument("slice_difference: grids differ");
    double sup = 0.0;
    const int n = r.grid.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (r.grid.at(i, j) == Grid2D::NodeType::Exterior) continue;
            const std::size_t p = r.grid.id(i, j);
            const std::size_t v = p * static_cast<std::size_t>(r.nz) + level;
            sup = std::max(sup, std::abs(r.q1[v] - s2d.q1[p]));
            sup = std::max(sup, std::abs(r.q3[v] - s2d.q3[p]));
        }
    return sup;
}

}
