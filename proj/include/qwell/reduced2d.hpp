#ifndef QWELL_REDUCED2D_HPP
#define QWELL_REDUCED2D_HPP

#include "qwell/lbfgs.hpp"
#include "qwell/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

// Reduced three-field system (q1, q2, q3) on a 2D cross-section with true
// Dirichlet data, discretized by second-order finite differences on a
// uniform grid. Includes the quadrant construction of the cross solution
// with reflection, the analytical-bounds verifier, the second-variation
// evaluator, and the two-field quadrant-column solver on the 3D well.
//
// Default geometry is the truncated square with diagonals along the
// coordinate axes (corner parameter eta); a full-square variant with wall
// data in the axis frame is available. On the truncated domain the fields
// are diagonal-frame components; on the full square, axis-frame.

namespace qwell {

enum class Domain2DKind { TruncatedDiamond, FullSquare };

struct Grid2D {
    Domain2DKind kind = Domain2DKind::TruncatedDiamond;
    int n = 129;      // nodes per side (odd, so the 45-degree edges hit nodes)
    double eta = 1.0 / 16.0;
    double h = 0.0;

    enum class NodeType : std::uint8_t { Exterior, Boundary, Interior };
    std::vector<NodeType> type;  // n*n, row-major (i over x, j over y)

    static Grid2D make(Domain2DKind kind, int n, double eta);

    double coord(int i) const { return -1.0 + h * i; }
    std::size_t id(int i, int j) const { return static_cast<std::size_t>(i) * n + j; }
    NodeType at(int i, int j) const { return type[id(i, j)]; }
    bool interior_off_boundary(int i, int j) const;  // interior, no boundary neighbor
};

struct ReducedState {
    Grid2D grid;
    MaterialParams material;
    double lambda_bar_sq = 1.0;
    std::vector<double> q1, q2, q3;  // nodal values, exterior entries zero
    double energy = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    double delta0 = 0.0;  // -max interior q3 (cross solver)
};

// Dirichlet data for q1 (q2 = 0 and q3 = -s_plus/6 everywhere on the
// boundary). Long edges carry +-s_plus/2 with the sign pattern xy q1 >= 0;
// short edges ramp linearly through zero.
double q1_boundary(const Grid2D& g, int i, int j, double s_plus);

enum class ReducedInit { WorsLike, DiagonalLike, Random, Uniform };

LbfgsOptions reduced_default_options();

ReducedState minimize_J(const Grid2D& grid, const MaterialParams& m, double lambda_bar_sq,
                        bool constrain_q3_nonpositive, ReducedInit init,
                        std::uint64_t seed = 1,
                        const LbfgsOptions& opts = reduced_default_options());

// Quadrant minimization of the two-field functional with q1 = 0 on the
// interior quadrant boundary, q3 <= 0, natural condition for q3, extended to
// the full domain by reflection. TruncatedDiamond only.
ReducedState solve_wors_quadrant(const Grid2D& grid, const MaterialParams& m,
                                 double lambda_bar_sq,
                                 const LbfgsOptions& opts = reduced_default_options());

// Discrete energy (and gradient w.r.t. every interior node value) of the
// reduced functional; exposed for oracle tests.
double reduced_energy(const ReducedState& s);
double reduced_energy_grad(const ReducedState& s, std::vector<double>& g1,
                           std::vector<double>& g2, std::vector<double>& g3);

struct BoundsCheck {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct BoundsReport {
    std::vector<BoundsCheck> checks;
    bool all_pass = true;
    double q3_min = 0.0, q3_max = 0.0;
    std::string to_json() const;
};

// Interior-node checks (one spacing away from the boundary), tolerance 1e-8:
//   (i)  q1^2 + q2^2 + 3 q3^2 <= s_plus^2/3
//   (ii) q1^2 + q2^2 < 9 q3^2
//   (iii) regime bounds on q3 per temperature
//   (iv) at A = -B^2/(3C): q3 = -s_plus/6 within 1e-6
// plus the sign pattern xy q1 >= 0.
BoundsReport verify_bounds(const ReducedState& s);

// H[phi] = sum_edges (dphi)^2 + (lb^2/2C) h^2 sum_int phi^2 (A + 2B q3
// + 2C (q1^2 + 3 q3^2)); phi must vanish on boundary nodes.
double second_variation_H(const ReducedState& s, const std::vector<double>& phi);

// Centered compactly supported bump for second-variation probes.
std::vector<double> centered_bump(const Grid2D& g, double radius = 0.5);

// Two-field quadrant-column solver on V = Omega x (0, eps) with the
// top/bottom surface term; wz_alpha = w_z * alpha_z (dimensionless).
struct Reduced3DResult {
    Grid2D grid;
    int nz = 0;
    double eps = 0.0, hz = 0.0;
    std::vector<double> q1, q3;  // (i*n + j)*nz + k
    double energy = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    double q3_max = 0.0;
    double boundary_residual = 0.0;  // Robin condition on the plates
    double z_variation = 0.0;        // sup over nodes and levels vs level 0
};

Reduced3DResult wors_constrained_3d(const Grid2D& grid, const MaterialParams& m,
                                    double lambda_bar_sq, double eps, double wz_alpha,
                                    int nz = 17,
                                    const LbfgsOptions& opts = reduced_default_options());

// 2D slice comparison helper: sup |q - q_slice(level k)| over quadrant nodes.
double slice_difference(const Reduced3DResult& r, const ReducedState& s2d, int level);

}

#endif
