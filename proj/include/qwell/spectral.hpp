#ifndef QWELL_SPECTRAL_HPP
#define QWELL_SPECTRAL_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

// Tensor-product spectral representation of the five Q-tensor components on
// the computational box, with synthesis/analysis transforms, collocation
// derivatives, and quadrature. The physical well is (-1,1)^2 x (0,eps).
//
// Default basis is Chebyshev in all three directions on Gauss-Lobatto nodes
// with Clenshaw-Curtis weights. A Fourier(x) x Fourier(y) x Chebyshev(z)
// mode is available for comparison; it identifies opposite lateral walls
// periodically, so the two walls of a direction coincide there.

namespace qwell {

enum class BasisKind : std::uint8_t { Chebyshev = 0, Fourier = 1 };

struct Basis1D {
    BasisKind kind = BasisKind::Chebyshev;
    // Chebyshev: number of polynomials T_0..T_{n_modes-1}.
    // Fourier: truncation L; the functions are X_l, l = 1-L .. L-1
    //          (cos l t for l >= 0, sin |l| t for l < 0), 2L-1 of them.
    int n_modes = 0;

    int n_funcs() const {
        return kind == BasisKind::Fourier ? 2 * n_modes - 1 : n_modes;
    }
};

enum class Face : int { XMin = 0, XMax, YMin, YMax, ZMin, ZMax };

// One direction of the grid: nodes, weights and dense basis matrices, all in
// physical coordinates (map Jacobians folded in).
struct GridAxis {
    Basis1D basis;
    int nq = 0;                // quadrature nodes (2 x n_funcs by default)
    std::vector<double> t;     // computational nodes
    std::vector<double> x;     // physical nodes
    std::vector<double> w;     // physical quadrature weights
    std::vector<double> S;     // nq x nf   value matrix
    std::vector<double> D;     // nq x nf   d/dx_phys
    std::vector<double> D2;    // nq x nf   d2/dx_phys2
    std::vector<double> ST, DT;  // transposes, nf x nq
    std::vector<double> P;     // nf x nq   quadrature-weighted pseudo-inverse
    double dt_dx = 1.0;        // computational-per-physical map factor

    int nf() const { return basis.n_funcs(); }
    // Row of S (and D) for evaluation at arbitrary physical coordinate.
    void eval_row(double x_phys, double* s_row, double* d_row) const;
};

struct SpectralGrid {
    GridAxis ax, ay, az;
    double eps = 1.0;

    static SpectralGrid make(Basis1D bx, Basis1D by, Basis1D bz, double eps,
                             int quad_factor = 2);

    int n_modes_total() const { return ax.nf() * ay.nf() * az.nf(); }
    int n_nodes_total() const { return ax.nq * ay.nq * az.nq; }
    int dof_total() const { return 5 * n_modes_total(); }

    std::size_t node_index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * ay.nq + j) * az.nq + k;
    }

    double integrate_volume(const double* density) const;
    double integrate_volume(const std::vector<double>& d) const {
        return integrate_volume(d.data());
    }

    // Face densities are indexed over the two tangential directions in
    // (x-major, then y or z) order, matching extract_face_values().
    double integrate_face(Face f, const double* density) const;
    int face_nodes(Face f) const;

    // Volume-node index of face node m (faces are node slices: Lobatto in
    // Chebyshev directions; in Fourier directions both walls map to node 0).
    std::size_t face_node_index(Face f, int m) const;

    bool same_layout(const SpectralGrid& o) const;
};

// Coefficients p_i^{lmn}, component-major then l, m, n. Degrees of freedom
// D = 5 * nfx * nfy * nfz; the frozen flattening is coeffs[((c*nfx + l)*nfy
// + m)*nfz + n].
struct SpectralField {
    std::shared_ptr<const SpectralGrid> grid;
    std::vector<double> coeffs;

    static SpectralField zeros(std::shared_ptr<const SpectralGrid> g);

    double* comp(int c) {
        return coeffs.data() + static_cast<std::size_t>(c) * grid->n_modes_total();
    }
    const double* comp(int c) const {
        return coeffs.data() + static_cast<std::size_t>(c) * grid->n_modes_total();
    }
};

// Values and first physical derivatives of the five components at all
// quadrature nodes.
struct CollocationValues {
    int nx = 0, ny = 0, nz = 0;
    std::array<std::vector<double>, 5> v, dx, dy, dz;

    void resize(const SpectralGrid& g);
};

void synthesize(const SpectralGrid& g, const double* coeffs, CollocationValues& out);
void synthesize(const SpectralField& f, CollocationValues& out);
CollocationValues synthesize(const SpectralField& f);

// Laplacian of each component at the nodes (spectral second derivatives).
void synthesize_laplacian(const SpectralField& f, std::array<std::vector<double>, 5>& lap);

// Quadrature-weighted least-squares projection onto the band; exact inverse
// of synthesize() for band-limited data. Derivative arrays are ignored.
SpectralField analyze(std::shared_ptr<const SpectralGrid> g,
                      const std::array<std::vector<double>, 5>& values);
SpectralField analyze(const CollocationValues& cv, std::shared_ptr<const SpectralGrid> g);

// grad_out (length dof_total) += adjoint of synthesize applied to the given
// node-space cotangents (any of the derivative cotangents may be null).
void adjoint_accumulate(const SpectralGrid& g,
                        const std::array<const double*, 5>& vbar,
                        const std::array<const double*, 5>& dxbar,
                        const std::array<const double*, 5>& dybar,
                        const std::array<const double*, 5>& dzbar,
                        double* grad_out);

// Dense evaluation on an arbitrary rectilinear lattice (component values
// only), used by classification and exporters.
struct LatticeValues {
    std::vector<double> xs, ys, zs;
    std::array<std::vector<double>, 5> v;    // [(ix*ny + iy)*nz + iz]
    std::array<std::vector<double>, 5> dz;   // z-derivatives (optional use)
};
LatticeValues evaluate_on_lattice(const SpectralField& f, const std::vector<double>& xs,
                                  const std::vector<double>& ys, const std::vector<double>& zs,
                                  bool want_dz = false);

// Single-point evaluation (slow path, for spot checks).
std::array<double, 5> evaluate_at(const SpectralField& f, double x, double y, double z);

// Serialization. Format by extension: ".csv" writes a commented header plus
// "comp,l,m,n,value" rows; anything else writes the binary format (magic
// QWF1, header with basis kinds, mode counts, quad counts, eps, ordering
// version, problem hash, then coefficients).
void save_field(const SpectralField& f, const std::string& path, std::uint64_t problem_hash);
SpectralField load_field(const std::string& path, std::uint64_t* problem_hash_out = nullptr);

}

#endif
