#include "qwell/io.hpp"

#include "qwell/tensor.hpp"
#include "qwell/version.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace qwell {

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

struct PointData {
    double beta2;
    std::array<double, 3> director;
    double q3;
    QTensor q;
};

PointData point_data(const LatticeValues& lv, std::size_t idx, double tol_iso) {
    PointData pd;
    for (int c = 0; c < 5; ++c) pd.q[c] = lv.v[c][idx];
    pd.beta2 = biaxiality(pd.q, tol_iso);
    const EigenFrame ef = eigen_frame(pd.q);
    pd.director = ef.director();
    const double nn = std::hypot(std::hypot(pd.director[0], pd.director[1]), pd.director[2]);
    for (auto& c : pd.director) c /= (nn > 0.0 ? nn : 1.0);
    pd.q3 = -0.5 * (pd.q[0] + pd.q[3]);
    return pd;
}

}

void export_vtk(const SpectralField& f, const WellProblem& prob, const std::string& path,
                std::uint64_t config_hash, int nx) {
    const int nz = std::max(8, static_cast<int>(std::lround(16.0 * prob.eps)));
    const auto xs = linspace(-1.0, 1.0, nx);
    const auto zs = linspace(0.0, prob.eps, nz);
    const LatticeValues lv = evaluate_on_lattice(f, xs, xs, zs);
    const double tol_iso = 1e-9 * prob.s_plus();

    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.precision(9);
    const std::size_t npts = static_cast<std::size_t>(nx) * nx * nz;
    os << "# vtk DataFile Version 3.0\n";
    os << version_string << " field export, config " << config_hash << "\n";
    os << "ASCII\nDATASET STRUCTURED_GRID\n";
    os << "DIMENSIONS " << nx << ' ' << nx << ' ' << nz << "\n";
    os << "POINTS " << npts << " double\n";
    // VTK point order: x fastest, then y, then z
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < nx; ++j)
            for (int i = 0; i < nx; ++i)
                os << xs[i] << ' ' << xs[j] << ' ' << zs[k] << "\n";

    auto idx_of = [&](int i, int j, int k) {
        return (static_cast<std::size_t>(i) * nx + j) * nz + k;
    };

    os << "POINT_DATA " << npts << "\n";
    os << "SCALARS beta2 double 1\nLOOKUP_TABLE default\n";
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < nx; ++j)
            for (int i = 0; i < nx; ++i)
                os << point_data(lv, idx_of(i, j, k), tol_iso).beta2 << "\n";
    os << "VECTORS director double\n";
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < nx; ++j)
            for (int i = 0; i < nx; ++i) {
                const auto d = point_data(lv, idx_of(i, j, k), tol_iso).director;
                os << d[0] << ' ' << d[1] << ' ' << d[2] << "\n";
            }
    os << "SCALARS q3 double 1\nLOOKUP_TABLE default\n";
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < nx; ++j)
            for (int i = 0; i < nx; ++i)
                os << point_data(lv, idx_of(i, j, k), tol_iso).q3 << "\n";
    os << "FIELD tensors 1\nQ 6 " << npts << " double\n";
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < nx; ++j)
            for (int i = 0; i < nx; ++i) {
                const QTensor q = point_data(lv, idx_of(i, j, k), tol_iso).q;
                os << q[0] << ' ' << q[1] << ' ' << q[2] << ' ' << q[3] << ' ' << q[4] << ' '
                   << q.q33() << "\n";
            }
    if (!os) throw std::runtime_error("write failed: " + path);
}

void export_slice_csv(const SpectralField& f, const WellProblem& prob, double z,
                      const std::string& path, std::uint64_t config_hash, int nx) {
    const auto xs = linspace(-1.0, 1.0, nx);
    const LatticeValues lv = evaluate_on_lattice(f, xs, xs, {z});
    const double tol_iso = 1e-9 * prob.s_plus();
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.precision(12);
    os << "# " << version_string << " slice z=" << z << " config " << config_hash << "\n";
    os << "x,y,beta2,nx,ny,nz,q3\n";
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nx; ++j) {
            const PointData pd = point_data(lv, static_cast<std::size_t>(i) * nx + j, tol_iso);
            os << xs[i] << ',' << xs[j] << ',' << pd.beta2 << ',' << pd.director[0] << ','
               << pd.director[1] << ',' << pd.director[2] << ',' << pd.q3 << "\n";
        }
    if (!os) throw std::runtime_error("write failed: " + path);
}

void export_reduced_csv(const ReducedState& s, const std::string& path,
                        std::uint64_t config_hash) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.precision(12);
    const double tol_iso = 1e-9 * s_plus(s.material);
    os << "# " << version_string << " reduced state config " << config_hash << "\n";
    os << "x,y,q1,q2,q3,beta2\n";
    for (int i = 0; i < s.grid.n; ++i)
        for (int j = 0; j < s.grid.n; ++j) {
            if (s.grid.at(i, j) == Grid2D::NodeType::Exterior) continue;
            const std::size_t p = s.grid.id(i, j);
            QTensor q;
            if (s.grid.kind == Domain2DKind::TruncatedDiamond) {
                FrameComponents fc;
                fc.q = {s.q1[p], s.q2[p], s.q3[p], 0.0, 0.0};
                q = from_frame(fc);
            } else {
                AxisComponents ac;
                ac.q = {s.q1[p], s.q2[p], s.q3[p], 0.0, 0.0};
                q = from_axis(ac);
            }
            os << s.grid.coord(i) << ',' << s.grid.coord(j) << ',' << s.q1[p] << ','
               << s.q2[p] << ',' << s.q3[p] << ',' << biaxiality(q, tol_iso) << "\n";
        }
    if (!os) throw std::runtime_error("write failed: " + path);
}

}
