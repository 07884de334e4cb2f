#include "qwell/spectral.hpp"

#include "qwell/kernels.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qwell {

namespace {

struct Scratch {
    std::vector<double> a, b, c, d, e;
};

Scratch& scratch() {
    thread_local Scratch s;
    return s;
}

// out(nq_y-stage batched): for each leading slab apply A (rows x k) to
// B-slab (k x cols).
void batched_gemm(std::size_t slabs, std::size_t rows, std::size_t cols, std::size_t k,
                  const double* a, const double* b, double* c, bool acc) {
    const auto& K = kern::active_ops();
    for (std::size_t s = 0; s < slabs; ++s)
        K.gemm(rows, cols, k, a, b + s * k * cols, c + s * rows * cols, acc);
}

}

void synthesize(const SpectralGrid& g, const double* coeffs, CollocationValues& out) {
    const auto& K = kern::active_ops();
    out.resize(g);
    const std::size_t fx = g.ax.nf(), fy = g.ay.nf(), fz = g.az.nf();
    const std::size_t qx = g.ax.nq, qy = g.ay.nq, qz = g.az.nq;
    Scratch& s = scratch();
    s.a.resize(qx * fy * fz);      // Sx C
    s.b.resize(qx * fy * fz);      // Dx C
    s.c.resize(qx * qy * fz);      // Sy Sx C
    s.d.resize(qx * qy * fz);      // Sy Dx C
    s.e.resize(qx * qy * fz);      // Dy Sx C
    for (int comp = 0; comp < 5; ++comp) {
        const double* cf = coeffs + static_cast<std::size_t>(comp) * fx * fy * fz;
        K.gemm(qx, fy * fz, fx, g.ax.S.data(), cf, s.a.data(), false);
        K.gemm(qx, fy * fz, fx, g.ax.D.data(), cf, s.b.data(), false);
        batched_gemm(qx, qy, fz, fy, g.ay.S.data(), s.a.data(), s.c.data(), false);
        batched_gemm(qx, qy, fz, fy, g.ay.S.data(), s.b.data(), s.d.data(), false);
        batched_gemm(qx, qy, fz, fy, g.ay.D.data(), s.a.data(), s.e.data(), false);
        K.gemm(qx * qy, qz, fz, s.c.data(), g.az.ST.data(), out.v[comp].data(), false);
        K.gemm(qx * qy, qz, fz, s.d.data(), g.az.ST.data(), out.dx[comp].data(), false);
        K.gemm(qx * qy, qz, fz, s.e.data(), g.az.ST.data(), out.dy[comp].data(), false);
        K.gemm(qx * qy, qz, fz, s.c.data(), g.az.DT.data(), out.dz[comp].data(), false);
    }
}

void synthesize(const SpectralField& f, CollocationValues& out) {
    synthesize(*f.grid, f.coeffs.data(), out);
}

CollocationValues synthesize(const SpectralField& f) {
    CollocationValues cv;
    synthesize(f, cv);
    return cv;
}

void synthesize_laplacian(const SpectralField& f, std::array<std::vector<double>, 5>& lap) {
    const SpectralGrid& g = *f.grid;
    const auto& K = kern::active_ops();
    const std::size_t fx = g.ax.nf(), fy = g.ay.nf(), fz = g.az.nf();
    const std::size_t qx = g.ax.nq, qy = g.ay.nq, qz = g.az.nq;
    std::vector<double> d2zt(fz * qz);
    for (std::size_t k = 0; k < qz; ++k)
        for (std::size_t n = 0; n < fz; ++n) d2zt[n * qz + k] = g.az.D2[k * fz + n];
    Scratch& s = scratch();
    s.a.resize(qx * fy * fz);
    s.b.resize(qx * fy * fz);
    s.c.resize(qx * qy * fz);
    s.d.resize(qx * qy * fz);
    for (int comp = 0; comp < 5; ++comp) {
        lap[comp].assign(qx * qy * qz, 0.0);
        const double* cf = f.comp(comp);
        K.gemm(qx, fy * fz, fx, g.ax.S.data(), cf, s.a.data(), false);
        K.gemm(qx, fy * fz, fx, g.ax.D2.data(), cf, s.b.data(), false);
        // d2x + d2y pipelines share the z synthesis
        batched_gemm(qx, qy, fz, fy, g.ay.S.data(), s.b.data(), s.c.data(), false);
        batched_gemm(qx, qy, fz, fy, g.ay.D2.data(), s.a.data(), s.d.data(), false);
        for (std::size_t i = 0; i < s.c.size(); ++i) s.c[i] += s.d[i];
        K.gemm(qx * qy, qz, fz, s.c.data(), g.az.ST.data(), lap[comp].data(), true);
        batched_gemm(qx, qy, fz, fy, g.ay.S.data(), s.a.data(), s.d.data(), false);
        K.gemm(qx * qy, qz, fz, s.d.data(), d2zt.data(), lap[comp].data(), true);
    }
}

SpectralField analyze(std::shared_ptr<const SpectralGrid> g,
                      const std::array<std::vector<double>, 5>& values) {
    const SpectralGrid& gr = *g;
    const auto& K = kern::active_ops();
    const std::size_t fx = gr.ax.nf(), fy = gr.ay.nf(), fz = gr.az.nf();
    const std::size_t qx = gr.ax.nq, qy = gr.ay.nq, qz = gr.az.nq;
    const std::size_t nq = qx * qy * qz;
    std::vector<double> pzt(qz * fz);
    for (std::size_t n = 0; n < fz; ++n)
        for (std::size_t k = 0; k < qz; ++k) pzt[k * fz + n] = gr.az.P[n * qz + k];
    SpectralField out = SpectralField::zeros(g);
    Scratch& s = scratch();
    s.a.resize(fx * qy * qz);
    s.b.resize(fx * fy * qz);
    for (int comp = 0; comp < 5; ++comp) {
        if (values[comp].size() != nq)
            throw std::invalid_argument("analyze: node count does not match grid");
        K.gemm(fx, qy * qz, qx, gr.ax.P.data(), values[comp].data(), s.a.data(), false);
        batched_gemm(fx, fy, qz, qy, gr.ay.P.data(), s.a.data(), s.b.data(), false);
        K.gemm(fx * fy, fz, qz, s.b.data(), pzt.data(), out.comp(comp), false);
    }
    return out;
}

SpectralField analyze(const CollocationValues& cv, std::shared_ptr<const SpectralGrid> g) {
    return analyze(std::move(g), cv.v);
}

void adjoint_accumulate(const SpectralGrid& g,
                        const std::array<const double*, 5>& vbar,
                        const std::array<const double*, 5>& dxbar,
                        const std::array<const double*, 5>& dybar,
                        const std::array<const double*, 5>& dzbar,
                        double* grad_out) {
    const auto& K = kern::active_ops();
    const std::size_t fx = g.ax.nf(), fy = g.ay.nf(), fz = g.az.nf();
    const std::size_t qx = g.ax.nq, qy = g.ay.nq, qz = g.az.nq;
    Scratch& s = scratch();
    s.a.resize(qx * qy * fz);   // Sz^T (vbar, dzbar contributions)
    s.b.resize(qx * qy * fz);   // Sz^T dxbar
    s.c.resize(qx * fy * fz);   // after y-stage, Sx^T pipeline
    s.d.resize(qx * fy * fz);   // after y-stage, Dx^T pipeline
    s.e.resize(qx * qy * fz);
    const std::size_t nm = fx * fy * fz;
    for (int comp = 0; comp < 5; ++comp) {
        bool have_a = false;
        if (vbar[comp]) {
            K.gemm(qx * qy, fz, qz, vbar[comp], g.az.S.data(), s.a.data(), false);
            have_a = true;
        }
        if (dzbar[comp]) {
            if (!have_a) { std::fill(s.a.begin(), s.a.end(), 0.0); have_a = true; }
            K.gemm(qx * qy, fz, qz, dzbar[comp], g.az.D.data(), s.a.data(), true);
        }
        bool have_c = false;
        if (have_a) {
            batched_gemm(qx, fy, fz, qy, g.ay.ST.data(), s.a.data(), s.c.data(), false);
            have_c = true;
        }
        if (dybar[comp]) {
            K.gemm(qx * qy, fz, qz, dybar[comp], g.az.S.data(), s.e.data(), false);
            if (!have_c) { std::fill(s.c.begin(), s.c.end(), 0.0); have_c = true; }
            for (std::size_t i = 0; i < qx; ++i)
                K.gemm(fy, fz, qy, g.ay.DT.data(), s.e.data() + i * qy * fz,
                       s.c.data() + i * fy * fz, true);
        }
        double* gc = grad_out + static_cast<std::size_t>(comp) * nm;
        if (have_c) K.gemm(fx, fy * fz, qx, g.ax.ST.data(), s.c.data(), gc, true);
        if (dxbar[comp]) {
            K.gemm(qx * qy, fz, qz, dxbar[comp], g.az.S.data(), s.b.data(), false);
            batched_gemm(qx, fy, fz, qy, g.ay.ST.data(), s.b.data(), s.d.data(), false);
            K.gemm(fx, fy * fz, qx, g.ax.DT.data(), s.d.data(), gc, true);
        }
    }
}

LatticeValues evaluate_on_lattice(const SpectralField& f, const std::vector<double>& xs,
                                  const std::vector<double>& ys, const std::vector<double>& zs,
                                  bool want_dz) {
    const SpectralGrid& g = *f.grid;
    const auto& K = kern::active_ops();
    const std::size_t fx = g.ax.nf(), fy = g.ay.nf(), fz = g.az.nf();
    const std::size_t px = xs.size(), py = ys.size(), pz = zs.size();
    std::vector<double> Ex(px * fx), Ey(py * fy), EzT(fz * pz), DzT;
    std::vector<double> srow(std::max({fx, fy, fz})), drow(std::max({fx, fy, fz}));
    for (std::size_t i = 0; i < px; ++i) {
        g.ax.eval_row(xs[i], srow.data(), nullptr);
        std::memcpy(&Ex[i * fx], srow.data(), fx * sizeof(double));
    }
    for (std::size_t j = 0; j < py; ++j) {
        g.ay.eval_row(ys[j], srow.data(), nullptr);
        std::memcpy(&Ey[j * fy], srow.data(), fy * sizeof(double));
    }
    if (want_dz) DzT.resize(fz * pz);
    for (std::size_t k = 0; k < pz; ++k) {
        g.az.eval_row(zs[k], srow.data(), want_dz ? drow.data() : nullptr);
        for (std::size_t n = 0; n < fz; ++n) {
            EzT[n * pz + k] = srow[n];
            if (want_dz) DzT[n * pz + k] = drow[n];
        }
    }
    LatticeValues out;
    out.xs = xs; out.ys = ys; out.zs = zs;
    std::vector<double> t1(px * fy * fz), t2(px * py * fz);
    for (int comp = 0; comp < 5; ++comp) {
        out.v[comp].assign(px * py * pz, 0.0);
        K.gemm(px, fy * fz, fx, Ex.data(), f.comp(comp), t1.data(), false);
        batched_gemm(px, py, fz, fy, Ey.data(), t1.data(), t2.data(), false);
        K.gemm(px * py, pz, fz, t2.data(), EzT.data(), out.v[comp].data(), false);
        if (want_dz) {
            out.dz[comp].assign(px * py * pz, 0.0);
            K.gemm(px * py, pz, fz, t2.data(), DzT.data(), out.dz[comp].data(), false);
        }
    }
    return out;
}

std::array<double, 5> evaluate_at(const SpectralField& f, double x, double y, double z) {
    LatticeValues lv = evaluate_on_lattice(f, {x}, {y}, {z});
    return {lv.v[0][0], lv.v[1][0], lv.v[2][0], lv.v[3][0], lv.v[4][0]};
}

// ---------------------------------------------------------------- file I/O

namespace {

constexpr std::uint32_t field_magic = 0x31465751;  // "QWF1"
constexpr std::uint32_t ordering_version = 1;

bool has_suffix(const std::string& s, const char* suf) {
    const std::size_t n = std::strlen(suf);
    return s.size() >= n && s.compare(s.size() - n, n, suf) == 0;
}

const char* kind_name(BasisKind k) {
    return k == BasisKind::Fourier ? "fourier" : "chebyshev";
}

BasisKind kind_from(const std::string& s) {
    if (s == "fourier") return BasisKind::Fourier;
    if (s == "chebyshev") return BasisKind::Chebyshev;
    throw std::runtime_error("field file: unknown basis kind '" + s + "'");
}

std::shared_ptr<const SpectralGrid> rebuild_grid(BasisKind kx, int mx, BasisKind ky, int my,
                                                 BasisKind kz, int mz, int qx, double eps) {
    Basis1D bx{kx, mx}, by{ky, my}, bz{kz, mz};
    const int qf = qx / bx.n_funcs();
    auto g = std::make_shared<SpectralGrid>(SpectralGrid::make(bx, by, bz, eps, qf));
    if (g->ax.nq != qx) throw std::runtime_error("field file: unsupported quad layout");
    return g;
}

}

void save_field(const SpectralField& f, const std::string& path, std::uint64_t problem_hash) {
    const SpectralGrid& g = *f.grid;
    if (has_suffix(path, ".csv")) {
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot open " + path + " for writing");
        os.precision(17);
        os << "# qwell-field v1\n";
        os << "# basis_x=" << kind_name(g.ax.basis.kind) << " L=" << g.ax.basis.n_modes
           << " basis_y=" << kind_name(g.ay.basis.kind) << " M=" << g.ay.basis.n_modes
           << " basis_z=" << kind_name(g.az.basis.kind) << " N=" << g.az.basis.n_modes
           << " quad_x=" << g.ax.nq << " eps=" << g.eps
           << " ordering=" << ordering_version << " hash=" << problem_hash << "\n";
        os << "comp,l,m,n,value\n";
        const int fx = g.ax.nf(), fy = g.ay.nf(), fz = g.az.nf();
        std::size_t idx = 0;
        for (int c = 0; c < 5; ++c)
            for (int l = 0; l < fx; ++l)
                for (int m = 0; m < fy; ++m)
                    for (int n = 0; n < fz; ++n)
                        os << c << ',' << l << ',' << m << ',' << n << ','
                           << f.coeffs[idx++] << '\n';
        if (!os) throw std::runtime_error("write failed: " + path);
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    auto put32 = [&](std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
    put32(field_magic);
    put32(ordering_version);
    put32(static_cast<std::uint32_t>(g.ax.basis.kind));
    put32(static_cast<std::uint32_t>(g.ay.basis.kind));
    put32(static_cast<std::uint32_t>(g.az.basis.kind));
    put32(static_cast<std::uint32_t>(g.ax.basis.n_modes));
    put32(static_cast<std::uint32_t>(g.ay.basis.n_modes));
    put32(static_cast<std::uint32_t>(g.az.basis.n_modes));
    put32(static_cast<std::uint32_t>(g.ax.nq));
    put32(0);
    os.write(reinterpret_cast<const char*>(&g.eps), 8);
    os.write(reinterpret_cast<const char*>(&problem_hash), 8);
    os.write(reinterpret_cast<const char*>(f.coeffs.data()),
             static_cast<std::streamsize>(f.coeffs.size() * sizeof(double)));
    if (!os) throw std::runtime_error("write failed: " + path);
}

SpectralField load_field(const std::string& path, std::uint64_t* problem_hash_out) {
    if (has_suffix(path, ".csv")) {
        std::ifstream is(path);
        if (!is) throw std::runtime_error("cannot open " + path);
        std::string line;
        std::getline(is, line);  // banner
        std::getline(is, line);  // header
        BasisKind kx{}, ky{}, kz{};
        int mx = 0, my = 0, mz = 0, qx = 0;
        double eps = 0.0;
        std::uint64_t hash = 0;
        {
            std::istringstream hs(line);
            std::string tok;
            hs >> tok;  // '#'
            while (hs >> tok) {
                const auto at = tok.find('=');
                if (at == std::string::npos) continue;
                const std::string key = tok.substr(0, at), val = tok.substr(at + 1);
                if (key == "basis_x") kx = kind_from(val);
                else if (key == "basis_y") ky = kind_from(val);
                else if (key == "basis_z") kz = kind_from(val);
                else if (key == "L") mx = std::stoi(val);
                else if (key == "M") my = std::stoi(val);
                else if (key == "N") mz = std::stoi(val);
                else if (key == "quad_x") qx = std::stoi(val);
                else if (key == "eps") eps = std::stod(val);
                else if (key == "hash") hash = std::stoull(val);
            }
        }
        auto g = rebuild_grid(kx, mx, ky, my, kz, mz, qx, eps);
        SpectralField f = SpectralField::zeros(g);
        std::getline(is, line);  // column header
        std::size_t idx = 0;
        while (std::getline(is, line) && idx < f.coeffs.size()) {
            const auto last = line.rfind(',');
            if (last == std::string::npos) continue;
            f.coeffs[idx++] = std::stod(line.substr(last + 1));
        }
        if (idx != f.coeffs.size()) throw std::runtime_error("field csv truncated: " + path);
        if (problem_hash_out) *problem_hash_out = hash;
        return f;
    }
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    auto get32 = [&]() {
        std::uint32_t v = 0;
        is.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    if (get32() != field_magic) throw std::runtime_error("not a qwell field file: " + path);
    if (get32() != ordering_version) throw std::runtime_error("unsupported field ordering");
    const auto kx = static_cast<BasisKind>(get32());
    const auto ky = static_cast<BasisKind>(get32());
    const auto kz = static_cast<BasisKind>(get32());
    const int mx = static_cast<int>(get32());
    const int my = static_cast<int>(get32());
    const int mz = static_cast<int>(get32());
    const int qx = static_cast<int>(get32());
    get32();
    double eps = 0.0;
    std::uint64_t hash = 0;
    is.read(reinterpret_cast<char*>(&eps), 8);
    is.read(reinterpret_cast<char*>(&hash), 8);
    auto g = rebuild_grid(kx, mx, ky, my, kz, mz, qx, eps);
    SpectralField f = SpectralField::zeros(g);
    is.read(reinterpret_cast<char*>(f.coeffs.data()),
            static_cast<std::streamsize>(f.coeffs.size() * sizeof(double)));
    if (!is) throw std::runtime_error("field file truncated: " + path);
    if (problem_hash_out) *problem_hash_out = hash;
    return f;
}

}
