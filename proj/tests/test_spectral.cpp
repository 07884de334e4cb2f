#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qwell/spectral.hpp"

#include <cmath>
#include <random>

using namespace qwell;

namespace {

constexpr double pi = 3.14159265358979323846;

std::shared_ptr<const SpectralGrid> cheb_grid(int lx = 8, int ly = 8, int lz = 6,
                                              double eps = 2.0) {
    return std::make_shared<SpectralGrid>(SpectralGrid::make(
        {BasisKind::Chebyshev, lx}, {BasisKind::Chebyshev, ly}, {BasisKind::Chebyshev, lz},
        eps));
}

std::shared_ptr<const SpectralGrid> fourier_grid(int L = 5, int M = 5, int N = 5,
                                                 double eps = 2.0) {
    return std::make_shared<SpectralGrid>(SpectralGrid::make(
        {BasisKind::Fourier, L}, {BasisKind::Fourier, M}, {BasisKind::Chebyshev, N}, eps));
}

SpectralField random_field(std::shared_ptr<const SpectralGrid> g, std::uint64_t seed,
                           bool half_band = false) {
    SpectralField f = SpectralField::zeros(g);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    const int fx = g->ax.nf(), fy = g->ay.nf(), fz = g->az.nf();
    std::size_t idx = 0;
    for (int c = 0; c < 5; ++c)
        for (int l = 0; l < fx; ++l)
            for (int m = 0; m < fy; ++m)
                for (int n = 0; n < fz; ++n) {
                    double v = d(rng);
                    // keep products of two half-band fields inside the band
                    if (half_band && (2 * l > fx - 1 || 2 * m > fy - 1 || 2 * n > fz - 1))
                        v = 0.0;
                    f.coeffs[idx++] = v;
                }
    return f;
}

}

TEST_CASE("quadrature integrates basis products exactly") {
    // Chebyshev: int T_a T_b dx has a closed form
    auto g = cheb_grid(8, 8, 6);
    const GridAxis& a = g->ax;
    auto exact = [](int p, int q) {
        auto term = [](int k) { return (k % 2 == 0) ? 2.0 / (1.0 - k * k) : 0.0; };
        return 0.5 * (term(p + q) + term(std::abs(p - q)));
    };
    for (int p = 0; p < a.nf(); ++p)
        for (int q = 0; q < a.nf(); ++q) {
            double s = 0.0;
            for (int j = 0; j < a.nq; ++j)
                s += a.w[j] * a.S[j * a.nf() + p] * a.S[j * a.nf() + q];
            CHECK(s == doctest::Approx(exact(p, q)).epsilon(1e-12).scale(1.0));
        }

    // Fourier: orthogonality of the X_l under the trapezoid rule
    auto gf = fourier_grid(5, 5, 5);
    const GridAxis& af = gf->ax;
    for (int p = 0; p < af.nf(); ++p)
        for (int q = 0; q < af.nf(); ++q) {
            double s = 0.0;
            for (int j = 0; j < af.nq; ++j)
                s += af.w[j] * af.S[j * af.nf() + p] * af.S[j * af.nf() + q];
            const int lp = p - (af.basis.n_modes - 1), lq = q - (af.basis.n_modes - 1);
            double expect = 0.0;
            if (lp == lq) expect = lp == 0 ? 2.0 : 1.0;
            CHECK(s == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
        }
}

TEST_CASE("volume and face measures") {
    for (auto g : {cheb_grid(8, 8, 6, 4.0), fourier_grid(5, 5, 5, 4.0)}) {
        std::vector<double> one(g->n_nodes_total(), 1.0);
        CHECK(g->integrate_volume(one) == doctest::Approx(4.0 * 4.0).epsilon(1e-13));
        std::vector<double> fone(g->face_nodes(Face::ZMax), 1.0);
        CHECK(g->integrate_face(Face::ZMax, fone.data()) == doctest::Approx(4.0).epsilon(1e-13));
    }
    // cos^2 over one period direction integrates to half the box measure
    auto gf = fourier_grid(5, 5, 5, 1.0);
    std::vector<double> d(gf->n_nodes_total());
    std::size_t idx = 0;
    for (int i = 0; i < gf->ax.nq; ++i)
        for (int j = 0; j < gf->ay.nq; ++j)
            for (int k = 0; k < gf->az.nq; ++k) {
                const double t = pi * (gf->ax.x[i] + 1.0);
                d[idx++] = std::cos(t) * std::cos(t);
            }
    CHECK(gf->integrate_volume(d) == doctest::Approx(0.5 * 4.0 * 1.0).epsilon(1e-12));
}

TEST_CASE("synthesis of a single mode and its derivative") {
    auto g = fourier_grid(5, 5, 4, 2.0);
    SpectralField f = SpectralField::zeros(g);
    // p1 = cos(xbar) = X_{l=1} at index (L-1)+1; the constant Fourier mode in
    // y sits at index M-1, the constant Chebyshev mode in z at 0
    const int fx = g->ax.nf(), fy = g->ay.nf(), fz = g->az.nf();
    const int kx = (g->ax.basis.n_modes - 1) + 1;
    const int ky = g->ay.basis.n_modes - 1;
    f.coeffs[(static_cast<std::size_t>(0) * fx + kx) * fy * fz +
             static_cast<std::size_t>(ky) * fz + 0] = 1.0;
    const CollocationValues cv = synthesize(f);
    std::size_t idx = 0;
    for (int i = 0; i < g->ax.nq; ++i)
        for (int j = 0; j < g->ay.nq; ++j)
            for (int k = 0; k < g->az.nq; ++k) {
                const double t = pi * (g->ax.x[i] + 1.0);
                CHECK(cv.v[0][idx] == doctest::Approx(std::cos(t)).epsilon(1e-12).scale(1.0));
                CHECK(cv.dx[0][idx] ==
                      doctest::Approx(-pi * std::sin(t)).epsilon(1e-12).scale(1.0));
                ++idx;
            }
}

TEST_CASE("zero field synthesizes to zero, analyze round-trips") {
    for (auto g : {cheb_grid(), fourier_grid()}) {
        SpectralField z = SpectralField::zeros(g);
        const CollocationValues cv = synthesize(z);
        for (int c = 0; c < 5; ++c)
            for (double v : cv.v[c]) CHECK(v == 0.0);

        const SpectralField f = random_field(g, 5);
        const CollocationValues cf = synthesize(f);
        const SpectralField back = analyze(cf, g);
        for (std::size_t i = 0; i < f.coeffs.size(); ++i)
            CHECK(back.coeffs[i] == doctest::Approx(f.coeffs[i]).epsilon(1e-12).scale(1.0));

        // analyze of zeros gives zeros
        std::array<std::vector<double>, 5> vals;
        for (auto& v : vals) v.assign(g->n_nodes_total(), 0.0);
        const SpectralField zf = analyze(g, vals);
        for (double c : zf.coeffs) CHECK(c == 0.0);
    }
}

TEST_CASE("off-band projection residual is quadrature-orthogonal to the band") {
    auto g = cheb_grid(6, 6, 4);
    std::array<std::vector<double>, 5> vals;
    const std::size_t n = static_cast<std::size_t>(g->n_nodes_total());
    for (auto& v : vals) v.assign(n, 0.0);
    std::size_t idx = 0;
    for (int i = 0; i < g->ax.nq; ++i)
        for (int j = 0; j < g->ay.nq; ++j)
            for (int k = 0; k < g->az.nq; ++k) {
                const double x = g->ax.x[i];
                vals[0][idx] = std::exp(2.0 * x) * std::sin(3.0 * g->ay.x[j]);
                ++idx;
            }
    const SpectralField p = analyze(g, vals);
    const CollocationValues pv = synthesize(p);
    // residual against every basis function through the adjoint
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = vals[0][i] - pv.v[0][i];
    // weighted residual must project to zero coefficients
    std::array<std::vector<double>, 5> rv;
    for (auto& v : rv) v.assign(n, 0.0);
    rv[0] = resid;
    const SpectralField rproj = analyze(g, rv);
    for (double c : rproj.coeffs) CHECK(std::abs(c) <= 1e-10);
}

TEST_CASE("product rule within the dealiased band") {
    auto g = cheb_grid(10, 4, 4);
    SpectralField f = random_field(g, 9, true), h = random_field(g, 10, true);
    const CollocationValues cf = synthesize(f), ch = synthesize(h);
    const std::size_t n = cf.v[0].size();
    // form the product f1*h1 at the nodes, re-expand, differentiate
    std::array<std::vector<double>, 5> prod;
    for (auto& v : prod) v.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) prod[0][i] = cf.v[0][i] * ch.v[0][i];
    const SpectralField pf = analyze(g, prod);
    const CollocationValues cp = synthesize(pf);
    for (std::size_t i = 0; i < n; ++i) {
        const double expect = cf.dx[0][i] * ch.v[0][i] + cf.v[0][i] * ch.dx[0][i];
        CHECK(cp.dx[0][i] == doctest::Approx(expect).epsilon(1e-8).scale(1.0 + std::abs(expect)));
    }
}

TEST_CASE("integration by parts against the face quadrature") {
    auto g = cheb_grid(8, 6, 4);
    SpectralField f = random_field(g, 21, true), h = random_field(g, 22, true);
    const CollocationValues cf = synthesize(f), ch = synthesize(h);
    const std::size_t n = cf.v[0].size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = cf.dx[0][i] * ch.v[0][i] + cf.v[0][i] * ch.dx[0][i];
    const double volume_term = g->integrate_volume(d);

    double face_term = 0.0;
    for (Face face : {Face::XMin, Face::XMax}) {
        const int m = g->face_nodes(face);
        std::vector<double> fd(m);
        for (int k = 0; k < m; ++k) {
            const std::size_t idx = g->face_node_index(face, k);
            fd[k] = cf.v[0][idx] * ch.v[0][idx];
        }
        face_term += (face == Face::XMax ? 1.0 : -1.0) * g->integrate_face(face, fd.data());
    }
    CHECK(volume_term == doctest::Approx(face_term).epsilon(1e-8).scale(1.0 + std::abs(face_term)));
}

TEST_CASE("grid refinement leaves smooth integrals unchanged") {
    auto coarse = cheb_grid(8, 8, 6, 1.5);
    auto fine = cheb_grid(16, 16, 12, 1.5);
    auto density = [](double x, double y, double z) {
        return std::exp(-x * x - 0.5 * y * y) * (1.0 + 0.3 * z);
    };
    double vals[2];
    int t = 0;
    for (auto g : {coarse, fine}) {
        std::vector<double> d(g->n_nodes_total());
        std::size_t idx = 0;
        for (int i = 0; i < g->ax.nq; ++i)
            for (int j = 0; j < g->ay.nq; ++j)
                for (int k = 0; k < g->az.nq; ++k)
                    d[idx++] = density(g->ax.x[i], g->ay.x[j], g->az.x[k]);
        vals[t++] = g->integrate_volume(d);
    }
    CHECK(std::abs(vals[0] - vals[1]) <= 1e-10 * (1.0 + std::abs(vals[1])));
}

TEST_CASE("field serialization round-trips in both formats") {
    auto g = cheb_grid(6, 5, 4, 2.5);
    const SpectralField f = random_field(g, 31);
    for (const char* name : {"/tmp/qwell_test_field.bin", "/tmp/qwell_test_field.csv"}) {
        save_field(f, name, 0xabcdef12u);
        std::uint64_t hash = 0;
        const SpectralField r = load_field(name, &hash);
        CHECK(hash == 0xabcdef12u);
        REQUIRE(r.coeffs.size() == f.coeffs.size());
        CHECK(r.grid->same_layout(*g));
        for (std::size_t i = 0; i < f.coeffs.size(); ++i)
            CHECK(r.coeffs[i] == doctest::Approx(f.coeffs[i]).epsilon(1e-14).scale(1.0));
    }
}

TEST_CASE("evaluate_on_lattice matches single-point evaluation") {
    auto g = cheb_grid(6, 6, 4, 2.0);
    const SpectralField f = random_field(g, 41);
    const LatticeValues lv = evaluate_on_lattice(f, {-0.3, 0.5}, {0.1}, {0.2, 1.7});
    int li = 0;
    for (double x : {-0.3, 0.5})
        for (double z : {0.2, 1.7}) {
            const auto p = evaluate_at(f, x, 0.1, z);
            const std::size_t base = static_cast<std::size_t>(li / 2) * 1 * 2 + (li % 2);
            for (int c = 0; c < 5; ++c)
                CHECK(lv.v[c][base] == doctest::Approx(p[c]).epsilon(1e-12).scale(1.0));
            ++li;
        }
}
