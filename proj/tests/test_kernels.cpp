#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qwell/kernels.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace qwell;

namespace {

std::vector<double> random_vec(std::mt19937_64& g, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    std::vector<double> v(n);
    for (auto& x : v) x = d(g);
    return v;
}

}

TEST_CASE("scalar gemm multiplies correctly") {
    const auto& K = kern::scalar_ops();
    std::mt19937_64 g(1);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t m = 1 + g() % 9, n = 1 + g() % 17, k = 1 + g() % 9;
        auto a = random_vec(g, m * k), b = random_vec(g, k * n);
        std::vector<double> c(m * n, 7.0);
        K.gemm(m, n, k, a.data(), b.data(), c.data(), false);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double ref = 0.0;
                for (std::size_t l = 0; l < k; ++l) ref += a[i * k + l] * b[l * n + j];
                CHECK(c[i * n + j] == doctest::Approx(ref).epsilon(1e-13));
            }
        // accumulate mode adds
        std::vector<double> c2 = c;
        K.gemm(m, n, k, a.data(), b.data(), c2.data(), true);
        for (std::size_t i = 0; i < m * n; ++i)
            CHECK(c2[i] == doctest::Approx(2.0 * c[i]).epsilon(1e-13));
    }
}

TEST_CASE("simd variant agrees with the scalar reference") {
    const kern::Ops* simd = kern::simd_ops_or_null();
    if (!simd) {
        MESSAGE("no SIMD variant on this host; scalar only");
        return;
    }
    const auto& S = kern::scalar_ops();
    std::mt19937_64 g(2);

    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t m = 1 + g() % 33, n = 1 + g() % 70, k = 1 + g() % 33;
        auto a = random_vec(g, m * k), b = random_vec(g, k * n);
        std::vector<double> c1(m * n, 0.0), c2(m * n, 0.0);
        S.gemm(m, n, k, a.data(), b.data(), c1.data(), false);
        simd->gemm(m, n, k, a.data(), b.data(), c2.data(), false);
        for (std::size_t i = 0; i < m * n; ++i)
            CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-13).scale(1.0));
    }

    const std::size_t n = 1003;
    auto x = random_vec(g, n), y = random_vec(g, n), w = random_vec(g, n, 0.1);
    for (auto& v : w) v = std::abs(v);
    CHECK(S.dot(n, x.data(), y.data()) ==
          doctest::Approx(simd->dot(n, x.data(), y.data())).epsilon(1e-12));

    {
        auto y1 = y, y2 = y;
        S.axpy(n, 0.37, x.data(), y1.data());
        simd->axpy(n, 0.37, x.data(), y2.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]));
    }

    std::vector<std::vector<double>> p;
    for (int c = 0; c < 5; ++c) p.push_back(random_vec(g, n));
    const double* pp[5];
    for (int c = 0; c < 5; ++c) pp[c] = p[c].data();

    const double A = -3.9e7, B = 0.64e4, C = 0.35e4;
    CHECK(S.bulk_energy(n, pp, w.data(), A, B, C) ==
          doctest::Approx(simd->bulk_energy(n, pp, w.data(), A, B, C)).epsilon(1e-12));

    std::vector<std::vector<double>> g1(5, std::vector<double>(n, 0.0)), g2 = g1;
    double* gp1[5];
    double* gp2[5];
    for (int c = 0; c < 5; ++c) {
        gp1[c] = g1[c].data();
        gp2[c] = g2[c].data();
    }
    const double e1 = S.bulk_energy_grad(n, pp, w.data(), A, B, C, 0.5, gp1);
    const double e2 = simd->bulk_energy_grad(n, pp, w.data(), A, B, C, 0.5, gp2);
    CHECK(e1 == doctest::Approx(e2).epsilon(1e-12));
    for (int c = 0; c < 5; ++c)
        for (std::size_t i = 0; i < n; ++i)
            CHECK(g1[c][i] == doctest::Approx(g2[c][i]).epsilon(1e-11).scale(std::abs(A)));

    const double ee1 = S.elastic_energy(n, pp, w.data());
    const double ee2 = simd->elastic_energy(n, pp, w.data());
    CHECK(ee1 == doctest::Approx(ee2).epsilon(1e-12));
    for (auto& v : g1) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : g2) std::fill(v.begin(), v.end(), 0.0);
    const double ge1 = S.elastic_energy_grad(n, pp, w.data(), 1.0, gp1);
    const double ge2 = simd->elastic_energy_grad(n, pp, w.data(), 1.0, gp2);
    CHECK(ge1 == doctest::Approx(ge2).epsilon(1e-12));
    for (int c = 0; c < 5; ++c)
        for (std::size_t i = 0; i < n; ++i)
            CHECK(g1[c][i] == doctest::Approx(g2[c][i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("active kernel table resolves") {
    CHECK(!kern::active_name().empty());
}
