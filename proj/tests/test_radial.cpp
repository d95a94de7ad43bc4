#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "hb/errors.hpp"
#include "hb/functionals.hpp"
#include "hb/radial.hpp"
#include "hb/rng.hpp"

using namespace hb;
namespace nb = std::numbers;

namespace {
double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }
}  // namespace

TEST_CASE("angle-averaged kernel closed form, N=3 gamma=1") {
    // k(r,s) = 1/max(r,s): average of |x-y|^{-1} over the sphere is the
    // Newtonian single-layer value.
    for (auto [r, s] : {std::pair{1.0, 2.0}, {0.3, 0.31}, {5.0, 0.1}, {2.0, 2.0}, {7.5, 7.4}}) {
        CHECK(rel(radial_kernel_value(3, 1.0, r, s), 1.0 / std::max(r, s)) < 1e-12);
    }
}

TEST_CASE("angle-averaged kernel properties") {
    const int N = 5;
    const double gamma = 3.0;
    const double k0 = radial_kernel_value(N, gamma, 1.3, 2.1);

    // symmetry
    CHECK(rel(radial_kernel_value(N, gamma, 2.1, 1.3), k0) < 1e-12);
    // homogeneity k(lr, ls) = l^{-gamma} k(r, s)
    for (double l : {0.5, 2.0, 7.0})
        CHECK(rel(radial_kernel_value(N, gamma, l * 1.3, l * 2.1), std::pow(l, -gamma) * k0) <
              1e-10);
    // dominated by the aligned configuration
    for (auto [r, s] : {std::pair{1.0, 2.0}, {0.4, 3.0}, {6.0, 6.5}})
        CHECK(radial_kernel_value(N, gamma, r, s) <= std::pow(std::fabs(r - s), -gamma) * (1 + 1e-12));
    // s = 0 collapses to r^{-gamma}
    CHECK(rel(radial_kernel_value(N, gamma, 2.0, 0.0), std::pow(2.0, -gamma)) < 1e-12);

    // diagonal diverges once gamma >= N-1
    CHECK_THROWS_AS(radial_kernel_value(3, 2.0, 1.0, 1.0), IntegrationError);
    CHECK(std::isfinite(radial_kernel_value(5, 3.0, 1.0, 1.0)));
}

TEST_CASE("quadrature weights integrate the ball exactly") {
    for (int N : {3, 4, 5}) {
        const double R = 9.0;
        RadialGrid g(N, 96, R);
        double s = 0.0;
        for (double w : g.w()) s += w;
        const double ball = std::pow(nb::pi, N / 2.0) / std::tgamma(N / 2.0 + 1.0) * std::pow(R, N);
        CHECK(rel(s, ball) < 1e-12);
        CHECK(rel(g.ball_volume(), ball) < 1e-12);
    }
}

TEST_CASE("radial gaussian norms against closed forms") {
    auto g = std::make_shared<const RadialGrid>(3, 240, 14.0);
    RadialField u = radial_gaussian(g, 1.0, 1.0);  // e^{-r^2/2}
    const double m = std::pow(nb::pi, 1.5);
    CHECK(rel(mass(u), m) < 1e-10);
    CHECK(rel(gradient_sq_norm(u), 1.5 * m) < 2e-3);  // second-order face stencil
    CHECK(rel(sobolev_norm(u, 0.0), std::sqrt(m)) < 1e-10);
    CHECK(rel(sobolev_norm(u, 1.0), std::sqrt(m + gradient_sq_norm(u))) < 1e-12);
    CHECK_THROWS_AS(sobolev_norm(u, 0.5), DomainError);
    CHECK(max_abs(u) == doctest::Approx(u.v[0]));
    CHECK(mass_tail(u, 0.0) == doctest::Approx(mass(u)));
    CHECK(mass_tail(u, 12.0) < 1e-12);
}

TEST_CASE("stiffness form is symmetric and matches kinetic") {
    auto g = std::make_shared<const RadialGrid>(4, 64, 8.0);
    const int M = g->count();
    std::vector<double> a(M), b(M), Sa(M), Sb(M);
    for (int i = 0; i < M; ++i) {
        a[i] = std::sin(0.37 * i) * std::exp(-0.01 * i);
        b[i] = std::cos(0.21 * i);
    }
    g->stiffness_apply(a, Sa);
    g->stiffness_apply(b, Sb);
    double aSb = 0.0, bSa = 0.0, aSa = 0.0;
    for (int i = 0; i < M; ++i) {
        aSb += a[i] * Sb[i];
        bSa += b[i] * Sa[i];
        aSa += a[i] * Sa[i];
    }
    CHECK(rel(aSb, bSa) < 1e-12);
    CHECK(rel(aSa, g->kinetic(a)) < 1e-12);
    CHECK(g->kinetic(a) > 0.0);
}

TEST_CASE("shifted solve inverts sigma W + S") {
    auto g = std::make_shared<const RadialGrid>(3, 120, 10.0);
    const int M = g->count();
    std::vector<double> rhs(M), z(M), Sz(M);
    for (int i = 0; i < M; ++i) rhs[i] = std::exp(-0.1 * i) * std::sin(0.5 * i);
    const double sigma = 1.7;
    g->shifted_solve(sigma, rhs, z);
    g->stiffness_apply(z, Sz);
    double err = 0.0, scale = 0.0;
    for (int i = 0; i < M; ++i) {
        const double resid = sigma * g->w()[i] * z[i] + Sz[i] - g->w()[i] * rhs[i];
        err = std::max(err, std::fabs(resid));
        scale = std::max(scale, std::fabs(g->w()[i] * rhs[i]));
    }
    CHECK(err < 1e-11 * scale);
}

TEST_CASE("radial interaction energy against the gaussian identity") {
    auto g = std::make_shared<const RadialGrid>(3, 240, 14.0);
    RadialField u = radial_gaussian(g, 1.0, 1.0);
    const RadialKernel k = build_radial_kernel(*g, 1.0);
    const double exact =
        std::pow(nb::pi, 3.0) / std::sqrt(2.0) * std::tgamma(1.0) / std::tgamma(1.5);
    // panel quadrature of the diagonal derivative kink caps the accuracy
    CHECK(rel(d_gamma(u, k), exact) < 1e-3);
}

TEST_CASE("radial convolution agrees with its serial reference") {
    auto g = std::make_shared<const RadialGrid>(5, 80, 12.0);
    const RadialKernel k = build_radial_kernel(*g, 2.5);
    std::vector<double> rho(g->count()), a(g->count()), b(g->count());
    for (int i = 0; i < g->count(); ++i) rho[i] = std::exp(-0.5 * g->r()[i]);
    radial_convolve(*g, k, rho, a);
    radial_convolve_serial(*g, k, rho, b);
    for (int i = 0; i < g->count(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("grid construction guards") {
    CHECK_THROWS_AS(RadialGrid(2, 64, 5.0), ConfigError);   // N >= 3
    CHECK_THROWS_AS(RadialGrid(3, 60, 5.0), ConfigError);   // multiple of panel size
    CHECK_THROWS_AS(RadialGrid(3, 64, -1.0), ConfigError);  // positive cutoff
    // exponent inside the window but with a divergent diagonal
    CHECK_THROWS_AS(build_radial_kernel(RadialGrid(3, 64, 5.0), 2.5), IntegrationError);
    CHECK_THROWS_AS(build_radial_kernel(RadialGrid(5, 64, 5.0), 4.5), ConfigError);
}
