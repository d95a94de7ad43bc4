#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "hb/functionals.hpp"
#include "hb/kernels.hpp"
#include "hb/radial.hpp"
#include "hb/reduce.hpp"
#include "hb/rng.hpp"

using namespace hb;

// Every parallel kernel must reproduce its serial reference bit for bit, for
// any thread count: reductions are chunk-deterministic by construction.

namespace {
std::vector<double> noise(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng) * std::exp(10.0 * d(rng));  // wide dynamic range
    return v;
}
}  // namespace

TEST_CASE("compensated reductions are thread-count invariant") {
    const auto a = noise(1 << 18, 1);
    const auto b = noise(1 << 18, 2);
    const double s_ref = sum_serial(a.data(), a.size());
    const double d_ref = dot_serial(a.data(), b.data(), a.size());
    const double s_chunked_1 = sum(a.data(), a.size());
    for (int threads : {1, 2, 3, 4, 8}) {
        omp_set_num_threads(threads);
        CHECK(sum(a.data(), a.size()) == s_chunked_1);
        CHECK(dot(a.data(), b.data(), a.size()) == dot(a.data(), b.data(), a.size()));
        // chunked and serial orderings agree to compensated-sum accuracy
        CHECK(std::fabs(sum(a.data(), a.size()) - s_ref) <=
              1e-13 * std::max(1.0, std::fabs(s_ref)));
        CHECK(std::fabs(dot(a.data(), b.data(), a.size()) - d_ref) <=
              1e-13 * std::max(1.0, std::fabs(d_ref)));
    }
    omp_set_num_threads(omp_get_num_procs());
}

TEST_CASE("multiplier application matches the serial reference") {
    TensorGrid g(3, 9.0, 32);
    const TensorKernel k = build_kernel(g, 1.3);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<cplx> spec(g.size());
    for (auto& z : spec) z = cplx(d(rng), d(rng));

    std::vector<cplx> ref = spec;
    apply_multiplier_serial(k, ref);
    for (int threads : {1, 2, 4}) {
        omp_set_num_threads(threads);
        std::vector<cplx> par = spec;
        apply_multiplier(k, par);
        for (std::size_t i = 0; i < spec.size(); ++i) CHECK(par[i] == ref[i]);
    }
    omp_set_num_threads(omp_get_num_procs());
}

TEST_CASE("radial convolution matches the serial reference") {
    auto gp = std::make_shared<const RadialGrid>(5, 96, 10.0);
    const RadialKernel k = build_radial_kernel(*gp, 2.5);
    std::vector<double> rho(gp->count());
    for (int i = 0; i < gp->count(); ++i) rho[i] = std::cos(0.3 * i) * std::exp(-0.05 * i);

    std::vector<double> ref(gp->count());
    radial_convolve_serial(*gp, k, rho, ref);
    for (int threads : {1, 2, 4}) {
        omp_set_num_threads(threads);
        std::vector<double> par(gp->count());
        radial_convolve(*gp, k, rho, par);
        for (int i = 0; i < gp->count(); ++i) CHECK(par[i] == ref[i]);
    }
    omp_set_num_threads(omp_get_num_procs());
}

TEST_CASE("energy parts are identical across thread counts") {
    TensorGrid g(3, 10.0, 32);
    const KernelPair k = build_kernels(g, 2.5, 1.0);
    const TensorField u = random_mixture(g, 23);

    omp_set_num_threads(1);
    const EnergyBreakdown b1 = breakdown(u, k);
    const double m1 = mass(u), a1 = gradient_sq_norm(u);
    for (int threads : {2, 4}) {
        omp_set_num_threads(threads);
        const EnergyBreakdown bt = breakdown(u, k);
        CHECK(bt.kinetic == b1.kinetic);
        CHECK(bt.d1 == b1.d1);
        CHECK(bt.d2 == b1.d2);
        CHECK(mass(u) == m1);
        CHECK(gradient_sq_norm(u) == a1);
    }
    omp_set_num_threads(omp_get_num_procs());
}
