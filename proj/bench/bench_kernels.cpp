// Parallel kernels against their serial reference paths.
#include <benchmark/benchmark.h>

#include <cstdint>
#include <memory>
#include <vector>

#include "hb/kernels.hpp"
#include "hb/radial.hpp"
#include "hb/reduce.hpp"
#include "hb/rng.hpp"

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    std::vector<double> x(n);
    std::uint64_t s = seed * 0x9e3779b97f4a7c15ULL + 1;
    for (auto& xi : x) {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        xi = double(s >> 11) * 0x1p-53 - 0.5;
    }
    return x;
}

void bm_sum(benchmark::State& state) {
    const auto x = noise(std::size_t(state.range(0)), 7);
    for (auto _ : state) benchmark::DoNotOptimize(hb::sum(x.data(), x.size()));
}
void bm_sum_serial(benchmark::State& state) {
    const auto x = noise(std::size_t(state.range(0)), 7);
    for (auto _ : state) benchmark::DoNotOptimize(hb::sum_serial(x.data(), x.size()));
}
void bm_dot(benchmark::State& state) {
    const auto a = noise(std::size_t(state.range(0)), 7);
    const auto b = noise(std::size_t(state.range(0)), 8);
    for (auto _ : state) benchmark::DoNotOptimize(hb::dot(a.data(), b.data(), a.size()));
}
void bm_dot_serial(benchmark::State& state) {
    const auto a = noise(std::size_t(state.range(0)), 7);
    const auto b = noise(std::size_t(state.range(0)), 8);
    for (auto _ : state) benchmark::DoNotOptimize(hb::dot_serial(a.data(), b.data(), a.size()));
}

void bm_multiplier(benchmark::State& state) {
    hb::TensorGrid g(3, 10.0, int(state.range(0)));
    const hb::TensorKernel k = hb::build_kernel(g, 1.5);
    const auto seedv = noise(g.size(), 3);
    std::vector<hb::cplx> spec(g.size());
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = {seedv[i], -seedv[i]};
    for (auto _ : state) {
        auto work = spec;
        hb::apply_multiplier(k, work);
        benchmark::DoNotOptimize(work.data());
    }
}
void bm_multiplier_serial(benchmark::State& state) {
    hb::TensorGrid g(3, 10.0, int(state.range(0)));
    const hb::TensorKernel k = hb::build_kernel(g, 1.5);
    const auto seedv = noise(g.size(), 3);
    std::vector<hb::cplx> spec(g.size());
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = {seedv[i], -seedv[i]};
    for (auto _ : state) {
        auto work = spec;
        hb::apply_multiplier_serial(k, work);
        benchmark::DoNotOptimize(work.data());
    }
}

void bm_radial_convolve(benchmark::State& state) {
    auto g = std::make_shared<const hb::RadialGrid>(5, int(state.range(0)), 40.0);
    const hb::RadialKernel k = hb::build_radial_kernel(*g, 3.0);
    const auto rho = noise(std::size_t(g->count()), 11);
    std::vector<double> out(rho.size());
    for (auto _ : state) {
        hb::radial_convolve(*g, k, rho, out);
        benchmark::DoNotOptimize(out.data());
    }
}
void bm_radial_convolve_serial(benchmark::State& state) {
    auto g = std::make_shared<const hb::RadialGrid>(5, int(state.range(0)), 40.0);
    const hb::RadialKernel k = hb::build_radial_kernel(*g, 3.0);
    const auto rho = noise(std::size_t(g->count()), 11);
    std::vector<double> out(rho.size());
    for (auto _ : state) {
        hb::radial_convolve_serial(*g, k, rho, out);
        benchmark::DoNotOptimize(out.data());
    }
}

}  // namespace

BENCHMARK(bm_sum)->Arg(1 << 16)->Arg(1 << 21);
BENCHMARK(bm_sum_serial)->Arg(1 << 16)->Arg(1 << 21);
BENCHMARK(bm_dot)->Arg(1 << 16)->Arg(1 << 21);
BENCHMARK(bm_dot_serial)->Arg(1 << 16)->Arg(1 << 21);
BENCHMARK(bm_multiplier)->Arg(32)->Arg(64);
BENCHMARK(bm_multiplier_serial)->Arg(32)->Arg(64);
BENCHMARK(bm_radial_convolve)->Arg(320)->Arg(640);
BENCHMARK(bm_radial_convolve_serial)->Arg(320)->Arg(640);

BENCHMARK_MAIN();
