#include "hb/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hb/errors.hpp"
#include "hb/truncated_kernel.hpp"

namespace hb {

TensorKernel build_kernel(const TensorGrid& g, double gamma) {
    const double gmax = std::min(static_cast<double>(g.dim()), 4.0);
    if (!(gamma > 0.0 && gamma < gmax))
        throw ConfigError("Riesz exponent " + std::to_string(gamma) +
                          " outside (0, min{N,4}) for N = " + std::to_string(g.dim()));

    const double L = g.half_extent();
    const double k_axis_max = std::numbers::pi * (g.n() / 2) / L;
    const double k_max = k_axis_max * std::sqrt(static_cast<double>(g.dim()));
    TruncatedKernelTransform transform(g.dim(), gamma, L, k_max);

    // The multiplier depends only on the integer |m|^2 of the mode; dedupe.
    const int half = g.n() / 2;
    const std::size_t max_m2 = static_cast<std::size_t>(g.dim()) * half * half;
    std::vector<char> present(max_m2 + 1, 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto a = g.unflatten(i);
        std::size_t m2 = 0;
        for (int d = 0; d < g.dim(); ++d) {
            const long long m = g.freq_index(a[d]);
            m2 += static_cast<std::size_t>(m * m);
        }
        present[m2] = 1;
    }
    std::vector<double> table(max_m2 + 1, 0.0);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t m2 = 0; m2 <= static_cast<std::ptrdiff_t>(max_m2); ++m2) {
        if (!present[m2]) continue;
        const double k = std::numbers::pi * std::sqrt(static_cast<double>(m2)) / L;
        table[m2] = transform(k);
    }
    for (std::size_t m2 = 0; m2 <= max_m2; ++m2)
        if (present[m2] && !std::isfinite(table[m2]))
            throw IntegrationError("non-finite kernel multiplier at |m|^2 = " + std::to_string(m2));

    TensorKernel kern;
    kern.gamma = gamma;
    kern.radius = L;
    kern.mult.resize(g.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(g.size()); ++i) {
        const auto a = g.unflatten(i);
        std::size_t m2 = 0;
        for (int d = 0; d < g.dim(); ++d) {
            const long long m = g.freq_index(a[d]);
            m2 += static_cast<std::size_t>(m * m);
        }
        kern.mult[i] = table[m2];
    }
    return kern;
}

KernelPair build_kernels(const TensorGrid& g, double gamma1, double gamma2) {
    if (!(gamma2 > 0.0 && gamma2 < gamma1))
        throw ConfigError("Riesz exponents require 0 < gamma2 < gamma1, got gamma1 = " +
                          std::to_string(gamma1) + ", gamma2 = " + std::to_string(gamma2));
    return KernelPair{build_kernel(g, gamma1), build_kernel(g, gamma2)};
}

void apply_multiplier(const TensorKernel& k, std::vector<cplx>& spectrum) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(spectrum.size()); ++i)
        spectrum[i] *= k.mult[i];
}

void apply_multiplier_serial(const TensorKernel& k, std::vector<cplx>& spectrum) {
    for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= k.mult[i];
}

void riesz_convolve(const TensorGrid& g, const TensorKernel& k, const std::vector<double>& rho,
                    std::vector<double>& out, std::vector<cplx>& scratch) {
    if (rho.size() != g.size() || k.mult.size() != g.size())
        throw DomainError("riesz_convolve: density/kernel size does not match the grid");
    scratch.resize(g.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(rho.size()); ++i)
        scratch[i] = cplx(rho[i], 0.0);
    const Fft& fft = fft_for(g);
    fft.forward(scratch);
    apply_multiplier(k, scratch);
    fft.inverse(scratch);
    out.resize(g.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(rho.size()); ++i)
        out[i] = scratch[i].real();
}

std::vector<double> riesz_convolve(const TensorGrid& g, const TensorKernel& k,
                                   const std::vector<double>& rho) {
    std::vector<double> out;
    std::vector<cplx> scratch;
    riesz_convolve(g, k, rho, out, scratch);
    return out;
}

}  // namespace hb
