#pragma once

#include <vector>

#include "hb/fft.hpp"
#include "hb/field.hpp"
#include "hb/grid.hpp"

namespace hb {

// Per-mode multipliers of one radius-truncated Riesz kernel on a tensor grid,
// stored in FFT mode order.  Truncation radius is the box half-width L.
struct TensorKernel {
    double gamma = 0.0;
    double radius = 0.0;
    std::vector<double> mult;
};

struct KernelPair {
    TensorKernel focusing;    // gamma1
    TensorKernel defocusing;  // gamma2
};

TensorKernel build_kernel(const TensorGrid& g, double gamma);
KernelPair build_kernels(const TensorGrid& g, double gamma1, double gamma2);

// out = (K_gamma * rho) sampled on the grid; rho is a real density.
// scratch must have grid.size() entries.
void riesz_convolve(const TensorGrid& g, const TensorKernel& k, const std::vector<double>& rho,
                    std::vector<double>& out, std::vector<cplx>& scratch);
std::vector<double> riesz_convolve(const TensorGrid& g, const TensorKernel& k,
                                   const std::vector<double>& rho);

// Serial reference of the multiplier application step (testing aid).
void apply_multiplier(const TensorKernel& k, std::vector<cplx>& spectrum);
void apply_multiplier_serial(const TensorKernel& k, std::vector<cplx>& spectrum);

}  // namespace hb
