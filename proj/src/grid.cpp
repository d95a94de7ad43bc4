#include "hb/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hb/errors.hpp"

namespace hb {

TensorGrid::TensorGrid(int dim, double half_extent, int n)
    : dim_(dim), n_(n), half_extent_(half_extent) {
    if (dim < 1 || dim > 3)
        throw ConfigError("tensor grid dimension must be 1, 2 or 3, got " + std::to_string(dim));
    if (!(half_extent > 0.0))
        throw ConfigError("box half-width must be positive, got " + std::to_string(half_extent));
    if (n < 8 || n % 2 != 0)
        throw ConfigError("samples per axis must be even and >= 8, got " + std::to_string(n));
    dx_ = 2.0 * half_extent / n;
    cell_volume_ = 1.0;
    size_ = 1;
    for (int d = 0; d < dim; ++d) {
        cell_volume_ *= dx_;
        const std::size_t prev = size_;
        size_ *= static_cast<std::size_t>(n);
        if (size_ / static_cast<std::size_t>(n) != prev || size_ > (std::size_t(1) << 28))
            throw ConfigError("grid point count n^N too large to address");
    }
}

double TensorGrid::wavenumber(int i) const {
    return std::numbers::pi * freq_index(i) / half_extent_;
}

std::array<int, 3> TensorGrid::unflatten(std::size_t idx) const {
    std::array<int, 3> a{0, 0, 0};
    for (int d = dim_ - 1; d >= 0; --d) {
        a[d] = static_cast<int>(idx % n_);
        idx /= n_;
    }
    return a;
}

double TensorGrid::k_sq(std::size_t idx) const {
    const auto a = unflatten(idx);
    double s = 0.0;
    for (int d = 0; d < dim_; ++d) {
        const double k = wavenumber(a[d]);
        s += k * k;
    }
    return s;
}

double TensorGrid::r_sq(std::size_t idx) const {
    const auto a = unflatten(idx);
    double s = 0.0;
    for (int d = 0; d < dim_; ++d) {
        const double x = coord(a[d]);
        s += x * x;
    }
    return s;
}

double unit_sphere_area(int dim) {
    // omega_{N-1} = 2 pi^{N/2} / Gamma(N/2)
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

}  // namespace hb
