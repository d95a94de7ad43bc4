#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace hb {

// Uniform tensor grid on the box [-L, L)^N, N in {1,2,3}.
// Node coordinates per axis: x_i = -L + i*dx, dx = 2L/n.
// Wavenumbers per axis: k_m = pi*m/L with m = i for i <= n/2-1, i-n otherwise.
class TensorGrid {
  public:
    TensorGrid(int dim, double half_extent, int n);

    int dim() const { return dim_; }
    int n() const { return n_; }
    double half_extent() const { return half_extent_; }
    double dx() const { return dx_; }
    double cell_volume() const { return cell_volume_; }
    std::size_t size() const { return size_; }

    double coord(int i) const { return -half_extent_ + dx_ * i; }
    int freq_index(int i) const { return i < n_ - i ? i : i - n_; }
    double wavenumber(int i) const;

    // Decompose a flat row-major index into per-axis indices (unused axes 0).
    std::array<int, 3> unflatten(std::size_t idx) const;
    // Squared wavenumber magnitude of a flat index.
    double k_sq(std::size_t idx) const;
    // Squared distance from the origin of the node at a flat index.
    double r_sq(std::size_t idx) const;

    bool operator==(const TensorGrid& o) const {
        return dim_ == o.dim_ && n_ == o.n_ && half_extent_ == o.half_extent_;
    }

  private:
    int dim_;
    int n_;
    double half_extent_;
    double dx_;
    double cell_volume_;
    std::size_t size_;
};

// Surface area of the unit sphere S^{N-1} in R^N.
double unit_sphere_area(int dim);

}  // namespace hb
