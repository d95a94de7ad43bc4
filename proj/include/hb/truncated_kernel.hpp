#pragma once

#include <vector>

namespace hb {

// Fourier transform of the radius-truncated Riesz kernel |x|^{-gamma} 1_{|x|<=R}
// in dimension N (1..3), evaluated at wavenumber magnitudes k in [0, k_max]:
//   N=1: F(k) = 2 k^{gamma-1} int_0^{kR} s^{-gamma}  cos s ds
//   N=2: F(k) = 2 pi k^{gamma-2} int_0^{kR} s^{1-gamma} J0(s) ds
//   N=3: F(k) = 4 pi k^{gamma-3} int_0^{kR} s^{1-gamma} sin s ds
// The oscillatory integral is a power series on [0,1] and a cumulative table of
// 16-point Gauss-Legendre panels beyond, so each evaluation is O(1).
class TruncatedKernelTransform {
  public:
    TruncatedKernelTransform(int dim, double gamma, double radius, double k_max);

    double operator()(double k) const;
    double zero_mode() const;  // omega_{N-1} R^{N-gamma} / (N-gamma)
    double radius() const { return radius_; }
    double gamma() const { return gamma_; }

  private:
    double integrand(double s) const;
    double series(double x) const;
    double oscillatory_integral(double x) const;

    int dim_;
    double gamma_;
    double radius_;
    double weight_exp_;          // s-power in the integrand
    double panel_len_;
    std::vector<double> cumulative_;  // integral from 0 to 1 + j*panel_len_
};

}  // namespace hb
