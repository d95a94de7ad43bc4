#pragma once

#include <memory>
#include <vector>

namespace hb {

// Radial grid for rotation-invariant states in R^N, N >= 3.
// Nodes are composite 8-point Gauss-Legendre panels on (0, R_max); the weight
// of node i includes the surface measure factor omega_{N-1} r_i^{N-1}, so
// integrals over R^N of radial integrands are plain weighted sums.
//
// The kinetic form is a conservative face-flux stencil on the same nodes:
//   kinetic(u) = sum_i alpha_i (u_{i+1} - u_i)^2 + alpha_b u_{M-1}^2,
// with alpha built from annular areas at face midpoints, a homogeneous
// Dirichlet face at R_max and a no-flux face at r = 0.  Energy, gradient and
// the (1 - Laplacian)^{-1} preconditioner all derive from this one form.
class RadialGrid {
  public:
    RadialGrid(int dim, int count, double r_max);

    int dim() const { return dim_; }
    int count() const { return static_cast<int>(r_.size()); }
    double r_max() const { return r_max_; }
    const std::vector<double>& r() const { return r_; }
    const std::vector<double>& w() const { return w_; }
    double ball_volume() const;

    double kinetic(const std::vector<double>& u) const;
    // out = S u with kinetic(u) = u^T S u.
    void stiffness_apply(const std::vector<double>& u, std::vector<double>& out) const;
    // Solves (sigma W + S) z = W rhs (tridiagonal, SPD for sigma > 0).
    void shifted_solve(double sigma, const std::vector<double>& rhs,
                       std::vector<double>& z) const;

  private:
    int dim_;
    double r_max_;
    std::vector<double> r_, w_;
    std::vector<double> alpha_;  // face conductances, alpha_[i] couples i and i+1; last is boundary
};

struct RadialField {
    std::shared_ptr<const RadialGrid> grid;
    std::vector<double> v;
};

RadialField zeros(const std::shared_ptr<const RadialGrid>& g);
void check_finite(const RadialField& u, const char* where);
double mass(const RadialField& u);
double gradient_sq_norm(const RadialField& u);
double sobolev_norm(const RadialField& u, double s);  // s in {0, 1} only
double mass_tail(const RadialField& u, double radius);
double max_abs(const RadialField& u);

// Angle average of |x-y|^{-gamma} over directions at radii (r, s):
//   k(r,s) = int_0^pi (r^2+s^2-2rs cos t)^{-g/2} sin^{N-2}t dt / int_0^pi sin^{N-2}t dt.
// Closed form for odd N; adaptive quadrature otherwise.
double radial_kernel_value(int dim, double gamma, double r, double s);

struct RadialKernel {
    double gamma = 0.0;
    std::vector<double> mat;  // count x count, row-major, symmetric
};

struct RadialKernelPair {
    RadialKernel focusing;
    RadialKernel defocusing;
};

RadialKernel build_radial_kernel(const RadialGrid& g, double gamma);
RadialKernelPair build_radial_kernels(const RadialGrid& g, double gamma1, double gamma2);

// out_i = sum_j k(r_i, r_j) w_j rho_j
void radial_convolve(const RadialGrid& g, const RadialKernel& k, const std::vector<double>& rho,
                     std::vector<double>& out);
void radial_convolve_serial(const RadialGrid& g, const RadialKernel& k,
                            const std::vector<double>& rho, std::vector<double>& out);

}  // namespace hb
