#include "hb/radial.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hb/errors.hpp"
#include "hb/grid.hpp"
#include "hb/reduce.hpp"

namespace hb {

namespace {

constexpr int kPanelNodes = 8;
constexpr double kGl8Node[kPanelNodes] = {-0.9602898564975363, -0.7966664774136267,
                                          -0.5255324099163290, -0.1834346424956498,
                                          0.1834346424956498,  0.5255324099163290,
                                          0.7966664774136267,  0.9602898564975363};
constexpr double kGl8Weight[kPanelNodes] = {0.1012285362903763, 0.2223810344533745,
                                            0.3137066458778873, 0.3626837833783620,
                                            0.3626837833783620, 0.3137066458778873,
                                            0.2223810344533745, 0.1012285362903763};

constexpr double kGl16Node[16] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
constexpr double kGl16Weight[16] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

double binom(int n, int k) {
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
    return v;
}

// int_0^2 (eps+u)^e du with the e -> -1 log limit handled.
double power_segment(double eps, double e) {
    const double ep = e + 1.0;
    if (std::fabs(ep) < 1e-9) {
        if (eps == 0.0) throw IntegrationError("radial kernel: divergent angular integral");
        return std::log((eps + 2.0) / eps);
    }
    if (eps == 0.0) {
        if (ep <= 0.0) throw IntegrationError("radial kernel: divergent angular integral");
        return std::pow(2.0, ep) / ep;
    }
    // ((eps+2)^{e+1} - eps^{e+1}) / (e+1), written via expm1 for small e+1.
    const double la = std::log(eps + 2.0), lb = std::log(eps);
    if (std::fabs(ep) < 1e-6)
        return (std::expm1(ep * la) - std::expm1(ep * lb)) / ep;
    return (std::exp(ep * la) - std::exp(ep * lb)) / ep;
}

// I(eps) = int_0^2 (eps+u)^{-g/2} (u(2-u))^m du for integer m >= 0 (odd N = 2m+3).
double angular_core_odd(int m, double gamma, double eps) {
    if (eps < 1.0) {
        // expand (u(2-u))^m = sum_q a_q u^q and u^q around (eps+u)
        double total = 0.0;
        for (int q = m; q <= 2 * m; ++q) {
            const int i = q - m;
            const double a_q = binom(m, i) * std::pow(2.0, m - i) * ((i % 2 == 0) ? 1.0 : -1.0);
            double inner = 0.0;
            if (eps == 0.0) {
                inner = power_segment(0.0, q - 0.5 * gamma);
            } else {
                for (int l = 0; l <= q; ++l)
                    inner += binom(q, l) * std::pow(-eps, q - l) *
                             power_segment(eps, l - 0.5 * gamma);
            }
            total += a_q * inner;
        }
        return total;
    }
    // far pairs: integrand smooth, two 16-point panels
    double total = 0.0;
    for (int half = 0; half < 2; ++half) {
        const double a = half, b = half + 1.0;
        const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
        for (int q = 0; q < 16; ++q) {
            const double u = mid + hw * kGl16Node[q];
            total += hw * kGl16Weight[q] * std::pow(eps + u, -0.5 * gamma) *
                     std::pow(u * (2.0 - u), m);
        }
    }
    return total;
}

struct AdaptiveCtx {
    double gamma, half_m, eps;
    int evals = 0;
};

double angular_f(const AdaptiveCtx& c, double u) {
    return std::pow(c.eps + u, -0.5 * c.gamma) * std::pow(u * (2.0 - u), c.half_m);
}

double adaptive_panel(AdaptiveCtx& c, double a, double b, double fa, double fm, double fb,
                      double tol, int depth) {
    const double m1 = 0.5 * (a + b);
    const double lm = 0.5 * (a + m1), rm = 0.5 * (m1 + b);
    const double flm = angular_f(c, lm), frm = angular_f(c, rm);
    c.evals += 2;
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m1 - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m1) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) {
        if (std::fabs(delta) > tol)
            throw IntegrationError("radial kernel: angular quadrature failed to converge");
        return left + right + delta / 15.0;
    }
    if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_panel(c, a, m1, fa, flm, fm, 0.5 * tol, depth - 1) +
           adaptive_panel(c, m1, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

// Even N: (u(2-u))^{(N-3)/2} has a half-integer power; adaptive Simpson with
// grading toward the u -> 0 near-singularity.
double angular_core_even(double half_m, double gamma, double eps) {
    AdaptiveCtx c{gamma, half_m, eps, 0};
    double total = 0.0;
    // geometric grading toward 0 where (eps+u)^{-g/2} u^{half_m} varies fastest
    double hi = 2.0;
    const double floor_u = 1e-14;
    while (hi > floor_u) {
        const double lo = hi > 2e-4 ? hi / 8.0 : 0.0;
        const double fa = lo == 0.0 ? (half_m > 0.0 ? 0.0 : angular_f(c, lo + 1e-300))
                                    : angular_f(c, lo);
        const double fm = angular_f(c, 0.5 * (lo + hi));
        const double fb = angular_f(c, hi);
        total += adaptive_panel(c, lo, hi, fa, fm, fb, 1e-12, 28);
        if (lo == 0.0) break;
        hi = lo;
    }
    return total;
}

double angular_normalizer(int dim) {
    // int_0^2 (u(2-u))^{(N-3)/2} du = sqrt(pi) Gamma((N-1)/2) / Gamma(N/2)
    return std::sqrt(std::numbers::pi) * std::tgamma(0.5 * (dim - 1.0)) / std::tgamma(0.5 * dim);
}

}  // namespace

RadialGrid::RadialGrid(int dim, int count, double r_max) : dim_(dim), r_max_(r_max) {
    if (dim < 3) throw ConfigError("radial grids require dimension N >= 3");
    if (count < kPanelNodes || count % kPanelNodes != 0)
        throw ConfigError("radial point count must be a positive multiple of " +
                          std::to_string(kPanelNodes));
    if (!(r_max > 0.0)) throw ConfigError("radial cutoff R_max must be positive");
    const int panels = count / kPanelNodes;
    const double h = r_max / panels;
    const double omega = unit_sphere_area(dim);
    r_.reserve(count);
    w_.reserve(count);
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h, hw = 0.5 * h;
        for (int q = 0; q < kPanelNodes; ++q) {
            const double rr = mid + hw * kGl8Node[q];
            r_.push_back(rr);
            w_.push_back(hw * kGl8Weight[q] * omega * std::pow(rr, dim - 1.0));
        }
    }
    alpha_.resize(count);
    for (int i = 0; i + 1 < count; ++i) {
        const double face = 0.5 * (r_[i] + r_[i + 1]);
        alpha_[i] = omega * std::pow(face, dim - 1.0) / (r_[i + 1] - r_[i]);
    }
    const double bface = 0.5 * (r_.back() + r_max);
    alpha_[count - 1] = omega * std::pow(bface, dim - 1.0) / (r_max - r_.back());
}

double RadialGrid::ball_volume() const {
    return unit_sphere_area(dim_) * std::pow(r_max_, dim_) / dim_;
}

double RadialGrid::kinetic(const std::vector<double>& u) const {
    const std::size_t m = r_.size();
    double edge = sum_indexed(m - 1, [&](std::size_t i) {
        const double d = u[i + 1] - u[i];
        return alpha_[i] * d * d;
    });
    return edge + alpha_[m - 1] * u[m - 1] * u[m - 1];
}

void RadialGrid::stiffness_apply(const std::vector<double>& u, std::vector<double>& out) const {
    const std::size_t m = r_.size();
    out.resize(m);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
        double v = 0.0;
        if (i > 0) v += alpha_[i - 1] * (u[i] - u[i - 1]);
        if (i + 1 < static_cast<std::ptrdiff_t>(m))
            v += alpha_[i] * (u[i] - u[i + 1]);
        else
            v += alpha_[m - 1] * u[i];
        out[i] = v;
    }
}

void RadialGrid::shifted_solve(double sigma, const std::vector<double>& rhs,
                               std::vector<double>& z) const {
    const std::size_t m = r_.size();
    // Tridiagonal (sigma W + S): diag d_i, off-diagonal -alpha_i.
    std::vector<double> d(m), e(m - 1), y(m);
    for (std::size_t i = 0; i < m; ++i) {
        double di = sigma * w_[i];
        if (i > 0) di += alpha_[i - 1];
        di += alpha_[i];  // last entry couples to the Dirichlet ghost at R_max
        d[i] = di;
        y[i] = w_[i] * rhs[i];
    }
    for (std::size_t i = 0; i + 1 < m; ++i) e[i] = -alpha_[i];
    // Thomas elimination
    for (std::size_t i = 1; i < m; ++i) {
        const double f = e[i - 1] / d[i - 1];
        d[i] -= f * e[i - 1];
        y[i] -= f * y[i - 1];
    }
    z.resize(m);
    z[m - 1] = y[m - 1] / d[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) z[i] = (y[i] - e[i] * z[i + 1]) / d[i];
}

RadialField zeros(const std::shared_ptr<const RadialGrid>& g) {
    return RadialField{g, std::vector<double>(g->count(), 0.0)};
}

void check_finite(const RadialField& u, const char* where) {
    for (double x : u.v)
        if (!std::isfinite(x))
            throw IntegrationError(std::string("non-finite field sample in ") + where);
}

double mass(const RadialField& u) {
    const auto& w = u.grid->w();
    return sum_indexed(u.v.size(), [&](std::size_t i) { return w[i] * u.v[i] * u.v[i]; });
}

double gradient_sq_norm(const RadialField& u) { return u.grid->kinetic(u.v); }

double sobolev_norm(const RadialField& u, double s) {
    if (s == 0.0) return std::sqrt(mass(u));
    if (s == 1.0) return std::sqrt(mass(u) + gradient_sq_norm(u));
    throw DomainError("radial grids support sobolev_norm only for s in {0, 1}");
}

double mass_tail(const RadialField& u, double radius) {
    const auto& w = u.grid->w();
    const auto& r = u.grid->r();
    return sum_indexed(u.v.size(), [&](std::size_t i) {
        return r[i] >= radius ? w[i] * u.v[i] * u.v[i] : 0.0;
    });
}

double max_abs(const RadialField& u) {
    double m = 0.0;
    for (double x : u.v) m = std::max(m, std::fabs(x));
    return m;
}

double radial_kernel_value(int dim, double gamma, double r, double s) {
    if (dim < 3) throw ConfigError("radial kernels require dimension N >= 3");
    if (r < s) std::swap(r, s);
    if (s == 0.0) return std::pow(r, -gamma);  // kernel degenerates to r^{-gamma}
    const double eps = (r - s) * (r - s) / (2.0 * r * s);
    const double pref = std::pow(2.0 * r * s, -0.5 * gamma);
    double core;
    if (dim % 2 == 1)
        core = angular_core_odd((dim - 3) / 2, gamma, eps);
    else
        core = angular_core_even(0.5 * (dim - 3.0), gamma, eps);
    return pref * core / angular_normalizer(dim);
}

RadialKernel build_radial_kernel(const RadialGrid& g, double gamma) {
    const double gmax = std::min(static_cast<double>(g.dim()), 4.0);
    if (!(gamma > 0.0 && gamma < gmax))
        throw ConfigError("Riesz exponent " + std::to_string(gamma) +
                          " outside (0, min{N,4}) for N = " + std::to_string(g.dim()));
    const int m = g.count();
    RadialKernel k;
    k.gamma = gamma;
    k.mat.assign(static_cast<std::size_t>(m) * m, 0.0);
    const auto& r = g.r();
    std::exception_ptr failure;  // exceptions cannot cross the parallel region
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        try {
            for (std::ptrdiff_t j = i; j < m; ++j) {
                const double v = radial_kernel_value(g.dim(), gamma, r[i], r[j]);
                k.mat[i * m + j] = v;
                k.mat[j * m + i] = v;
            }
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    for (double v : k.mat)
        if (!std::isfinite(v)) throw IntegrationError("non-finite radial kernel entry");
    return k;
}

RadialKernelPair build_radial_kernels(const RadialGrid& g, double gamma1, double gamma2) {
    if (!(gamma2 > 0.0 && gamma2 < gamma1))
        throw ConfigError("Riesz exponents require 0 < gamma2 < gamma1, got gamma1 = " +
                          std::to_string(gamma1) + ", gamma2 = " + std::to_string(gamma2));
    return RadialKernelPair{build_radial_kernel(g, gamma1), build_radial_kernel(g, gamma2)};
}

void radial_convolve(const RadialGrid& g, const RadialKernel& k, const std::vector<double>& rho,
                     std::vector<double>& out) {
    const std::size_t m = rho.size();
    if (m != static_cast<std::size_t>(g.count()) || k.mat.size() != m * m)
        throw DomainError("radial_convolve: density/kernel size does not match the grid");
    const auto& w = g.w();
    out.resize(m);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
        const double* row = &k.mat[static_cast<std::size_t>(i) * m];
        Accum acc;
        for (std::size_t j = 0; j < m; ++j) acc.add(row[j] * w[j] * rho[j]);
        out[i] = acc.value();
    }
}

void radial_convolve_serial(const RadialGrid& g, const RadialKernel& k,
                            const std::vector<double>& rho, std::vector<double>& out) {
    const std::size_t m = rho.size();
    const auto& w = g.w();
    out.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = &k.mat[i * m];
        Accum acc;
        for (std::size_t j = 0; j < m; ++j) acc.add(row[j] * w[j] * rho[j]);
        out[i] = acc.value();
    }
}

}  // namespace hb
