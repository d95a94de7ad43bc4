#include "hb/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "hb/errors.hpp"
#include "hb/fft.hpp"
#include "hb/reduce.hpp"

namespace hb {

namespace {

double weighted_overlap(const TensorGrid& g, const std::vector<double>& rho,
                        const std::vector<double>& conv) {
    return g.cell_volume() * sum_indexed(rho.size(), [&](std::size_t i) {
               return rho[i] * conv[i];
           });
}

}  // namespace

std::string to_json(const EnergyBreakdown& b) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "{\"kinetic\": %.17g, \"d1\": %.17g, \"d2\": %.17g, \"E\": %.17g, "
                  "\"Q\": %.17g}",
                  b.kinetic, b.d1, b.d2, b.energy(), b.pohozaev());
    return buf;
}

double d_gamma(const TensorField& u, const TensorKernel& k) {
    const std::vector<double> rho = density(u);
    std::vector<double> conv;
    std::vector<cplx> scratch;
    riesz_convolve(u.grid, k, rho, conv, scratch);
    return weighted_overlap(u.grid, rho, conv);
}

double d_gamma(const RadialField& u, const RadialKernel& k) {
    const auto& g = *u.grid;
    std::vector<double> rho(u.v.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = u.v[i] * u.v[i];
    std::vector<double> conv;
    radial_convolve(g, k, rho, conv);
    const auto& w = g.w();
    return sum_indexed(rho.size(), [&](std::size_t i) { return w[i] * rho[i] * conv[i]; });
}

EnergyBreakdown breakdown(const TensorField& u, const KernelPair& k) {
    EnergyBreakdown b;
    b.gamma1 = k.focusing.gamma;
    b.gamma2 = k.defocusing.gamma;
    b.kinetic = gradient_sq_norm(u);
    const std::vector<double> rho = density(u);
    std::vector<double> conv;
    std::vector<cplx> scratch;
    riesz_convolve(u.grid, k.focusing, rho, conv, scratch);
    b.d1 = weighted_overlap(u.grid, rho, conv);
    riesz_convolve(u.grid, k.defocusing, rho, conv, scratch);
    b.d2 = weighted_overlap(u.grid, rho, conv);
    return b;
}

EnergyBreakdown breakdown(const RadialField& u, const RadialKernelPair& k) {
    EnergyBreakdown b;
    b.gamma1 = k.focusing.gamma;
    b.gamma2 = k.defocusing.gamma;
    b.kinetic = gradient_sq_norm(u);
    b.d1 = d_gamma(u, k.focusing);
    b.d2 = d_gamma(u, k.defocusing);
    return b;
}

double fiber_energy(const EnergyBreakdown& b, double t) {
    return 0.5 * t * t * b.kinetic + 0.25 * std::pow(t, b.gamma2) * b.d2 -
           0.25 * std::pow(t, b.gamma1) * b.d1;
}

double fiber_derivative(const EnergyBreakdown& b, double t) {
    return t * b.kinetic + 0.25 * b.gamma2 * std::pow(t, b.gamma2 - 1.0) * b.d2 -
           0.25 * b.gamma1 * std::pow(t, b.gamma1 - 1.0) * b.d1;
}

double fiber_second(const EnergyBreakdown& b, double t) {
    return b.kinetic +
           0.25 * b.gamma2 * (b.gamma2 - 1.0) * std::pow(t, b.gamma2 - 2.0) * b.d2 -
           0.25 * b.gamma1 * (b.gamma1 - 1.0) * std::pow(t, b.gamma1 - 2.0) * b.d1;
}

FiberRoot pohozaev_time(const EnergyBreakdown& b) {
    const bool critical = std::fabs(b.gamma1 - 2.0) <= 1e-12;
    if (!critical && b.gamma1 < 2.0)
        throw DomainError(
            "fiber projection exists only in the mass-critical or supercritical regime "
            "(gamma1 >= 2), got gamma1 = " +
            std::to_string(b.gamma1));
    if (!(b.d1 > 0.0))
        throw DomainError("fiber projection needs a nonzero focusing interaction (d1 > 0)");
    if (critical && !(b.kinetic < 0.5 * b.d1))
        throw DomainError(
            "mass-critical fiber projection needs kinetic < d1/2 (membership in the "
            "constrained set); got kinetic = " +
            std::to_string(b.kinetic) + ", d1 = " + std::to_string(b.d1));

    const double t_min = 1e-6, t_max = 1e6;
    double lo, hi;
    const double f1 = fiber_derivative(b, 1.0);
    if (f1 > 0.0) {
        lo = 1.0;
        hi = 2.0;
        while (fiber_derivative(b, hi) > 0.0) {
            hi *= 2.0;
            if (hi > t_max)
                throw DomainError("no sign change of the fiber derivative in [1e-6, 1e6]; "
                                  "field lies outside the admissible cone");
        }
    } else {
        hi = 1.0;
        lo = 0.5;
        while (fiber_derivative(b, lo) <= 0.0) {
            lo *= 0.5;
            if (lo < t_min)
                throw DomainError("no sign change of the fiber derivative in [1e-6, 1e6]; "
                                  "field lies outside the admissible cone");
        }
    }
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (fiber_derivative(b, mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double t = 0.5 * (lo + hi);

    const double scale = b.kinetic + b.d1 + b.d2;
    // Steep crossings: |t phi(t)| cannot be evaluated below the cancellation
    // noise of the dilated terms, so that floor joins the absolute gate.
    const double dilated = t * t * b.kinetic + 0.25 * b.gamma1 * std::pow(t, b.gamma1) * b.d1 +
                           0.25 * b.gamma2 * std::pow(t, b.gamma2) * b.d2;
    const double gate = std::max(1e-10 * scale, 32.0 * 2.22e-16 * dilated);
    if (std::fabs(t * fiber_derivative(b, t)) > gate)
        throw SolverError("fiber root refinement failed to reach |Q(u_t)| <= 1e-10 scale");
    if (fiber_derivative(b, 1.0) <= 0.0 && t > 1.0 + 1e-12)
        throw SolverError("fiber root exceeds 1 although Q(u) <= 0");
    for (int j = 0; j < 16; ++j) {
        const double ts = t * std::pow(100.0, j / 15.0);
        const double floor_j = 32.0 * 2.22e-16 *
                               (ts * ts * b.kinetic + std::pow(ts, b.gamma1) * b.d1 +
                                std::pow(ts, b.gamma2) * b.d2);
        if (fiber_second(b, ts) > std::max(1e-10 * scale, floor_j))
            throw SolverError("fiber energy is not concave beyond its critical point");
    }
    return FiberRoot{t, critical ? "critical" : "supercritical"};
}

namespace {

// Real matrix sending samples of a 1-D trigonometric interpolant to its values
// at the dilated nodes t*x_k; the Nyquist mode is cosine-symmetrized.
std::vector<double> resample_matrix(const TensorGrid& g, double t) {
    const int n = g.n();
    const double L = g.half_extent();
    std::vector<double> mat(static_cast<std::size_t>(n) * n);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        const double theta = std::numbers::pi * (t * g.coord(k) + L) / L;
        const double nyq = std::cos(0.5 * n * theta);
        for (int j = 0; j < n; ++j) {
            const double alpha = theta - 2.0 * std::numbers::pi * j / n;
            double s = 1.0;
            for (int m = 1; m <= n / 2 - 1; ++m) s += 2.0 * std::cos(m * alpha);
            s += (j % 2 == 0 ? nyq : -nyq);
            mat[static_cast<std::size_t>(k) * n + j] = s / n;
        }
    }
    return mat;
}

void resample_axis(const TensorGrid& g, const std::vector<double>& mat, int axis,
                   std::vector<cplx>& v) {
    const int n = g.n();
    const std::size_t lines = g.size() / n;
    std::size_t stride = 1;
    for (int d = g.dim() - 1; d > axis; --d) stride *= n;
#pragma omp parallel
    {
        std::vector<cplx> line(n), out(n);
#pragma omp for schedule(static)
        for (std::ptrdiff_t l = 0; l < static_cast<std::ptrdiff_t>(lines); ++l) {
            // Flat index of the line start: remove the axis coordinate from l.
            const std::size_t low = l % stride;
            const std::size_t high = l / stride;
            const std::size_t base = high * stride * n + low;
            for (int i = 0; i < n; ++i) line[i] = v[base + i * stride];
            for (int k = 0; k < n; ++k) {
                const double* row = &mat[static_cast<std::size_t>(k) * n];
                double re = 0.0, im = 0.0;
                for (int j = 0; j < n; ++j) {
                    re += row[j] * line[j].real();
                    im += row[j] * line[j].imag();
                }
                out[k] = cplx(re, im);
            }
            for (int i = 0; i < n; ++i) v[base + i * stride] = out[i];
        }
    }
}

}  // namespace

TensorField scale_t(const TensorField& u, double t) {
    if (!(t > 0.0)) throw DomainError("dilation parameter t must be positive");
    if (t == 1.0) return u;
    if (t < 1.0) {
        const double total = mass(u);
        const double tail = mass_tail(u, t * u.grid.half_extent());
        // wrapped tail perturbs the boundary region at this relative mass; keep it
        // far below anything the stationarity gates can see
        if (tail > 1e-4 * total)
            throw DomainError("dilation by t = " + std::to_string(t) +
                              " would push support outside the box: tail mass " +
                              std::to_string(tail) + " exceeds 1e-4 * " +
                              std::to_string(total));
    }
    TensorField out = u;
    const std::vector<double> mat = resample_matrix(u.grid, t);
    for (int axis = 0; axis < u.grid.dim(); ++axis) resample_axis(u.grid, mat, axis, out.v);
    const double amp = std::pow(t, 0.5 * u.grid.dim());
    scale_field(out, amp);
    return out;
}

TensorField scale_mass(const TensorField& u, double theta, double beta) {
    if (!(theta > 0.0)) throw DomainError("mass scaling parameter theta must be positive");
    TensorField out = scale_t(u, std::pow(theta, beta));
    scale_field(out, std::sqrt(theta));
    return out;
}

TensorField el_residual(const TensorField& u, const KernelPair& k, double lambda) {
    const TensorGrid& g = u.grid;
    const std::vector<double> rho = density(u);
    std::vector<double> conv1, conv2;
    std::vector<cplx> scratch;
    riesz_convolve(g, k.focusing, rho, conv1, scratch);
    riesz_convolve(g, k.defocusing, rho, conv2, scratch);

    const Fft& fft = fft_for(g);
    TensorField lap{g, u.v};
    fft.forward(lap.v);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(lap.v.size()); ++i)
        lap.v[i] *= g.k_sq(i);
    fft.inverse(lap.v);  // now -Delta u

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(lap.v.size()); ++i)
        lap.v[i] += (lambda - conv1[i] + conv2[i]) * u.v[i];
    return lap;
}

RadialField el_residual(const RadialField& u, const RadialKernelPair& k, double lambda) {
    const RadialGrid& g = *u.grid;
    std::vector<double> rho(u.v.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = u.v[i] * u.v[i];
    std::vector<double> conv1, conv2, stiff;
    radial_convolve(g, k.focusing, rho, conv1);
    radial_convolve(g, k.defocusing, rho, conv2);
    g.stiffness_apply(u.v, stiff);
    RadialField out = u;
    const auto& w = g.w();
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = stiff[i] / w[i] + (lambda - conv1[i] + conv2[i]) * u.v[i];
    return out;
}

double multiplier(const EnergyBreakdown& b, double c) {
    if (!(c > 0.0)) throw DomainError("mass constraint c must be positive");
    return (b.d1 - b.d2 - b.kinetic) / c;
}

namespace {

void check_mass_matches(double measured, double c) {
    if (!(c > 0.0)) throw DomainError("mass constraint c must be positive");
    if (std::fabs(measured - c) > 1e-6 * c)
        throw DomainError("field mass " + std::to_string(measured) +
                          " does not match the constraint c = " + std::to_string(c));
}

}  // namespace

double multiplier(const TensorField& u, const KernelPair& k, double c) {
    check_mass_matches(mass(u), c);
    return multiplier(breakdown(u, k), c);
}

double multiplier(const RadialField& u, const RadialKernelPair& k, double c) {
    check_mass_matches(mass(u), c);
    return multiplier(breakdown(u, k), c);
}

double gn_constant_choquard(int dim, double gamma, double mass_of_q) {
    if (!(gamma > 0.0 && gamma < std::min(static_cast<double>(dim), 4.0)))
        throw ConfigError("Hartree exponent " + std::to_string(gamma) +
                          " outside (0, min{N,4}) for N = " + std::to_string(dim));
    if (!(mass_of_q > 0.0)) throw ConfigError("ground-state mass must be positive");
    return std::pow((4.0 - gamma) / gamma, 0.5 * gamma) * 4.0 /
           ((4.0 - gamma) * mass_of_q);
}

double gn_constant_power(int dim, double p, double mass_of_r) {
    const double upper = dim > 2 ? 2.0 * dim / (dim - 2.0) : 1e300;
    if (!(p > 2.0 && p < upper))
        throw ConfigError("power exponent " + std::to_string(p) +
                          " outside the Sobolev-subcritical window (2, 2N/(N-2))");
    if (!(mass_of_r > 0.0)) throw ConfigError("ground-state mass must be positive");
    const double a = 2.0 * p - (p - 2.0) * dim;  // > 0 inside the window
    const double band = (p - 2.0) * dim;
    return std::pow(a / band, 0.25 * dim * (p - 2.0)) * 2.0 * p /
           (a * std::pow(mass_of_r, 0.5 * (p - 2.0)));
}

double gn_quotient(const TensorField& u, const TensorKernel& k) {
    const double m = mass(u);
    const double a = gradient_sq_norm(u);
    if (!(m > 0.0) || !(a > 0.0)) throw DomainError("quotient needs a nonconstant field");
    const double d = d_gamma(u, k);
    return d / (std::pow(a, 0.5 * k.gamma) * std::pow(m, 0.5 * (4.0 - k.gamma)));
}

}  // namespace hb
