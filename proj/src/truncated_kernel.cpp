#include "hb/truncated_kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hb/errors.hpp"
#include "hb/grid.hpp"
#include "hb/reduce.hpp"

namespace hb {

namespace {

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr int kGl = 16;
constexpr double kGlNode[kGl] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
constexpr double kGlWeight[kGl] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

constexpr double kSeriesEnd = 1.0;

}  // namespace

TruncatedKernelTransform::TruncatedKernelTransform(int dim, double gamma, double radius,
                                                   double k_max)
    : dim_(dim), gamma_(gamma), radius_(radius), panel_len_(std::numbers::pi / 4.0) {
    if (dim < 1 || dim > 3) throw ConfigError("truncated kernel transform: dimension must be 1..3");
    const double gmax = std::min(static_cast<double>(dim), 4.0);
    if (!(gamma > 0.0 && gamma < gmax))
        throw ConfigError("Riesz exponent " + std::to_string(gamma) +
                          " outside (0, min{N,4}) for N = " + std::to_string(dim));
    if (!(radius > 0.0)) throw ConfigError("kernel truncation radius must be positive");
    weight_exp_ = dim == 1 ? -gamma : 1.0 - gamma;

    const double s_max = std::max(k_max * radius, kSeriesEnd) + panel_len_;
    const std::size_t n_panels = static_cast<std::size_t>((s_max - kSeriesEnd) / panel_len_) + 1;
    cumulative_.resize(n_panels + 1);
    Accum acc;
    acc.add(series(kSeriesEnd));
    cumulative_[0] = acc.value();
    for (std::size_t p = 0; p < n_panels; ++p) {
        const double a = kSeriesEnd + p * panel_len_;
        const double half = 0.5 * panel_len_;
        double panel = 0.0;
        for (int q = 0; q < kGl; ++q)
            panel += kGlWeight[q] * integrand(a + half * (1.0 + kGlNode[q]));
        acc.add(panel * half);
        cumulative_[p + 1] = acc.value();
    }
}

double TruncatedKernelTransform::integrand(double s) const {
    const double w = std::pow(s, weight_exp_);
    switch (dim_) {
        case 1: return w * std::cos(s);
        case 2: return w * std::cyl_bessel_j(0.0, s);
        default: return w * std::sin(s);
    }
}

double TruncatedKernelTransform::series(double x) const {
    // Maclaurin expansion of the oscillator integrated term by term.
    double term_pow = 0.0, acc = 0.0;
    switch (dim_) {
        case 1:
            // sum_j (-1)^j x^{2j+1-g} / ((2j)! (2j+1-g))
            term_pow = std::pow(x, 1.0 - gamma_);
            for (int j = 0; j < 60; ++j) {
                const double denom_fact = std::tgamma(2.0 * j + 1.0);
                const double t = ((j % 2 == 0) ? 1.0 : -1.0) * term_pow /
                                 (denom_fact * (2.0 * j + 1.0 - gamma_));
                acc += t;
                term_pow *= x * x;
                if (std::fabs(t) < 1e-18 * std::fabs(acc) + 1e-300) break;
            }
            return acc;
        case 2:
            // J0: sum_j (-1)^j x^{2j+2-g} / (4^j (j!)^2 (2j+2-g))
            term_pow = std::pow(x, 2.0 - gamma_);
            for (int j = 0; j < 60; ++j) {
                const double fact = std::tgamma(j + 1.0);
                const double t = ((j % 2 == 0) ? 1.0 : -1.0) * term_pow /
                                 (std::pow(4.0, j) * fact * fact * (2.0 * j + 2.0 - gamma_));
                acc += t;
                term_pow *= x * x;
                if (std::fabs(t) < 1e-18 * std::fabs(acc) + 1e-300) break;
            }
            return acc;
        default:
            // sin: sum_j (-1)^j x^{2j+3-g} / ((2j+1)! (2j+3-g))
            term_pow = std::pow(x, 3.0 - gamma_);
            for (int j = 0; j < 60; ++j) {
                const double denom_fact = std::tgamma(2.0 * j + 2.0);
                const double t = ((j % 2 == 0) ? 1.0 : -1.0) * term_pow /
                                 (denom_fact * (2.0 * j + 3.0 - gamma_));
                acc += t;
                term_pow *= x * x;
                if (std::fabs(t) < 1e-18 * std::fabs(acc) + 1e-300) break;
            }
            return acc;
    }
}

double TruncatedKernelTransform::oscillatory_integral(double x) const {
    if (x <= kSeriesEnd) return series(x);
    const std::size_t p =
        std::min(static_cast<std::size_t>((x - kSeriesEnd) / panel_len_), cumulative_.size() - 2);
    const double a = kSeriesEnd + p * panel_len_;
    const double half = 0.5 * (x - a);
    double partial = 0.0;
    for (int q = 0; q < kGl; ++q)
        partial += kGlWeight[q] * integrand(a + half * (1.0 + kGlNode[q]));
    return cumulative_[p] + partial * half;
}

double TruncatedKernelTransform::operator()(double k) const {
    if (k == 0.0) return zero_mode();
    const double g = oscillatory_integral(k * radius_);
    switch (dim_) {
        case 1: return 2.0 * std::pow(k, gamma_ - 1.0) * g;
        case 2: return 2.0 * std::numbers::pi * std::pow(k, gamma_ - 2.0) * g;
        default: return 4.0 * std::numbers::pi * std::pow(k, gamma_ - 3.0) * g;
    }
}

double TruncatedKernelTransform::zero_mode() const {
    return unit_sphere_area(dim_) * std::pow(radius_, dim_ - gamma_) / (dim_ - gamma_);
}

}  // namespace hb
