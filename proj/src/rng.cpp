#include "hb/rng.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "hb/errors.hpp"

namespace hb {

TensorField centered_gaussian(const TensorGrid& g, double width, double amplitude) {
    if (!(width > 0.0)) throw DomainError("gaussian width must be positive");
    TensorField u = zeros(g);
    const double inv = 1.0 / (2.0 * width * width);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(u.v.size()); ++i)
        u.v[i] = amplitude * std::exp(-g.r_sq(i) * inv);
    return u;
}

RadialField radial_gaussian(const std::shared_ptr<const RadialGrid>& g, double width,
                            double amplitude) {
    if (!(width > 0.0)) throw DomainError("gaussian width must be positive");
    RadialField u = zeros(g);
    const double inv = 1.0 / (2.0 * width * width);
    const auto& r = g->r();
    for (std::size_t i = 0; i < u.v.size(); ++i)
        u.v[i] = amplitude * std::exp(-r[i] * r[i] * inv);
    return u;
}

TensorField random_mixture(const TensorGrid& g, std::uint64_t seed, int bumps) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(0.3, 1.0);
    std::uniform_real_distribution<double> width(0.6, 1.6);
    const double span = std::min(2.0, 0.25 * g.half_extent());
    std::uniform_real_distribution<double> center(-span, span);

    struct Bump {
        double a, inv, c[3];
    };
    std::vector<Bump> b(bumps);
    for (auto& bb : b) {
        bb.a = amp(rng);
        const double w = width(rng);
        bb.inv = 1.0 / (2.0 * w * w);
        for (int d = 0; d < 3; ++d) bb.c[d] = d < g.dim() ? center(rng) : 0.0;
    }

    TensorField u = zeros(g);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(u.v.size()); ++i) {
        const auto a = g.unflatten(i);
        double val = 0.0;
        for (const auto& bb : b) {
            double r2 = 0.0;
            for (int d = 0; d < g.dim(); ++d) {
                const double dxd = g.coord(a[d]) - bb.c[d];
                r2 += dxd * dxd;
            }
            val += bb.a * std::exp(-r2 * bb.inv);
        }
        u.v[i] = val;
    }
    return u;
}

}  // namespace hb
