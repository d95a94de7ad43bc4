#include "hb/field.hpp"

#include <cmath>

#include "hb/errors.hpp"
#include "hb/fft.hpp"
#include "hb/reduce.hpp"

namespace hb {

TensorField zeros(const TensorGrid& g) { return TensorField{g, std::vector<cplx>(g.size())}; }

void check_finite(const TensorField& u, const char* where) {
    for (const cplx& z : u.v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw IntegrationError(std::string("non-finite field sample in ") + where);
}

double mass(const TensorField& u) {
    const double vol = u.grid.cell_volume();
    return vol * sum_indexed(u.v.size(), [&](std::size_t i) { return std::norm(u.v[i]); });
}

double gradient_sq_norm(const TensorField& u) {
    std::vector<cplx> a = u.v;
    fft_for(u.grid).forward(a);
    const double scale = u.grid.cell_volume() / static_cast<double>(u.grid.size());
    return scale *
           sum_indexed(a.size(), [&](std::size_t i) { return u.grid.k_sq(i) * std::norm(a[i]); });
}

double sobolev_norm(const TensorField& u, double s) {
    if (s < 0.0) throw DomainError("sobolev_norm requires regularity order s >= 0");
    std::vector<cplx> a = u.v;
    fft_for(u.grid).forward(a);
    const double scale = u.grid.cell_volume() / static_cast<double>(u.grid.size());
    const double sq = scale * sum_indexed(a.size(), [&](std::size_t i) {
                          return std::pow(1.0 + u.grid.k_sq(i), s) * std::norm(a[i]);
                      });
    return std::sqrt(sq);
}

double h1_norm(const TensorField& u) {
    return std::sqrt(mass(u) + gradient_sq_norm(u));
}

double mass_tail(const TensorField& u, double radius) {
    const double r2 = radius * radius;
    const double vol = u.grid.cell_volume();
    return vol * sum_indexed(u.v.size(), [&](std::size_t i) {
        return u.grid.r_sq(i) >= r2 ? std::norm(u.v[i]) : 0.0;
    });
}

double max_abs(const TensorField& u) {
    double m = 0.0;
#pragma omp parallel for schedule(static) reduction(max : m)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(u.v.size()); ++i)
        m = std::max(m, std::abs(u.v[i]));
    return m;
}

std::vector<double> density(const TensorField& u) {
    std::vector<double> rho(u.v.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(u.v.size()); ++i)
        rho[i] = std::norm(u.v[i]);
    return rho;
}

void scale_field(TensorField& u, double s) {
    for (cplx& z : u.v) z *= s;
}

void normalize_mass(TensorField& u, double c) {
    if (!(c > 0.0)) throw DomainError("mass constraint must be positive");
    const double m = mass(u);
    if (!(m > 0.0)) throw SolverError("cannot normalize the zero field onto a mass sphere");
    scale_field(u, std::sqrt(c / m));
}

}  // namespace hb
