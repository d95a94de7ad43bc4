#pragma once

#include <complex>
#include <vector>

#include "hb/grid.hpp"

namespace hb {

using cplx = std::complex<double>;

struct TensorField {
    TensorGrid grid;
    std::vector<cplx> v;
};

TensorField zeros(const TensorGrid& g);

// Throws IntegrationError if any sample is NaN/Inf.
void check_finite(const TensorField& u, const char* where);

double mass(const TensorField& u);               // sum |u|^2 dx^N
double gradient_sq_norm(const TensorField& u);   // spectral sum |k|^2 |u_hat|^2
double sobolev_norm(const TensorField& u, double s);  // sqrt(sum (1+|k|^2)^s |u_hat|^2)
double h1_norm(const TensorField& u);
double mass_tail(const TensorField& u, double radius);  // sum_{|x| >= radius} |u|^2 dx^N
double max_abs(const TensorField& u);

// |u|^2 sampled on the grid.
std::vector<double> density(const TensorField& u);

// u *= s
void scale_field(TensorField& u, double s);
// Rescale amplitude so that mass(u) == c.
void normalize_mass(TensorField& u, double c);

}  // namespace hb
