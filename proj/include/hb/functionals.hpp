#pragma once

#include <string>

#include "hb/field.hpp"
#include "hb/kernels.hpp"
#include "hb/radial.hpp"

namespace hb {

// E(u) = kinetic/2 + d2/4 - d1/4, Q(u) = kinetic + (g2/4) d2 - (g1/4) d1.
struct EnergyBreakdown {
    double kinetic = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;

    double energy() const { return 0.5 * kinetic + 0.25 * d2 - 0.25 * d1; }
    double pohozaev() const { return kinetic + 0.25 * gamma2 * d2 - 0.25 * gamma1 * d1; }
    // Scale against which |Q| smallness is judged.
    double magnitude() const { return kinetic + d1 + d2; }
};

std::string to_json(const EnergyBreakdown& b);  // keys kinetic, d1, d2, E, Q

double d_gamma(const TensorField& u, const TensorKernel& k);
double d_gamma(const RadialField& u, const RadialKernel& k);

EnergyBreakdown breakdown(const TensorField& u, const KernelPair& k);
EnergyBreakdown breakdown(const RadialField& u, const RadialKernelPair& k);

// E(u_t) and its first two t-derivatives from the breakdown alone.
double fiber_energy(const EnergyBreakdown& b, double t);
double fiber_derivative(const EnergyBreakdown& b, double t);
double fiber_second(const EnergyBreakdown& b, double t);

struct FiberRoot {
    double t;
    std::string regime;  // "critical" or "supercritical"
};

// Unique zero of t -> d/dt E(u_t) for gamma1 >= 2 (on S(c) when gamma1 = 2).
FiberRoot pohozaev_time(const EnergyBreakdown& b);

// u_t(x) = t^{N/2} u(t x) by trigonometric resampling; mass-preserving.
TensorField scale_t(const TensorField& u, double t);
// u_theta(x) = theta^{(1+beta N)/2} u(theta^beta x); mass scales by theta.
TensorField scale_mass(const TensorField& u, double theta, double beta);

// -Delta u + lambda u - (K1*|u|^2)u + (K2*|u|^2)u
TensorField el_residual(const TensorField& u, const KernelPair& k, double lambda);
RadialField el_residual(const RadialField& u, const RadialKernelPair& k, double lambda);

double multiplier(const EnergyBreakdown& b, double c);
double multiplier(const TensorField& u, const KernelPair& k, double c);
double multiplier(const RadialField& u, const RadialKernelPair& k, double c);

double gn_constant_choquard(int dim, double gamma, double mass_of_q);
double gn_constant_power(int dim, double p, double mass_of_r);

// D_gamma(u) / (kinetic^{gamma/2} mass^{(4-gamma)/2}); maximized by Q_gamma.
double gn_quotient(const TensorField& u, const TensorKernel& k);

}  // namespace hb
