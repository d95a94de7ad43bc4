#pragma once

#include <utility>
#include <vector>

#include "hb/field.hpp"
#include "hb/functionals.hpp"
#include "hb/kernels.hpp"

namespace hb {

// C^4 radial weight: a(r) = r^2 on [0, 2R], a'' tapers to 0 over [2R, 4R]
// through a quintic smoothstep, a' constant (= 6R) beyond.
class VirialWeight {
  public:
    explicit VirialWeight(double radius);

    double radius() const { return r_; }
    double a(double r) const;
    double ap(double r) const;      // a'
    double app(double r) const;     // a''
    double appp(double r) const;    // a'''
    double apppp(double r) const;   // a''''
    double bilaplacian(int dim, double r) const;

  private:
    double r_;
};

struct TrajectorySample {
    double t = 0, mass = 0, energy = 0, kinetic = 0;
    double va = 0, va1 = 0, va2 = 0, kfun = 0;
    double tail = 0, dt = 0;
};

struct EvolveOptions {
    double horizon = 1.0;
    double dt = 1e-3;
    int monitor_every = 10;
    double virial_radius = 0.0;   // 0 -> box-derived default L/5
    double tail_radius = 0.0;     // 0 -> L/2
    bool adaptive = true;
    bool nonlinear = true;
    int store_fields_every = 0;   // 0 -> keep no intermediate fields
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    TensorField final_field;
    std::vector<std::pair<double, TensorField>> snapshots;
    int halvings = 0;
    bool step_collapsed = false;
};

Trajectory evolve(const TensorField& psi0, const KernelPair& k, const EvolveOptions& opt);

// K = kinetic/2 - (gamma1/8) d1 + (gamma2/8) d2 (= Q/2, the convention the
// finite-difference virial test certifies).
double k_functional(const EnergyBreakdown& b);
double k_functional(const TensorField& u, const KernelPair& k);

struct VirialObservables {
    double va = 0, va1 = 0, va2 = 0;
};

VirialObservables virial_observables(const TensorField& psi, const KernelPair& k,
                                     const VirialWeight& w);

std::string blowup_monitor(const Trajectory& tr, double grad_growth_factor = 10.0);

// Cauchy increments ||U(-t_{j+1}) psi_{j+1} - U(-t_j) psi_j||_{H^s}.
std::vector<double> scattering_diagnostic(
    const std::vector<std::pair<double, TensorField>>& snapshots, double s);

}  // namespace hb
