#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "hb/field.hpp"
#include "hb/functionals.hpp"
#include "hb/kernels.hpp"
#include "hb/radial.hpp"

namespace hb {

struct SolverParams {
    double step = 1.0;             // initial tau
    double backtrack = 0.5;        // tau shrink factor on rejected steps
    int max_iters = 6000;
    double tolerance = 3e-6;       // projected-gradient norm relative to ||u||_{H1}
    double guess_width = 0.0;      // 0 -> box-derived default
    double guess_amplitude = 0.0;  // 0 -> fixed by the mass constraint
    std::string init_checkpoint;   // optional starting field
    std::uint64_t seed = 1;

    void validate() const;
};

struct GroundState {
    std::optional<TensorField> tensor;
    std::optional<RadialField> radial;
    std::string regime;   // subcritical-global | critical | supercritical-minimax | choquard | zero-mass
    std::string verdict;  // attained | vanishing
    double c = 0.0;
    double energy = 0.0;
    double pohozaev = 0.0;
    double lambda = 0.0;
    double residual = 0.0;  // ||projected EL residual||_2 / ||u||_{H1}
    EnergyBreakdown parts;
    int iterations = 0;
    int restarts = 0;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
};

// Sidecar payload: {c, E, Q, lambda, regime, iterations, residual, seed}.
std::string to_json(const GroundState& s);

// -DQ + Q = (K_gamma * |Q|^2) Q via ascent on the scale-invariant quotient
// D/(A^{g/2} m^{(4-g)/2}) followed by the two-parameter rescale a Q(b x).
GroundState solve_choquard(const TensorGrid& g, double gamma, const SolverParams& p);

// min E on S(c), subcritical window gamma1 < min{N,2}; may report "vanishing".
GroundState minimize_global(const TensorGrid& g, const KernelPair& k, double c,
                            const SolverParams& p);

// min of E(u_{t_u}) on S(c), supercritical gamma1 > 2.
GroundState minimize_pohozaev(const TensorGrid& g, const KernelPair& k, double c,
                              const SolverParams& p);

// gamma1 = 2 on the constrained region kinetic < d1/2; needs c > c_tilde1.
// q2 (a Choquard state for gamma = 2) seeds the iteration when provided.
GroundState minimize_critical(const TensorGrid& g, const KernelPair& k, double c,
                              double c_tilde1, const SolverParams& p,
                              const TensorField* q2 = nullptr);

bool in_critical_region(const TensorField& u, const KernelPair& k);

// min of E(u_{t_u}) on S(c) for radial fields, supercritical gamma1 > 2.
// seed (when given) is renormalized onto the mass sphere before descent.
GroundState minimize_pohozaev_radial(const std::shared_ptr<const RadialGrid>& g,
                                     const RadialKernelPair& k, double c, const SolverParams& p,
                                     const RadialField* seed = nullptr);

// Unconstrained fiber descent with lambda = 0; c reports the measured mass.
GroundState solve_zero_mass(const std::shared_ptr<const RadialGrid>& g,
                            const RadialKernelPair& k, const SolverParams& p);

// -DQ + Q - (K*|Q|^2)Q, the single-kernel stationarity residual.
TensorField choquard_residual(const TensorField& u, const TensorKernel& k);

}  // namespace hb
