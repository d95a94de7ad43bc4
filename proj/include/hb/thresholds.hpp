#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hb/functionals.hpp"
#include "hb/ground_state.hpp"
#include "hb/kernels.hpp"
#include "hb/radial.hpp"

namespace hb {

struct ScanRow {
    double c = 0.0;
    double value = 0.0;
    std::string verdict;  // attained | vanishing | unbounded-below | failed
    double lambda = 0.0;
    double kinetic = 0.0;
    int restarts = 0;
    std::string note;  // failure detail for failed rows
};

// Rows fan out to HB_THREADS workers; each row owns its solver state and
// failures are recorded per row without aborting the scan.  on_row (when set)
// sees rows as they complete, serialized, in completion order.
using RowSink = std::function<void(const ScanRow&)>;

std::vector<ScanRow> scan_m(const TensorGrid& g, const KernelPair& k,
                            const std::vector<double>& cs, const SolverParams& p,
                            const RowSink& on_row = {});
std::vector<ScanRow> scan_gamma(const TensorGrid& g, const KernelPair& k,
                                const std::vector<double>& cs, const SolverParams& p,
                                const RowSink& on_row = {});
std::vector<ScanRow> scan_gamma_radial(const std::shared_ptr<const RadialGrid>& g,
                                       const RadialKernelPair& k, const std::vector<double>& cs,
                                       const SolverParams& p, const RowSink& on_row = {});

struct CriticalMass {
    double c_tilde1 = 0.0;  // = ||Q_2||_2^2
    GroundState q2;         // provenance: the gamma = 2 single-kernel state
};
CriticalMass critical_mass(const TensorGrid& g, double gamma2, const SolverParams& p);

// Reduced subcritical fiber profile F with E(u_t) = (t^{gamma2}/4) F(t).
double reduced_fiber_profile(const EnergyBreakdown& b, double t);

// Certificate that t -> E(u_t) passes below `threshold`, evaluated through the
// exact fiber polynomial of the stored breakdown; absent if no dip is found.
struct EnergyWitness {
    double t = 0.0;
    double energy = 0.0;
    EnergyBreakdown base;
};
std::optional<EnergyWitness> unbounded_below_witness(const EnergyBreakdown& b,
                                                     double threshold = -1e6);

// Global-minimization verdict at gamma1 = 2, probed along the fiber of a
// rescaled single-kernel state: the infimum stays at zero up to the critical
// mass and drops to -infinity beyond it.
struct CriticalProbe {
    ScanRow row;
    double fiber_inf = 0.0;
    TensorField probe;  // the rescaled state whose fiber was scanned
    std::optional<EnergyWitness> witness;
};
CriticalProbe critical_probe(const TensorGrid& g, const KernelPair& k, double c,
                             const GroundState& q2, const SolverParams& p);

struct NegativeEnergyWitness {
    TensorField u;           // single-kernel profile rescaled onto S(c)
    double t0 = 0.0;         // minimizer of the reduced fiber profile
    double f_t0 = 0.0;       // profile value there; m(c) < 0 once this is < 0
    double energy_t0 = 0.0;  // E(u_{t0}) = (t0^{gamma2}/4) f_t0
};
NegativeEnergyWitness negative_energy_witness(const TensorGrid& g, const KernelPair& k, double c,
                                              const SolverParams& p);

struct SubadditivityReport {
    ScanRow row1, row2, joint;
    double margin = 0.0;  // m(c1) + m(c2) - m(c1+c2)
    bool strict = false;
};
SubadditivityReport subadditivity_check(const TensorGrid& g, const KernelPair& k, double c1,
                                        double c2, const SolverParams& p);

struct DecayFit {
    std::string klass;  // algebraic | stretched-exponential
    double exponent = 0.0;
    double rate = 0.0;
    double r2_algebraic = 0.0;
    double r2_stretched = 0.0;
};
DecayFit decay_fit(const RadialField& u, double gamma2, double r_lo, double r_hi);

struct Bracket {
    double lo = 0.0, hi = 0.0;
    std::string verdict_lo, verdict_hi;
    int iterations = 0;
};
// Bisect a verdict boundary down to 1% relative width (or max_iters splits);
// the returned endpoints always carry distinct verdicts.
Bracket threshold_bisection(const std::function<std::string(double)>& classify, double lo,
                            double hi, int max_iters = 12);

}  // namespace hb
