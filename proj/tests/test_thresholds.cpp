#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "hb/errors.hpp"
#include "hb/functionals.hpp"
#include "hb/rng.hpp"
#include "hb/thresholds.hpp"

using namespace hb;

namespace {
double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

EnergyBreakdown make_b(double kin, double d1, double d2, double g1, double g2) {
    EnergyBreakdown b;
    b.kinetic = kin;
    b.d1 = d1;
    b.d2 = d2;
    b.gamma1 = g1;
    b.gamma2 = g2;
    return b;
}

SolverParams quick() {
    SolverParams p;
    p.max_iters = 8000;
    return p;
}
}  // namespace

TEST_CASE("reduced fiber profile carries the whole fiber energy") {
    const EnergyBreakdown b = make_b(0.9, 1.7, 0.4, 1.5, 0.5);
    for (double t : {0.01, 0.111, 1.0, 3.0, 40.0}) {
        const double via_profile = 0.25 * std::pow(t, b.gamma2) * reduced_fiber_profile(b, t);
        CHECK(rel(via_profile, fiber_energy(b, t)) < 1e-12);
    }
}

TEST_CASE("closed-form profile minimizer at gamma1=1.5, gamma2=0.5") {
    // F(t) = 2 t^{3/2} - t + d2 has its dip at t0 = 1/9 with F = d2 - 1/27
    const EnergyBreakdown b = make_b(1.0, 1.0, 0.0, 1.5, 0.5);
    const double beta = (b.gamma1 - b.gamma2) * b.d1 / (2.0 * (2.0 - b.gamma2) * b.kinetic);
    const double t0 = std::pow(beta, 1.0 / (2.0 - b.gamma1));
    CHECK(rel(t0, 1.0 / 9.0) < 1e-12);
    CHECK(rel(reduced_fiber_profile(b, t0), -1.0 / 27.0) < 1e-12);

    double best = 1e300;
    for (int i = 0; i <= 200000; ++i) {
        const double t = std::pow(10.0, -4.0 + 5.0 * i / 200000.0);
        best = std::min(best, reduced_fiber_profile(b, t));
    }
    CHECK(rel(best, -1.0 / 27.0) < 1e-6);
}

TEST_CASE("negative-energy witness certifies m(c) < 0 at large mass") {
    TensorGrid g(3, 12.0, 32);
    const KernelPair k = build_kernels(g, 1.5, 0.5);
    const NegativeEnergyWitness w = negative_energy_witness(g, k, 40.0, quick());
    CHECK(rel(mass(w.u), 40.0) < 1e-8);
    CHECK(w.t0 > 0.0);
    CHECK(w.f_t0 < 0.0);
    CHECK(w.energy_t0 < 0.0);

    const EnergyBreakdown b = breakdown(w.u, k);
    CHECK(rel(w.f_t0, reduced_fiber_profile(b, w.t0)) < 1e-10);
    CHECK(rel(w.energy_t0, fiber_energy(b, w.t0)) < 1e-10);
    // t0 really is the dip of the profile
    double best = 1e300;
    for (int i = 0; i <= 100000; ++i) {
        const double t = std::pow(10.0, -4.0 + 5.0 * i / 100000.0);
        best = std::min(best, reduced_fiber_profile(b, t));
    }
    CHECK(w.f_t0 <= best + 1e-6 * std::fabs(best));
}

TEST_CASE("unbounded-below witness exists only past the critical exponent") {
    const EnergyBreakdown sup = make_b(1.0, 3.0, 0.5, 2.5, 1.0);
    const auto w = unbounded_below_witness(sup);
    REQUIRE(w.has_value());
    CHECK(w->energy < -1e6);
    CHECK(rel(w->energy, fiber_energy(sup, w->t)) < 1e-12);

    const EnergyBreakdown sub = make_b(1.0, 3.0, 0.5, 1.5, 0.5);
    CHECK_FALSE(unbounded_below_witness(sub).has_value());
}

TEST_CASE("decay classifier recovers an algebraic tail") {
    auto gp = std::make_shared<const RadialGrid>(5, 400, 50.0);
    RadialField u = zeros(gp);
    for (int i = 0; i < gp->count(); ++i) u.v[i] = 0.7 * std::pow(gp->r()[i], -3.0);
    const DecayFit f = decay_fit(u, 2.5, 10.0, 40.0);
    CHECK(f.klass == "algebraic");
    CHECK(rel(f.exponent, -3.0) < 1e-9);
    CHECK(f.r2_algebraic > 0.999999);
    CHECK(f.r2_algebraic > f.r2_stretched);
}

TEST_CASE("decay classifier recovers a stretched-exponential tail") {
    auto gp = std::make_shared<const RadialGrid>(3, 400, 50.0);
    RadialField u = zeros(gp);
    const double kappa = 1.0 - 0.5 * 1.0;  // gamma2 = 1
    for (int i = 0; i < gp->count(); ++i)
        u.v[i] = std::exp(-2.0 * std::pow(gp->r()[i], kappa));
    const DecayFit f = decay_fit(u, 1.0, 5.0, 45.0);
    CHECK(f.klass == "stretched-exponential");
    CHECK(rel(f.rate, 2.0) < 1e-9);
    CHECK(f.r2_stretched > 0.999999);
}

TEST_CASE("decay window validation") {
    auto gp = std::make_shared<const RadialGrid>(3, 64, 20.0);
    RadialField u = radial_gaussian(gp, 2.0, 1.0);
    CHECK_THROWS_AS(decay_fit(u, 1.0, 5.0, 25.0), ConfigError);   // beyond the grid
    CHECK_THROWS_AS(decay_fit(u, 1.0, 8.0, 3.0), ConfigError);    // inverted
    CHECK_THROWS_AS(decay_fit(u, 1.0, 19.8, 19.9), ConfigError);  // too few samples
}

TEST_CASE("verdict bisection tightens to one percent") {
    const double cstar = 13.7;
    int calls = 0;
    auto classify = [&](double c) {
        ++calls;
        return c < cstar ? std::string("zero") : std::string("negative");
    };
    const Bracket b = threshold_bisection(classify, 1.0, 100.0);
    CHECK(b.verdict_lo == "zero");
    CHECK(b.verdict_hi == "negative");
    CHECK(b.lo < cstar);
    CHECK(b.hi >= cstar);
    CHECK(b.hi - b.lo <= 0.01 * b.hi + 1e-12);
    CHECK(b.iterations <= 12);

    CHECK_THROWS_AS(threshold_bisection([](double) { return std::string("same"); }, 1.0, 2.0),
                    DomainError);
}

TEST_CASE("subcritical scan separates vanishing from attained") {
    TensorGrid g(3, 12.0, 24);
    const KernelPair k = build_kernels(g, 1.5, 0.5);
    std::vector<ScanRow> streamed;
    const std::vector<ScanRow> rows =
        scan_m(g, k, {30.0, 0.002}, quick(), [&](const ScanRow& r) { streamed.push_back(r); });
    REQUIRE(rows.size() == 2);
    CHECK(streamed.size() == 2);
    // returned rows come back sorted by mass regardless of completion order
    CHECK(rows[0].c == 0.002);
    CHECK(rows[1].c == 30.0);
    CHECK(rows[0].verdict == "vanishing");
    CHECK(std::fabs(rows[0].value) <= 1e-6);
    CHECK(rows[1].verdict == "attained");
    CHECK(rows[1].value < 0.0);
    CHECK(rows[1].kinetic > 0.0);
    // monotone nonincreasing by construction of the pair
    CHECK(rows[1].value <= rows[0].value + 1e-6);
}

TEST_CASE("scan guards reject the wrong regime") {
    TensorGrid g(3, 10.0, 16);
    const KernelPair sup = build_kernels(g, 2.5, 1.0);
    CHECK_THROWS_AS(scan_m(g, sup, {1.0}, quick()), DomainError);
    const KernelPair sub = build_kernels(g, 1.5, 0.5);
    CHECK_THROWS_AS(scan_gamma(g, sub, {1.0}, quick()), DomainError);
}

TEST_CASE("subadditivity of the scan energies") {
    TensorGrid g(3, 12.0, 24);
    const KernelPair k = build_kernels(g, 1.5, 0.5);
    const SubadditivityReport rep = subadditivity_check(g, k, 20.0, 20.0, quick());
    CHECK(rep.row1.verdict == "attained");
    CHECK(rep.joint.verdict == "attained");
    // m(c1+c2) <= m(c1)+m(c2), strictly in the attained regime
    CHECK(rep.margin > 0.0);
    CHECK(rep.strict);
    CHECK(rel(rep.margin, rep.row1.value + rep.row2.value - rep.joint.value) < 1e-12);
}
