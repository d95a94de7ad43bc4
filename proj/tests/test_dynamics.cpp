#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "hb/dynamics.hpp"
#include "hb/errors.hpp"
#include "hb/functionals.hpp"
#include "hb/ground_state.hpp"
#include "hb/rng.hpp"

using namespace hb;
namespace nb = std::numbers;

namespace {
double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

double l2_diff(const TensorField& a, const TensorField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) s += std::norm(a.v[i] - b.v[i]);
    return std::sqrt(a.grid.cell_volume() * s);
}
}  // namespace

TEST_CASE("virial weight closed regions") {
    const double R = 1.7;
    VirialWeight w(R);
    for (double r : {0.0, 0.3, R, 2.0 * R - 1e-9}) {
        CHECK(w.a(r) == doctest::Approx(r * r).epsilon(1e-12));
        CHECK(w.ap(r) == doctest::Approx(2.0 * r).epsilon(1e-12));
        CHECK(w.app(r) == doctest::Approx(2.0));
        CHECK(w.appp(r) == 0.0);
        CHECK(w.apppp(r) == 0.0);
        CHECK(std::fabs(w.bilaplacian(3, std::max(r, 0.1))) < 1e-12);
    }
    for (double r : {4.0 * R + 1e-9, 5.0 * R, 10.0 * R}) {
        CHECK(w.ap(r) == doctest::Approx(6.0 * R).epsilon(1e-12));
        CHECK(w.app(r) == 0.0);
        CHECK(w.appp(r) == 0.0);
        CHECK(w.apppp(r) == 0.0);
        CHECK(std::fabs(w.bilaplacian(3, r)) < 1e-12);  // laplacian of 6R r is harmonic in R^3
    }
}

TEST_CASE("virial weight joins are C3 and bounds hold") {
    const double R = 2.3;
    VirialWeight w(R);
    for (double j : {2.0 * R, 4.0 * R}) {
        const double h = 1e-9;
        CHECK(std::fabs(w.a(j - h) - w.a(j + h)) < 1e-7 * R * R);
        CHECK(std::fabs(w.ap(j - h) - w.ap(j + h)) < 1e-7 * R);
        CHECK(std::fabs(w.app(j - h) - w.app(j + h)) < 1e-6);
        CHECK(std::fabs(w.appp(j - h) - w.appp(j + h)) < 1e-6 / R);
    }
    double app_max = 0.0, apppp_max = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double r = 5.0 * R * i / 20000.0;
        app_max = std::max(app_max, w.app(r));
        apppp_max = std::max(apppp_max, std::fabs(w.apppp(r)));
        CHECK(w.app(r) >= -1e-12);  // concave taper never overshoots
    }
    CHECK(app_max <= 2.0 + 1e-12);
    CHECK(apppp_max <= 3.0 / (R * R));
}

TEST_CASE("virial weight derivatives agree with finite differences") {
    const double R = 1.1;
    VirialWeight w(R);
    const double h = 1e-6;
    for (double r : {0.5, 1.9, 2.6, 3.3, 4.1, 4.6, 5.5}) {  // interior of each panel
        const double fd_ap = (w.a(r + h) - w.a(r - h)) / (2 * h);
        const double fd_app = (w.ap(r + h) - w.ap(r - h)) / (2 * h);
        const double fd_appp = (w.app(r + h) - w.app(r - h)) / (2 * h);
        const double fd_apppp = (w.appp(r + h) - w.appp(r - h)) / (2 * h);
        CHECK(std::fabs(fd_ap - w.ap(r)) < 1e-6 * std::max(1.0, std::fabs(w.ap(r))));
        CHECK(std::fabs(fd_app - w.app(r)) < 1e-5);
        CHECK(std::fabs(fd_appp - w.appp(r)) < 1e-5);
        CHECK(std::fabs(fd_apppp - w.apppp(r)) < 1e-4);
    }
}

TEST_CASE("linear step is the exact free propagator on a mode") {
    TensorGrid g(1, 5.0, 32);
    const double kmode = nb::pi * 3 / 5.0;  // an on-grid wavenumber
    TensorField psi0 = zeros(g);
    for (int i = 0; i < g.n(); ++i)
        psi0.v[i] = std::polar(1.0, kmode * g.coord(i));
    const KernelPair k = build_kernels(g, 0.9, 0.3);
    EvolveOptions opt;
    opt.horizon = 0.5;
    opt.dt = 1e-2;
    opt.nonlinear = false;
    opt.adaptive = false;
    opt.virial_radius = 1.0;
    const Trajectory tr = evolve(psi0, k, opt);
    // i psi_t = Delta psi rotates the mode by exp(+i k^2 t)
    double err = 0.0;
    for (int i = 0; i < g.n(); ++i) {
        const cplx expect = std::polar(1.0, kmode * g.coord(i) + kmode * kmode * 0.5);
        err = std::max(err, std::abs(tr.final_field.v[i] - expect));
    }
    CHECK(err < 1e-11);
    CHECK(blowup_monitor(tr) == "stable");
}

TEST_CASE("mass conserved to roundoff, energy to splitting order") {
    TensorGrid g(3, 10.0, 24);
    const KernelPair k = build_kernels(g, 2.5, 1.0);
    TensorField psi0 = centered_gaussian(g, 1.0, 1.0);
    normalize_mass(psi0, 3.0);
    EvolveOptions opt;
    opt.horizon = 0.1;
    opt.dt = 1e-3;
    opt.monitor_every = 10;
    opt.virial_radius = 2.0;
    const Trajectory tr = evolve(psi0, k, opt);
    REQUIRE(tr.samples.size() > 3);
    const double m0 = tr.samples.front().mass;
    const double e0 = tr.samples.front().energy;
    for (const auto& s : tr.samples) {
        CHECK(std::fabs(s.mass - m0) <= 1e-10 * m0);
        CHECK(std::fabs(s.energy - e0) <= 1e-6 * std::max(1.0, std::fabs(e0)));
    }
}

TEST_CASE("strang step is time reversible") {
    TensorGrid g(2, 8.0, 32);
    const KernelPair k = build_kernels(g, 1.5, 0.5);
    TensorField psi0 = centered_gaussian(g, 1.2, 0.9);
    EvolveOptions opt;
    opt.horizon = 0.05;
    opt.dt = 1e-3;
    opt.adaptive = false;
    opt.virial_radius = 1.5;
    Trajectory fwd = evolve(psi0, k, opt);
    TensorField back = fwd.final_field;
    for (auto& z : back.v) z = std::conj(z);
    Trajectory rev = evolve(back, k, opt);
    for (auto& z : rev.final_field.v) z = std::conj(z);
    CHECK(l2_diff(rev.final_field, psi0) < 1e-10 * std::sqrt(mass(psi0)));
}

TEST_CASE("standing wave rotates at the multiplier frequency") {
    TensorGrid g(3, 12.0, 32);
    const KernelPair k = build_kernels(g, 1.5, 0.5);
    SolverParams p;
    p.max_iters = 8000;
    const GroundState s = minimize_global(g, k, 40.0, p);
    REQUIRE(s.tensor.has_value());

    EvolveOptions opt;
    opt.horizon = 0.2;
    opt.dt = 1e-3;
    opt.adaptive = false;
    opt.virial_radius = 2.5;
    const Trajectory tr = evolve(*s.tensor, k, opt);

    TensorField expect = *s.tensor;
    const cplx rot = std::polar(1.0, -s.lambda * opt.horizon);
    for (auto& z : expect.v) z *= rot;
    CHECK(l2_diff(tr.final_field, expect) <= 1e-4 * std::sqrt(s.c));
    CHECK(blowup_monitor(tr) == "stable");
}

TEST_CASE("virial observables pass the finite-difference oracle") {
    TensorGrid g(3, 10.0, 24);
    const KernelPair k = build_kernels(g, 2.5, 1.0);
    TensorField psi0 = centered_gaussian(g, 0.8, 1.1);
    EvolveOptions opt;
    opt.horizon = 0.04;
    opt.dt = 2e-4;
    opt.monitor_every = 1;
    opt.adaptive = false;
    opt.virial_radius = 2.4;
    const Trajectory tr = evolve(psi0, k, opt);
    REQUIRE(tr.samples.size() >= 100);

    // real initial data: the first derivative starts at zero
    CHECK(std::fabs(tr.samples.front().va1) < 1e-10 * std::max(1.0, tr.samples.front().va));

    double scale1 = 0.0, scale2 = 0.0;
    for (const auto& s : tr.samples) {
        scale1 = std::max(scale1, std::fabs(s.va1));
        scale2 = std::max(scale2, std::fabs(s.va2));
    }
    for (std::size_t i = 1; i + 1 < tr.samples.size(); ++i) {
        const auto &a = tr.samples[i - 1], &b = tr.samples[i], &c = tr.samples[i + 1];
        const double h = b.t - a.t;
        const double fd1 = (c.va - a.va) / (2 * h);
        const double fd2 = (c.va - 2 * b.va + a.va) / (h * h);
        CHECK(std::fabs(fd1 - b.va1) <= 1e-2 * std::max(scale1, 1e-10));
        CHECK(std::fabs(fd2 - b.va2) <= 1e-2 * std::max(scale2, 1.0));
    }

    // the field stays inside r < 2R, so the weight acts as r^2: Va'' = 16K
    for (const auto& s : tr.samples) {
        CHECK(std::fabs(s.va2 - 16.0 * s.kfun) <=
              2e-2 * std::max(std::fabs(16.0 * s.kfun), 1e-2 * std::max(scale2, 1.0)));
        CHECK(s.va > 0.0);
    }
}

TEST_CASE("k functional halves the fiber derivative") {
    TensorGrid g(3, 8.0, 24);
    const KernelPair k = build_kernels(g, 2.5, 1.0);
    TensorField u = random_mixture(g, 17);
    const EnergyBreakdown b = breakdown(u, k);
    CHECK(rel(k_functional(b), 0.5 * b.pohozaev()) < 1e-14);
    CHECK(rel(k_functional(u, k), 0.5 * b.pohozaev()) < 1e-12);
}

TEST_CASE("blow-up verdicts from synthetic trajectories") {
    TensorGrid g(1, 5.0, 8);
    auto make = [&](std::vector<double> kin, int halv, bool collapsed) {
        Trajectory tr{{}, TensorField{g, std::vector<cplx>(g.size(), cplx(1, 0))}, {}, halv,
                      collapsed};
        double t = 0.0;
        for (double kk : kin) {
            TrajectorySample s;
            s.t = t += 0.01;
            s.kinetic = kk;
            s.mass = 1.0;
            tr.samples.push_back(s);
        }
        return tr;
    };
    CHECK(blowup_monitor(make({1.0, 1.1, 1.2}, 0, false)) == "stable");
    CHECK(blowup_monitor(make({1.0, 5.0, 150.0}, 25, false)) == "blow-up");
    CHECK(blowup_monitor(make({1.0, 5.0, 150.0}, 0, false)) == "suspected");  // growth only
    CHECK(blowup_monitor(make({1.0, 1.1, 1.2}, 25, false)) == "suspected");  // halvings only
    CHECK(blowup_monitor(make({1.0, 1.1, 1.2}, 0, true)) == "blow-up");      // step collapse
}

TEST_CASE("scattering increments vanish for linear flows") {
    TensorGrid g(2, 8.0, 24);
    const KernelPair k = build_kernels(g, 1.5, 0.5);
    TensorField psi0 = centered_gaussian(g, 1.0, 0.4);
    EvolveOptions opt;
    opt.horizon = 0.3;
    opt.dt = 1e-2;
    opt.nonlinear = false;
    opt.adaptive = false;
    opt.store_fields_every = 5;
    opt.virial_radius = 1.5;
    const Trajectory tr = evolve(psi0, k, opt);
    REQUIRE(tr.snapshots.size() >= 3);
    const auto inc = scattering_diagnostic(tr.snapshots, 1.0);
    for (double v : inc) CHECK(v < 1e-10);
}

TEST_CASE("weight support must fit in the box") {
    TensorGrid g(2, 6.0, 16);
    const KernelPair k = build_kernels(g, 1.5, 0.5);
    TensorField psi0 = centered_gaussian(g, 1.0, 0.5);
    EvolveOptions opt;
    opt.virial_radius = 2.0;  // 4R = 8 > L = 6
    CHECK_THROWS_AS(evolve(psi0, k, opt), ConfigError);
}
