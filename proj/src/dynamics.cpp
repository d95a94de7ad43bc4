#include "hb/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "hb/errors.hpp"
#include "hb/fft.hpp"
#include "hb/reduce.hpp"

namespace hb {

namespace {

// Quintic smoothstep (two vanishing derivatives at both ends) and its
// derivatives / antiderivatives on [0, 1].
double smooth5(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }
double smooth5_d(double x) {
    const double y = x * (1.0 - x);
    return 30.0 * y * y;
}
double smooth5_dd(double x) { return 60.0 * x * (1.0 - 3.0 * x + 2.0 * x * x); }
double smooth5_i(double x) {
    const double x2 = x * x;
    return x2 * x2 * (2.5 + x * (-3.0 + x));
}
double smooth5_ii(double x) {
    const double x2 = x * x;
    return x2 * x2 * x * (0.5 + x * (-0.5 + x / 7.0));
}

}  // namespace

VirialWeight::VirialWeight(double radius) : r_(radius) {
    if (!(radius > 0.0)) throw ConfigError("virial weight radius must be positive");
}

double VirialWeight::a(double r) const {
    if (r <= 2.0 * r_) return r * r;
    if (r >= 4.0 * r_) return 104.0 * r_ * r_ / 7.0 + 6.0 * r_ * (r - 4.0 * r_);
    const double x = (4.0 * r_ - r) / (2.0 * r_);
    return r_ * r_ * (4.0 + 12.0 * (1.0 - x) - 8.0 * (1.0 / 7.0 - smooth5_ii(x)));
}

double VirialWeight::ap(double r) const {
    if (r <= 2.0 * r_) return 2.0 * r;
    if (r >= 4.0 * r_) return 6.0 * r_;
    const double x = (4.0 * r_ - r) / (2.0 * r_);
    return r_ * (6.0 - 4.0 * smooth5_i(x));
}

double VirialWeight::app(double r) const {
    if (r <= 2.0 * r_) return 2.0;
    if (r >= 4.0 * r_) return 0.0;
    return 2.0 * smooth5((4.0 * r_ - r) / (2.0 * r_));
}

double VirialWeight::appp(double r) const {
    if (r <= 2.0 * r_ || r >= 4.0 * r_) return 0.0;
    return -smooth5_d((4.0 * r_ - r) / (2.0 * r_)) / r_;
}

double VirialWeight::apppp(double r) const {
    if (r <= 2.0 * r_ || r >= 4.0 * r_) return 0.0;
    return smooth5_dd((4.0 * r_ - r) / (2.0 * r_)) / (2.0 * r_ * r_);
}

double VirialWeight::bilaplacian(int dim, double r) const {
    if (r <= 2.0 * r_) return 0.0;  // a = r^2 there, biharmonic-free
    const double nm1 = dim - 1.0;
    return apppp(r) + 2.0 * nm1 / r * appp(r) +
           nm1 * (dim - 3.0) / (r * r) * (app(r) - ap(r) / r);
}

double k_functional(const EnergyBreakdown& b) {
    return 0.5 * b.kinetic - b.gamma1 / 8.0 * b.d1 + b.gamma2 / 8.0 * b.d2;
}

double k_functional(const TensorField& u, const KernelPair& k) {
    return k_functional(breakdown(u, k));
}

namespace {

void pair_convolve(const TensorGrid& g, const KernelPair& k, const std::vector<double>& rho,
                   std::vector<double>& c1, std::vector<double>& c2, std::vector<cplx>& s1,
                   std::vector<cplx>& s2) {
    const Fft& fft = fft_for(g);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.size());
    s1.resize(n);
    c1.resize(n);
    c2.resize(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) s1[i] = cplx(rho[i], 0.0);
    fft.forward(s1);
    s2 = s1;
    apply_multiplier(k.focusing, s1);
    apply_multiplier(k.defocusing, s2);
    fft.inverse(s1);
    fft.inverse(s2);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        c1[i] = s1[i].real();
        c2[i] = s2[i].real();
    }
}

}  // namespace

VirialObservables virial_observables(const TensorField& psi, const KernelPair& k,
                                     const VirialWeight& w) {
    const TensorGrid& g = psi.grid;
    if (k.focusing.mult.size() != g.size() || k.defocusing.mult.size() != g.size())
        throw DomainError("kernel pair was built for a different grid");
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.size());
    const int dim = g.dim();
    const double vol = g.cell_volume();
    const Fft& fft = fft_for(g);
    const double inner = 2.0 * w.radius();

    std::vector<double> a_tab(n), g1_tab(n), wq_tab(n), bil_tab(n);
    std::vector<std::vector<double>> coord(dim, std::vector<double>(n));
    std::vector<std::vector<double>> kax(dim, std::vector<double>(n));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::array<int, 3> idx = g.unflatten(static_cast<std::size_t>(i));
        const double r = std::sqrt(g.r_sq(static_cast<std::size_t>(i)));
        a_tab[i] = w.a(r);
        if (r <= inner) {
            g1_tab[i] = 2.0;
            wq_tab[i] = 0.0;
            bil_tab[i] = 0.0;
        } else {
            g1_tab[i] = w.ap(r) / r;
            wq_tab[i] = w.app(r) / (r * r) - w.ap(r) / (r * r * r);
            bil_tab[i] = w.bilaplacian(dim, r);
        }
        for (int d = 0; d < dim; ++d) {
            coord[d][i] = g.coord(idx[d]);
            kax[d][i] = g.wavenumber(idx[d]);
        }
    }

    std::vector<double> rho = density(psi);
    VirialObservables out;
    out.va = vol * sum_indexed(g.size(), [&](std::size_t i) { return a_tab[i] * rho[i]; });

    // Spectral gradient of psi, axis by axis, and the radial derivative x.grad.
    std::vector<cplx> hat = psi.v;
    fft.forward(hat);
    std::vector<cplx> xdg(n, cplx(0.0, 0.0));
    std::vector<double> grad_sq(n, 0.0);
    std::vector<cplx> tmp(n);
    for (int d = 0; d < dim; ++d) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) tmp[i] = hat[i] * cplx(0.0, kax[d][i]);
        fft.inverse(tmp);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            xdg[i] += coord[d][i] * tmp[i];
            grad_sq[i] += std::norm(tmp[i]);
        }
    }

    out.va1 = -2.0 * vol * sum_indexed(g.size(), [&](std::size_t i) {
        return g1_tab[i] * std::imag(std::conj(psi.v[i]) * xdg[i]);
    });

    // Nonlocal terms: I_gamma = -(2/gamma) * int (a'/r) rho (x . grad(K*rho)).
    std::vector<cplx> rho_hat(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) rho_hat[i] = cplx(rho[i], 0.0);
    fft.forward(rho_hat);
    std::array<double, 2> iterm{0.0, 0.0};
    const TensorKernel* kk[2] = {&k.focusing, &k.defocusing};
    std::vector<cplx> spec(n);
    std::vector<double> xdgc(n);
    for (int j = 0; j < 2; ++j) {
        spec = rho_hat;
        apply_multiplier(*kk[j], spec);
        std::fill(xdgc.begin(), xdgc.end(), 0.0);
        for (int d = 0; d < dim; ++d) {
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t i = 0; i < n; ++i) tmp[i] = spec[i] * cplx(0.0, kax[d][i]);
            fft.inverse(tmp);
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t i = 0; i < n; ++i) xdgc[i] += coord[d][i] * tmp[i].real();
        }
        iterm[j] = -2.0 / kk[j]->gamma * vol * sum_indexed(g.size(), [&](std::size_t i) {
            return g1_tab[i] * rho[i] * xdgc[i];
        });
    }

    out.va2 = vol * sum_indexed(g.size(),
                                [&](std::size_t i) {
                                    return 4.0 * g1_tab[i] * grad_sq[i] +
                                           4.0 * wq_tab[i] * std::norm(xdg[i]) -
                                           bil_tab[i] * rho[i];
                                }) -
              k.focusing.gamma * iterm[0] + k.defocusing.gamma * iterm[1];
    return out;
}

Trajectory evolve(const TensorField& psi0, const KernelPair& k, const EvolveOptions& opt) {
    const TensorGrid& g = psi0.grid;
    if (!(opt.horizon > 0.0)) throw ConfigError("evolution horizon must be positive");
    if (!(opt.dt > 0.0)) throw ConfigError("time step must be positive");
    if (opt.monitor_every < 1) throw ConfigError("monitor stride must be at least 1");
    if (k.focusing.mult.size() != g.size() || k.defocusing.mult.size() != g.size())
        throw DomainError("kernel pair was built for a different grid");
    const double L = g.half_extent();
    const double rv = opt.virial_radius > 0.0 ? opt.virial_radius : 0.2 * L;
    if (!(4.0 * rv < L))
        throw ConfigError("virial weight must flatten inside the box: need 4*radius < half_extent");
    const VirialWeight vw(rv);
    const double tail_r = opt.tail_radius > 0.0 ? opt.tail_radius : 0.5 * L;

    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.size());
    const double vol = g.cell_volume();
    const Fft& fft = fft_for(g);
    const double g1 = k.focusing.gamma, g2 = k.defocusing.gamma;

    std::vector<double> ksq(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) ksq[i] = g.k_sq(static_cast<std::size_t>(i));

    std::vector<cplx> lin(n);
    double lin_dt = -1.0;
    auto build_lin = [&](double dt) {
        if (dt == lin_dt) return;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) lin[i] = std::polar(1.0, dt * ksq[i]);
        lin_dt = dt;
    };

    std::vector<double> rho(n), conv1, conv2;
    std::vector<cplx> s1, s2, cand, spec;

    struct StepScalars {
        double kin = 0, d1 = 0, d2 = 0, mass = 0, energy = 0;
    };
    auto measure = [&](const std::vector<cplx>& v) {
        StepScalars s;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) rho[i] = std::norm(v[i]);
        pair_convolve(g, k, rho, conv1, conv2, s1, s2);
        s.d1 = vol * sum_indexed(g.size(), [&](std::size_t i) { return rho[i] * conv1[i]; });
        s.d2 = vol * sum_indexed(g.size(), [&](std::size_t i) { return rho[i] * conv2[i]; });
        s.mass = vol * sum(rho.data(), rho.size());
        spec = v;
        fft.forward(spec);
        const double scale = vol / static_cast<double>(g.size());
        s.kin = scale *
                sum_indexed(g.size(), [&](std::size_t i) { return ksq[i] * std::norm(spec[i]); });
        s.energy = 0.5 * s.kin - 0.25 * s.d1 + 0.25 * s.d2;
        return s;
    };

    // One Strang step on cand (copied from psi): half nonlinear phase, full
    // linear flight, half nonlinear phase.  The density is invariant under the
    // phase factors, so the convolutions of the second half also serve the
    // post-step diagnostics.
    auto trial = [&](const std::vector<cplx>& psi, double dt) {
        cand = psi;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) rho[i] = std::norm(cand[i]);
        pair_convolve(g, k, rho, conv1, conv2, s1, s2);
        if (opt.nonlinear) {
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t i = 0; i < n; ++i)
                cand[i] *= std::polar(1.0, -0.5 * dt * (conv1[i] - conv2[i]));
        }
        build_lin(dt);
        fft.forward(cand);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) cand[i] *= lin[i];
        fft.inverse(cand);
        StepScalars s;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) rho[i] = std::norm(cand[i]);
        pair_convolve(g, k, rho, conv1, conv2, s1, s2);
        s.d1 = vol * sum_indexed(g.size(), [&](std::size_t i) { return rho[i] * conv1[i]; });
        s.d2 = vol * sum_indexed(g.size(), [&](std::size_t i) { return rho[i] * conv2[i]; });
        s.mass = vol * sum(rho.data(), rho.size());
        if (opt.nonlinear) {
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t i = 0; i < n; ++i)
                cand[i] *= std::polar(1.0, -0.5 * dt * (conv1[i] - conv2[i]));
        }
        spec = cand;
        fft.forward(spec);
        const double scale = vol / static_cast<double>(g.size());
        s.kin = scale *
                sum_indexed(g.size(), [&](std::size_t i) { return ksq[i] * std::norm(spec[i]); });
        s.energy = 0.5 * s.kin - 0.25 * s.d1 + 0.25 * s.d2;
        return s;
    };

    std::vector<cplx> psi = psi0.v;
    Trajectory tr{{}, TensorField{g, psi}, {}, 0, false};
    StepScalars cur = measure(psi);
    if (!std::isfinite(cur.energy) || !std::isfinite(cur.mass))
        throw IntegrationError("initial state is not finite");
    const double mass0 = cur.mass;
    const double escale = std::max(std::abs(cur.energy), 1e-10);

    auto sample = [&](double t, double dt, const StepScalars& s) {
        TensorField f{g, psi};
        const VirialObservables vo = virial_observables(f, k, vw);
        TrajectorySample row;
        row.t = t;
        row.mass = s.mass;
        row.energy = s.energy;
        row.kinetic = s.kin;
        row.va = vo.va;
        row.va1 = vo.va1;
        row.va2 = vo.va2;
        row.kfun = 0.5 * s.kin - g1 / 8.0 * s.d1 + g2 / 8.0 * s.d2;
        row.tail = mass_tail(f, tail_r);
        row.dt = dt;
        tr.samples.push_back(row);
    };

    sample(0.0, opt.dt, cur);
    if (opt.store_fields_every > 0) tr.snapshots.emplace_back(0.0, TensorField{g, psi});

    const double dt0 = opt.dt;
    double dt_cur = opt.dt;
    double t = 0.0;
    long accepted = 0;
    long trials = 0;
    const long max_trials =
        std::max<long>(20000, 20 * static_cast<long>(std::ceil(opt.horizon / dt0)));
    const double t_end = opt.horizon * (1.0 - 1e-12);

    while (t < t_end) {
        if (++trials > max_trials) {
            if (tr.halvings >= 20) {
                tr.step_collapsed = true;
                break;
            }
            throw IntegrationError("time-step budget exhausted before the horizon");
        }
        const double dt = std::min(dt_cur, opt.horizon - t);
        const StepScalars s = trial(psi, dt);
        const bool finite = std::isfinite(s.energy) && std::isfinite(s.mass);
        const bool jump = finite && std::abs(s.energy - cur.energy) > 1e-4 * escale;
        if (!finite || jump) {
            if (!opt.adaptive) {
                if (!finite) throw IntegrationError("non-finite state during time stepping");
                // fixed-step runs tolerate energy jumps
            } else {
                dt_cur *= 0.5;
                ++tr.halvings;
                if (dt_cur < dt0 * std::ldexp(1.0, -40)) {
                    tr.step_collapsed = true;
                    break;
                }
                continue;
            }
        }
        psi.swap(cand);
        cur = s;
        t += dt;
        ++accepted;
        if (std::abs(cur.mass - mass0) > 1e-6 * mass0)
            throw IntegrationError("mass drift beyond tolerance during time stepping");
        const bool last = t >= t_end;
        if (accepted % opt.monitor_every == 0 || last) sample(t, dt, cur);
        if (opt.store_fields_every > 0 && (accepted % opt.store_fields_every == 0 || last))
            tr.snapshots.emplace_back(t, TensorField{g, psi});
    }

    tr.final_field = TensorField{g, psi};
    return tr;
}

std::string blowup_monitor(const Trajectory& tr, double grad_growth_factor) {
    bool grown = false;
    double min_kin = std::numeric_limits<double>::infinity();
    double h1_0 = 0.0;
    bool huge = false;
    for (std::size_t j = 0; j < tr.samples.size(); ++j) {
        const TrajectorySample& s = tr.samples[j];
        min_kin = std::min(min_kin, s.kinetic);
        if (s.kinetic >= grad_growth_factor * grad_growth_factor * min_kin && min_kin > 0.0)
            grown = true;
        const double h1 = std::sqrt(s.mass + s.kinetic);
        if (j == 0)
            h1_0 = h1;
        else if (h1 > 1e6 * h1_0)
            huge = true;
    }
    const bool halved = tr.halvings >= 20 || tr.step_collapsed;
    if ((grown && halved) || huge || tr.step_collapsed) return "blow-up";
    if (grown || halved) return "suspected";
    return "stable";
}

std::vector<double> scattering_diagnostic(
    const std::vector<std::pair<double, TensorField>>& snapshots, double s) {
    if (s < 0.0) throw DomainError("scattering diagnostic requires regularity order s >= 0");
    std::vector<double> inc;
    if (snapshots.size() < 2) return inc;
    const TensorGrid& g = snapshots.front().second.grid;
    for (const auto& sn : snapshots)
        if (!(sn.second.grid == g)) throw DomainError("snapshots live on different grids");
    const Fft& fft = fft_for(g);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.size());
    const double scale = g.cell_volume() / static_cast<double>(g.size());

    std::vector<double> ksq(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) ksq[i] = g.k_sq(static_cast<std::size_t>(i));

    auto pulled_back = [&](const std::pair<double, TensorField>& sn) {
        std::vector<cplx> hat = sn.second.v;
        fft.forward(hat);
        const double t = sn.first;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) hat[i] *= std::polar(1.0, -t * ksq[i]);
        return hat;
    };

    std::vector<cplx> prev = pulled_back(snapshots[0]);
    for (std::size_t j = 1; j < snapshots.size(); ++j) {
        std::vector<cplx> curv = pulled_back(snapshots[j]);
        const double sq = scale * sum_indexed(g.size(), [&](std::size_t i) {
            return std::pow(1.0 + ksq[i], s) * std::norm(curv[i] - prev[i]);
        });
        inc.push_back(std::sqrt(sq));
        prev.swap(curv);
    }
    return inc;
}

}  // namespace hb
