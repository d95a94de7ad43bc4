#include "hb/thresholds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "hb/errors.hpp"

namespace hb {

namespace {

int worker_count() {
    if (const char* env = std::getenv("HB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

template <class Job>
void run_rows(std::size_t count, Job&& job) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) job(i);
        });
    for (auto& t : pool) t.join();
}

ScanRow row_from_state(double c, const GroundState& s) {
    ScanRow r;
    r.c = c;
    r.value = s.energy;
    r.verdict = s.verdict;
    r.lambda = s.lambda;
    r.kinetic = s.parts.kinetic;
    r.restarts = s.restarts;
    return r;
}

ScanRow failed_row(double c, const char* what) {
    ScanRow r;
    r.c = c;
    r.verdict = "failed";
    r.note = what;
    return r;
}

std::vector<std::size_t> by_mass(const std::vector<ScanRow>& rows) {
    std::vector<std::size_t> idx(rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return rows[a].c < rows[b].c; });
    return idx;
}

void assert_nonincreasing(const std::vector<ScanRow>& rows, bool relative_slack) {
    bool have = false;
    double prev = 0.0;
    for (std::size_t i : by_mass(rows)) {
        if (rows[i].verdict == "failed") continue;
        const double v = rows[i].value;
        if (have) {
            const double slack = relative_slack
                                     ? 1e-3 * std::max({std::fabs(prev), std::fabs(v), 1e-6})
                                     : 1e-6;
            if (v > prev + slack)
                throw SolverError("scan lost monotonicity: value rose from " +
                                  std::to_string(prev) + " to " + std::to_string(v) +
                                  " with increasing mass");
        }
        prev = v;
        have = true;
    }
}

}  // namespace

std::vector<ScanRow> scan_m(const TensorGrid& g, const KernelPair& k,
                            const std::vector<double>& cs, const SolverParams& p,
                            const RowSink& on_row) {
    if (!(k.focusing.gamma < 2.0))
        throw DomainError("the global-minimum scan requires the subcritical regime gamma1 < 2");
    if (cs.empty()) throw ConfigError("scan requires at least one mass value");
    std::vector<ScanRow> rows(cs.size());
    std::mutex mu;
    run_rows(cs.size(), [&](std::size_t i) {
        try {
            rows[i] = row_from_state(cs[i], minimize_global(g, k, cs[i], p));
        } catch (const Error& e) {
            rows[i] = failed_row(cs[i], e.what());
        }
        if (on_row) {
            std::lock_guard<std::mutex> lk(mu);
            on_row(rows[i]);
        }
    });
    assert_nonincreasing(rows, false);
    return rows;
}

std::vector<ScanRow> scan_gamma(const TensorGrid& g, const KernelPair& k,
                                const std::vector<double>& cs, const SolverParams& p,
                                const RowSink& on_row) {
    const bool critical = std::fabs(k.focusing.gamma - 2.0) <= 1e-12;
    if (!critical && !(k.focusing.gamma > 2.0))
        throw DomainError(
            "the fiber-minimum scan requires gamma1 >= 2 (critical or supercritical)");
    if (cs.empty()) throw ConfigError("scan requires at least one mass value");

    double c_tilde1 = 0.0;
    GroundState q2;
    if (critical) {
        CriticalMass cm = critical_mass(g, k.defocusing.gamma, p);
        c_tilde1 = cm.c_tilde1;
        q2 = std::move(cm.q2);
    }

    std::vector<ScanRow> rows(cs.size());
    std::mutex mu;
    run_rows(cs.size(), [&](std::size_t i) {
        try {
            GroundState s = critical
                                ? minimize_critical(g, k, cs[i], c_tilde1, p, &*q2.tensor)
                                : minimize_pohozaev(g, k, cs[i], p);
            rows[i] = row_from_state(cs[i], s);
        } catch (const Error& e) {
            rows[i] = failed_row(cs[i], e.what());
        }
        if (on_row) {
            std::lock_guard<std::mutex> lk(mu);
            on_row(rows[i]);
        }
    });
    for (const ScanRow& r : rows)
        if (r.verdict == "attained" && !(r.value > 0.0))
            throw SolverError("fiber-minimum estimate is not positive at c = " +
                              std::to_string(r.c));
    assert_nonincreasing(rows, true);
    return rows;
}

std::vector<ScanRow> scan_gamma_radial(const std::shared_ptr<const RadialGrid>& g,
                                       const RadialKernelPair& k, const std::vector<double>& cs,
                                       const SolverParams& p, const RowSink& on_row) {
    if (!(k.focusing.gamma > 2.0))
        throw DomainError("the radial fiber-minimum scan requires gamma1 > 2");
    if (cs.empty()) throw ConfigError("scan requires at least one mass value");
    std::vector<ScanRow> rows(cs.size());
    std::mutex mu;
    run_rows(cs.size(), [&](std::size_t i) {
        try {
            rows[i] = row_from_state(cs[i], minimize_pohozaev_radial(g, k, cs[i], p));
        } catch (const Error& e) {
            rows[i] = failed_row(cs[i], e.what());
        }
        if (on_row) {
            std::lock_guard<std::mutex> lk(mu);
            on_row(rows[i]);
        }
    });
    for (const ScanRow& r : rows)
        if (r.verdict == "attained" && !(r.value > 0.0))
            throw SolverError("fiber-minimum estimate is not positive at c = " +
                              std::to_string(r.c));
    assert_nonincreasing(rows, true);
    return rows;
}

CriticalMass critical_mass(const TensorGrid& g, double gamma2, const SolverParams& p) {
    if (g.dim() < 3) throw DomainError("the critical mass is defined for N >= 3");
    if (!(gamma2 > 0.0 && gamma2 < 2.0))
        throw DomainError("the critical regime requires 0 < gamma2 < gamma1 = 2");
    SolverParams cp = p;
    cp.init_checkpoint.clear();
    CriticalMass out;
    out.q2 = solve_choquard(g, 2.0, cp);
    out.c_tilde1 = out.q2.c;
    return out;
}

double reduced_fiber_profile(const EnergyBreakdown& b, double t) {
    if (!(t > 0.0)) throw DomainError("fiber parameter t must be positive");
    return 2.0 * b.kinetic * std::pow(t, 2.0 - b.gamma2) -
           b.d1 * std::pow(t, b.gamma1 - b.gamma2) + b.d2;
}

std::optional<EnergyWitness> unbounded_below_witness(const EnergyBreakdown& b, double threshold) {
    for (int j = 0; j <= 60; ++j) {
        const double t = std::ldexp(1.0, j);
        const double e = fiber_energy(b, t);
        if (e < threshold) return EnergyWitness{t, e, b};
    }
    return std::nullopt;
}

CriticalProbe critical_probe(const TensorGrid& g, const KernelPair& k, double c,
                             const GroundState& q2, const SolverParams& p) {
    (void)p;
    if (std::fabs(k.focusing.gamma - 2.0) > 1e-12)
        throw DomainError("the critical probe requires gamma1 = 2");
    if (!q2.tensor) throw DomainError("the critical probe needs a tensor single-kernel state");
    TensorField w = *q2.tensor;
    if (!(w.grid == g)) throw DomainError("probe state lives on a different grid");
    normalize_mass(w, c);
    const EnergyBreakdown b = breakdown(w, k);

    double inf = std::numeric_limits<double>::infinity();
    const int samples = 1000;
    for (int j = 0; j < samples; ++j) {
        const double t =
            std::pow(10.0, -2.0 + 5.0 * static_cast<double>(j) / (samples - 1));
        inf = std::min(inf, fiber_energy(b, t));
    }

    CriticalProbe out{ScanRow{}, inf, std::move(w), unbounded_below_witness(b)};
    out.row.c = c;
    out.row.lambda = multiplier(b, c);
    out.row.kinetic = b.kinetic;
    if (out.witness) {
        out.row.verdict = "unbounded-below";
        out.row.value = -std::numeric_limits<double>::infinity();
    } else if (inf >= -1e-6) {
        out.row.verdict = "vanishing";
        out.row.value = inf;
    } else {
        out.row.verdict = "failed";
        out.row.note = "fiber dips below the vanishing tolerance without certifying -infinity";
        out.row.value = inf;
    }
    return out;
}

NegativeEnergyWitness negative_energy_witness(const TensorGrid& g, const KernelPair& k, double c,
                                              const SolverParams& p) {
    const double g1 = k.focusing.gamma, g2 = k.defocusing.gamma;
    if (!(g1 < 2.0))
        throw DomainError("the negative-energy witness requires the subcritical regime gamma1 < 2");
    if (!(c > 0.0)) throw DomainError("mass constraint c must be positive");
    SolverParams cp = p;
    cp.init_checkpoint.clear();
    GroundState q = solve_choquard(g, g1, cp);
    TensorField u = std::move(*q.tensor);
    normalize_mass(u, c);
    const EnergyBreakdown b = breakdown(u, k);
    const double beta = (g1 - g2) * b.d1 / (2.0 * (2.0 - g2) * b.kinetic);
    const double t0 = std::pow(beta, 1.0 / (2.0 - g1));
    const double f = b.d2 + 2.0 * b.kinetic * std::pow(beta, (2.0 - g2) / (2.0 - g1)) -
                     b.d1 * std::pow(beta, (g1 - g2) / (2.0 - g1));
    return NegativeEnergyWitness{std::move(u), t0, f, std::pow(t0, g2) / 4.0 * f};
}

SubadditivityReport subadditivity_check(const TensorGrid& g, const KernelPair& k, double c1,
                                        double c2, const SolverParams& p) {
    if (!(k.focusing.gamma < 2.0))
        throw DomainError("the subadditivity check requires the subcritical regime gamma1 < 2");
    if (!(c1 > 0.0 && c2 > 0.0)) throw DomainError("both masses must be positive");
    SubadditivityReport rep;
    rep.row1 = row_from_state(c1, minimize_global(g, k, c1, p));
    rep.row2 = row_from_state(c2, minimize_global(g, k, c2, p));
    rep.joint = row_from_state(c1 + c2, minimize_global(g, k, c1 + c2, p));
    rep.margin = rep.row1.value + rep.row2.value - rep.joint.value;
    if (rep.joint.value > rep.row1.value + rep.row2.value + 1e-6)
        throw SolverError("subadditivity violated: m(c1+c2) exceeds m(c1)+m(c2)");
    rep.strict =
        rep.row1.verdict == "attained" && rep.row2.verdict == "attained" && rep.margin > 0.0;
    return rep;
}

namespace {

struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    if (!(sxx > 0.0)) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (syy > 0.0) {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - (f.intercept + f.slope * x[i]);
            ss_res += e * e;
        }
        f.r2 = 1.0 - ss_res / syy;
    } else {
        f.r2 = 1.0;
    }
    return f;
}

}  // namespace

DecayFit decay_fit(const RadialField& u, double gamma2, double r_lo, double r_hi) {
    const RadialGrid& g = *u.grid;
    if (!(r_lo > 0.0 && r_lo < r_hi && r_hi <= g.r_max()))
        throw ConfigError("decay window must satisfy 0 < r_lo < r_hi <= R_max");
    const auto& rn = g.r();
    std::vector<double> xa, xs, y;
    const double kappa = 1.0 - 0.5 * gamma2;
    for (std::size_t i = 0; i < rn.size(); ++i) {
        if (rn[i] < r_lo || rn[i] > r_hi) continue;
        const double a = std::fabs(u.v[i]);
        if (!(a > 0.0)) continue;
        xa.push_back(std::log(rn[i]));
        xs.push_back(std::pow(rn[i], kappa));
        y.push_back(std::log(a));
    }
    if (y.size() < 8) throw ConfigError("decay window holds fewer than 8 usable samples");

    const LineFit fa = fit_line(xa, y);
    DecayFit out;
    out.exponent = fa.slope;
    out.r2_algebraic = fa.r2;
    if (std::fabs(kappa) > 1e-9) {
        const LineFit fs = fit_line(xs, y);
        out.rate = -fs.slope;
        out.r2_stretched = fs.r2;
    } else {
        out.r2_stretched = -std::numeric_limits<double>::infinity();
    }
    out.klass = out.r2_algebraic >= out.r2_stretched ? "algebraic" : "stretched-exponential";
    return out;
}

Bracket threshold_bisection(const std::function<std::string(double)>& classify, double lo,
                            double hi, int max_iters) {
    if (!(lo > 0.0 && lo < hi)) throw DomainError("bisection requires 0 < lo < hi");
    Bracket b;
    b.lo = lo;
    b.hi = hi;
    b.verdict_lo = classify(lo);
    b.verdict_hi = classify(hi);
    if (b.verdict_lo == b.verdict_hi)
        throw DomainError("bracket endpoints share the verdict '" + b.verdict_lo + "'");
    while (b.hi - b.lo > 0.01 * b.hi && b.iterations < max_iters) {
        const double mid = 0.5 * (b.lo + b.hi);
        const std::string vm = classify(mid);
        if (vm == b.verdict_lo) {
            b.lo = mid;
        } else {
            b.hi = mid;
            b.verdict_hi = vm;
        }
        ++b.iterations;
    }
    return b;
}

}  // namespace hb
