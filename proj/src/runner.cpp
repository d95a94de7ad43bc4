#include "hb/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "hb/checkpoint.hpp"
#include "hb/dynamics.hpp"
#include "hb/errors.hpp"
#include "hb/ground_state.hpp"
#include "hb/kernels.hpp"
#include "hb/rng.hpp"
#include "hb/thresholds.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace hb {

namespace {

std::string fmt17(double x) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", x);
    return b;
}

std::string timestamp_utc() {
    const std::time_t t = std::time(nullptr);
    char b[40];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(b, sizeof b, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return b;
}

std::string hex64(std::uint64_t v) {
    char b[20];
    std::snprintf(b, sizeof b, "%016llx", static_cast<unsigned long long>(v));
    return b;
}

// Tracks every file written so the manifest never misses one.
struct Artifacts {
    fs::path dir;
    std::vector<std::string> names;

    explicit Artifacts(const std::string& out) : dir(out) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
    }
    fs::path reg(const std::string& name) {
        names.push_back(name);
        return dir / name;
    }
    void write_text(const std::string& name, const std::string& text) {
        const fs::path p = reg(name);
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IoError("cannot write " + p.string());
        out << text;
    }
};

void write_scan_csv(Artifacts& art, const std::string& name, const std::string& cmd,
                    const std::vector<ScanRow>& rows) {
    std::ofstream out(art.reg(name), std::ios::binary);
    if (!out) throw IoError("cannot write " + name);
    out << "# hartree-balance " << cmd << " " << timestamp_utc() << "\n";
    out << "c,value,verdict,lambda,kinetic,restarts\n";
    for (const ScanRow& r : rows)
        out << fmt17(r.c) << ',' << fmt17(r.value) << ',' << r.verdict << ',' << fmt17(r.lambda)
            << ',' << fmt17(r.kinetic) << ',' << r.restarts << "\n";
}

ordered_json scan_rows_json(const std::vector<ScanRow>& rows) {
    ordered_json arr = ordered_json::array();
    for (const ScanRow& r : rows) {
        ordered_json j;
        j["c"] = r.c;
        j["value"] = r.value;
        j["verdict"] = r.verdict;
        j["lambda"] = r.lambda;
        j["kinetic"] = r.kinetic;
        j["restarts"] = r.restarts;
        if (!r.note.empty()) j["note"] = r.note;
        arr.push_back(std::move(j));
    }
    return arr;
}

void write_trajectory_csv(Artifacts& art, const std::string& cmd, const Trajectory& tr) {
    std::ofstream out(art.reg("trajectory.csv"), std::ios::binary);
    if (!out) throw IoError("cannot write trajectory.csv");
    out << "# hartree-balance " << cmd << " " << timestamp_utc() << "\n";
    out << "t,mass,energy,kinetic,Va,Va1,Va2,K,tail,dt\n";
    for (const TrajectorySample& s : tr.samples)
        out << fmt17(s.t) << ',' << fmt17(s.mass) << ',' << fmt17(s.energy) << ','
            << fmt17(s.kinetic) << ',' << fmt17(s.va) << ',' << fmt17(s.va1) << ','
            << fmt17(s.va2) << ',' << fmt17(s.kfun) << ',' << fmt17(s.tail) << ','
            << fmt17(s.dt) << "\n";
}

// Streams rows into a .partial file as they complete, so an interrupted scan
// still leaves data behind; the caller replaces it with the ordered CSV.
struct PartialCsv {
    fs::path path;
    std::ofstream out;
    PartialCsv(const fs::path& p, const std::string& cmd) : path(p), out(p, std::ios::binary) {
        if (!out) throw IoError("cannot write " + p.string());
        out << "# hartree-balance " << cmd << " (partial) " << timestamp_utc() << "\n";
        out << "c,value,verdict,lambda,kinetic,restarts\n";
    }
    RowSink sink() {
        return [this](const ScanRow& r) {
            out << fmt17(r.c) << ',' << fmt17(r.value) << ',' << r.verdict << ','
                << fmt17(r.lambda) << ',' << fmt17(r.kinetic) << ',' << r.restarts << std::endl;
        };
    }
    void discard() {
        out.close();
        std::error_code ec;
        fs::remove(path, ec);
    }
};

void save_state(Artifacts& art, const std::string& stem, const GroundState& s, double gamma1,
                double gamma2) {
    if (s.tensor)
        save_checkpoint((art.reg(stem + ".hbal")).string(), *s.tensor, gamma1, gamma2);
    else if (s.radial)
        save_checkpoint((art.reg(stem + ".hbal")).string(), *s.radial, gamma1, gamma2);
    art.write_text(stem + ".json", to_json(s) + "\n");
}

TensorField dynamics_initial(const RunConfig& cfg) {
    if (!cfg.io.checkpoint.empty()) {
        LoadedCheckpoint lc = load_checkpoint(cfg.io.checkpoint);
        if (!lc.tensor) throw DomainError("time evolution needs a tensor checkpoint");
        return std::move(*lc.tensor);
    }
    TensorGrid g(cfg.problem.dim, cfg.grid.half_extent, cfg.grid.n);
    const double width =
        cfg.solver.guess_width > 0.0 ? cfg.solver.guess_width : g.half_extent() / 6.0;
    TensorField u = centered_gaussian(g, width, cfg.solver.guess_amplitude);
    if (cfg.problem.c) normalize_mass(u, *cfg.problem.c);
    return u;
}

EvolveOptions evolve_options(const RunConfig& cfg) {
    EvolveOptions opt;
    opt.horizon = cfg.dynamics.horizon;
    opt.dt = cfg.dynamics.dt;
    opt.monitor_every = cfg.dynamics.monitor_every;
    opt.virial_radius = cfg.dynamics.virial_radius;
    opt.tail_radius = cfg.dynamics.tail_radius;
    opt.adaptive = cfg.dynamics.adaptive;
    return opt;
}

double gradient_growth(const Trajectory& tr) {
    double min_kin = std::numeric_limits<double>::infinity();
    double growth = 0.0;
    for (const TrajectorySample& s : tr.samples) {
        min_kin = std::min(min_kin, s.kinetic);
        if (min_kin > 0.0) growth = std::max(growth, std::sqrt(s.kinetic / min_kin));
    }
    return growth;
}

constexpr const char* kSignConvention =
    "Va' = -2 Im int (a'(r)/r) conj(psi) (x . grad psi) dx; "
    "K = kinetic/2 - gamma1*D1/8 + gamma2*D2/8 = Q/2, so the r^2-weight limit "
    "gives d2/dt2 Va = 8 Q = 16 K";

}  // namespace

bool verify_checkpoint(const std::string& path, std::string* report) {
    const LoadedCheckpoint lc = load_checkpoint(path);
    std::ostringstream out;
    std::vector<std::string> fails;

    double m = 0, energy = 0, q = 0, lam = 0, rel = 0, scale = 0;
    if (lc.kind == kCheckpointTensor && lc.gamma2 == 0.0) {
        const TensorField& u = *lc.tensor;
        m = mass(u);
        const TensorKernel kern = build_kernel(u.grid, lc.gamma1);
        const double a = gradient_sq_norm(u);
        const double d = d_gamma(u, kern);
        energy = 0.5 * a - 0.25 * d;
        q = a - 0.25 * lc.gamma1 * d;  // dilation balance of the single-kernel state
        lam = 1.0;
        scale = a + d;
        TensorField resid = choquard_residual(u, kern);
        rel = std::sqrt(mass(resid)) / h1_norm(u);
    } else if (lc.kind == kCheckpointTensor) {
        const TensorField& u = *lc.tensor;
        m = mass(u);
        const KernelPair k = build_kernels(u.grid, lc.gamma1, lc.gamma2);
        const EnergyBreakdown b = breakdown(u, k);
        energy = b.energy();
        q = b.pohozaev();
        lam = multiplier(b, m);
        scale = b.magnitude();
        TensorField resid = el_residual(u, k, lam);
        rel = std::sqrt(mass(resid)) / h1_norm(u);
    } else {
        const RadialField& u = *lc.radial;
        m = mass(u);
        if (lc.gamma2 == 0.0)
            throw IntegrationError("radial single-kernel checkpoints are not produced here");
        const RadialKernelPair k = build_radial_kernels(*u.grid, lc.gamma1, lc.gamma2);
        const EnergyBreakdown b = breakdown(u, k);
        energy = b.energy();
        q = b.pohozaev();
        lam = multiplier(b, m);
        scale = b.magnitude();
        RadialField resid = el_residual(u, k, lam);
        rel = std::sqrt(mass(resid)) / sobolev_norm(u, 1.0);
    }

    if (!(std::fabs(q) <= 1e-6 * scale))
        fails.push_back("Pohozaev balance |Q| above 1e-6 of its parts");
    if (!(rel <= 1e-5)) fails.push_back("stationarity residual above 1e-5");

    // Cross-check against the sidecar when one sits next to the checkpoint.
    fs::path sidecar = fs::path(path);
    sidecar.replace_extension(".json");
    if (fs::exists(sidecar)) {
        std::ifstream in(sidecar);
        try {
            const auto j = nlohmann::json::parse(in);
            if (j.contains("c")) {
                const double c_stored = j["c"].get<double>();
                if (std::fabs(m - c_stored) > 1e-8 * std::max(1.0, c_stored))
                    fails.push_back("mass differs from the sidecar record");
            }
            if (j.contains("E")) {
                const double e_stored = j["E"].get<double>();
                if (std::fabs(energy - e_stored) > 1e-6 * std::max(1.0, std::fabs(e_stored)))
                    fails.push_back("energy differs from the sidecar record");
            }
            if (j.contains("lambda")) {
                const double l_stored = j["lambda"].get<double>();
                if (std::fabs(lam - l_stored) > 1e-6 * std::max(1.0, std::fabs(l_stored)))
                    fails.push_back("multiplier differs from the sidecar record");
            }
        } catch (const nlohmann::json::exception&) {
            fails.push_back("sidecar JSON is unreadable");
        }
    }

    out << "checkpoint = " << path << "\n";
    out << "mass = " << fmt17(m) << "\n";
    out << "E = " << fmt17(energy) << "\n";
    out << "Q = " << fmt17(q) << "\n";
    out << "lambda = " << fmt17(lam) << "\n";
    out << "residual = " << fmt17(rel) << "\n";
    if (fails.empty()) {
        out << "PASS\n";
    } else {
        out << "FAIL:";
        for (const auto& f : fails) out << " " << f << ";";
        out << "\n";
    }
    if (report) *report = out.str();
    return fails.empty();
}

void run_command(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    validate_config(cfg);
    if (cfg.io.workers > 0)
        setenv("HB_THREADS", std::to_string(cfg.io.workers).c_str(), /*overwrite=*/0);

    Artifacts art(cfg.io.out);
    const auto& pb = cfg.problem;
    SolverParams params = cfg.solver;

    bool verify_passed = true;
    if (cfg.command == "choquard") {
        TensorGrid g(pb.dim, cfg.grid.half_extent, cfg.grid.n);
        GroundState s = solve_choquard(g, pb.gamma1, params);
        save_state(art, "choquard", s, pb.gamma1, 0.0);
    } else if (cfg.command == "ground-state") {
        if (cfg.grid.kind == "radial") {
            auto gp = std::make_shared<const RadialGrid>(pb.dim, cfg.grid.points, cfg.grid.r_max);
            const RadialKernelPair k = build_radial_kernels(*gp, pb.gamma1, pb.gamma2);
            GroundState s = pb.c ? minimize_pohozaev_radial(gp, k, *pb.c, params)
                                 : solve_zero_mass(gp, k, params);
            save_state(art, "ground_state", s, pb.gamma1, pb.gamma2);
        } else {
            TensorGrid g(pb.dim, cfg.grid.half_extent, cfg.grid.n);
            const KernelPair k = build_kernels(g, pb.gamma1, pb.gamma2);
            GroundState s = [&] {
                if (std::fabs(pb.gamma1 - 2.0) <= 1e-12) {
                    CriticalMass cm = critical_mass(g, pb.gamma2, params);
                    return minimize_critical(g, k, *pb.c, cm.c_tilde1, params, &*cm.q2.tensor);
                }
                return pb.gamma1 < 2.0 ? minimize_global(g, k, *pb.c, params)
                                       : minimize_pohozaev(g, k, *pb.c, params);
            }();
            save_state(art, "ground_state", s, pb.gamma1, pb.gamma2);
        }
    } else if (cfg.command == "scan-m") {
        TensorGrid g(pb.dim, cfg.grid.half_extent, cfg.grid.n);
        const KernelPair k = build_kernels(g, pb.gamma1, pb.gamma2);
        PartialCsv partial(art.dir / "scan_m.partial.csv", cfg.command);
        const std::vector<ScanRow> rows = scan_m(g, k, pb.c_list, params, partial.sink());
        partial.discard();
        write_scan_csv(art, "scan_m.csv", cfg.command, rows);
        ordered_json j;
        j["rows"] = scan_rows_json(rows);
        // Bracket the sign change when the scan straddles one.
        double c_zero = 0.0, c_neg = 0.0;
        for (const ScanRow& r : rows) {
            if (r.verdict == "vanishing" && std::fabs(r.value) <= 1e-6)
                c_zero = std::max(c_zero, r.c);
            if (r.verdict == "attained" && r.value < -1e-6 && (c_neg == 0.0 || r.c < c_neg))
                c_neg = r.c;
        }
        if (c_zero > 0.0 && c_neg > c_zero) {
            const Bracket b = threshold_bisection(
                [&](double c) {
                    const GroundState s = minimize_global(g, k, c, params);
                    return s.energy < -1e-6 ? std::string("negative") : std::string("zero");
                },
                c_zero, c_neg);
            j["bracket"] = {{"lo", b.lo},
                            {"hi", b.hi},
                            {"verdict_lo", b.verdict_lo},
                            {"verdict_hi", b.verdict_hi},
                            {"iterations", b.iterations}};
        }
        art.write_text("scan_m.json", j.dump(2) + "\n");
    } else if (cfg.command == "scan-gamma") {
        std::vector<ScanRow> rows;
        if (cfg.grid.kind == "radial") {
            auto gp = std::make_shared<const RadialGrid>(pb.dim, cfg.grid.points, cfg.grid.r_max);
            const RadialKernelPair k = build_radial_kernels(*gp, pb.gamma1, pb.gamma2);
            PartialCsv partial(art.dir / "scan_gamma.partial.csv", cfg.command);
            rows = scan_gamma_radial(gp, k, pb.c_list, params, partial.sink());
            partial.discard();
        } else {
            TensorGrid g(pb.dim, cfg.grid.half_extent, cfg.grid.n);
            const KernelPair k = build_kernels(g, pb.gamma1, pb.gamma2);
            PartialCsv partial(art.dir / "scan_gamma.partial.csv", cfg.command);
            rows = scan_gamma(g, k, pb.c_list, params, partial.sink());
            partial.discard();
        }
        write_scan_csv(art, "scan_gamma.csv", cfg.command, rows);
        ordered_json j;
        j["rows"] = scan_rows_json(rows);
        art.write_text("scan_gamma.json", j.dump(2) + "\n");
    } else if (cfg.command == "critical-mass") {
        TensorGrid g(pb.dim, cfg.grid.half_extent, cfg.grid.n);
        CriticalMass cm = critical_mass(g, pb.gamma2, params);
        save_state(art, "q2", cm.q2, 2.0, 0.0);
        const KernelPair k = build_kernels(g, 2.0, pb.gamma2);
        const CriticalProbe sub = critical_probe(g, k, 0.8 * cm.c_tilde1, cm.q2, params);
        const CriticalProbe super = critical_probe(g, k, 1.2 * cm.c_tilde1, cm.q2, params);
        ordered_json j;
        j["c_tilde1"] = cm.c_tilde1;
        j["q2_mass"] = cm.q2.c;
        auto probe_json = [](const CriticalProbe& pr) {
            ordered_json pj;
            pj["c"] = pr.row.c;
            pj["fiber_inf"] = pr.fiber_inf;
            pj["verdict"] = pr.row.verdict;
            if (pr.witness) {
                pj["witness"] = {{"t", pr.witness->t},
                                 {"energy", pr.witness->energy},
                                 {"kinetic", pr.witness->base.kinetic},
                                 {"d1", pr.witness->base.d1},
                                 {"d2", pr.witness->base.d2}};
            }
            return pj;
        };
        j["sub_probe"] = probe_json(sub);
        j["super_probe"] = probe_json(super);
        art.write_text("critical_mass.json", j.dump(2) + "\n");
    } else if (cfg.command == "evolve" || cfg.command == "virial" || cfg.command == "blowup") {
        TensorField psi0 = dynamics_initial(cfg);
        const KernelPair k = build_kernels(psi0.grid, pb.gamma1, pb.gamma2);
        const Trajectory tr = evolve(psi0, k, evolve_options(cfg));
        write_trajectory_csv(art, cfg.command, tr);
        save_checkpoint((art.reg("final.hbal")).string(), tr.final_field, pb.gamma1, pb.gamma2);
        ordered_json j;
        j["verdict"] = blowup_monitor(tr);
        j["halvings"] = tr.halvings;
        j["step_collapsed"] = tr.step_collapsed;
        j["samples"] = tr.samples.size();
        j["t_last"] = tr.samples.empty() ? 0.0 : tr.samples.back().t;
        if (cfg.command == "virial") {
            // Centered differences of Va against the reported Va', Va'' on
            // uniformly spaced sample triples.
            double rel1 = 0.0, rel2 = 0.0;
            int used = 0;
            for (std::size_t i = 1; i + 1 < tr.samples.size(); ++i) {
                const auto& a = tr.samples[i - 1];
                const auto& b = tr.samples[i];
                const auto& c = tr.samples[i + 1];
                const double h1 = b.t - a.t, h2 = c.t - b.t;
                if (std::fabs(h1 - h2) > 1e-9 * h1) continue;
                const double fd1 = (c.va - a.va) / (h1 + h2);
                const double fd2 = (c.va - 2.0 * b.va + a.va) / (h1 * h2);
                rel1 = std::max(rel1, std::fabs(fd1 - b.va1) / std::max(std::fabs(b.va1), 1e-10));
                rel2 = std::max(rel2, std::fabs(fd2 - b.va2) / std::max(std::fabs(b.va2), 1e-10));
                ++used;
            }
            j["fd_triples"] = used;
            j["max_rel_fd1"] = rel1;
            j["max_rel_fd2"] = rel2;
            j["sign_convention"] = kSignConvention;
        }
        if (cfg.command == "blowup") j["gradient_growth"] = gradient_growth(tr);
        art.write_text(cfg.command + std::string(".json"), j.dump(2) + "\n");
    } else if (cfg.command == "decay-fit") {
        const LoadedCheckpoint lc = load_checkpoint(cfg.io.checkpoint);
        if (!lc.radial) throw DomainError("decay fits read a radial checkpoint");
        const double g2 = lc.gamma2 > 0.0 ? lc.gamma2 : pb.gamma2;
        const DecayFit fit = decay_fit(*lc.radial, g2, cfg.fit.r_lo, cfg.fit.r_hi);
        ordered_json j;
        j["class"] = fit.klass;
        j["exponent"] = fit.exponent;
        j["rate"] = fit.rate;
        j["r2_algebraic"] = fit.r2_algebraic;
        j["r2_stretched"] = fit.r2_stretched;
        j["window"] = {cfg.fit.r_lo, cfg.fit.r_hi};
        art.write_text("decay_fit.json", j.dump(2) + "\n");
    } else if (cfg.command == "subadd") {
        TensorGrid g(pb.dim, cfg.grid.half_extent, cfg.grid.n);
        const KernelPair k = build_kernels(g, pb.gamma1, pb.gamma2);
        const SubadditivityReport rep =
            subadditivity_check(g, k, pb.c_list[0], pb.c_list[1], params);
        ordered_json j;
        j["rows"] = scan_rows_json({rep.row1, rep.row2, rep.joint});
        j["margin"] = rep.margin;
        j["strict"] = rep.strict;
        art.write_text("subadd.json", j.dump(2) + "\n");
    } else if (cfg.command == "verify") {
        std::string report;
        verify_passed = verify_checkpoint(cfg.io.checkpoint, &report);
        std::cout << report;
        ordered_json j;
        j["checkpoint"] = cfg.io.checkpoint;
        j["pass"] = verify_passed;
        j["report"] = report;
        art.write_text("verify.json", j.dump(2) + "\n");
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ordered_json manifest;
    manifest["command"] = cfg.command;
    manifest["config_hash"] = hex64(cfg.config_hash);
    manifest["versions"] = {{"tool", "0.1.0"}, {"checkpoint_format", kCheckpointVersion}};
    manifest["seed"] = cfg.io.seed;
    manifest["wall_seconds"] = wall;
    manifest["artifacts"] = art.names;
    art.write_text("manifest.json", manifest.dump(2) + "\n");

    if (!verify_passed) throw SolverError("checkpoint failed verification");
}

}  // namespace hb
