#include "hb/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hb/errors.hpp"

namespace hb {

namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"run", {"command"}},
    {"problem", {"dim", "gamma1", "gamma2", "c", "c_list"}},
    {"grid", {"kind", "n", "half_extent", "points", "r_max"}},
    {"solver",
     {"step", "backtrack", "max_iters", "tolerance", "guess_width", "guess_amplitude",
      "init_checkpoint"}},
    {"dynamics", {"horizon", "dt", "monitor_every", "virial_radius", "tail_radius", "adaptive"}},
    {"fit", {"r_lo", "r_hi"}},
    {"io", {"out", "checkpoint", "seed", "workers"}},
};

const std::set<std::string> kCommands = {
    "choquard", "ground-state", "scan-m",    "scan-gamma", "critical-mass", "evolve",
    "virial",   "blowup",       "decay-fit", "subadd",     "verify",
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Collector {
    std::vector<std::string> violations;
    void add(const std::string& v) { violations.push_back(v); }
    void raise_if_any(const char* what) const {
        if (violations.empty()) return;
        std::string msg = what;
        for (const auto& v : violations) msg += "\n  - " + v;
        throw ConfigError(msg);
    }
};

double parse_double(const std::string& key, const std::string& val, Collector& errs) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return d;
    } catch (const std::exception&) {
        errs.add(key + ": cannot parse '" + val + "' as a number");
        return 0.0;
    }
}

long parse_int(const std::string& key, const std::string& val, Collector& errs) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return v;
    } catch (const std::exception&) {
        errs.add(key + ": cannot parse '" + val + "' as an integer");
        return 0;
    }
}

bool parse_bool(const std::string& key, const std::string& val, Collector& errs) {
    if (val == "true" || val == "1") return true;
    if (val == "false" || val == "0") return false;
    errs.add(key + ": cannot parse '" + val + "' as a boolean (true/false)");
    return false;
}

std::vector<double> parse_list(const std::string& key, const std::string& val, Collector& errs) {
    std::vector<double> out;
    std::stringstream ss(val);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            errs.add(key + ": empty entry in list '" + val + "'");
            continue;
        }
        out.push_back(parse_double(key, item, errs));
    }
    if (out.empty()) errs.add(key + ": list '" + val + "' holds no values");
    return out;
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

RunConfig parse_config(const std::string& text) {
    Collector errs;
    std::map<std::string, std::string> kv;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                errs.add("line " + std::to_string(lineno) + ": unterminated section header");
                continue;
            }
            section = trim(t.substr(1, t.size() - 2));
            if (!kKnownKeys.count(section))
                errs.add("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            errs.add("line " + std::to_string(lineno) + ": expected key = value, got '" + t + "'");
            continue;
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (section.empty()) {
            errs.add("line " + std::to_string(lineno) + ": key '" + key +
                     "' appears before any section header");
            continue;
        }
        const auto sec = kKnownKeys.find(section);
        if (sec != kKnownKeys.end() && !sec->second.count(key)) {
            errs.add("line " + std::to_string(lineno) + ": unknown key '" + key +
                     "' in section [" + section + "]");
            continue;
        }
        const std::string full = section + "." + key;
        if (kv.count(full)) {
            errs.add("line " + std::to_string(lineno) + ": duplicate key '" + full + "'");
            continue;
        }
        kv[full] = val;
    }

    RunConfig cfg;
    cfg.config_hash = fnv1a(text);
    auto take = [&](const char* full) -> std::optional<std::string> {
        auto it = kv.find(full);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };

    if (auto v = take("run.command")) {
        if (!kCommands.count(*v))
            errs.add("run.command: unknown command '" + *v + "'");
        else
            cfg.command = *v;
    }
    if (auto v = take("problem.dim")) cfg.problem.dim = static_cast<int>(parse_int("problem.dim", *v, errs));
    if (auto v = take("problem.gamma1")) cfg.problem.gamma1 = parse_double("problem.gamma1", *v, errs);
    if (auto v = take("problem.gamma2")) cfg.problem.gamma2 = parse_double("problem.gamma2", *v, errs);
    if (auto v = take("problem.c")) cfg.problem.c = parse_double("problem.c", *v, errs);
    if (auto v = take("problem.c_list")) cfg.problem.c_list = parse_list("problem.c_list", *v, errs);
    if (auto v = take("grid.kind")) {
        if (*v != "tensor" && *v != "radial")
            errs.add("grid.kind: must be 'tensor' or 'radial', got '" + *v + "'");
        else
            cfg.grid.kind = *v;
    }
    if (auto v = take("grid.n")) cfg.grid.n = static_cast<int>(parse_int("grid.n", *v, errs));
    if (auto v = take("grid.half_extent")) cfg.grid.half_extent = parse_double("grid.half_extent", *v, errs);
    if (auto v = take("grid.points")) cfg.grid.points = static_cast<int>(parse_int("grid.points", *v, errs));
    if (auto v = take("grid.r_max")) cfg.grid.r_max = parse_double("grid.r_max", *v, errs);
    if (auto v = take("solver.step")) cfg.solver.step = parse_double("solver.step", *v, errs);
    if (auto v = take("solver.backtrack")) cfg.solver.backtrack = parse_double("solver.backtrack", *v, errs);
    if (auto v = take("solver.max_iters"))
        cfg.solver.max_iters = static_cast<int>(parse_int("solver.max_iters", *v, errs));
    if (auto v = take("solver.tolerance")) cfg.solver.tolerance = parse_double("solver.tolerance", *v, errs);
    if (auto v = take("solver.guess_width")) cfg.solver.guess_width = parse_double("solver.guess_width", *v, errs);
    if (auto v = take("solver.guess_amplitude"))
        cfg.solver.guess_amplitude = parse_double("solver.guess_amplitude", *v, errs);
    if (auto v = take("solver.init_checkpoint")) cfg.solver.init_checkpoint = *v;
    if (auto v = take("dynamics.horizon")) cfg.dynamics.horizon = parse_double("dynamics.horizon", *v, errs);
    if (auto v = take("dynamics.dt")) cfg.dynamics.dt = parse_double("dynamics.dt", *v, errs);
    if (auto v = take("dynamics.monitor_every"))
        cfg.dynamics.monitor_every = static_cast<int>(parse_int("dynamics.monitor_every", *v, errs));
    if (auto v = take("dynamics.virial_radius"))
        cfg.dynamics.virial_radius = parse_double("dynamics.virial_radius", *v, errs);
    if (auto v = take("dynamics.tail_radius"))
        cfg.dynamics.tail_radius = parse_double("dynamics.tail_radius", *v, errs);
    if (auto v = take("dynamics.adaptive")) cfg.dynamics.adaptive = parse_bool("dynamics.adaptive", *v, errs);
    if (auto v = take("fit.r_lo")) cfg.fit.r_lo = parse_double("fit.r_lo", *v, errs);
    if (auto v = take("fit.r_hi")) cfg.fit.r_hi = parse_double("fit.r_hi", *v, errs);
    if (auto v = take("io.out")) cfg.io.out = *v;
    if (auto v = take("io.checkpoint")) cfg.io.checkpoint = *v;
    if (auto v = take("io.seed")) {
        const long s = parse_int("io.seed", *v, errs);
        if (s < 0)
            errs.add("io.seed: must be nonnegative");
        else
            cfg.io.seed = static_cast<std::uint64_t>(s);
    }
    if (auto v = take("io.workers")) cfg.io.workers = static_cast<int>(parse_int("io.workers", *v, errs));

    errs.raise_if_any("configuration is not parseable:");
    cfg.solver.seed = cfg.io.seed;
    return cfg;
}

namespace {

void check_pair_window(const RunConfig& cfg, Collector& errs) {
    const double cap = std::min(static_cast<double>(cfg.problem.dim), 4.0);
    if (!(cfg.problem.gamma2 > 0.0 && cfg.problem.gamma2 < cfg.problem.gamma1 &&
          cfg.problem.gamma1 < cap))
        errs.add("problem: requires 0<gamma2<gamma1<min{N,4}; got gamma1 = " +
                 std::to_string(cfg.problem.gamma1) + ", gamma2 = " +
                 std::to_string(cfg.problem.gamma2) + ", N = " + std::to_string(cfg.problem.dim));
}

void check_tensor_grid(const RunConfig& cfg, Collector& errs) {
    if (cfg.grid.kind != "tensor") errs.add("grid.kind: this command runs on a tensor grid");
    if (cfg.problem.dim < 1 || cfg.problem.dim > 3)
        errs.add("problem.dim: tensor grids support N in {1, 2, 3}");
    if (cfg.grid.n < 8 || cfg.grid.n % 2 != 0) errs.add("grid.n: need an even n >= 8");
    if (!(cfg.grid.half_extent > 0.0)) errs.add("grid.half_extent: must be positive");
}

void check_radial_grid(const RunConfig& cfg, Collector& errs) {
    if (cfg.problem.dim < 3) errs.add("problem.dim: radial grids require N >= 3");
    if (cfg.grid.points < 16 || cfg.grid.points % 8 != 0)
        errs.add("grid.points: need a multiple of 8, at least 16");
    if (!(cfg.grid.r_max > 0.0)) errs.add("grid.r_max: must be positive");
}

void check_solver(const RunConfig& cfg, Collector& errs) {
    const SolverParams& p = cfg.solver;
    if (!(p.step > 0.0)) errs.add("solver.step: must be positive");
    if (!(p.backtrack > 0.0 && p.backtrack < 1.0)) errs.add("solver.backtrack: must lie in (0, 1)");
    if (p.max_iters < 1) errs.add("solver.max_iters: must be at least 1");
    if (!(p.tolerance > 0.0)) errs.add("solver.tolerance: must be positive");
    if (p.guess_width < 0.0) errs.add("solver.guess_width: must be nonnegative");
    if (p.guess_amplitude < 0.0) errs.add("solver.guess_amplitude: must be nonnegative");
}

void check_dynamics(const RunConfig& cfg, Collector& errs) {
    const DynamicsBlock& d = cfg.dynamics;
    if (!(d.horizon > 0.0)) errs.add("dynamics.horizon: must be positive");
    if (!(d.dt > 0.0 && d.dt <= d.horizon)) errs.add("dynamics.dt: must lie in (0, horizon]");
    if (d.monitor_every < 1) errs.add("dynamics.monitor_every: must be at least 1");
    if (d.virial_radius < 0.0) errs.add("dynamics.virial_radius: must be nonnegative");
    if (d.virial_radius > 0.0 && !(4.0 * d.virial_radius < cfg.grid.half_extent))
        errs.add("dynamics.virial_radius: weight must flatten inside the box (4*R < half_extent)");
    if (d.tail_radius < 0.0) errs.add("dynamics.tail_radius: must be nonnegative");
}

void check_positive_masses(const std::vector<double>& cs, const char* key, Collector& errs) {
    if (cs.empty()) {
        errs.add(std::string(key) + ": this command needs a mass list");
        return;
    }
    for (double c : cs)
        if (!(c > 0.0)) errs.add(std::string(key) + ": every mass must be positive");
}

}  // namespace

void validate_config(const RunConfig& cfg) {
    Collector errs;
    if (cfg.command.empty()) {
        errs.add("run.command: no command given (config key or CLI argument)");
        errs.raise_if_any("configuration is invalid:");
    }
    if (!kCommands.count(cfg.command)) {
        errs.add("run.command: unknown command '" + cfg.command + "'");
        errs.raise_if_any("configuration is invalid:");
    }
    check_solver(cfg, errs);
    if (cfg.io.workers < 0) errs.add("io.workers: must be nonnegative");

    const std::string& cmd = cfg.command;
    const double cap = std::min(static_cast<double>(cfg.problem.dim), 4.0);
    if (cmd == "choquard") {
        check_tensor_grid(cfg, errs);
        if (!(cfg.problem.gamma1 > 0.0 && cfg.problem.gamma1 < cap))
            errs.add("problem.gamma1: requires 0<gamma<min{N,4}");
        if (cfg.problem.gamma2 != 0.0)
            errs.add("problem.gamma2: single-kernel runs take one exponent; leave gamma2 unset");
    } else if (cmd == "ground-state") {
        if (cfg.grid.kind == "radial") {
            check_radial_grid(cfg, errs);
            check_pair_window(cfg, errs);
            if (!(cfg.problem.gamma1 > 2.0))
                errs.add("problem.gamma1: radial solvers need the supercritical window gamma1 > 2");
            if (cfg.problem.c && !(*cfg.problem.c > 0.0))
                errs.add("problem.c: must be positive when given");
        } else {
            check_tensor_grid(cfg, errs);
            check_pair_window(cfg, errs);
            if (!cfg.problem.c || !(*cfg.problem.c > 0.0))
                errs.add("problem.c: tensor ground states need a positive mass");
        }
    } else if (cmd == "scan-m") {
        check_tensor_grid(cfg, errs);
        check_pair_window(cfg, errs);
        if (!(cfg.problem.gamma1 < 2.0))
            errs.add("problem.gamma1: the global-minimum scan requires gamma1 < 2");
        check_positive_masses(cfg.problem.c_list, "problem.c_list", errs);
    } else if (cmd == "scan-gamma") {
        check_pair_window(cfg, errs);
        if (cfg.grid.kind == "radial") {
            check_radial_grid(cfg, errs);
            if (!(cfg.problem.gamma1 > 2.0))
                errs.add("problem.gamma1: the radial scan requires gamma1 > 2");
        } else {
            check_tensor_grid(cfg, errs);
            if (!(cfg.problem.gamma1 >= 2.0))
                errs.add("problem.gamma1: the fiber-minimum scan requires gamma1 >= 2");
        }
        check_positive_masses(cfg.problem.c_list, "problem.c_list", errs);
    } else if (cmd == "critical-mass") {
        check_tensor_grid(cfg, errs);
        if (cfg.problem.dim < 3) errs.add("problem.dim: the critical mass is defined for N >= 3");
        if (std::fabs(cfg.problem.gamma1 - 2.0) > 1e-12)
            errs.add("problem.gamma1: the critical mass lives at gamma1 = 2");
        if (!(cfg.problem.gamma2 > 0.0 && cfg.problem.gamma2 < 2.0))
            errs.add("problem.gamma2: requires 0<gamma2<gamma1=2");
    } else if (cmd == "evolve" || cmd == "virial" || cmd == "blowup") {
        check_tensor_grid(cfg, errs);
        check_pair_window(cfg, errs);
        check_dynamics(cfg, errs);
        if (cfg.io.checkpoint.empty() && !(cfg.solver.guess_amplitude > 0.0))
            errs.add("io.checkpoint: give a starting checkpoint or a positive "
                     "solver.guess_amplitude for a Gaussian start");
    } else if (cmd == "decay-fit") {
        if (cfg.io.checkpoint.empty()) errs.add("io.checkpoint: decay fits read a radial state");
        if (!(cfg.fit.r_lo > 0.0 && cfg.fit.r_lo < cfg.fit.r_hi))
            errs.add("fit: requires 0 < r_lo < r_hi");
    } else if (cmd == "subadd") {
        check_tensor_grid(cfg, errs);
        check_pair_window(cfg, errs);
        if (!(cfg.problem.gamma1 < 2.0))
            errs.add("problem.gamma1: the subadditivity check requires gamma1 < 2");
        if (cfg.problem.c_list.size() != 2)
            errs.add("problem.c_list: give exactly the two masses c1, c2");
        else
            check_positive_masses(cfg.problem.c_list, "problem.c_list", errs);
    } else if (cmd == "verify") {
        if (cfg.io.checkpoint.empty()) errs.add("io.checkpoint: verify reads a checkpoint");
    }
    errs.raise_if_any("configuration is invalid:");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace hb
