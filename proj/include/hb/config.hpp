#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hb/ground_state.hpp"

namespace hb {

struct ProblemBlock {
    int dim = 3;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    std::optional<double> c;
    std::vector<double> c_list;
};

struct GridBlock {
    std::string kind = "tensor";  // tensor | radial
    int n = 48;
    double half_extent = 12.0;
    int points = 400;   // radial node count
    double r_max = 60.0;
};

struct DynamicsBlock {
    double horizon = 1.0;
    double dt = 1e-3;
    int monitor_every = 10;
    double virial_radius = 0.0;  // 0 -> box default
    double tail_radius = 0.0;    // 0 -> box default
    bool adaptive = true;
};

struct FitBlock {
    double r_lo = 0.0;
    double r_hi = 0.0;
};

struct IoBlock {
    std::string out = "out";
    std::string checkpoint;  // input state for evolve/virial/blowup/decay-fit/verify
    std::uint64_t seed = 1;
    int workers = 0;  // 0 -> leave the pool at its HB_THREADS/default size
};

struct RunConfig {
    std::string command;
    ProblemBlock problem;
    GridBlock grid;
    SolverParams solver;
    DynamicsBlock dynamics;
    FitBlock fit;
    IoBlock io;
    std::uint64_t config_hash = 0;
};

// Syntax pass: sections, key = value lines, full-line '#' comments.  Unknown
// sections/keys, duplicates, and unparsable values are all reported together.
RunConfig parse_config(const std::string& text);

// Window pass for the chosen command; throws ConfigError listing every
// violation.  Run after any command/seed/out overrides.
void validate_config(const RunConfig& cfg);

RunConfig load_config(const std::string& path);

std::uint64_t fnv1a(const std::string& text);

}  // namespace hb
