#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hb/config.hpp"
#include "hb/errors.hpp"
#include "hb/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"spectral solver for the two-kernel Hartree mass-constraint problem"};
    app.name("hartree-balance");

    std::string command, config_path, out_dir;
    std::uint64_t seed = 0;
    bool have_seed = false;

    app.add_option("command", command, "run/verify command; may also come from the config file");
    app.add_option("--config", config_path, "path to the run configuration")->required();
    app.add_option("--out", out_dir, "output directory (overrides io.out)");
    app.add_option("--seed", seed, "RNG seed (overrides io.seed)")->each([&](const std::string&) {
        have_seed = true;
    });

    CLI11_PARSE(app, argc, argv);

    try {
        hb::RunConfig cfg = hb::load_config(config_path);
        if (!command.empty()) cfg.command = command;
        if (!out_dir.empty()) cfg.io.out = out_dir;
        if (have_seed) {
            cfg.io.seed = seed;
            cfg.solver.seed = seed;
        }
        hb::run_command(cfg);
    } catch (const hb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
