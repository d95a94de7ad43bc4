#pragma once

#include <string>

#include "hb/config.hpp"

namespace hb {

// Executes one validated config; writes artifacts and a manifest under
// cfg.io.out.  Throws the usual error hierarchy; callers map to exit codes.
void run_command(const RunConfig& cfg);

// Recomputes the stationarity invariants of a stored state and gates them
// against the sidecar (when present).  Returns pass/fail; the printable
// report lands in *report when given.
bool verify_checkpoint(const std::string& path, std::string* report = nullptr);

}  // namespace hb
