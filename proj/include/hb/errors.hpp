#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hb {

// Process exit codes carried by the exception hierarchy:
//   2 = domain/regime/config violation, 3 = solver failure, 4 = integration/IO failure.
struct Error : std::runtime_error {
    Error(std::string msg, int code) : std::runtime_error(std::move(msg)), exit_code(code) {}
    int exit_code;
};

struct ConfigError : Error {
    explicit ConfigError(std::string msg) : Error(std::move(msg), 2) {}
};

struct DomainError : Error {
    explicit DomainError(std::string msg) : Error(std::move(msg), 2) {}
};

struct SolverError : Error {
    explicit SolverError(std::string msg) : Error(std::move(msg), 3) {}
};

struct IntegrationError : Error {
    explicit IntegrationError(std::string msg) : Error(std::move(msg), 4) {}
};

struct IoError : Error {
    explicit IoError(std::string msg) : Error(std::move(msg), 4) {}
};

}  // namespace hb
