#pragma once

#include <stdexcept>
#include <string>

namespace moistns {

// Error taxonomy for the whole solver. Everything derives from Error so
// callers can catch broadly; the CLI maps the subtypes to exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed configuration file.
struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error("parse error: " + msg) {}
};

// A parameter set violates an admissibility constraint. The message names
// the violated constraint.
struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error("validation error: " + msg) {}
};

// A field left the physically admissible region (e.g. rho_d <= 0).
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error("domain error: " + msg) {}
};

// An implicit solve failed to reach its residual target.
struct SolverDiverged : Error {
    explicit SolverDiverged(const std::string& msg) : Error("solver diverged: " + msg) {}
};

// The evolving state became invalid (NaN, nonpositive density, ...).
struct StateInvalid : Error {
    explicit StateInvalid(const std::string& msg) : Error("state invalid: " + msg) {}
};

// The Lagrangian flow map left the invertibility region |gradX - I| <= 1/2.
struct MapDegenerate : Error {
    explicit MapDegenerate(const std::string& msg) : Error("map degenerate: " + msg) {}
};

} // namespace moistns
