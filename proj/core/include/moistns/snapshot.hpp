#pragma once

#include <string>
#include <vector>

#include "moistns/dynamics.hpp"
#include "moistns/timestepper.hpp"

namespace moistns {

// Binary snapshot: a 256-byte human-readable ASCII header (format version,
// grid dims, time, params hash, field list) followed by eight float64
// little-endian arrays in the declared order, x-fastest.
inline constexpr int kSnapshotHeaderSize = 256;
inline constexpr const char* kSnapshotMagic = "MOISTNS SNAPSHOT v1";

void write_snapshot(const std::string& path, const State& s,
                    unsigned long long params_hash);

// Reads a snapshot; throws ParseError on a malformed header and
// ValidationError on a hash argument mismatch when expect_hash is nonzero.
State read_snapshot(const std::string& path,
                    unsigned long long expect_hash = 0,
                    unsigned long long* hash_out = nullptr);

// timeseries.csv: one row per step, columns
// t,dt,min_rho_d,min_q,perturbation_norm
void write_timeseries(const std::string& path,
                      const std::vector<StepReport>& series,
                      const std::vector<double>& perturbation_norms);

} // namespace moistns
