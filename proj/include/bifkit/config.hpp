#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "bifkit/continuation.hpp"

namespace bifkit {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat run configuration mirrored 1:1 by the JSON config file; CLI flags
/// override file values. Identical config + seed reproduces identical outputs.
struct RunConfig {
    double d = 0.25;
    int q = 5;
    double a = 1.0;
    double interval_a = 0.0;
    double interval_b = 3.14159265358979323846;
    int n = 200;
    std::optional<double> lambda_min;  // derived from the regime when absent
    std::optional<double> lambda_max;
    ContinuationConfig cont;
    double critical_snap_tol = 1e-3;
    bool probes = true;
    int probe_attempts = 20;
    double d_sweep_min = 0.05;
    double d_sweep_max = 2.0;
    int d_sweep_count = 40;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    int workers = 1;
};

/// Parses the JSON config file (all keys optional, flat).
RunConfig load_config_file(const std::string& path);

/// Throws config_error when a field is out of its valid range.
void validate_config(const RunConfig& cfg);

/// Serializes back to the flat JSON document (the exact parse image).
std::string config_to_json(const RunConfig& cfg);

}  // namespace bifkit
