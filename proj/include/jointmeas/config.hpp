#pragma once

// Run configuration: physical parameters plus run controls, read from and
// written to a sectioned key = value text file.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "jointmeas/ensemble.hpp"

namespace jmeas {

/// One (gamma1, gammaphi, eta) combination of a parameter sweep; gamma1 and
/// gammaphi apply to both qubits.
struct SweepCase {
    double gamma1 = 0.0;
    double gammaphi = 0.0;
    double eta = 1.0;

    bool operator==(const SweepCase&) const = default;
};

struct RatesSweep {
    double delta_r_min = -6.0;
    double delta_r_max = 6.0;
    int delta_r_points = 241;
    double chi_min = 0.1;
    double chi_max = 20.0;
    int chi_points = 200;

    bool operator==(const RatesSweep&) const = default;
};

struct RunConfig {
    std::string preset;  // fig1..fig4 or empty
    SystemParams params;

    double t_final = 10.0;
    double dt = 1e-3;
    double cadence = 0.1;
    std::size_t n_traj = 1000;
    std::uint64_t master_seed = kDefaultMasterSeed;
    unsigned workers = 0;
    std::string out_dir = "out";

    std::vector<SweepCase> cases;          // empty: run params as given
    std::vector<double> histogram_times;   // ensemble: s histograms at these times
    double classify_time = 0.0;            // threshold: classification time, 0 = t_final
    std::vector<double> thresholds;        // threshold: s_th values
    RatesSweep rates;
    OracleOptions oracle;

    /// Validates the physical parameters and run controls; throws ConfigError
    /// naming the offending field.
    void validate() const;
};

bool operator==(const SystemParams& a, const SystemParams& b);
bool operator==(const RunConfig& a, const RunConfig& b);

/// Preset for one of fig1..fig4; throws ConfigError for any other name.
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// Parses the config text. Keys missing from the text keep the values of
/// `base` (the default config or a preset named in [run] preset). Unknown
/// sections or keys are rejected.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_string(const std::string& text);
RunConfig load_config(const std::string& path);

/// Writes every field; doubles use the shortest round-trip representation so
/// parse_config(write_config(c)) == c.
std::string write_config(const RunConfig& config);

/// FNV-1a hash of the canonical serialization of the physical parameters.
std::uint64_t params_hash(const SystemParams& params);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// Library version string (major.minor.patch).
const char* library_version();

}  // namespace jmeas
