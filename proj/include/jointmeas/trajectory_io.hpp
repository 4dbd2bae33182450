#pragma once

// Binary trajectory dump and CSV export.
//
// Layout (all integers and doubles little-endian):
//   char[8]  magic "JMTRAJ\0\0"
//   u32      version (1)
//   u32      flags: bit 0 states present, bit 1 current present, bit 2 aborted
//   u64      seed
//   u64      params hash
//   f64      dt
//   i64      n_steps
//   i64      stride          (steps between samples)
//   i32      current_bin
//   i32      retried_steps
//   f64      gamma11_steady
//   f64      abort_time
//   u64      n_samples
//   f64[n]   times, then s, then theta_ac
//   f64[32n] states, column-major (re, im) pairs        if bit 0
//   u64      n_current, f64[n_current] binned current    if bit 1
//   u32      diagnostic length, then its bytes

#include <cstdint>
#include <iosfwd>
#include <string>

#include "jointmeas/sme_solver.hpp"

namespace jmeas {

inline constexpr std::uint32_t kTrajectoryFormatVersion = 1;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_trajectory(std::ostream& out, const TrajectoryRecord& rec, std::uint64_t params_hash);

struct LoadedTrajectory {
    TrajectoryRecord record;
    std::uint64_t params_hash = 0;
};

/// Throws FormatError on a bad magic, unknown version or truncated stream.
LoadedTrajectory read_trajectory(std::istream& in);

/// Columns t, s, theta_ac at the sample cadence.
void write_s_csv(std::ostream& out, const TrajectoryRecord& rec);
/// Columns t, J with one row per current bin (t is the bin end).
void write_current_csv(std::ostream& out, const TrajectoryRecord& rec);

}  // namespace jmeas
