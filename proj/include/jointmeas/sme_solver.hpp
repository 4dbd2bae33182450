#pragma once

// Single-trajectory integration of the homodyne stochastic master equation
//   d rho = L rho dt + M[c_phi] rho dW - i [c_{phi-pi/2}, rho] dW / 2
// with current J dt = Tr[c_phi rho] dt + dW.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "jointmeas/me_solver.hpp"

namespace jmeas {

enum class SmeScheme {
    /// rho + L rho dt + (M[c] rho - i[c_perp, rho]/2) dW, then renormalized.
    euler_maruyama,
    /// Diagonal measurement Kraus operator 1 - A^dag A dt/2 + A dY with
    /// A = (c_phi - i c_perp)/2 and dY = Tr[c rho] dt + dW; the remaining
    /// generator L - D[A] is stepped explicitly. Positive to O(dt^2).
    kraus,
};

/// Per-step coefficients of the trajectory equation. The cavity amplitudes are
/// deterministic, so one schedule serves every trajectory of an ensemble.
struct StepCoefficients {
    Mat4 dephasing;          // Gamma_d - i A_c, elementwise
    Eigen::Vector4d c;       // diagonal of c_phi
    Eigen::Vector4d c_perp;  // diagonal of c_{phi - pi/2}
    double a_c_ee_gg = 0.0;
};

StepCoefficients step_coefficients(const MeasurementSnapshot& snap);

class MeasurementSchedule {
public:
    /// Integrates the cavity amplitudes (RK4, alpha(0) = 0) on the grid t_n = n dt.
    MeasurementSchedule(const SystemParams& params, double dt, long long n_steps);

    const SystemParams& params() const { return params_; }
    const Liouvillian& liouvillian() const { return liouv_; }
    double dt() const { return dt_; }
    long long n_steps() const { return static_cast<long long>(steps_.size()); }
    const StepCoefficients& at(long long step) const { return steps_[static_cast<std::size_t>(step)]; }
    /// Steady-state Gamma_11(pi/2), the scale of the integrated current.
    double gamma11_steady() const { return gamma11_steady_; }

private:
    SystemParams params_;
    double dt_;
    Liouvillian liouv_;
    std::vector<StepCoefficients> steps_;
    double gamma11_steady_;
};

struct SmeStepResult {
    Mat4 rho;
    double current = 0.0;  // J sample = Tr[c_phi rho] + dW/dt
    bool retried = false;
};

/// One step of the trajectory equation. Deterministic in (rho, coefficients, dW, dt).
/// On a positivity breach beyond -1e-6 the step is redone as 10 substeps of
/// dt/10 with dW split evenly; a second breach throws SimulationError.
SmeStepResult step_sme(const Mat4& rho, const Liouvillian& liouv, const StepCoefficients& coeff, double dW,
                       double dt, SmeScheme scheme = SmeScheme::euler_maruyama);

SmeStepResult step_sme(const Mat4& rho, const MeasurementSnapshot& snap, double dW, double dt,
                       const SystemParams& params, SmeScheme scheme = SmeScheme::euler_maruyama);

/// Seed of trajectory `index` within an ensemble; independent of scheduling.
std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t index);

struct TrajectoryOptions {
    double t_final = 10.0;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    double cadence = 0.1;
    int current_bin = 10;  // J is stored averaged over this many steps
    bool keep_current = true;
    bool keep_states = true;
    SmeScheme scheme = SmeScheme::euler_maruyama;
};

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    double dt = 0.0;
    long long n_steps = 0;
    long long stride = 0;  // steps between cadence samples
    int current_bin = 0;
    double gamma11_steady = 0.0;

    std::vector<double> times;     // cadence grid, t = 0 included
    std::vector<double> s;         // sqrt(Gamma_11^s) * int_0^t J dt'
    std::vector<double> theta_ac;  // int_0^t A_c^{ee,gg} dt'
    std::vector<Mat4> rho;         // empty unless keep_states
    std::vector<double> current;   // binned J, empty unless keep_current

    int retried_steps = 0;
    bool aborted = false;
    double abort_time = 0.0;
    std::string diagnostic;

    /// Index of the cadence sample at time t; throws ContractViolation if t is off-grid.
    std::size_t sample_index(double t) const;
};

TrajectoryRecord run_trajectory(const Mat4& rho0, const SystemParams& params, const TrajectoryOptions& options);

/// Runs on a prebuilt schedule; options.dt must match schedule.dt() and
/// options.t_final must not exceed the schedule length. Aborts are recorded
/// in the returned record, not thrown.
TrajectoryRecord run_trajectory(const Mat4& rho0, const MeasurementSchedule& schedule,
                                const TrajectoryOptions& options);

}  // namespace jmeas
