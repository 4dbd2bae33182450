#pragma once

// Deterministic integration of the reduced two-qubit master equation, and a
// full qubit (x) Fock-space master equation used as a validation oracle.

#include <string>
#include <vector>

#include "jointmeas/dispersive_model.hpp"

namespace jmeas {

using Superop = Eigen::Matrix<cplx, 16, 16>;

/// Time-independent part of the generator (qubit relaxation, pure dephasing,
/// collective Purcell decay) as a superoperator on column-major vec(rho), plus
/// the time-dependent dephasing/ac-Stark table applied elementwise.
class Liouvillian {
public:
    explicit Liouvillian(const SystemParams& params);

    const Superop& static_part() const { return static_; }
    const Mat4& purcell_operator() const { return purcell_; }

    /// L rho given the elementwise factor (Gamma_d - i A_c).
    Mat4 apply(const Mat4& rho, const Mat4& dephasing_table) const;
    Mat4 apply(const Mat4& rho, const MeasurementSnapshot& snap) const {
        return apply(rho, snap.dephasing_table());
    }

private:
    Superop static_;
    Mat4 purcell_;  // sum_j lambda_j sigma_-^j
};

/// Direct term-by-term evaluation of L rho (reference path for Liouvillian).
Mat4 apply_L(const Mat4& rho, const MeasurementSnapshot& snap, const SystemParams& params);

/// Number of grid steps for [0, t_final] at step dt, and the stride of the
/// sampling cadence; throws ConfigError if either is not a whole multiple.
long long grid_steps(double t_final, double dt);
long long cadence_stride(double cadence, double dt);

struct MeOptions {
    double t_final = 10.0;
    double dt = 1e-3;
    double cadence = 0.1;
    /// Repeat at dt/2, dt/4... until successive runs agree to refine_tol.
    bool refine = false;
    double refine_tol = 1e-8;
    int max_halvings = 4;
};

struct MeSample {
    double t = 0.0;
    Mat4 rho = Mat4::Zero();
    CavityAmplitudes alphas;
    MeasurementSnapshot snap;
};

struct MeResult {
    std::vector<MeSample> samples;
    double dt_used = 0.0;
    double refinement_delta = 0.0;  // max entrywise change at the last halving (0 if not refined)
};

/// RK4 co-integration of the cavity amplitudes and rho from rho0 (alphas start at 0).
/// Aborts with SimulationError when an eigenvalue drops below -1e-6.
MeResult evolve_me(const Mat4& rho0, const SystemParams& params, const MeOptions& options);

/// Fixed-step evolution (no refinement); building block of evolve_me.
MeResult evolve_me_fixed(const Mat4& rho0, const SystemParams& params, double t_final, double dt,
                         double cadence);

/// Cavity photon number implied by the reduced model, sum_x p_x |alpha_x|^2.
double reduced_photon_number(const Mat4& rho, const std::array<cplx, 4>& alpha);

struct OracleOptions {
    int fock_cutoff = 20;
    double t_final = 5.0;
    double dt = 2e-3;
    double cadence = 0.1;
    /// Include the qubit-only Purcell channel kappa D[sum_j lambda_j sigma_-^j].
    bool purcell_channel = true;
};

struct OracleSample {
    double t = 0.0;
    Mat4 rho_qubits = Mat4::Zero();  // cavity traced out
    double photon_number = 0.0;
    double top_fock_population = 0.0;
};

struct OracleResult {
    std::vector<OracleSample> samples;
    std::vector<std::string> warnings;
    int dimension = 0;
};

/// Smallest Fock cutoff accepted for a given drive amplitude: 4 (2 eps / kappa)^2 + 10.
int minimum_fock_cutoff(const SystemParams& params);

/// Integrates the dispersive Hamiltonian with cavity damping on the joint
/// space. Joint index = x * (cutoff + 1) + n.
OracleResult evolve_full_oracle(const MatX& rho0_joint, const SystemParams& params,
                                const OracleOptions& options);
/// Convenience: rho0_qubits (x) |0><0|.
OracleResult evolve_full_oracle(const Mat4& rho0_qubits, const SystemParams& params,
                                const OracleOptions& options);

MatX joint_with_vacuum(const Mat4& rho_qubits, int fock_cutoff);
Mat4 trace_out_cavity(const MatX& rho_joint, int fock_cutoff);

}  // namespace jmeas
