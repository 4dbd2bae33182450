#pragma once

// Physical parameters, cavity coherent-amplitude dynamics and the
// measurement-rate quantities (dephasing, ac-Stark shift, homodyne operator).
//
// Everything is expressed in units of kappa, in the frame rotating at the
// drive frequency for the cavity and at the Lamb-shifted qubit frequencies
// for the qubits.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "jointmeas/quantum_core.hpp"

namespace jmeas {

/// Invalid physical or run configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure during a simulation (instability, positivity breach).
class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, double t) : std::runtime_error(what), time_(t) {}
    double time() const { return time_; }

private:
    double time_;
};

struct Drive {
    enum class Shape { constant, tanh_ramp };

    Shape shape = Shape::tanh_ramp;
    double amplitude = 1.0;  // epsilon, units of kappa
    double sigma = 1.0;      // ramp timescale, units of 1/kappa

    double at(double t) const {
        if (shape == Shape::constant) return amplitude;
        return amplitude * std::tanh(t / sigma);
    }
};

struct SystemParams {
    double kappa = 1.0;
    double kappa_hz = 0.0;  // physical kappa/2pi, reporting only

    std::array<double, 2> g{-100.0, 100.0};
    std::array<double, 2> delta_qc{1000.0, 1000.0};
    double delta_r = 0.0;
    std::array<double, 2> gamma1{0.0, 0.0};
    std::array<double, 2> gammaphi{0.0, 0.0};
    double eta = 1.0;
    double phi_lo = std::numbers::pi / 2;
    Drive drive;

    // Stored for completeness; never used by the solvers.
    double jq = 0.0;
    std::array<double, 2> omega_a_tilde{0.0, 0.0};

    /// Throws ConfigError on kappa <= 0, eta outside [0,1], negative rates,
    /// Delta_j = 0 or |lambda_j| > 0.5.
    void validate() const;

    /// Human-readable warnings (|lambda_j| >= 0.2, kappa/2 not >> gamma1 sum).
    std::vector<std::string> warnings() const;

    /// Parity-measurement geometry with chi^j = 1.5, eps = 0.5, constant drive.
    static SystemParams fig1();
    /// chi^j = 10, eps = 1 with tanh(t) ramp, phi = pi/2, eta = 1, no damping.
    static SystemParams fig2();
};

struct DispersiveCoupling {
    std::array<double, 2> lambda{};
    std::array<double, 2> chi{};
};

/// lambda_j = g_j / Delta_j, chi_j = g_j^2 / Delta_j.
DispersiveCoupling derive_dispersive(const SystemParams& params);

/// chi_x = <x| sum_j chi_j sigma_z^j |x>.
double chi_of_state(const std::array<double, 2>& chi, Logical x);
std::array<double, 4> chi_table(const std::array<double, 2>& chi);

struct CavityAmplitudes {
    std::array<cplx, 4> alpha{};  // indexed by Logical
    double t = 0.0;
};

/// One RK4 step of alpha_x' = -i(Delta_r + chi_x) alpha_x - i eps(t) - kappa alpha_x / 2.
CavityAmplitudes step_alphas(const CavityAmplitudes& state, const SystemParams& params, double dt);
CavityAmplitudes step_alphas(const CavityAmplitudes& state, const SystemParams& params,
                             const std::array<double, 4>& chi_x, double dt);

/// Time derivative of the amplitudes at time t.
std::array<cplx, 4> alpha_rate(const std::array<cplx, 4>& alpha, double t, const SystemParams& params,
                               const std::array<double, 4>& chi_x);

/// Closed-form steady state for a drive held at its full amplitude.
CavityAmplitudes steady_alphas(const SystemParams& params);

/// beta_ij index k = 2 i + j.
enum class Component : int { k00 = 0, k01 = 1, k10 = 2, k11 = 3 };

constexpr int index_of(Component k) { return static_cast<int>(k); }

struct MeasurementSnapshot {
    std::array<double, 4> chi_x{};
    Eigen::Matrix4d gamma_d = Eigen::Matrix4d::Zero();  // symmetric, zero diagonal
    Eigen::Matrix4d a_c = Eigen::Matrix4d::Zero();      // antisymmetric
    std::array<cplx, 4> beta{};                         // indexed by Component
    std::array<double, 4> m{};       // signed amplitudes at phi; m[k00] is left at zero
    std::array<double, 4> m_perp{};  // same at phi - pi/2
    Mat4 c_phi = Mat4::Zero();
    Mat4 c_phi_perp = Mat4::Zero();

    /// Gamma_ij(phi) = m_ij(phi)^2.
    double rate(Component k) const { return m[index_of(k)] * m[index_of(k)]; }
    /// (Gamma_d - i A_c)^{xy}, the factor multiplying rho_xy in the master equation.
    Mat4 dephasing_table() const;
};

/// Signed homodyne amplitude sqrt(kappa eta) |beta| cos(phi - arg beta).
double homodyne_amplitude(cplx beta, double phi, double kappa, double eta);

/// kappa eta |beta|^2 cos^2(phi - arg beta), written as in the rate formula.
double information_rate(cplx beta, double phi, double kappa, double eta);

/// Diagonal of c_phi built from signed amplitudes m = {-, m01, m10, m11}.
Eigen::Vector4d homodyne_operator_diagonal(const std::array<double, 4>& m);

MeasurementSnapshot snapshot(const CavityAmplitudes& alphas, const SystemParams& params);
MeasurementSnapshot snapshot(const std::array<cplx, 4>& alpha, const SystemParams& params,
                             const std::array<double, 4>& chi_x);

/// Gamma_11(pi/2) at the steady state, the scale used for the integrated current.
double steady_parity_rate(const SystemParams& params);

}  // namespace jmeas
