#include "jointmeas/dispersive_model.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace jmeas {

void SystemParams::validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError(field + ": " + why);
    };
    if (!(kappa > 0.0) || !std::isfinite(kappa)) fail("kappa", "must be positive and finite");
    if (!(eta >= 0.0 && eta <= 1.0)) fail("eta", "must lie in [0, 1]");
    for (int j = 0; j < 2; ++j) {
        const std::string q = std::to_string(j + 1);
        if (!(gamma1[j] >= 0.0)) fail("gamma1_" + q, "must be non-negative");
        if (!(gammaphi[j] >= 0.0)) fail("gammaphi_" + q, "must be non-negative");
        if (delta_qc[j] == 0.0 || !std::isfinite(delta_qc[j])) {
            fail("delta_" + q, "qubit-cavity detuning must be non-zero (dispersive regime undefined)");
        }
        if (!std::isfinite(g[j])) fail("g" + q, "must be finite");
        const double lambda = g[j] / delta_qc[j];
        if (std::abs(lambda) > 0.5) {
            std::ostringstream msg;
            msg << "|g/Delta| = " << std::abs(lambda) << " exceeds 0.5, outside the dispersive regime";
            fail("g" + q, msg.str());
        }
    }
    if (!std::isfinite(delta_r)) fail("delta_r", "must be finite");
    if (!std::isfinite(phi_lo)) fail("phi_lo", "must be finite");
    if (!std::isfinite(drive.amplitude)) fail("drive.amplitude", "must be finite");
    if (drive.shape == Drive::Shape::tanh_ramp && !(drive.sigma > 0.0)) {
        fail("drive.sigma", "ramp timescale must be positive");
    }
}

std::vector<std::string> SystemParams::warnings() const {
    std::vector<std::string> out;
    for (int j = 0; j < 2; ++j) {
        if (delta_qc[j] == 0.0) continue;
        const double lambda = std::abs(g[j] / delta_qc[j]);
        if (lambda >= 0.2) {
            std::ostringstream msg;
            msg << "|lambda_" << j + 1 << "| = " << lambda << " >= 0.2: dispersive approximation is marginal";
            out.push_back(msg.str());
        }
    }
    const double relax = gamma1[0] + gamma1[1];
    if (relax > 0.0 && 0.5 * kappa < 10.0 * relax) {
        std::ostringstream msg;
        msg << "kappa/2 / (gamma1_1 + gamma1_2) = " << 0.5 * kappa / relax
            << " is not large; the reduced equations may be inaccurate";
        out.push_back(msg.str());
    }
    return out;
}

SystemParams SystemParams::fig1() {
    SystemParams p;
    p.g = {-15.0, 15.0};
    p.delta_qc = {150.0, 150.0};
    p.drive = Drive{Drive::Shape::constant, 0.5, 1.0};
    return p;
}

SystemParams SystemParams::fig2() {
    SystemParams p;
    p.kappa_hz = 5.0e6;
    p.g = {-100.0, 100.0};
    p.delta_qc = {1000.0, 1000.0};
    p.drive = Drive{Drive::Shape::tanh_ramp, 1.0, 1.0};
    return p;
}

DispersiveCoupling derive_dispersive(const SystemParams& params) {
    DispersiveCoupling d;
    for (int j = 0; j < 2; ++j) {
        if (params.delta_qc[j] == 0.0) {
            throw ConfigError("delta_" + std::to_string(j + 1) +
                              ": qubit-cavity detuning must be non-zero (dispersive regime undefined)");
        }
        d.lambda[j] = params.g[j] / params.delta_qc[j];
        d.chi[j] = params.g[j] * d.lambda[j];
    }
    return d;
}

double chi_of_state(const std::array<double, 2>& chi, Logical x) {
    const int i = index_of(x);
    return chi[0] * z_value(1, i) + chi[1] * z_value(2, i);
}

std::array<double, 4> chi_table(const std::array<double, 2>& chi) {
    std::array<double, 4> out{};
    for (Logical x : kLogicalStates) out[index_of(x)] = chi_of_state(chi, x);
    return out;
}

std::array<cplx, 4> alpha_rate(const std::array<cplx, 4>& alpha, double t, const SystemParams& params,
                               const std::array<double, 4>& chi_x) {
    const double eps = params.drive.at(t);
    std::array<cplx, 4> rate{};
    for (int x = 0; x < 4; ++x) {
        rate[x] = -kI * (params.delta_r + chi_x[x]) * alpha[x] - kI * eps - 0.5 * params.kappa * alpha[x];
    }
    return rate;
}

CavityAmplitudes step_alphas(const CavityAmplitudes& state, const SystemParams& params,
                             const std::array<double, 4>& chi_x, double dt) {
    if (!(dt > 0.0)) throw ContractViolation("step_alphas: dt must be positive");
    const auto& a0 = state.alpha;
    const double t = state.t;
    auto axpy = [](const std::array<cplx, 4>& a, const std::array<cplx, 4>& k, double h) {
        std::array<cplx, 4> out;
        for (int x = 0; x < 4; ++x) out[x] = a[x] + h * k[x];
        return out;
    };
    const auto k1 = alpha_rate(a0, t, params, chi_x);
    const auto k2 = alpha_rate(axpy(a0, k1, 0.5 * dt), t + 0.5 * dt, params, chi_x);
    const auto k3 = alpha_rate(axpy(a0, k2, 0.5 * dt), t + 0.5 * dt, params, chi_x);
    const auto k4 = alpha_rate(axpy(a0, k3, dt), t + dt, params, chi_x);

    CavityAmplitudes next;
    next.t = t + dt;
    double prev_max = 0.0;
    double next_max = 0.0;
    bool finite = true;
    for (int x = 0; x < 4; ++x) {
        next.alpha[x] = a0[x] + (dt / 6.0) * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x]);
        prev_max = std::max(prev_max, std::abs(a0[x]));
        next_max = std::max(next_max, std::abs(next.alpha[x]));
        finite = finite && std::isfinite(next.alpha[x].real()) && std::isfinite(next.alpha[x].imag());
    }
    const double bound = 10.0 * std::max(2.0 * std::abs(params.drive.amplitude) / params.kappa, prev_max);
    if (!finite || (next_max > bound && next_max > 1e-12)) {
        std::ostringstream msg;
        msg << "cavity amplitude integration unstable at t = " << next.t << " (max |alpha| = " << next_max
            << ", bound " << bound << "); reduce dt";
        throw SimulationError(msg.str(), next.t);
    }
    return next;
}

CavityAmplitudes step_alphas(const CavityAmplitudes& state, const SystemParams& params, double dt) {
    return step_alphas(state, params, chi_table(derive_dispersive(params).chi), dt);
}

CavityAmplitudes steady_alphas(const SystemParams& params) {
    const auto chi_x = chi_table(derive_dispersive(params).chi);
    CavityAmplitudes out;
    out.t = std::numeric_limits<double>::infinity();
    for (int x = 0; x < 4; ++x) {
        out.alpha[x] = -kI * params.drive.amplitude / (0.5 * params.kappa + kI * (params.delta_r + chi_x[x]));
    }
    return out;
}

Mat4 MeasurementSnapshot::dephasing_table() const {
    Mat4 out;
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) out(x, y) = cplx(gamma_d(x, y), -a_c(x, y));
    return out;
}

double homodyne_amplitude(cplx beta, double phi, double kappa, double eta) {
    // |beta| cos(phi - arg beta) == Re[beta e^{-i phi}]
    return std::sqrt(kappa * eta) * (beta * std::exp(-kI * phi)).real();
}

double information_rate(cplx beta, double phi, double kappa, double eta) {
    const double c = std::cos(phi - std::arg(beta));
    return kappa * eta * std::norm(beta) * c * c;
}

Eigen::Vector4d homodyne_operator_diagonal(const std::array<double, 4>& m) {
    Eigen::Vector4d d;
    for (int x = 0; x < 4; ++x) {
        const int z1 = z_value(1, x);
        const int z2 = z_value(2, x);
        d(x) = m[index_of(Component::k10)] * z1 + m[index_of(Component::k01)] * z2 +
               m[index_of(Component::k11)] * z1 * z2;
    }
    return d;
}

MeasurementSnapshot snapshot(const std::array<cplx, 4>& alpha, const SystemParams& params,
                             const std::array<double, 4>& chi_x) {
    MeasurementSnapshot s;
    s.chi_x = chi_x;
    for (int x = 0; x < 4; ++x) {
        for (int y = x + 1; y < 4; ++y) {
            const cplx prod = alpha[x] * std::conj(alpha[y]);
            const double dchi = chi_x[x] - chi_x[y];
            s.gamma_d(x, y) = dchi * prod.imag();
            s.a_c(x, y) = dchi * prod.real();
            // (chi_y - chi_x) Im[alpha_y alpha_x^*] = dchi Im[prod]; Re flips sign.
            s.gamma_d(y, x) = s.gamma_d(x, y);
            s.a_c(y, x) = -s.a_c(x, y);
        }
    }

    const cplx a_gg = alpha[index_of(Logical::gg)];
    const cplx a_ge = alpha[index_of(Logical::ge)];
    const cplx a_eg = alpha[index_of(Logical::eg)];
    const cplx a_ee = alpha[index_of(Logical::ee)];
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double sj = (j == 0) ? 1.0 : -1.0;
            const double si = (i == 0) ? 1.0 : -1.0;
            s.beta[2 * i + j] = 0.5 * (a_ee + sj * a_eg + si * a_ge + si * sj * a_gg);
        }
    }

    const double phi = params.phi_lo;
    const double phi_perp = params.phi_lo - std::numbers::pi / 2;
    for (Component k : {Component::k01, Component::k10, Component::k11}) {
        const int i = index_of(k);
        s.m[i] = homodyne_amplitude(s.beta[i], phi, params.kappa, params.eta);
        s.m_perp[i] = homodyne_amplitude(s.beta[i], phi_perp, params.kappa, params.eta);
    }
    const Eigen::Vector4d c = homodyne_operator_diagonal(s.m);
    const Eigen::Vector4d cp = homodyne_operator_diagonal(s.m_perp);
    s.c_phi = c.cast<cplx>().asDiagonal();
    s.c_phi_perp = cp.cast<cplx>().asDiagonal();
    return s;
}

MeasurementSnapshot snapshot(const CavityAmplitudes& alphas, const SystemParams& params) {
    return snapshot(alphas.alpha, params, chi_table(derive_dispersive(params).chi));
}

double steady_parity_rate(const SystemParams& params) {
    const auto snap = snapshot(steady_alphas(params), params);
    return information_rate(snap.beta[index_of(Component::k11)], std::numbers::pi / 2, params.kappa,
                            params.eta);
}

}  // namespace jmeas
