#include "jointmeas/me_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Sparse>

namespace jmeas {

namespace {

using SparseC = Eigen::SparseMatrix<cplx>;

Mat4 single_qubit_terms(const Mat4& rho, const SystemParams& p) {
    const auto& ops = pauli_ops();
    Mat4 out = Mat4::Zero();
    const std::array<const Mat4*, 2> sm{&ops.sm1, &ops.sm2};
    const std::array<const Mat4*, 2> sz{&ops.sz1, &ops.sz2};
    for (int j = 0; j < 2; ++j) {
        if (p.gamma1[j] != 0.0) out += p.gamma1[j] * dissipator(*sm[j], rho);
        if (p.gammaphi[j] != 0.0) out += 0.5 * p.gammaphi[j] * dissipator(*sz[j], rho);
    }
    return out;
}

Mat4 build_purcell_operator(const SystemParams& p) {
    const auto d = derive_dispersive(p);
    const auto& ops = pauli_ops();
    return d.lambda[0] * ops.sm1 + d.lambda[1] * ops.sm2;
}

// Positive semidefinite within tol, using a Cholesky factorization of rho + tol I.
bool positive_within(const Mat4& rho, double tol) {
    const Mat4 shifted = rho + tol * Mat4::Identity();
    Eigen::LLT<Mat4> llt(shifted);
    return llt.info() == Eigen::Success;
}

void hermitize(Mat4& rho) { rho = 0.5 * (rho + rho.adjoint()).eval(); }

struct MeState {
    Mat4 rho;
    std::array<cplx, 4> alpha;
};

}  // namespace

Liouvillian::Liouvillian(const SystemParams& params) : purcell_(build_purcell_operator(params)) {
    const double kappa = params.kappa;
    for (int col = 0; col < 16; ++col) {
        Mat4 basis = Mat4::Zero();
        basis(col % 4, col / 4) = 1.0;  // column-major vec index
        Mat4 image = single_qubit_terms(basis, params) + kappa * dissipator(purcell_, basis);
        static_.col(col) = Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(image.data());
    }
}

Mat4 Liouvillian::apply(const Mat4& rho, const Mat4& dephasing_table) const {
    Mat4 out;
    Eigen::Map<Eigen::Matrix<cplx, 16, 1>>(out.data()) =
        static_ * Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(rho.data());
    out += dephasing_table.cwiseProduct(rho);
    return out;
}

Mat4 apply_L(const Mat4& rho, const MeasurementSnapshot& snap, const SystemParams& params) {
    const auto& ops = pauli_ops();
    Mat4 out = single_qubit_terms(rho, params);
    out += params.kappa * dissipator(build_purcell_operator(params), rho);
    for (int x = 0; x < 4; ++x) {
        for (int y = 0; y < 4; ++y) {
            const cplx factor(snap.gamma_d(x, y), -snap.a_c(x, y));
            out += factor * (ops.proj[x] * rho * ops.proj[y]);
        }
    }
    return out;
}

long long grid_steps(double t_final, double dt) {
    if (!(dt > 0.0)) throw ConfigError("dt: must be positive");
    if (!(t_final >= 0.0)) throw ConfigError("t_final: must be non-negative");
    const double ratio = t_final / dt;
    const long long n = std::llround(ratio);
    if (std::abs(ratio - static_cast<double>(n)) > 1e-6 * std::max(1.0, ratio)) {
        throw ConfigError("t_final: must be a whole multiple of dt");
    }
    return n;
}

long long cadence_stride(double cadence, double dt) {
    if (!(cadence > 0.0)) throw ConfigError("cadence: must be positive");
    const double ratio = cadence / dt;
    const long long n = std::llround(ratio);
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-6 * std::max(1.0, ratio)) {
        throw ConfigError("cadence: must be a whole multiple of dt");
    }
    return n;
}

MeResult evolve_me_fixed(const Mat4& rho0, const SystemParams& params, double t_final, double dt,
                         double cadence) {
    params.validate();
    const long long n_steps = grid_steps(t_final, dt);
    const long long stride = cadence_stride(cadence, dt);
    const auto chi_x = chi_table(derive_dispersive(params).chi);
    const Liouvillian liouv(params);

    auto derivative = [&](const MeState& s, double t) {
        MeState d;
        d.alpha = alpha_rate(s.alpha, t, params, chi_x);
        d.rho = liouv.apply(s.rho, snapshot(s.alpha, params, chi_x).dephasing_table());
        return d;
    };
    auto advance = [](const MeState& s, const MeState& k, double h) {
        MeState out;
        out.rho = s.rho + h * k.rho;
        for (int x = 0; x < 4; ++x) out.alpha[x] = s.alpha[x] + h * k.alpha[x];
        return out;
    };

    MeResult result;
    result.dt_used = dt;
    MeState state{rho0, {}};
    auto record = [&](double t) {
        MeSample sample;
        sample.t = t;
        sample.rho = state.rho;
        sample.alphas.alpha = state.alpha;
        sample.alphas.t = t;
        sample.snap = snapshot(state.alpha, params, chi_x);
        result.samples.push_back(std::move(sample));
    };
    record(0.0);
    for (long long step = 0; step < n_steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        const MeState k1 = derivative(state, t);
        const MeState k2 = derivative(advance(state, k1, 0.5 * dt), t + 0.5 * dt);
        const MeState k3 = derivative(advance(state, k2, 0.5 * dt), t + 0.5 * dt);
        const MeState k4 = derivative(advance(state, k3, dt), t + dt);
        state.rho += (dt / 6.0) * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho);
        for (int x = 0; x < 4; ++x) {
            state.alpha[x] += (dt / 6.0) * (k1.alpha[x] + 2.0 * k2.alpha[x] + 2.0 * k3.alpha[x] + k4.alpha[x]);
        }
        hermitize(state.rho);
        const double t_next = static_cast<double>(step + 1) * dt;
        if (!state.rho.allFinite() || !positive_within(state.rho, 1e-6)) {
            std::ostringstream msg;
            msg << "master equation: positivity violated beyond -1e-6 at t = " << t_next;
            throw SimulationError(msg.str(), t_next);
        }
        if ((step + 1) % stride == 0) record(t_next);
    }
    return result;
}

MeResult evolve_me(const Mat4& rho0, const SystemParams& params, const MeOptions& options) {
    MeResult coarse = evolve_me_fixed(rho0, params, options.t_final, options.dt, options.cadence);
    if (!options.refine) return coarse;
    double dt = options.dt;
    for (int halving = 0; halving < options.max_halvings; ++halving) {
        dt *= 0.5;
        MeResult fine = evolve_me_fixed(rho0, params, options.t_final, dt, options.cadence);
        double delta = 0.0;
        for (std::size_t i = 0; i < fine.samples.size(); ++i) {
            delta = std::max(delta, (fine.samples[i].rho - coarse.samples[i].rho).cwiseAbs().maxCoeff());
        }
        fine.refinement_delta = delta;
        coarse = std::move(fine);
        if (delta < options.refine_tol) break;
    }
    return coarse;
}

double reduced_photon_number(const Mat4& rho, const std::array<cplx, 4>& alpha) {
    double n = 0.0;
    for (int x = 0; x < 4; ++x) n += rho(x, x).real() * std::norm(alpha[x]);
    return n;
}

int minimum_fock_cutoff(const SystemParams& params) {
    const double r = 2.0 * std::abs(params.drive.amplitude) / params.kappa;
    return static_cast<int>(std::ceil(4.0 * r * r + 10.0));
}

MatX joint_with_vacuum(const Mat4& rho_qubits, int fock_cutoff) {
    const int nf = fock_cutoff + 1;
    MatX out = MatX::Zero(4 * nf, 4 * nf);
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) out(x * nf, y * nf) = rho_qubits(x, y);
    return out;
}

Mat4 trace_out_cavity(const MatX& rho_joint, int fock_cutoff) {
    const int nf = fock_cutoff + 1;
    Mat4 out = Mat4::Zero();
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y)
            for (int n = 0; n < nf; ++n) out(x, y) += rho_joint(x * nf + n, y * nf + n);
    return out;
}

namespace {

struct OracleOperators {
    SparseC a;             // annihilation (x) identity on qubits
    SparseC photon_number;
    SparseC h_static;      // (Delta_r + sum_j chi_j sigma_z^j) a^dag a
    SparseC drive;         // a + a^dag
    std::vector<std::pair<double, SparseC>> channels;  // rate, jump operator
};

SparseC embed_qubit_op(const Mat4& q, int nf) {
    std::vector<Eigen::Triplet<cplx>> trip;
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y)
            if (q(x, y) != cplx(0.0))
                for (int n = 0; n < nf; ++n) trip.emplace_back(x * nf + n, y * nf + n, q(x, y));
    SparseC out(4 * nf, 4 * nf);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

OracleOperators build_oracle_operators(const SystemParams& params, const OracleOptions& options) {
    const int nf = options.fock_cutoff + 1;
    const int dim = 4 * nf;
    const auto chi_x = chi_table(derive_dispersive(params).chi);
    OracleOperators ops;
    std::vector<Eigen::Triplet<cplx>> a_trip, n_trip, h_trip;
    for (int x = 0; x < 4; ++x) {
        for (int n = 0; n < nf; ++n) {
            const int idx = x * nf + n;
            if (n > 0) a_trip.emplace_back(idx - 1, idx, std::sqrt(static_cast<double>(n)));
            n_trip.emplace_back(idx, idx, static_cast<double>(n));
            h_trip.emplace_back(idx, idx, (params.delta_r + chi_x[x]) * static_cast<double>(n));
        }
    }
    ops.a.resize(dim, dim);
    ops.a.setFromTriplets(a_trip.begin(), a_trip.end());
    ops.photon_number.resize(dim, dim);
    ops.photon_number.setFromTriplets(n_trip.begin(), n_trip.end());
    ops.h_static.resize(dim, dim);
    ops.h_static.setFromTriplets(h_trip.begin(), h_trip.end());
    ops.drive = SparseC(ops.a + SparseC(ops.a.adjoint()));

    const auto& q = pauli_ops();
    ops.channels.emplace_back(params.kappa, ops.a);
    for (int j = 0; j < 2; ++j) {
        if (params.gamma1[j] != 0.0) {
            ops.channels.emplace_back(params.gamma1[j], embed_qubit_op(j == 0 ? q.sm1 : q.sm2, nf));
        }
        if (params.gammaphi[j] != 0.0) {
            ops.channels.emplace_back(0.5 * params.gammaphi[j], embed_qubit_op(j == 0 ? q.sz1 : q.sz2, nf));
        }
    }
    if (options.purcell_channel) {
        ops.channels.emplace_back(params.kappa, embed_qubit_op(build_purcell_operator(params), nf));
    }
    return ops;
}

// L rho for Hermitian rho; uses (A rho)^dag = rho A^dag to halve the products.
MatX oracle_generator(const MatX& rho, double eps, const OracleOperators& ops) {
    const MatX h_rho = ops.h_static * rho + eps * (ops.drive * rho);
    MatX out = -kI * h_rho + kI * h_rho.adjoint();
    for (const auto& [rate, c] : ops.channels) {
        const MatX c_rho = c * rho;
        const MatX jump = c * MatX(c_rho.adjoint());  // c rho c^dag
        const MatX cdc_rho = c.adjoint() * c_rho;
        out += rate * (jump - 0.5 * (cdc_rho + cdc_rho.adjoint()));
    }
    return out;
}

}  // namespace

OracleResult evolve_full_oracle(const MatX& rho0_joint, const SystemParams& params,
                                const OracleOptions& options) {
    params.validate();
    const int nf = options.fock_cutoff + 1;
    const int dim = 4 * nf;
    if (options.fock_cutoff < minimum_fock_cutoff(params)) {
        std::ostringstream msg;
        msg << "evolve_full_oracle: fock_cutoff " << options.fock_cutoff << " below the minimum "
            << minimum_fock_cutoff(params) << " for drive amplitude " << params.drive.amplitude;
        throw ContractViolation(msg.str());
    }
    if (rho0_joint.rows() != dim || rho0_joint.cols() != dim) {
        throw ContractViolation("evolve_full_oracle: joint state dimension does not match the Fock cutoff");
    }
    const long long n_steps = grid_steps(options.t_final, options.dt);
    const long long stride = cadence_stride(options.cadence, options.dt);
    const OracleOperators ops = build_oracle_operators(params, options);

    OracleResult result;
    result.dimension = dim;
    MatX rho = rho0_joint;
    double worst_top = 0.0;
    auto record = [&](double t) {
        OracleSample s;
        s.t = t;
        s.rho_qubits = trace_out_cavity(rho, options.fock_cutoff);
        s.photon_number = (ops.photon_number * rho).trace().real();
        double top = 0.0;
        for (int x = 0; x < 4; ++x) top += rho(x * nf + nf - 1, x * nf + nf - 1).real();
        s.top_fock_population = top;
        worst_top = std::max(worst_top, top);
        result.samples.push_back(s);
    };
    record(0.0);
    const double dt = options.dt;
    for (long long step = 0; step < n_steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        const double e0 = params.drive.at(t);
        const double eh = params.drive.at(t + 0.5 * dt);
        const double e1 = params.drive.at(t + dt);
        const MatX k1 = oracle_generator(rho, e0, ops);
        const MatX k2 = oracle_generator(rho + (0.5 * dt) * k1, eh, ops);
        const MatX k3 = oracle_generator(rho + (0.5 * dt) * k2, eh, ops);
        const MatX k4 = oracle_generator(rho + dt * k3, e1, ops);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rho = (0.5 * (rho + rho.adjoint())).eval();
        if (!rho.allFinite()) {
            throw SimulationError("full oracle: non-finite state, reduce dt", t + dt);
        }
        if ((step + 1) % stride == 0) record(static_cast<double>(step + 1) * dt);
    }
    if (worst_top > 1e-6) {
        std::ostringstream msg;
        msg << "top Fock level population reached " << worst_top << " (> 1e-6); increase fock_cutoff";
        result.warnings.push_back(msg.str());
    }
    return result;
}

OracleResult evolve_full_oracle(const Mat4& rho0_qubits, const SystemParams& params,
                                const OracleOptions& options) {
    return evolve_full_oracle(joint_with_vacuum(rho0_qubits, options.fock_cutoff), params, options);
}

}  // namespace jmeas
