#include "jointmeas/sme_solver.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

namespace jmeas {

namespace {

bool positive_within(const Mat4& rho, double tol) {
    Eigen::LLT<Mat4> llt(rho + tol * Mat4::Identity());
    return llt.info() == Eigen::Success;
}

double expectation(const Eigen::Vector4d& diag, const Mat4& rho) {
    double e = 0.0;
    for (int x = 0; x < 4; ++x) e += diag(x) * rho(x, x).real();
    return e;
}

Mat4 raw_step(const Mat4& rho, const Liouvillian& liouv, const StepCoefficients& k, double dW, double dt,
              SmeScheme scheme) {
    const double mean_c = expectation(k.c, rho);
    Mat4 next;
    if (scheme == SmeScheme::euler_maruyama) {
        next = rho + dt * liouv.apply(rho, k.dephasing);
        for (int y = 0; y < 4; ++y) {
            for (int x = 0; x < 4; ++x) {
                const cplx kick(0.5 * (k.c(x) + k.c(y)) - mean_c, -0.5 * (k.c_perp(x) - k.c_perp(y)));
                next(x, y) += dW * kick * rho(x, y);
            }
        }
    } else {
        const double dY = mean_c * dt + dW;
        std::array<cplx, 4> a{};
        std::array<cplx, 4> m{};
        for (int x = 0; x < 4; ++x) {
            a[x] = 0.5 * cplx(k.c(x), -k.c_perp(x));
            m[x] = 1.0 - 0.5 * std::norm(a[x]) * dt + a[x] * dY + 0.5 * a[x] * a[x] * (dY * dY - dt);
        }
        Mat4 remainder = k.dephasing;
        for (int y = 0; y < 4; ++y) {
            for (int x = 0; x < 4; ++x) {
                remainder(x, y) -= a[x] * std::conj(a[y]) - 0.5 * (std::norm(a[x]) + std::norm(a[y]));
            }
        }
        next = dt * liouv.apply(rho, remainder);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) next(x, y) += m[x] * std::conj(m[y]) * rho(x, y);
    }
    next = (0.5 * (next + next.adjoint())).eval();
    next /= next.trace().real();
    return next;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

StepCoefficients step_coefficients(const MeasurementSnapshot& snap) {
    StepCoefficients k;
    k.dephasing = snap.dephasing_table();
    k.c = snap.c_phi.diagonal().real();
    k.c_perp = snap.c_phi_perp.diagonal().real();
    k.a_c_ee_gg = snap.a_c(index_of(Logical::ee), index_of(Logical::gg));
    return k;
}

MeasurementSchedule::MeasurementSchedule(const SystemParams& params, double dt, long long n_steps)
    : params_(params), dt_(dt), liouv_(params), gamma11_steady_(steady_parity_rate(params)) {
    params_.validate();
    const auto chi_x = chi_table(derive_dispersive(params_).chi);
    steps_.reserve(static_cast<std::size_t>(n_steps));
    CavityAmplitudes alphas;
    for (long long n = 0; n < n_steps; ++n) {
        alphas.t = static_cast<double>(n) * dt;
        steps_.push_back(step_coefficients(snapshot(alphas.alpha, params_, chi_x)));
        alphas = step_alphas(alphas, params_, chi_x, dt);
    }
}

SmeStepResult step_sme(const Mat4& rho, const Liouvillian& liouv, const StepCoefficients& coeff, double dW,
                       double dt, SmeScheme scheme) {
    SmeStepResult out;
    out.current = expectation(coeff.c, rho) + dW / dt;
    out.rho = raw_step(rho, liouv, coeff, dW, dt, scheme);
    if (out.rho.allFinite() && positive_within(out.rho, 1e-6)) return out;

    out.retried = true;
    constexpr int kSubsteps = 10;
    Mat4 sub = rho;
    for (int i = 0; i < kSubsteps; ++i) {
        sub = raw_step(sub, liouv, coeff, dW / kSubsteps, dt / kSubsteps, scheme);
    }
    if (!sub.allFinite() || !positive_within(sub, 1e-6)) {
        std::ostringstream msg;
        msg << "trajectory step: positivity violated beyond -1e-6 (min eigenvalue "
            << (sub.allFinite() ? min_eigenvalue(sub) : std::nan("")) << ") after a 10x refined retry";
        throw SimulationError(msg.str(), 0.0);
    }
    out.rho = sub;
    return out;
}

SmeStepResult step_sme(const Mat4& rho, const MeasurementSnapshot& snap, double dW, double dt,
                       const SystemParams& params, SmeScheme scheme) {
    const Liouvillian liouv(params);
    return step_sme(rho, liouv, step_coefficients(snap), dW, dt, scheme);
}

std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t state = master_seed;
    const std::uint64_t a = splitmix64(state);
    state = a ^ (index * 0xd1b54a32d192ed03ULL);
    return splitmix64(state);
}

std::size_t TrajectoryRecord::sample_index(double t) const {
    const double stride_t = static_cast<double>(stride) * dt;
    const double pos = t / stride_t;
    const long long idx = std::llround(pos);
    if (idx < 0 || static_cast<std::size_t>(idx) >= times.size() || std::abs(pos - idx) > 1e-6) {
        std::ostringstream msg;
        msg << "time " << t << " is not on the recorded cadence grid";
        throw ContractViolation(msg.str());
    }
    return static_cast<std::size_t>(idx);
}

TrajectoryRecord run_trajectory(const Mat4& rho0, const MeasurementSchedule& schedule,
                                const TrajectoryOptions& options) {
    const long long n_steps = grid_steps(options.t_final, options.dt);
    const long long stride = cadence_stride(options.cadence, options.dt);
    if (std::abs(options.dt - schedule.dt()) > 1e-15 * schedule.dt()) {
        throw ContractViolation("run_trajectory: dt differs from the measurement schedule");
    }
    if (n_steps > schedule.n_steps()) {
        throw ContractViolation("run_trajectory: t_final exceeds the measurement schedule");
    }
    if (options.current_bin < 1) throw ConfigError("current_bin: must be at least 1");

    TrajectoryRecord rec;
    rec.seed = options.seed;
    rec.dt = options.dt;
    rec.n_steps = n_steps;
    rec.stride = stride;
    rec.current_bin = options.current_bin;
    rec.gamma11_steady = schedule.gamma11_steady();

    const std::size_t n_samples = static_cast<std::size_t>(n_steps / stride) + 1;
    rec.times.reserve(n_samples);
    rec.s.reserve(n_samples);
    rec.theta_ac.reserve(n_samples);
    if (options.keep_states) rec.rho.reserve(n_samples);
    if (options.keep_current) rec.current.reserve(static_cast<std::size_t>(n_steps / options.current_bin) + 1);

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sqrt_dt = std::sqrt(options.dt);
    const double s_scale = std::sqrt(schedule.gamma11_steady());
    const Liouvillian& liouv = schedule.liouvillian();

    Mat4 rho = rho0;
    double s = 0.0;
    double theta = 0.0;
    double bin_sum = 0.0;
    int bin_count = 0;
    auto record = [&](double t) {
        rec.times.push_back(t);
        rec.s.push_back(s);
        rec.theta_ac.push_back(theta);
        if (options.keep_states) rec.rho.push_back(rho);
    };
    record(0.0);
    for (long long step = 0; step < n_steps; ++step) {
        const StepCoefficients& k = schedule.at(step);
        const double dW = sqrt_dt * normal(rng);
        SmeStepResult r;
        try {
            r = step_sme(rho, liouv, k, dW, options.dt, options.scheme);
        } catch (const SimulationError& e) {
            rec.aborted = true;
            rec.abort_time = static_cast<double>(step) * options.dt;
            std::ostringstream msg;
            msg << e.what() << " at t = " << rec.abort_time << " (seed " << options.seed << ")";
            rec.diagnostic = msg.str();
            return rec;
        }
        rec.retried_steps += r.retried ? 1 : 0;
        s += s_scale * r.current * options.dt;
        theta += k.a_c_ee_gg * options.dt;
        rho = r.rho;
        if (options.keep_current) {
            bin_sum += r.current;
            if (++bin_count == options.current_bin) {
                rec.current.push_back(bin_sum / bin_count);
                bin_sum = 0.0;
                bin_count = 0;
            }
        }
        if ((step + 1) % stride == 0) record(static_cast<double>(step + 1) * options.dt);
    }
    return rec;
}

TrajectoryRecord run_trajectory(const Mat4& rho0, const SystemParams& params, const TrajectoryOptions& options) {
    const long long n_steps = grid_steps(options.t_final, options.dt);
    const MeasurementSchedule schedule(params, options.dt, n_steps);
    return run_trajectory(rho0, schedule, options);
}

}  // namespace jmeas
