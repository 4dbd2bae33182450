#include "jointmeas/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace jmeas {

namespace {

constexpr std::size_t kChunk = 16;

struct ChunkSums {
    std::vector<Mat4> rho;
    std::vector<double> concurrence;
    std::vector<double> purity;
    std::size_t completed = 0;
};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double x, double mean, double sigma) {
    const double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

struct MixtureResidual {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;

    std::span<const double> edges;
    std::span<const std::size_t> counts;
    double total = 0.0;
    bool shared_width = false;

    int inputs() const { return shared_width ? 5 : 6; }
    int values() const { return static_cast<int>(counts.size()); }

    // x = (w1, mu1, log sigma1, w2, mu2[, log sigma2]); bin-integrated model counts.
    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
        const double s1 = std::exp(x(2));
        const double s2 = shared_width ? s1 : std::exp(x(5));
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const double p1 = normal_cdf((edges[i + 1] - x(1)) / s1) - normal_cdf((edges[i] - x(1)) / s1);
            const double p2 = normal_cdf((edges[i + 1] - x(4)) / s2) - normal_cdf((edges[i] - x(4)) / s2);
            fvec(static_cast<Eigen::Index>(i)) =
                total * (x(0) * p1 + x(3) * p2) - static_cast<double>(counts[i]);
        }
        return 0;
    }
};

}  // namespace

double median(std::vector<double> values) {
    if (values.empty()) throw ContractViolation("median of an empty sample");
    const std::size_t n = values.size();
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

EnsembleResult run_ensemble(const Mat4& rho0, const SystemParams& params, const EnsembleOptions& options) {
    if (options.n_traj < 1) throw ConfigError("n_traj: must be at least 1");
    const long long n_steps = grid_steps(options.t_final, options.dt);
    const long long stride = cadence_stride(options.cadence, options.dt);
    const std::size_t n_samples = static_cast<std::size_t>(n_steps / stride) + 1;
    const MeasurementSchedule schedule(params, options.dt, n_steps);

    EnsembleResult result;
    result.gamma11_steady = schedule.gamma11_steady();
    result.records.resize(options.n_traj);

    const std::size_t n_chunks = (options.n_traj + kChunk - 1) / kChunk;
    std::vector<ChunkSums> chunks(n_chunks);
    std::atomic<std::size_t> next_chunk{0};

    auto work = [&]() {
        for (;;) {
            const std::size_t ticket = next_chunk.fetch_add(1);
            if (ticket >= n_chunks) return;
            const std::size_t c = options.reverse_schedule ? n_chunks - 1 - ticket : ticket;
            ChunkSums sums;
            sums.rho.assign(n_samples, Mat4::Zero());
            sums.concurrence.assign(n_samples, 0.0);
            sums.purity.assign(n_samples, 0.0);
            const std::size_t begin = c * kChunk;
            const std::size_t end = std::min(options.n_traj, begin + kChunk);
            for (std::size_t i = begin; i < end; ++i) {
                TrajectoryOptions topt;
                topt.t_final = options.t_final;
                topt.dt = options.dt;
                topt.seed = stream_seed(options.master_seed, i);
                topt.cadence = options.cadence;
                topt.keep_current = options.keep_current;
                topt.keep_states = true;
                topt.scheme = options.scheme;
                TrajectoryRecord rec = run_trajectory(rho0, schedule, topt);
                if (!rec.aborted) {
                    ++sums.completed;
                    for (std::size_t k = 0; k < n_samples; ++k) {
                        sums.rho[k] += rec.rho[k];
                        sums.concurrence[k] += concurrence(rec.rho[k]);
                        sums.purity[k] += purity(rec.rho[k]);
                    }
                }
                if (!options.keep_states) {
                    rec.rho.clear();
                    rec.rho.shrink_to_fit();
                }
                result.records[i] = std::move(rec);
            }
            chunks[c] = std::move(sums);
        }
    };

    unsigned workers = options.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.workers;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_chunks));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    result.times.resize(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) result.times[k] = static_cast<double>(k * stride) * options.dt;
    result.mean_rho.assign(n_samples, Mat4::Zero());
    result.mean_concurrence.assign(n_samples, 0.0);
    result.mean_purity.assign(n_samples, 0.0);
    for (const ChunkSums& sums : chunks) {
        result.n_completed += sums.completed;
        for (std::size_t k = 0; k < n_samples; ++k) {
            result.mean_rho[k] += sums.rho[k];
            result.mean_concurrence[k] += sums.concurrence[k];
            result.mean_purity[k] += sums.purity[k];
        }
    }
    result.n_aborted = options.n_traj - result.n_completed;
    if (static_cast<double>(result.n_aborted) > options.max_abort_fraction * static_cast<double>(options.n_traj)) {
        std::ostringstream msg;
        msg << result.n_aborted << " of " << options.n_traj << " trajectories aborted (limit "
            << options.max_abort_fraction * 100.0 << "%)";
        for (const auto& rec : result.records) {
            if (rec.aborted) {
                msg << "; first: " << rec.diagnostic;
                break;
            }
        }
        throw SimulationError(msg.str(), options.t_final);
    }
    if (result.n_completed > 0) {
        const double inv = 1.0 / static_cast<double>(result.n_completed);
        for (std::size_t k = 0; k < n_samples; ++k) {
            result.mean_rho[k] *= inv;
            result.mean_concurrence[k] *= inv;
            result.mean_purity[k] *= inv;
        }
    }
    return result;
}

double gaussian_overlap(const GaussianComponent& lo, const GaussianComponent& hi, double* crossing) {
    auto diff = [&](double x) {
        return lo.weight * normal_pdf(x, lo.mean, lo.sigma) - hi.weight * normal_pdf(x, hi.mean, hi.sigma);
    };
    double a = lo.mean;
    double b = hi.mean;
    double x = 0.5 * (a + b);
    if (diff(a) > 0.0 && diff(b) < 0.0) {
        for (int it = 0; it < 200; ++it) {
            x = 0.5 * (a + b);
            (diff(x) > 0.0 ? a : b) = x;
        }
        x = 0.5 * (a + b);
    }
    if (crossing) *crossing = x;
    const double total = lo.weight + hi.weight;
    const double wrong = lo.weight * (1.0 - normal_cdf((x - lo.mean) / lo.sigma)) +
                         hi.weight * normal_cdf((x - hi.mean) / hi.sigma);
    return total > 0.0 ? wrong / total : 0.0;
}

std::optional<TwoGaussianFit> fit_two_gaussians(std::span<const double> samples, std::span<const double> edges,
                                                std::span<const std::size_t> counts, MixtureWidths widths) {
    if (samples.size() < 4 || counts.size() < 6 || edges.size() != counts.size() + 1) return std::nullopt;
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t half = sorted.size() / 2;
    auto moments = [](auto first, auto last) {
        const double n = static_cast<double>(std::distance(first, last));
        const double mean = std::accumulate(first, last, 0.0) / n;
        double var = 0.0;
        for (auto it = first; it != last; ++it) var += (*it - mean) * (*it - mean);
        return std::pair{mean, std::sqrt(std::max(var / n, 1e-12))};
    };
    const auto [m1, s1] = moments(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(half));
    const auto [m2, s2] = moments(sorted.begin() + static_cast<std::ptrdiff_t>(half), sorted.end());

    const bool shared = widths == MixtureWidths::shared;
    MixtureResidual functor{edges, counts, static_cast<double>(samples.size()), shared};
    Eigen::VectorXd x(functor.inputs());
    if (shared) {
        x << 0.5, m1, std::log(0.5 * (s1 + s2)), 0.5, m2;
    } else {
        x << 0.5, m1, std::log(s1), 0.5, m2, std::log(s2);
    }
    Eigen::NumericalDiff<MixtureResidual> numdiff(functor);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<MixtureResidual>, double> lm(numdiff);
    lm.parameters.maxfev = 4000;
    const auto status = lm.minimize(x);
    if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters || !x.allFinite()) return std::nullopt;
    if (x(0) <= 0.0 || x(3) <= 0.0) return std::nullopt;

    GaussianComponent a{x(0), x(1), std::exp(x(2))};
    GaussianComponent b{x(3), x(4), std::exp(shared ? x(2) : x(5))};
    if (a.mean > b.mean) std::swap(a, b);
    TwoGaussianFit fit;
    const double wsum = a.weight + b.weight;
    a.weight /= wsum;
    b.weight /= wsum;
    fit.components = {a, b};
    fit.overlap = gaussian_overlap(a, b, &fit.crossing);
    Eigen::VectorXd fvec(functor.values());
    functor(x, fvec);
    fit.residual = fvec.squaredNorm();
    return fit;
}

double freedman_diaconis_width(std::span<const double> sorted) {
    const std::size_t n = sorted.size();
    if (n < 2) return 1.0;
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(n - 1);
        const std::size_t i = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(i);
        return i + 1 < n ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac : sorted[i];
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    double width = 2.0 * iqr / std::cbrt(static_cast<double>(n));
    if (!(width > 0.0)) width = std::max(1e-12, (sorted.back() - sorted.front()) / 10.0);
    if (!(width > 0.0)) width = 1.0;
    return width;
}

SHistogram histogram_s(std::span<const TrajectoryRecord> records, double t, std::size_t min_records_for_fit,
                       MixtureWidths widths) {
    SHistogram h;
    h.t = t;
    for (const auto& rec : records) {
        if (rec.aborted) continue;
        h.samples.push_back(rec.s[rec.sample_index(t)]);
    }
    if (h.samples.empty()) {
        h.note = "no completed trajectories";
        return h;
    }
    std::vector<double> sorted = h.samples;
    std::sort(sorted.begin(), sorted.end());
    h.bin_width = freedman_diaconis_width(sorted);
    const double lo = sorted.front();
    const std::size_t n_bins =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((sorted.back() - lo) / h.bin_width)) + 1);
    h.edges.resize(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) h.edges[i] = lo + static_cast<double>(i) * h.bin_width;
    h.counts.assign(n_bins, 0);
    for (double v : sorted) {
        std::size_t i = static_cast<std::size_t>(std::floor((v - lo) / h.bin_width));
        h.counts[std::min(i, n_bins - 1)]++;
    }
    if (h.samples.size() < min_records_for_fit) {
        std::ostringstream msg;
        msg << "fit skipped: " << h.samples.size() << " samples < " << min_records_for_fit;
        h.note = msg.str();
        return h;
    }
    h.fit = fit_two_gaussians(h.samples, h.edges, h.counts, widths);
    if (!h.fit) h.note = "two-Gaussian fit did not converge";
    return h;
}

EnsembleStats classify_and_average(std::span<const TrajectoryRecord> records, double t, double s_th) {
    if (s_th < 0.0) throw ContractViolation("classify_and_average: s_th must be non-negative");
    EnsembleStats st;
    st.t = t;
    st.s_th = s_th;
    st.labels.assign(records.size(), Condition::discarded);

    std::vector<double> s_values;
    s_values.reserve(records.size());
    for (const auto& rec : records) {
        if (rec.aborted) continue;
        if (rec.rho.empty()) throw ContractViolation("classify_and_average: records carry no states");
        s_values.push_back(rec.s[rec.sample_index(t)]);
    }
    st.n_traj = s_values.size();
    if (st.n_traj == 0) {
        st.plus_empty = st.minus_empty = true;
        return st;
    }
    st.s0 = median(s_values);

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.aborted) continue;
        const std::size_t k = rec.sample_index(t);
        const double s = rec.s[k];
        Condition c = Condition::discarded;
        if (s_th == 0.0) {
            c = s < st.s0 ? Condition::minus : Condition::plus;
        } else if (s < st.s0 - s_th) {
            c = Condition::minus;
        } else if (s > st.s0 + s_th) {
            c = Condition::plus;
        }
        st.labels[i] = c;
        if (c == Condition::plus) {
            st.mean_plus += correct_ee_gg_phase(rec.rho[k], rec.theta_ac[k]);
            ++st.n_plus;
        } else if (c == Condition::minus) {
            st.mean_minus += rec.rho[k];
            ++st.n_minus;
        } else {
            ++st.n_discarded;
        }
    }
    st.success_probability = static_cast<double>(st.n_plus + st.n_minus) / static_cast<double>(st.n_traj);
    st.plus_empty = st.n_plus == 0;
    st.minus_empty = st.n_minus == 0;
    if (!st.plus_empty) {
        st.mean_plus /= static_cast<double>(st.n_plus);
        st.fidelity_plus = fidelity(st.mean_plus, states::psi_plus());
        st.concurrence_plus = concurrence(st.mean_plus);
    }
    if (!st.minus_empty) {
        st.mean_minus /= static_cast<double>(st.n_minus);
        st.fidelity_minus = fidelity(st.mean_minus, states::phi_plus());
        st.concurrence_minus = concurrence(st.mean_minus);
    }
    st.fbar = 0.5 * (st.fidelity_minus + st.fidelity_plus);
    st.cbar = 0.5 * (st.concurrence_plus + st.concurrence_minus);
    return st;
}

std::vector<EnsembleStats> sweep_threshold(std::span<const TrajectoryRecord> records, double t,
                                           std::span<const double> thresholds) {
    std::vector<EnsembleStats> out;
    out.reserve(thresholds.size());
    for (double s_th : thresholds) out.push_back(classify_and_average(records, t, s_th));
    return out;
}

ThresholdPlateau threshold_plateau(std::span<const EnsembleStats> sweep, double min_branch_fraction) {
    ThresholdPlateau best;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        const EnsembleStats& st = sweep[i];
        const double floor = min_branch_fraction * static_cast<double>(st.n_traj);
        if (st.partial() || static_cast<double>(std::min(st.n_plus, st.n_minus)) < floor) continue;
        if (best.found && st.s_th <= best.s_th) continue;
        best = {true, i, st.s_th, st.fbar, st.cbar, st.success_probability};
    }
    return best;
}

}  // namespace jmeas
