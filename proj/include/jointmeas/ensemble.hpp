#pragma once

// Monte Carlo trajectory ensembles, histograms of the integrated current and
// threshold classification into the two Bell-state outcomes.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jointmeas/sme_solver.hpp"

namespace jmeas {

inline constexpr std::uint64_t kDefaultMasterSeed = 20091201;

struct EnsembleOptions {
    std::size_t n_traj = 1000;
    double t_final = 10.0;
    double dt = 1e-3;
    std::uint64_t master_seed = kDefaultMasterSeed;
    double cadence = 0.1;
    unsigned workers = 0;  // 0 = hardware concurrency
    bool keep_states = true;
    bool keep_current = false;
    SmeScheme scheme = SmeScheme::euler_maruyama;
    /// Hand out work from the last chunk backwards; results must not change.
    bool reverse_schedule = false;
    double max_abort_fraction = 0.01;
};

struct EnsembleResult {
    std::vector<double> times;
    std::vector<Mat4> mean_rho;              // E[rho_J] over completed trajectories
    std::vector<double> mean_concurrence;    // E[C(rho_J)]
    std::vector<double> mean_purity;
    std::vector<TrajectoryRecord> records;   // index order
    std::size_t n_completed = 0;
    std::size_t n_aborted = 0;
    double gamma11_steady = 0.0;
};

/// Runs n_traj trajectories with seeds stream_seed(master_seed, i). Aggregation is
/// a fold over fixed chunks in index order, so results do not depend on the
/// worker count or completion order. Throws SimulationError if more than
/// max_abort_fraction of the trajectories abort.
EnsembleResult run_ensemble(const Mat4& rho0, const SystemParams& params, const EnsembleOptions& options);

struct GaussianComponent {
    double weight = 0.0;
    double mean = 0.0;
    double sigma = 0.0;
};

struct TwoGaussianFit {
    std::array<GaussianComponent, 2> components;  // sorted by mean
    double overlap = 0.0;   // weight falling on the wrong side of the equal-density point
    double crossing = 0.0;  // equal-density point between the means
    double residual = 0.0;  // sum of squared count residuals
    double separation() const { return components[1].mean - components[0].mean; }
};

/// Fraction of the mixture weight misassigned by the equal-density decision point.
double gaussian_overlap(const GaussianComponent& lo, const GaussianComponent& hi, double* crossing = nullptr);

enum class MixtureWidths {
    shared,       // one width for both components
    independent,
};

/// Least-squares fit of a two-Gaussian mixture to the bin counts, started
/// from a median split; nullopt when the fit does not converge to positive
/// weights.
std::optional<TwoGaussianFit> fit_two_gaussians(std::span<const double> samples, std::span<const double> edges,
                                                std::span<const std::size_t> counts,
                                                MixtureWidths widths = MixtureWidths::shared);

struct SHistogram {
    double t = 0.0;
    double bin_width = 0.0;  // Freedman-Diaconis
    std::vector<double> edges;
    std::vector<std::size_t> counts;
    std::vector<double> samples;
    std::optional<TwoGaussianFit> fit;
    std::string note;  // why the fit is missing, if it is
};

/// Freedman-Diaconis bin width 2 IQR n^{-1/3}.
double freedman_diaconis_width(std::span<const double> sorted_samples);

/// Histogram of s(t) over completed records; the two-Gaussian fit is attempted
/// only with at least min_records_for_fit samples.
SHistogram histogram_s(std::span<const TrajectoryRecord> records, double t, std::size_t min_records_for_fit = 500,
                       MixtureWidths widths = MixtureWidths::shared);

enum class Condition : int { minus = -1, discarded = 0, plus = 1 };

struct EnsembleStats {
    double t = 0.0;
    std::size_t n_traj = 0;  // completed trajectories considered
    double s0 = 0.0;         // median of s(t)
    double s_th = 0.0;
    double success_probability = 0.0;
    std::size_t n_plus = 0, n_minus = 0, n_discarded = 0;
    std::vector<Condition> labels;  // one per record; aborted records are discarded

    Mat4 mean_plus = Mat4::Zero();   // E_+[rho_J], ac-Stark phase corrected
    Mat4 mean_minus = Mat4::Zero();  // E_-[rho_J]
    double fidelity_plus = 0.0;      // <psi+|E_+|psi+>
    double fidelity_minus = 0.0;     // <phi+|E_-|phi+>
    double concurrence_plus = 0.0;
    double concurrence_minus = 0.0;
    double fbar = 0.0;
    double cbar = 0.0;
    bool plus_empty = false;
    bool minus_empty = false;
    bool partial() const { return plus_empty || minus_empty; }
};

/// Median split with threshold: c = - if s < s0 - s_th, c = + if s > s0 + s_th
/// (at s_th = 0, s == s0 goes to +). Requires records with stored states.
EnsembleStats classify_and_average(std::span<const TrajectoryRecord> records, double t, double s_th);

std::vector<EnsembleStats> sweep_threshold(std::span<const TrajectoryRecord> records, double t,
                                           std::span<const double> thresholds);

struct ThresholdPlateau {
    bool found = false;
    std::size_t index = 0;  // position in the sweep
    double s_th = 0.0;
    double fbar = 0.0;
    double cbar = 0.0;
    double success_probability = 0.0;
};

/// Large-threshold limit of a sweep: the largest s_th at which both
/// conditional branches still hold at least min_branch_fraction of the
/// trajectories, so that the branch means remain statistically resolved.
ThresholdPlateau threshold_plateau(std::span<const EnsembleStats> sweep, double min_branch_fraction = 0.01);

double median(std::vector<double> values);

}  // namespace jmeas
