#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "funflow/bandwidth.hpp"
#include "funflow/curves.hpp"
#include "funflow/estimator.hpp"
#include "funflow/kernel.hpp"
#include "funflow/seminorms.hpp"
#include "funflow/stats.hpp"

namespace funflow {

enum class DesignKind {
    /// Standard Brownian motions on the grid.
    brownian,
    /// Constant curves X(t) = U with U ~ Uniform(0,1), queried at U = 1/2. Under a
    /// one-dimensional semi-norm the small-ball exponent is kappa = 1.
    scalar_uniform,
};

enum class TargetKind { squared_norm, constant };

/// Simulation design: Y = r(X) + N(0, noise_sd^2), with a fresh query curve per replication.
struct Design {
    std::size_t n = 100;
    std::size_t p = 100;
    double noise_sd = 0.1;
    DesignKind kind = DesignKind::brownian;
    TargetKind target = TargetKind::squared_norm;
    double target_constant = 1.0;

    double truth(const Curve& x) const;
};

struct EstimatorSettings {
    double ell = 0.0;
    Kernel kernel{KernelKind::quadratic};
    SemiNormSpec seminorm = SemiNormSpec::pca(3);
    double C = 1.0;
    double nu = 0.1;
    /// Select (C, nu) by leave-one-out cross-validation on each training sample.
    bool use_cv = false;
    CVGrid cv_grid;
};

struct ExperimentConfig {
    Design design;
    std::size_t replications = 500;
    std::uint64_t seed = 1;
    EstimatorSettings estimator;
    /// 0 uses thread_count().
    std::size_t threads = 0;
};

/// One replication's data: training set, a new query curve, its response and r(query).
struct Sample {
    Dataset train;
    Curve query;
    double query_response;
    double query_truth;
};

/// Draws a sample of size n from the design using `rng`: the query curve and its noise
/// first, then one (curve, noise) pair per observation. Samples of different sizes from
/// the same stream are nested.
Sample draw_sample(const Design& design, std::size_t n, Rng& rng);

/// Fits the semi-norm on the training curves and returns r_n^[l] at the query
/// (selecting (C, nu) by CV first when requested). Frozen scale S = max distance.
double fit_and_predict(const Sample& sample, const EstimatorSettings& settings);

struct ReplicationRecord {
    std::size_t replication = 0;
    double prediction = 0.0;
    double response = 0.0;
    double truth = 0.0;
    double squared_error = 0.0;
    bool failed = false;
    std::string error;
};

struct StudyCell {
    std::string label;
    /// Sample size; defaults to the design's n.
    std::optional<std::size_t> n;
    EstimatorSettings settings;
};

struct CellReport {
    std::string label;
    std::size_t n = 0;
    /// Over the non-failed replications' squared prediction errors (Y_hat - Y)^2.
    Summary mspe;
    std::size_t failures = 0;
    std::vector<ReplicationRecord> records;
};

struct StudyReport {
    std::vector<CellReport> cells;

    /// One row per cell: label,n,mspe,sd,failures,replications.
    void write_csv(std::ostream& out) const;
    /// Every replication record: label,replication,prediction,response,squared_error,failed.
    void write_records_csv(std::ostream& out) const;
};

/// Summary of the squared errors of the non-failed records.
Summary summarize_records(const std::vector<ReplicationRecord>& records);

/// Mean and sd of squared prediction errors per cell. Replication r of every cell
/// draws from make_stream(seed, r), so cells with equal n see identical data.
StudyReport mspe_study(const ExperimentConfig& cfg, const std::vector<StudyCell>& cells);

struct CoverageReport {
    double alpha = 0.05;
    double coverage = 0.0;
    std::size_t used = 0;
    std::size_t excluded = 0;
    std::vector<double> pivots;
    double pivot_mean = 0.0;
    double pivot_skewness = 0.0;
    double pivot_excess_kurtosis = 0.0;
    /// Mean of h_n sqrt(n F^(h_n)) over the used replications.
    double mean_bias_scale = 0.0;

    void write_csv(std::ostream& out) const;
};

/// Confidence-band coverage of r(query) by the l = 0 estimator, plus the pivot sample.
/// Replications with a degenerate variance estimate or an empty neighborhood are
/// excluded and counted.
CoverageReport coverage_study(const ExperimentConfig& cfg, double alpha);

struct RateRow {
    std::size_t n = 0;
    /// Monte Carlo E[(r_n(query) - r(query))^2].
    double mse = 0.0;
    double sd = 0.0;
    std::size_t failures = 0;
};

struct RateReport {
    std::vector<RateRow> rows;
    /// Least-squares slope of log MSE on log n.
    double slope = 0.0;
    /// Small-ball exponent estimated from log F^(t) against log t.
    double kappa_hat = 0.0;
    /// -2 / (2 + kappa_hat).
    double target_slope = 0.0;

    void write_csv(std::ostream& out) const;
};

RateReport rate_check(const std::vector<std::size_t>& ns, const ExperimentConfig& cfg);

/// Slope of log F^(t) on log t over the order statistics with F^ in [lo, hi].
double estimate_small_ball_exponent(std::vector<double> distances, double lo = 0.01, double hi = 0.2);

struct TimingRow {
    std::size_t N = 0;
    double recursive_seconds = 0.0;
    double batch_seconds = 0.0;
};

struct TimingReport {
    std::size_t n0 = 0;
    std::vector<TimingRow> rows;
    /// log-log slopes of cumulative time against N.
    double recursive_exponent = 0.0;
    double batch_exponent = 0.0;

    /// batch / recursive cumulative time at the given N.
    double speedup(std::size_t N) const;
    void write_csv(std::ostream& out) const;
};

/// Cumulative wall time to absorb N new observations one at a time: (a) recursive
/// update + predict, (b) recompute all distances + single-bandwidth estimate. Both
/// arms see the same stream and semi-norm. Each pass is repeated `repeats` times and
/// the fastest cumulative time per checkpoint kept. Single-threaded.
TimingReport timing_benchmark(std::size_t n0, const std::vector<std::size_t>& Ns, const ExperimentConfig& cfg,
                              std::size_t repeats = 3);

struct CVSelectionReport {
    std::map<std::pair<double, double>, std::size_t> counts;
    std::vector<std::pair<double, double>> selections;
    std::size_t failures = 0;
    std::pair<double, double> modal{0.0, 0.0};

    void write_csv(std::ostream& out) const;
};

/// Runs cv_select on the training sample of each replication and tallies the choice.
CVSelectionReport cv_selection_study(const ExperimentConfig& cfg);

/// "series,x,y" rows for external plotting.
void write_plot_series(std::ostream& out, const std::string& series, const std::vector<double>& x,
                       const std::vector<double>& y);

}  // namespace funflow
