#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "funflow/bandwidth_plan.hpp"
#include "funflow/curves.hpp"
#include "funflow/kernel.hpp"
#include "funflow/seminorms.hpp"
#include "funflow/sorted_distances.hpp"

namespace funflow {

/// How the small-ball CDF F^ entering the weights is maintained.
///
/// `frozen`: F^ is the empirical CDF of a reference distance set fixed at
/// initialization (or at the last refresh()). Every update is then an exact O(log n)
/// recursion. `refresh`: the reference is reset to all stored distances after every
/// update and the F^-dependent sums are recomputed, O(n) per update.
enum class CdfPolicy { frozen, refresh };

std::string_view cdf_policy_name(CdfPolicy policy) noexcept;

struct PlugInConstants {
    double m1 = 0.0;
    double m2 = 0.0;
    double beta1 = 0.0;
    double sigma2 = 0.0;
};

struct ConfidenceBand {
    double low = 0.0;
    double high = 0.0;
    double half_width = 0.0;
    double z = 0.0;
    /// sigma^2 estimate was zero; the band collapsed to the point estimate.
    bool zero_variance = false;
};

/// Distance-level accumulators of the recursive estimator r_n^[l] at one query point.
///
/// Observation i contributes with bandwidth h_i and weight K(d_i/h_i) / F^(h_i)^l:
///   num  = sum Y_i K_i / F_i^l         den  = sum K_i / F_i^l
///   wsum = sum F_i^(1-l)               (phi_n = num / wsum, f_n = den / wsum)
///   num_unw, num2_unw, den_unw: the l = 0 sums of Y K, Y^2 K and K
///   m1_sum = sum K_i / F_i,  m2_sum = sum K_i^2 / F_i,  beta_sum = sum F_i
class RecursiveAccumulator {
public:
    struct Observation {
        double distance;
        double response;
        double bandwidth;
    };

    /// An empty accumulator. `cdf_reference` is the distance set defining F^; under the
    /// frozen policy it must be supplied before any observation with l > 0 can be weighted.
    RecursiveAccumulator(double ell, Kernel kernel, BandwidthPlan plan, CdfPolicy policy = CdfPolicy::frozen,
                         std::vector<double> cdf_reference = {});

    /// Appends observation n+1 at distance d with response y.
    void push(double d, double y);
    /// Sets the CDF reference to all stored distances and recomputes every F^-dependent sum.
    void refresh();
    /// Switches policy; switching to `refresh` refreshes immediately.
    void set_policy(CdfPolicy policy);

    double ell() const noexcept { return ell_; }
    const Kernel& kernel() const noexcept { return kernel_; }
    const BandwidthPlan& plan() const noexcept { return plan_; }
    CdfPolicy policy() const noexcept { return policy_; }
    std::size_t size() const noexcept { return history_.size(); }
    const std::vector<Observation>& history() const noexcept { return history_; }
    const SortedDistances& sorted_distances() const noexcept { return sorted_; }
    const std::vector<double>& cdf_reference() const noexcept { return reference_; }
    double running_scale() const noexcept { return running_max_; }

    double num() const noexcept { return num_; }
    double den() const noexcept { return den_; }
    double wsum() const noexcept { return wsum_; }
    double num_unweighted() const noexcept { return num_unw_; }
    double num2_unweighted() const noexcept { return num2_unw_; }
    double den_unweighted() const noexcept { return den_unw_; }
    double m1_sum() const noexcept { return m1_sum_; }
    double m2_sum() const noexcept { return m2_sum_; }
    double beta_sum() const noexcept { return beta_sum_; }
    /// Observations whose bandwidth has F^(h_i) = 0.
    std::size_t zero_cdf_count() const noexcept { return zero_cdf_; }

    double phi() const;
    double f() const;

    /// Fraction of stored distances <= t.
    double empirical_cdf(double t) const;
    /// F^ as used in the weights (the reference set).
    double weight_cdf(double t) const;
    double last_bandwidth() const;

    /// r_n^[l] = num / den; throws empty_neighborhood when den = 0.
    double predict() const;
    /// r_n^[0] = num_unw / den_unw.
    double predict_unweighted() const;

    PlugInConstants plug_in_constants() const;
    /// Band around r_n^[0] obtained by inverting the asymptotically normal pivot
    ///   sqrt(n F^(h_n)) sqrt(beta1 M1^2 / (M2 sigma^2)) (r_n^[0] - r).
    ConfidenceBand confidence_band(double alpha) const;
    /// The standardized pivot above, evaluated at a known true value.
    double pivot(double truth) const;

    struct Sums {
        double num, den, wsum, num_unw, num2_unw, den_unw, m1_sum, m2_sum, beta_sum;
        std::size_t zero_cdf;
    };
    Sums sums() const noexcept;
    /// Rebuilds an accumulator from stored parts. The sums are recomputed from the
    /// history and must agree with `sums`, otherwise an integrity error is thrown.
    static RecursiveAccumulator restore(double ell, Kernel kernel, BandwidthPlan plan, CdfPolicy policy,
                                        std::vector<double> cdf_reference, std::vector<Observation> history,
                                        double running_scale, const Sums& sums);

private:
    void add_terms(const Observation& obs);
    void check_invariants() const;

    double ell_;
    Kernel kernel_;
    BandwidthPlan plan_;
    CdfPolicy policy_;
    std::vector<double> reference_;  // sorted
    std::vector<Observation> history_;
    SortedDistances sorted_;
    double running_max_ = 0.0;

    double num_ = 0.0, den_ = 0.0, wsum_ = 0.0;
    double num_unw_ = 0.0, num2_unw_ = 0.0, den_unw_ = 0.0;
    double m1_sum_ = 0.0, m2_sum_ = 0.0, beta_sum_ = 0.0;
    std::size_t zero_cdf_ = 0;
};

/// Recursive estimator state for a fixed query curve.
class QueryState {
public:
    QueryState(Curve query, std::shared_ptr<const FittedSemiNorm> seminorm, RecursiveAccumulator accumulator);

    const Curve& query() const noexcept { return query_; }
    const FittedSemiNorm& seminorm() const noexcept { return *seminorm_; }
    const std::shared_ptr<const FittedSemiNorm>& seminorm_ptr() const noexcept { return seminorm_; }
    const RecursiveAccumulator& accumulator() const noexcept { return acc_; }
    RecursiveAccumulator& accumulator() noexcept { return acc_; }
    std::size_t size() const noexcept { return acc_.size(); }

    double distance_to(const Curve& x) const;
    void update(const Curve& x, double y);

private:
    Curve query_;
    std::shared_ptr<const FittedSemiNorm> seminorm_;
    Eigen::VectorXd query_embedding_;
    RecursiveAccumulator acc_;
};

struct StateOptions {
    CdfPolicy policy = CdfPolicy::frozen;
    /// Distances defining the frozen F^. Defaults to the distances of the initial data.
    std::optional<std::vector<double>> cdf_reference;
};

/// Accumulators after feeding the observations of `data` in order.
QueryState init_state(const Curve& query, const Dataset& data, double ell, const Kernel& kernel,
                      const BandwidthPlan& plan, std::shared_ptr<const FittedSemiNorm> seminorm,
                      const StateOptions& options = {});

/// Same, from precomputed distances.
RecursiveAccumulator init_accumulator(std::span<const double> distances, std::span<const double> responses,
                                      double ell, const Kernel& kernel, const BandwidthPlan& plan,
                                      const StateOptions& options = {});

inline void update_state(QueryState& state, const Curve& x, double y) { state.update(x, y); }
inline double predict(const QueryState& state) { return state.accumulator().predict(); }
inline double empirical_cdf(const QueryState& state, double t) { return state.accumulator().empirical_cdf(t); }
inline PlugInConstants plug_in_constants(const QueryState& state) { return state.accumulator().plug_in_constants(); }
inline ConfidenceBand confidence_band(const QueryState& state, double alpha) {
    return state.accumulator().confidence_band(alpha);
}

struct PredictionDiagnostics {
    std::size_t n = 0;
    double cdf_at_last_bandwidth = 0.0;
    double last_bandwidth = 0.0;
    double effective_sample = 0.0;
    std::optional<PlugInConstants> constants;
};

struct PredictionResult {
    double estimate = 0.0;
    std::optional<ConfidenceBand> band;
    PredictionDiagnostics diagnostics;
};

/// Estimate plus diagnostics; the band is added when alpha is given.
PredictionResult make_prediction(const RecursiveAccumulator& acc, std::optional<double> alpha = std::nullopt);

/// Single-bandwidth kernel estimate sum Y_i K(d_i/h) / sum K(d_i/h).
double batch_estimate(std::span<const double> distances, std::span<const double> responses, const Kernel& kernel,
                      double h);
double batch_estimate(const Curve& query, const Dataset& data, const Kernel& kernel, double h,
                      const FittedSemiNorm& seminorm);

/// Plug-in constants of the single-bandwidth estimator: the recursive formulas with
/// every h_i replaced by h.
PlugInConstants batch_plug_in_constants(std::span<const double> distances, std::span<const double> responses,
                                        const Kernel& kernel, double h);

/// Standard normal quantile.
double normal_quantile(double p);

}  // namespace funflow
