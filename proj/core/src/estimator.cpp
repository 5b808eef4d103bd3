#include "funflow/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "funflow/errors.hpp"

namespace funflow {

namespace {

bool close_relative(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

std::string_view cdf_policy_name(CdfPolicy policy) noexcept {
    return policy == CdfPolicy::frozen ? "frozen" : "refresh";
}

double normal_quantile(double p) {
    require(p > 0.0 && p < 1.0, ErrorCode::invalid_argument, "normal quantile needs p in (0,1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

RecursiveAccumulator::RecursiveAccumulator(double ell, Kernel kernel, BandwidthPlan plan, CdfPolicy policy,
                                           std::vector<double> cdf_reference)
    : ell_(ell), kernel_(kernel), plan_(plan), policy_(policy), reference_(std::move(cdf_reference)) {
    require(ell >= 0.0 && ell <= 1.0, ErrorCode::invalid_argument, "l must lie in [0,1]");
    plan_.validate();
    for (double d : reference_)
        require(std::isfinite(d) && d >= 0.0, ErrorCode::invalid_argument, "CDF reference distances must be >= 0");
    std::sort(reference_.begin(), reference_.end());
}

double RecursiveAccumulator::weight_cdf(double t) const {
    if (reference_.empty()) return 0.0;
    const auto count = std::upper_bound(reference_.begin(), reference_.end(), t) - reference_.begin();
    return static_cast<double>(count) / static_cast<double>(reference_.size());
}

double RecursiveAccumulator::empirical_cdf(double t) const {
    if (sorted_.empty()) return 0.0;
    return static_cast<double>(sorted_.count_at_most(t)) / static_cast<double>(sorted_.size());
}

double RecursiveAccumulator::last_bandwidth() const {
    require(!history_.empty(), ErrorCode::empty_dataset, "no observations yet");
    return history_.back().bandwidth;
}

void RecursiveAccumulator::add_terms(const Observation& obs) {
    const double k = kernel_(obs.distance / obs.bandwidth);
    const double cdf = weight_cdf(obs.bandwidth);
    if (k > 0.0 && cdf == 0.0 && ell_ > 0.0) {
        fail(ErrorCode::degenerate_cdf, "F^(h) = 0 at bandwidth " + std::to_string(obs.bandwidth) +
                                            " for an observation inside the kernel support; refresh the CDF");
    }
    wsum_ += std::pow(cdf, 1.0 - ell_);
    beta_sum_ += cdf;
    if (cdf == 0.0) ++zero_cdf_;
    if (k > 0.0) {
        const double w = ell_ == 0.0 ? k : k / std::pow(cdf, ell_);
        num_ += obs.response * w;
        den_ += w;
        num_unw_ += obs.response * k;
        num2_unw_ += obs.response * obs.response * k;
        den_unw_ += k;
        if (cdf > 0.0) {
            m1_sum_ += k / cdf;
            m2_sum_ += k * k / cdf;
        }
    }
}

void RecursiveAccumulator::push(double d, double y) {
    require(std::isfinite(d) && d >= 0.0, ErrorCode::invalid_argument, "distance must be finite and >= 0");
    require(std::isfinite(y), ErrorCode::invalid_argument, "response must be finite");
    const double running = std::max(running_max_, d);
    double scale_value = running;
    if (plan_.mode == ScaleMode::frozen) {
        require(plan_.scale.has_value(), ErrorCode::degenerate_bandwidth, "frozen bandwidth plan has no scale");
        scale_value = *plan_.scale;
    }
    const Observation obs{d, y, plan_.bandwidth(history_.size() + 1, scale_value)};
    require(obs.bandwidth > 0.0 && std::isfinite(obs.bandwidth), ErrorCode::degenerate_bandwidth,
            "bandwidth for observation " + std::to_string(history_.size() + 1) + " is not positive");
    if (policy_ == CdfPolicy::frozen) add_terms(obs);  // may throw; nothing committed yet
    running_max_ = running;
    history_.push_back(obs);
    sorted_.insert(d);
    if (policy_ == CdfPolicy::refresh) refresh();
}

void RecursiveAccumulator::refresh() {
    reference_ = sorted_.to_vector();
    num_ = den_ = wsum_ = num_unw_ = num2_unw_ = den_unw_ = m1_sum_ = m2_sum_ = beta_sum_ = 0.0;
    zero_cdf_ = 0;
    for (const auto& obs : history_) add_terms(obs);
}

void RecursiveAccumulator::set_policy(CdfPolicy policy) {
    policy_ = policy;
    if (policy_ == CdfPolicy::refresh) refresh();
}

double RecursiveAccumulator::phi() const {
    require(wsum_ > 0.0, ErrorCode::degenerate_cdf, "sum of F^(h_i)^(1-l) is zero");
    return num_ / wsum_;
}

double RecursiveAccumulator::f() const {
    require(wsum_ > 0.0, ErrorCode::degenerate_cdf, "sum of F^(h_i)^(1-l) is zero");
    return den_ / wsum_;
}

double RecursiveAccumulator::predict() const {
    if (!(den_ > 0.0)) {
        fail(ErrorCode::empty_neighborhood,
             "no observation falls inside its kernel bandwidth (n = " + std::to_string(size()) + ")");
    }
    return num_ / den_;
}

double RecursiveAccumulator::predict_unweighted() const {
    if (!(den_unw_ > 0.0)) {
        fail(ErrorCode::empty_neighborhood,
             "no observation falls inside its kernel bandwidth (n = " + std::to_string(size()) + ")");
    }
    return num_unw_ / den_unw_;
}

PlugInConstants RecursiveAccumulator::plug_in_constants() const {
    if (!(den_unw_ > 0.0)) fail(ErrorCode::empty_neighborhood, "plug-in constants need a nonempty neighborhood");
    if (zero_cdf_ > 0) {
        fail(ErrorCode::degenerate_cdf,
             std::to_string(zero_cdf_) + " observation(s) have F^(h_i) = 0; plug-in constants are undefined");
    }
    const double n = static_cast<double>(size());
    const double cdf_n = weight_cdf(last_bandwidth());
    require(cdf_n > 0.0, ErrorCode::degenerate_cdf, "F^(h_n) = 0");
    PlugInConstants c;
    c.m1 = m1_sum_ / n;
    c.m2 = m2_sum_ / n;
    c.beta1 = beta_sum_ / (n * cdf_n);
    const double mean = num_unw_ / den_unw_;
    c.sigma2 = std::max(0.0, num2_unw_ / den_unw_ - mean * mean);
    return c;
}

ConfidenceBand RecursiveAccumulator::confidence_band(double alpha) const {
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::invalid_argument, "alpha must lie in (0,1)");
    require(ell_ == 0.0, ErrorCode::invalid_argument, "confidence bands are defined for the l = 0 estimator");
    const auto c = plug_in_constants();
    const double estimate = predict_unweighted();
    ConfidenceBand band;
    band.z = normal_quantile(1.0 - alpha / 2.0);
    if (c.sigma2 == 0.0) {
        band.low = band.high = estimate;
        band.zero_variance = true;
        return band;
    }
    const double n_cdf = static_cast<double>(size()) * weight_cdf(last_bandwidth());
    band.half_width = band.z * std::sqrt(c.m2 * c.sigma2 / (c.beta1 * c.m1 * c.m1)) / std::sqrt(n_cdf);
    band.low = estimate - band.half_width;
    band.high = estimate + band.half_width;
    return band;
}

double RecursiveAccumulator::pivot(double truth) const {
    const auto c = plug_in_constants();
    if (c.sigma2 == 0.0) fail(ErrorCode::zero_variance, "sigma^2 estimate is zero; the pivot is undefined");
    const double n_cdf = static_cast<double>(size()) * weight_cdf(last_bandwidth());
    return std::sqrt(n_cdf) * std::sqrt(c.beta1 * c.m1 * c.m1 / (c.m2 * c.sigma2)) * (predict_unweighted() - truth);
}

RecursiveAccumulator::Sums RecursiveAccumulator::sums() const noexcept {
    return {num_, den_, wsum_, num_unw_, num2_unw_, den_unw_, m1_sum_, m2_sum_, beta_sum_, zero_cdf_};
}

void RecursiveAccumulator::check_invariants() const {
    const auto s = sums();
    for (double v : {s.num, s.den, s.wsum, s.num_unw, s.num2_unw, s.den_unw, s.m1_sum, s.m2_sum, s.beta_sum})
        require(std::isfinite(v), ErrorCode::integrity, "accumulator sums must be finite");
    require(s.den >= 0.0 && s.den_unw >= 0.0, ErrorCode::integrity, "accumulator denominators must be >= 0");
    require(s.m2_sum <= s.m1_sum * kernel_.sup() * (1.0 + 1e-12), ErrorCode::integrity,
            "m2_sum exceeds m1_sum * sup K");
    require(sorted_.size() == history_.size(), ErrorCode::integrity, "distance multiset out of sync");
}

RecursiveAccumulator RecursiveAccumulator::restore(double ell, Kernel kernel, BandwidthPlan plan, CdfPolicy policy,
                                                   std::vector<double> cdf_reference, std::vector<Observation> history,
                                                   double running_scale, const Sums& sums) {
    RecursiveAccumulator acc(ell, kernel, plan, policy, std::move(cdf_reference));
    acc.history_ = std::move(history);
    double running = 0.0;
    for (const auto& obs : acc.history_) {
        require(std::isfinite(obs.distance) && obs.distance >= 0.0 && std::isfinite(obs.response) &&
                    obs.bandwidth > 0.0,
                ErrorCode::integrity, "invalid stored observation");
        acc.sorted_.insert(obs.distance);
        running = std::max(running, obs.distance);
    }
    require(running == running_scale, ErrorCode::integrity, "stored running scale disagrees with the history");
    acc.running_max_ = running;
    for (const auto& obs : acc.history_) acc.add_terms(obs);
    const auto r = acc.sums();
    const bool same = close_relative(r.num, sums.num, 1e-9) && close_relative(r.den, sums.den, 1e-9) &&
                      close_relative(r.wsum, sums.wsum, 1e-9) && close_relative(r.num_unw, sums.num_unw, 1e-9) &&
                      close_relative(r.num2_unw, sums.num2_unw, 1e-9) &&
                      close_relative(r.den_unw, sums.den_unw, 1e-9) && close_relative(r.m1_sum, sums.m1_sum, 1e-9) &&
                      close_relative(r.m2_sum, sums.m2_sum, 1e-9) &&
                      close_relative(r.beta_sum, sums.beta_sum, 1e-9) && r.zero_cdf == sums.zero_cdf;
    require(same, ErrorCode::integrity, "stored sums do not match the stored observation history");
    // Keep the stored values bit-for-bit.
    acc.num_ = sums.num;
    acc.den_ = sums.den;
    acc.wsum_ = sums.wsum;
    acc.num_unw_ = sums.num_unw;
    acc.num2_unw_ = sums.num2_unw;
    acc.den_unw_ = sums.den_unw;
    acc.m1_sum_ = sums.m1_sum;
    acc.m2_sum_ = sums.m2_sum;
    acc.beta_sum_ = sums.beta_sum;
    acc.check_invariants();
    return acc;
}

QueryState::QueryState(Curve query, std::shared_ptr<const FittedSemiNorm> seminorm, RecursiveAccumulator accumulator)
    : query_(std::move(query)), seminorm_(std::move(seminorm)), acc_(std::move(accumulator)) {
    require(seminorm_ != nullptr, ErrorCode::invalid_argument, "query state needs a semi-norm");
    query_embedding_ = seminorm_->embed(query_);
}

double QueryState::distance_to(const Curve& x) const { return (seminorm_->embed(x) - query_embedding_).norm(); }

void QueryState::update(const Curve& x, double y) { acc_.push(distance_to(x), y); }

RecursiveAccumulator init_accumulator(std::span<const double> distances, std::span<const double> responses,
                                      double ell, const Kernel& kernel, const BandwidthPlan& plan,
                                      const StateOptions& options) {
    require(!distances.empty(), ErrorCode::empty_dataset, "cannot initialize an estimator on an empty dataset");
    require(distances.size() == responses.size(), ErrorCode::dimension, "distances and responses differ in length");
    BandwidthPlan resolved = plan;
    if (resolved.mode == ScaleMode::frozen && !resolved.scale) {
        const double s = *std::max_element(distances.begin(), distances.end());
        require(s > 0.0, ErrorCode::degenerate_bandwidth, "all distances are zero; the bandwidth scale is degenerate");
        resolved.scale = s;
    }
    std::vector<double> reference = options.cdf_reference ? *options.cdf_reference
                                                          : std::vector<double>(distances.begin(), distances.end());
    RecursiveAccumulator acc(ell, kernel, resolved, CdfPolicy::frozen, std::move(reference));
    for (std::size_t i = 0; i < distances.size(); ++i) acc.push(distances[i], responses[i]);
    if (options.policy == CdfPolicy::refresh) acc.set_policy(CdfPolicy::refresh);
    return acc;
}

QueryState init_state(const Curve& query, const Dataset& data, double ell, const Kernel& kernel,
                      const BandwidthPlan& plan, std::shared_ptr<const FittedSemiNorm> seminorm,
                      const StateOptions& options) {
    require(!data.empty(), ErrorCode::empty_dataset, "cannot initialize an estimator on an empty dataset");
    require(seminorm != nullptr, ErrorCode::invalid_argument, "query state needs a semi-norm");
    const auto& y = data.responses();
    const auto d = distances_to(*seminorm, query, data);
    auto acc = init_accumulator(d, y, ell, kernel, plan, options);
    return QueryState(query, std::move(seminorm), std::move(acc));
}

PredictionResult make_prediction(const RecursiveAccumulator& acc, std::optional<double> alpha) {
    PredictionResult r;
    r.estimate = acc.predict();
    auto& diag = r.diagnostics;
    diag.n = acc.size();
    diag.last_bandwidth = acc.last_bandwidth();
    diag.cdf_at_last_bandwidth = acc.weight_cdf(diag.last_bandwidth);
    diag.effective_sample = acc.den_unweighted();
    try {
        diag.constants = acc.plug_in_constants();
    } catch (const Error&) {
        diag.constants.reset();
    }
    if (alpha) r.band = acc.confidence_band(*alpha);
    return r;
}

double batch_estimate(std::span<const double> distances, std::span<const double> responses, const Kernel& kernel,
                      double h) {
    require(h > 0.0 && std::isfinite(h), ErrorCode::invalid_argument, "bandwidth must be positive");
    require(distances.size() == responses.size(), ErrorCode::dimension, "distances and responses differ in length");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < distances.size(); ++i) {
        const double k = kernel(distances[i] / h);
        num += responses[i] * k;
        den += k;
    }
    if (!(den > 0.0)) fail(ErrorCode::empty_neighborhood, "no observation within bandwidth " + std::to_string(h));
    return num / den;
}

double batch_estimate(const Curve& query, const Dataset& data, const Kernel& kernel, double h,
                      const FittedSemiNorm& seminorm) {
    require(!data.empty(), ErrorCode::empty_dataset, "empty dataset");
    return batch_estimate(distances_to(seminorm, query, data), data.responses(), kernel, h);
}

PlugInConstants batch_plug_in_constants(std::span<const double> distances, std::span<const double> responses,
                                        const Kernel& kernel, double h) {
    require(!distances.empty(), ErrorCode::empty_dataset, "empty dataset");
    require(distances.size() == responses.size(), ErrorCode::dimension, "distances and responses differ in length");
    const double n = static_cast<double>(distances.size());
    const double cdf =
        static_cast<double>(std::count_if(distances.begin(), distances.end(), [h](double d) { return d <= h; })) / n;
    double s1 = 0.0, s2 = 0.0, sy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < distances.size(); ++i) {
        const double k = kernel(distances[i] / h);
        s1 += k;
        s2 += k * k;
        sy += responses[i] * k;
        syy += responses[i] * responses[i] * k;
    }
    if (!(s1 > 0.0)) fail(ErrorCode::empty_neighborhood, "no observation within bandwidth " + std::to_string(h));
    PlugInConstants c;
    c.m1 = s1 / (n * cdf);
    c.m2 = s2 / (n * cdf);
    c.beta1 = 1.0;
    const double mean = sy / s1;
    c.sigma2 = std::max(0.0, syy / s1 - mean * mean);
    return c;
}

}  // namespace funflow
