#include "funflow/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <ostream>

#include "funflow/errors.hpp"
#include "funflow/parallel.hpp"

namespace funflow {

double Design::truth(const Curve& x) const {
    return target == TargetKind::constant ? target_constant : target_operator(x);
}

Sample draw_sample(const Design& design, std::size_t n, Rng& rng) {
    require(n >= 1, ErrorCode::invalid_argument, "sample size must be >= 1");
    require(design.noise_sd >= 0.0, ErrorCode::invalid_argument, "noise sd must be >= 0");
    // Query first, then (curve, noise) pairs, so a smaller n sees a prefix of a larger one.
    const Grid grid(design.p);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double step_sd = std::sqrt(grid.step());
    auto draw_curve = [&] {
        Eigen::VectorXd v(static_cast<Eigen::Index>(design.p));
        if (design.kind == DesignKind::brownian) {
            v[0] = 0.0;
            for (Eigen::Index j = 1; j < v.size(); ++j) v[j] = v[j - 1] + step_sd * z(rng);
        } else {
            v.setConstant(unif(rng));
        }
        return Curve(grid, std::move(v));
    };
    auto query = design.kind == DesignKind::brownian
                     ? draw_curve()
                     : Curve::from_function(grid, [](double) { return 0.5; });
    const double truth = design.truth(query);
    const double response = truth + design.noise_sd * z(rng);
    std::vector<Curve> curves;
    std::vector<double> y;
    curves.reserve(n);
    y.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        curves.push_back(draw_curve());
        y.push_back(design.truth(curves.back()) + design.noise_sd * z(rng));
    }
    return Sample{Dataset(std::move(curves), std::move(y)), std::move(query), response, truth};
}

namespace {

struct FittedQuery {
    std::shared_ptr<const FittedSemiNorm> seminorm;
    QueryState state;
};

FittedQuery fit_query(const Sample& sample, const EstimatorSettings& settings) {
    auto seminorm = std::make_shared<const FittedSemiNorm>(fit_seminorm(settings.seminorm, sample.train));
    double C = settings.C;
    double nu = settings.nu;
    if (settings.use_cv) {
        const auto report = cv_select(pairwise_distances(*seminorm, sample.train), sample.train.responses(),
                                      settings.cv_grid, settings.ell, settings.kernel);
        C = report.C;
        nu = report.nu;
    }
    auto state = init_state(sample.query, sample.train, settings.ell, settings.kernel, BandwidthPlan::frozen(C, nu),
                            seminorm);
    return {std::move(seminorm), std::move(state)};
}

void write_row(std::ostream& out, std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
        if (!first) out << ',';
        out << c;
        first = false;
    }
    out << '\n';
}

std::string num(double v) {
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
}

}  // namespace

double fit_and_predict(const Sample& sample, const EstimatorSettings& settings) {
    return predict(fit_query(sample, settings).state);
}

Summary summarize_records(const std::vector<ReplicationRecord>& records) {
    std::vector<double> errors;
    errors.reserve(records.size());
    for (const auto& r : records)
        if (!r.failed) errors.push_back(r.squared_error);
    return summarize(errors);
}

void StudyReport::write_csv(std::ostream& out) const {
    out << "label,n,mspe,sd,failures,replications\n";
    for (const auto& c : cells) {
        write_row(out, {c.label, std::to_string(c.n), num(c.mspe.mean), num(c.mspe.sd), std::to_string(c.failures),
                        std::to_string(c.records.size())});
    }
}

void StudyReport::write_records_csv(std::ostream& out) const {
    out << "label,replication,prediction,response,squared_error,failed\n";
    for (const auto& c : cells) {
        for (const auto& r : c.records) {
            write_row(out, {c.label, std::to_string(r.replication), num(r.prediction), num(r.response),
                            num(r.squared_error), r.failed ? "1" : "0"});
        }
    }
}

StudyReport mspe_study(const ExperimentConfig& cfg, const std::vector<StudyCell>& cells) {
    require(cfg.replications >= 1, ErrorCode::invalid_argument, "need at least one replication");
    StudyReport report;
    for (const auto& cell : cells) {
        CellReport c;
        c.label = cell.label;
        c.n = cell.n.value_or(cfg.design.n);
        c.records.resize(cfg.replications);
        report.cells.push_back(std::move(c));
    }
    parallel_for(
        cfg.replications,
        [&](std::size_t r) {
            std::map<std::size_t, Sample> samples;
            for (std::size_t k = 0; k < cells.size(); ++k) {
                auto& rec = report.cells[k].records[r];
                rec.replication = r;
                const std::size_t n = report.cells[k].n;
                auto it = samples.find(n);
                if (it == samples.end()) {
                    auto rng = make_stream(cfg.seed, r);
                    it = samples.emplace(n, draw_sample(cfg.design, n, rng)).first;
                }
                const Sample& s = it->second;
                rec.response = s.query_response;
                rec.truth = s.query_truth;
                try {
                    rec.prediction = fit_and_predict(s, cells[k].settings);
                    rec.squared_error = (rec.prediction - rec.response) * (rec.prediction - rec.response);
                } catch (const Error& e) {
                    rec.failed = true;
                    rec.error = e.what();
                }
            }
        },
        cfg.threads);
    for (auto& c : report.cells) {
        c.failures = static_cast<std::size_t>(
            std::count_if(c.records.begin(), c.records.end(), [](const ReplicationRecord& r) { return r.failed; }));
        c.mspe = summarize_records(c.records);
    }
    return report;
}

void CoverageReport::write_csv(std::ostream& out) const {
    out << "alpha,coverage,used,excluded,pivot_mean,pivot_skewness,pivot_excess_kurtosis,mean_bias_scale\n";
    write_row(out, {num(alpha), num(coverage), std::to_string(used), std::to_string(excluded), num(pivot_mean),
                    num(pivot_skewness), num(pivot_excess_kurtosis), num(mean_bias_scale)});
}

CoverageReport coverage_study(const ExperimentConfig& cfg, double alpha) {
    require(cfg.estimator.ell == 0.0, ErrorCode::invalid_argument, "coverage study needs the l = 0 estimator");
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::invalid_argument, "alpha must lie in (0,1)");
    struct Outcome {
        bool used = false;
        bool covered = false;
        double pivot = 0.0;
        double bias_scale = 0.0;
    };
    std::vector<Outcome> outcomes(cfg.replications);
    parallel_for(
        cfg.replications,
        [&](std::size_t r) {
            auto rng = make_stream(cfg.seed, r);
            const auto sample = draw_sample(cfg.design, cfg.design.n, rng);
            try {
                const auto fq = fit_query(sample, cfg.estimator);
                const auto& acc = fq.state.accumulator();
                const auto band = acc.confidence_band(alpha);
                if (band.zero_variance) return;
                Outcome o;
                o.used = true;
                o.covered = band.low <= sample.query_truth && sample.query_truth <= band.high;
                o.pivot = acc.pivot(sample.query_truth);
                const double h = acc.last_bandwidth();
                o.bias_scale = h * std::sqrt(static_cast<double>(acc.size()) * acc.weight_cdf(h));
                outcomes[r] = o;
            } catch (const Error&) {
            }
        },
        cfg.threads);
    CoverageReport rep;
    rep.alpha = alpha;
    std::size_t covered = 0;
    double bias = 0.0;
    for (const auto& o : outcomes) {
        if (!o.used) {
            ++rep.excluded;
            continue;
        }
        ++rep.used;
        covered += o.covered ? 1 : 0;
        rep.pivots.push_back(o.pivot);
        bias += o.bias_scale;
    }
    if (rep.used > 0) {
        rep.coverage = static_cast<double>(covered) / static_cast<double>(rep.used);
        rep.pivot_mean = summarize(rep.pivots).mean;
        rep.mean_bias_scale = bias / static_cast<double>(rep.used);
    }
    if (rep.used >= 4) {
        rep.pivot_skewness = skewness(rep.pivots);
        rep.pivot_excess_kurtosis = excess_kurtosis(rep.pivots);
    }
    return rep;
}

double estimate_small_ball_exponent(std::vector<double> distances, double lo, double hi) {
    std::sort(distances.begin(), distances.end());
    const double n = static_cast<double>(distances.size());
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < distances.size(); ++k) {
        // Use the last index of a run of ties so F^ is evaluated correctly.
        if (k + 1 < distances.size() && distances[k + 1] == distances[k]) continue;
        const double cdf = static_cast<double>(k + 1) / n;
        if (cdf < lo || cdf > hi || distances[k] <= 0.0) continue;
        lx.push_back(std::log(distances[k]));
        ly.push_back(std::log(cdf));
    }
    require(lx.size() >= 2, ErrorCode::invalid_argument, "too few distinct distances to estimate kappa");
    return fit_line(lx, ly).slope;
}

void RateReport::write_csv(std::ostream& out) const {
    out << "n,mse,sd,failures\n";
    for (const auto& r : rows) write_row(out, {std::to_string(r.n), num(r.mse), num(r.sd), std::to_string(r.failures)});
    out << "# slope," << num(slope) << "\n# kappa_hat," << num(kappa_hat) << "\n# target_slope," << num(target_slope)
        << '\n';
}

RateReport rate_check(const std::vector<std::size_t>& ns, const ExperimentConfig& cfg) {
    require(ns.size() >= 3, ErrorCode::invalid_argument, "rate check needs at least three sample sizes");
    RateReport rep;
    std::vector<double> kappas(cfg.replications, std::nan(""));
    const std::size_t largest = *std::max_element(ns.begin(), ns.end());
    std::vector<double> lx, ly;
    for (std::size_t n : ns) {
        std::vector<double> err(cfg.replications, std::nan(""));
        parallel_for(
            cfg.replications,
            [&](std::size_t r) {
                auto rng = make_stream(cfg.seed, r);
                const auto sample = draw_sample(cfg.design, n, rng);
                try {
                    const auto fq = fit_query(sample, cfg.estimator);
                    const double pred = predict(fq.state);
                    err[r] = (pred - sample.query_truth) * (pred - sample.query_truth);
                    if (n == largest) {
                        kappas[r] = estimate_small_ball_exponent(distances_to(*fq.seminorm, sample.query, sample.train));
                    }
                } catch (const Error&) {
                }
            },
            cfg.threads);
        RateRow row;
        row.n = n;
        std::vector<double> ok;
        for (double e : err) {
            if (std::isnan(e)) ++row.failures;
            else ok.push_back(e);
        }
        const auto s = summarize(ok);
        row.mse = s.mean;
        row.sd = s.sd;
        rep.rows.push_back(row);
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(row.mse));
    }
    rep.slope = fit_line(lx, ly).slope;
    std::vector<double> good;
    for (double k : kappas)
        if (std::isfinite(k)) good.push_back(k);
    rep.kappa_hat = good.empty() ? std::nan("") : summarize(good).mean;
    rep.target_slope = -2.0 / (2.0 + rep.kappa_hat);
    return rep;
}

double TimingReport::speedup(std::size_t N) const {
    for (const auto& r : rows)
        if (r.N == N) return r.batch_seconds / r.recursive_seconds;
    fail(ErrorCode::invalid_argument, "no timing row for N = " + std::to_string(N));
}

void TimingReport::write_csv(std::ostream& out) const {
    out << "N,recursive_seconds,batch_seconds\n";
    for (const auto& r : rows) write_row(out, {std::to_string(r.N), num(r.recursive_seconds), num(r.batch_seconds)});
}

TimingReport timing_benchmark(std::size_t n0, const std::vector<std::size_t>& Ns, const ExperimentConfig& cfg,
                              std::size_t repeats) {
    require(n0 >= 1, ErrorCode::invalid_argument, "initial sample size must be >= 1");
    require(!Ns.empty(), ErrorCode::invalid_argument, "need at least one N");
    require(repeats >= 1, ErrorCode::invalid_argument, "need at least one repeat");
    std::vector<std::size_t> checkpoints = Ns;
    std::sort(checkpoints.begin(), checkpoints.end());
    require(checkpoints.front() >= 1, ErrorCode::invalid_argument, "N values must be >= 1");
    const std::size_t max_n = checkpoints.back();

    auto rng = make_stream(cfg.seed, 0);
    const auto sample = draw_sample(cfg.design, n0 + max_n, rng);
    const auto initial = sample.train.head(n0);
    const auto& all = sample.train;
    const auto& y = all.responses();
    const auto& es = cfg.estimator;
    auto seminorm = std::make_shared<const FittedSemiNorm>(fit_seminorm(es.seminorm, initial));
    const auto plan = BandwidthPlan::frozen(es.C, es.nu);

    using clock = std::chrono::steady_clock;
    std::vector<double> rec_best(checkpoints.size(), std::numeric_limits<double>::infinity());
    std::vector<double> batch_best(checkpoints.size(), std::numeric_limits<double>::infinity());
    volatile double sink = 0.0;

    for (std::size_t pass = 0; pass < repeats; ++pass) {
        auto state = init_state(sample.query, initial, es.ell, es.kernel, plan, seminorm);
        clock::duration total{};
        std::size_t next = 0;
        for (std::size_t k = 1; k <= max_n; ++k) {
            const std::size_t idx = n0 + k - 1;
            const auto start = clock::now();
            state.update(all.curve(idx), y[idx]);
            try {
                sink = sink + predict(state);
            } catch (const Error&) {
            }
            total += clock::now() - start;
            while (next < checkpoints.size() && checkpoints[next] == k) {
                rec_best[next] = std::min(rec_best[next], std::chrono::duration<double>(total).count());
                ++next;
            }
        }

        total = {};
        next = 0;
        std::vector<double> d;
        for (std::size_t k = 1; k <= max_n; ++k) {
            const std::size_t n = n0 + k;
            const auto start = clock::now();
            const Eigen::VectorXd q = seminorm->embed(sample.query);
            d.resize(n);
            for (std::size_t i = 0; i < n; ++i) d[i] = (seminorm->embed(all.curve(i)) - q).norm();
            const double scale = *std::max_element(d.begin(), d.end());
            const double h = plan.bandwidth(n, scale);
            try {
                sink = sink + batch_estimate(d, std::span<const double>(y.data(), n), es.kernel, h);
            } catch (const Error&) {
            }
            total += clock::now() - start;
            while (next < checkpoints.size() && checkpoints[next] == k) {
                batch_best[next] = std::min(batch_best[next], std::chrono::duration<double>(total).count());
                ++next;
            }
        }
    }

    TimingReport rep;
    rep.n0 = n0;
    std::vector<double> lx, lr, lb;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        rep.rows.push_back({checkpoints[c], rec_best[c], batch_best[c]});
        lx.push_back(std::log(static_cast<double>(checkpoints[c])));
        lr.push_back(std::log(rec_best[c]));
        lb.push_back(std::log(batch_best[c]));
    }
    if (checkpoints.size() >= 2 && checkpoints.front() != checkpoints.back()) {
        rep.recursive_exponent = fit_line(lx, lr).slope;
        rep.batch_exponent = fit_line(lx, lb).slope;
    }
    return rep;
}

void CVSelectionReport::write_csv(std::ostream& out) const {
    out << "C,nu,count\n";
    for (const auto& [pair, count] : counts) write_row(out, {num(pair.first), num(pair.second), std::to_string(count)});
    out << "# modal," << num(modal.first) << ',' << num(modal.second) << "\n# failures," << failures << '\n';
}

CVSelectionReport cv_selection_study(const ExperimentConfig& cfg) {
    std::vector<std::optional<std::pair<double, double>>> picks(cfg.replications);
    parallel_for(
        cfg.replications,
        [&](std::size_t r) {
            auto rng = make_stream(cfg.seed, r);
            const auto sample = draw_sample(cfg.design, cfg.design.n, rng);
            try {
                const auto report =
                    cv_select(sample.train, cfg.estimator.cv_grid, cfg.estimator.ell, cfg.estimator.kernel,
                              cfg.estimator.seminorm);
                picks[r] = std::make_pair(report.C, report.nu);
            } catch (const Error&) {
            }
        },
        cfg.threads);
    CVSelectionReport rep;
    for (const auto& p : picks) {
        if (!p) {
            ++rep.failures;
            continue;
        }
        rep.selections.push_back(*p);
        ++rep.counts[*p];
    }
    std::size_t best = 0;
    for (const auto& [pair, count] : rep.counts) {
        if (count > best) {  // map order breaks ties toward smaller C, then smaller nu
            best = count;
            rep.modal = pair;
        }
    }
    return rep;
}

void write_plot_series(std::ostream& out, const std::string& series, const std::vector<double>& x,
                       const std::vector<double>& y) {
    require(x.size() == y.size(), ErrorCode::dimension, "plot series x and y differ in length");
    for (std::size_t i = 0; i < x.size(); ++i) write_row(out, {series, num(x[i]), num(y[i])});
}

}  // namespace funflow
