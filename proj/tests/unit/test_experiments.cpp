#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "funflow/errors.hpp"
#include "funflow/experiments.hpp"
#include "funflow/stats.hpp"

using namespace funflow;

namespace {

ExperimentConfig small_config(std::size_t reps, std::size_t n = 60) {
    ExperimentConfig cfg;
    cfg.design.n = n;
    cfg.design.p = 40;
    cfg.replications = reps;
    cfg.seed = 5;
    return cfg;
}

ExperimentConfig scalar_config(std::size_t reps, std::size_t n) {
    ExperimentConfig cfg = small_config(reps, n);
    cfg.design.kind = DesignKind::scalar_uniform;
    cfg.estimator.seminorm = SemiNormSpec::pca(1);
    cfg.estimator.C = 1.0;
    cfg.estimator.nu = 2.0 / 3.0;
    return cfg;
}

}  // namespace

TEST(stats, summaries) {
    const std::vector<double> v{1.0, 2.0, 4.0, 7.0};
    const auto s = summarize(v);
    EXPECT_EQ(s.count, 4u);
    EXPECT_DOUBLE_EQ(s.mean, 3.5);
    EXPECT_NEAR(s.sd, std::sqrt(7.0), 1e-14);  // deviations -2.5,-1.5,0.5,3.5 -> 21 / 3
    const auto line = fit_line(std::vector<double>{0, 1, 2, 3}, std::vector<double>{1, 3, 5, 7});
    EXPECT_NEAR(line.slope, 2.0, 1e-14);
    EXPECT_NEAR(line.intercept, 1.0, 1e-14);
    // symmetric sample: zero skewness
    EXPECT_NEAR(skewness(std::vector<double>{-2, -1, 0, 1, 2}), 0.0, 1e-15);
    // two-point sample: g2 = -2
    EXPECT_NEAR(excess_kurtosis(std::vector<double>{-1, 1, -1, 1}), -2.0, 1e-14);
}

TEST(draw_sample, deterministic_and_nested) {
    const Design design;
    auto r1 = make_stream(3, 7), r2 = make_stream(3, 7), r3 = make_stream(3, 7);
    const auto a = draw_sample(design, 50, r1);
    const auto b = draw_sample(design, 50, r2);
    const auto c = draw_sample(design, 120, r3);
    EXPECT_EQ(a.query.values(), b.query.values());
    EXPECT_EQ(a.train.responses(), b.train.responses());
    EXPECT_EQ(a.query.values(), c.query.values());
    EXPECT_EQ(a.query_response, c.query_response);
    for (std::size_t i = 0; i < 50; ++i) {
        EXPECT_EQ(a.train.curve(i).values(), c.train.curve(i).values());
        EXPECT_EQ(a.train.responses()[i], c.train.responses()[i]);
    }
    EXPECT_EQ(a.query_truth, target_operator(a.query));
    auto r4 = make_stream(3, 8);
    EXPECT_NE(draw_sample(design, 50, r4).query.values(), a.query.values());
}

TEST(draw_sample, scalar_uniform_design) {
    Design design;
    design.kind = DesignKind::scalar_uniform;
    design.noise_sd = 0.0;
    auto rng = make_stream(1);
    const auto s = draw_sample(design, 20, rng);
    EXPECT_NEAR(s.query_truth, 0.25, 1e-15);
    for (std::size_t i = 0; i < 20; ++i) {
        const auto& x = s.train.curve(i);
        EXPECT_EQ(x.values().minCoeff(), x.values().maxCoeff());
        EXPECT_NEAR(s.train.responses()[i], x[0] * x[0], 1e-14);
    }
}

TEST(mspe_study, noise_free_constant_target_is_exact) {
    auto cfg = small_config(12);
    cfg.design.noise_sd = 0.0;
    cfg.design.target = TargetKind::constant;
    cfg.design.target_constant = 2.0;
    const auto report = mspe_study(cfg, {{"c", std::nullopt, cfg.estimator}});
    EXPECT_EQ(report.cells[0].failures, 0u);
    EXPECT_NEAR(report.cells[0].mspe.mean, 0.0, 1e-24);
}

TEST(mspe_study, summaries_recompute_from_records_and_threads_do_not_matter) {
    auto cfg = small_config(16);
    std::vector<StudyCell> cells{{"a", 40, cfg.estimator}, {"b", 80, cfg.estimator}};
    cfg.threads = 1;
    const auto one = mspe_study(cfg, cells);
    cfg.threads = 4;
    const auto four = mspe_study(cfg, cells);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = four.cells[c];
        std::vector<double> errs;
        for (const auto& r : cell.records) {
            EXPECT_EQ(r.squared_error, one.cells[c].records[r.replication].squared_error);
            if (!r.failed) {
                EXPECT_EQ(r.squared_error, (r.prediction - r.response) * (r.prediction - r.response));
                errs.push_back(r.squared_error);
            }
        }
        const auto s = summarize(errs);
        EXPECT_EQ(s.mean, cell.mspe.mean);
        EXPECT_EQ(s.sd, cell.mspe.sd);
        EXPECT_EQ(cell.mspe.mean, one.cells[c].mspe.mean);
    }
    // equal n and settings: identical data, identical errors
    std::vector<StudyCell> twins{{"x", 40, cfg.estimator}, {"y", 40, cfg.estimator}};
    const auto t = mspe_study(cfg, twins);
    EXPECT_EQ(t.cells[0].mspe.mean, t.cells[1].mspe.mean);
    std::ostringstream csv;
    one.write_csv(csv);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "label,n,mspe,sd,failures,replications");
}

TEST(mspe_study, failures_are_recorded_not_fatal) {
    auto cfg = small_config(6);
    auto st = cfg.estimator;
    st.C = 1e-6;  // almost surely empty neighborhoods
    st.nu = 1.0;
    const auto report = mspe_study(cfg, {{"tiny", std::nullopt, st}});
    EXPECT_GT(report.cells[0].failures, 0u);
    for (const auto& r : report.cells[0].records)
        if (r.failed) EXPECT_FALSE(r.error.empty());
}

TEST(coverage_study, degenerate_variance_is_excluded) {
    auto cfg = small_config(10);
    cfg.design.noise_sd = 0.0;
    cfg.design.target = TargetKind::constant;
    const auto report = coverage_study(cfg, 0.05);
    EXPECT_EQ(report.used, 0u);
    EXPECT_EQ(report.excluded, 10u);

    auto bad = small_config(2);
    bad.estimator.ell = 0.5;
    EXPECT_THROW(coverage_study(bad, 0.05), Error);
}

TEST(coverage_study, known_kappa_design_small_run) {
    const auto report = coverage_study(scalar_config(200, 300), 0.05);
    EXPECT_EQ(report.used + report.excluded, 200u);
    EXPECT_EQ(report.pivots.size(), report.used);
    EXPECT_GE(report.coverage, 0.85);
    EXPECT_LE(report.coverage, 1.0);
}

TEST(plug_in_variance, consistent_on_the_known_kappa_design) {
    // sigma^2 = 0.01; average over 100 replications at n = 500
    const auto cfg = scalar_config(100, 500);
    double sum = 0.0;
    for (std::size_t r = 0; r < 100; ++r) {
        auto rng = make_stream(cfg.seed, r);
        const auto s = draw_sample(cfg.design, 500, rng);
        auto sn = std::make_shared<const FittedSemiNorm>(fit_seminorm(cfg.estimator.seminorm, s.train));
        const auto st = init_state(s.query, s.train, 0.0, cfg.estimator.kernel,
                                   BandwidthPlan::frozen(cfg.estimator.C, cfg.estimator.nu), sn);
        const double v = st.accumulator().plug_in_constants().sigma2;
        EXPECT_GE(v, 0.0);
        sum += v;
    }
    EXPECT_GE(sum / 100.0, 0.005);
    EXPECT_LE(sum / 100.0, 0.015);
}

TEST(estimate_small_ball_exponent, recovers_known_exponents) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double kappa : {1.0, 2.0, 3.0}) {
        std::vector<double> d(20000);
        for (auto& x : d) x = std::pow(u(rng), 1.0 / kappa);  // F(t) = t^kappa
        EXPECT_NEAR(estimate_small_ball_exponent(d), kappa, 0.1 * kappa);
    }
    EXPECT_THROW(estimate_small_ball_exponent(std::vector<double>{1.0, 1.0, 1.0}), Error);
}

TEST(rate_check, slope_is_negative_on_the_known_kappa_design) {
    auto cfg = scalar_config(60, 0);
    cfg.estimator.nu = 1.0 / 3.0;
    const auto report = rate_check({50, 100, 200, 400}, cfg);
    ASSERT_EQ(report.rows.size(), 4u);
    EXPECT_LT(report.slope, 0.0);
    EXPECT_NEAR(report.kappa_hat, 1.0, 0.15);
    EXPECT_NEAR(report.target_slope, -2.0 / (2.0 + report.kappa_hat), 1e-15);
    EXPECT_THROW(rate_check({100, 200}, cfg), Error);
}

TEST(timing_benchmark, smoke_and_growth) {
    auto cfg = small_config(1);
    const auto one = timing_benchmark(5, {1}, cfg, 1);
    ASSERT_EQ(one.rows.size(), 1u);
    EXPECT_GT(one.rows[0].recursive_seconds, 0.0);
    EXPECT_GT(one.rows[0].batch_seconds, 0.0);

    // O(n) work per arrival for the batch arm: superlinear cumulative cost
    cfg.design.p = 100;
    const auto grow = timing_benchmark(10, {100, 200, 400, 800}, cfg, 3);
    EXPECT_GE(grow.batch_exponent, 1.6);
    EXPECT_GT(grow.speedup(800), 5.0);
    EXPECT_THROW(grow.speedup(7), Error);
    EXPECT_THROW(timing_benchmark(0, {1}, cfg, 1), Error);
}

TEST(cv_selection_study, tallies_add_up) {
    auto cfg = small_config(8, 40);
    const auto report = cv_selection_study(cfg);
    std::size_t total = 0, best = 0;
    for (const auto& [pair, count] : report.counts) {
        total += count;
        best = std::max(best, count);
    }
    EXPECT_EQ(total + report.failures, 8u);
    EXPECT_EQ(report.selections.size(), total);
    EXPECT_EQ(report.counts.at(report.modal), best);
}

TEST(plot_series, rows) {
    std::ostringstream out;
    write_plot_series(out, "s", {1.0, 2.0}, {3.0, 4.5});
    EXPECT_EQ(out.str(), "s,1,3\ns,2,4.5\n");
    EXPECT_THROW(write_plot_series(out, "s", {1.0}, {}), Error);
}
