#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "funflow/bandwidth_plan.hpp"
#include "funflow/curves.hpp"
#include "funflow/errors.hpp"
#include "funflow/estimator.hpp"
#include "funflow/seminorms.hpp"
#include "oracles.hpp"

using namespace funflow;
using funflow::testing::direct_bandwidths;
using funflow::testing::direct_sums;
using funflow::testing::kernel_quadratic;
using funflow::testing::kernel_uniform;
using funflow::testing::naive_cdf;
using funflow::testing::rel_close;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected a funflow::Error";
    return ErrorCode::invalid_argument;
}

struct Instance {
    std::vector<double> d, y;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::normal_distribution<double> z;
    Instance in;
    for (std::size_t i = 0; i < n; ++i) {
        in.d.push_back(u(rng));
        in.y.push_back(z(rng));
    }
    return in;
}

void expect_sums_match(const RecursiveAccumulator& acc, const funflow::testing::DirectSums& s, double tol) {
    EXPECT_TRUE(rel_close(acc.num(), s.num, tol)) << acc.num() << " vs " << static_cast<double>(s.num);
    EXPECT_TRUE(rel_close(acc.den(), s.den, tol));
    EXPECT_TRUE(rel_close(acc.wsum(), s.wsum, tol));
    EXPECT_TRUE(rel_close(acc.num_unweighted(), s.num_unw, tol));
    EXPECT_TRUE(rel_close(acc.num2_unweighted(), s.num2_unw, tol));
    EXPECT_TRUE(rel_close(acc.den_unweighted(), s.den_unw, tol));
    EXPECT_TRUE(rel_close(acc.m1_sum(), s.m1, tol));
    EXPECT_TRUE(rel_close(acc.m2_sum(), s.m2, tol));
    EXPECT_TRUE(rel_close(acc.beta_sum(), s.beta, tol));
}

}  // namespace

TEST(kernel, shapes) {
    const Kernel q(KernelKind::quadratic), u(KernelKind::uniform);
    EXPECT_EQ(q(0.0), 1.0);
    EXPECT_EQ(q(0.5), 0.75);
    EXPECT_EQ(q(1.0), 0.0);
    EXPECT_EQ(q(1.5), 0.0);
    EXPECT_EQ(u(1.0), 1.0);
    EXPECT_EQ(u(1.0000001), 0.0);
    EXPECT_EQ(Kernel::parse("uniform").kind(), KernelKind::uniform);
    EXPECT_THROW(Kernel::parse("gaussian"), Error);
}

TEST(bandwidth_plan, rules) {
    const auto h = bandwidth_sequence(1.0, 0.1, 2.0, 1024);
    EXPECT_EQ(h[0], 2.0);
    EXPECT_NEAR(h[1023], 1.0, 1e-15);
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LT(h[i], h[i - 1]);
    const auto inv = bandwidth_sequence(1.0, 1.0, 1.0, 10);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(inv[i], 1.0 / static_cast<double>(i + 1), 1e-15);
    EXPECT_THROW(bandwidth_sequence(0.0, 0.1, 1.0, 3), Error);
    EXPECT_THROW(bandwidth_sequence(1.0, 0.0, 1.0, 3), Error);
    EXPECT_THROW(bandwidth_sequence(1.0, 1.5, 1.0, 3), Error);
    EXPECT_EQ(BandwidthPlan::constant(0.3).bandwidth(17, 1.0), 0.3);
}

TEST(init_state, single_observation) {
    // S = d1, h1 = 2 d1, u = 1/2, F^(h1) = 1
    for (double ell : {0.0, 0.5, 1.0}) {
        const std::vector<double> d{0.4}, y{3.0};
        const auto acc = init_accumulator(d, y, ell, Kernel(), BandwidthPlan::frozen(2.0, 0.1));
        EXPECT_DOUBLE_EQ(acc.den(), 0.75);
        EXPECT_DOUBLE_EQ(acc.predict(), 3.0);
        EXPECT_EQ(acc.weight_cdf(acc.last_bandwidth()), 1.0);
    }
}

TEST(init_state, matches_the_definition) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const auto in = random_instance(rng, 5 + static_cast<std::size_t>(trial) * 7);
        const double S = *std::max_element(in.d.begin(), in.d.end());
        for (double ell : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const auto acc = init_accumulator(in.d, in.y, ell, Kernel(), BandwidthPlan::frozen(1.0, 0.3));
            const auto h = direct_bandwidths(1.0, 0.3, S, in.d.size());
            const auto s = direct_sums(in.d, in.y, h, in.d, ell, kernel_quadratic);
            expect_sums_match(acc, s, 1e-12);
            if (s.den > 0) {
                EXPECT_TRUE(rel_close(acc.predict(), s.num / s.den, 1e-12));
                EXPECT_TRUE(rel_close(acc.phi(), s.num / s.wsum, 1e-12));
                EXPECT_TRUE(rel_close(acc.f(), s.den / s.wsum, 1e-12));
            }
        }
    }
}

TEST(update_state, fold_equals_init_on_concatenated_data) {
    const auto data = simulate_regression_sample(80, 30, 0.1, 4);
    auto seminorm = std::make_shared<const FittedSemiNorm>(fit_seminorm(SemiNormSpec::pca(3), data));
    const auto query = simulate_brownian(1, 30, 99).front();
    const auto all_d = distances_to(*seminorm, query, data);
    const double S = *std::max_element(all_d.begin(), all_d.end());
    for (double ell : {0.0, 0.5, 1.0}) {
        StateOptions opts;
        opts.cdf_reference = all_d;
        const auto plan = BandwidthPlan::frozen(1.0, 0.2, S);
        const auto full = init_state(query, data, ell, Kernel(), plan, seminorm, opts);
        auto folded = init_state(query, data.head(20), ell, Kernel(), plan, seminorm, opts);
        for (std::size_t i = 20; i < data.size(); ++i) update_state(folded, data.curve(i), data.responses()[i]);
        const auto a = full.accumulator().sums(), b = folded.accumulator().sums();
        for (auto [x, z] : {std::pair{a.num, b.num}, {a.den, b.den}, {a.wsum, b.wsum}, {a.m1_sum, b.m1_sum},
                            {a.m2_sum, b.m2_sum}, {a.beta_sum, b.beta_sum}, {a.num2_unw, b.num2_unw}})
            EXPECT_TRUE(rel_close(x, z, 1e-12)) << x << " vs " << z;
        EXPECT_TRUE(rel_close(predict(full), predict(folded), 1e-12));
    }
}

TEST(update_state, out_of_support_observation_changes_nothing) {
    const std::vector<double> d{0.1, 0.2, 0.3}, y{1.0, 2.0, 4.0};
    auto acc = init_accumulator(d, y, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.1));
    const double num = acc.num(), den = acc.den(), before = acc.predict();
    acc.push(10.0, 100.0);
    EXPECT_EQ(acc.num(), num);
    EXPECT_EQ(acc.den(), den);
    EXPECT_EQ(acc.predict(), before);
    EXPECT_EQ(acc.size(), 4u);
}

TEST(update_state, duplicate_of_query_pulls_toward_its_response) {
    const auto data = simulate_regression_sample(30, 20, 0.1, 8);
    auto seminorm = std::make_shared<const FittedSemiNorm>(fit_seminorm(SemiNormSpec::pca(3), data));
    const auto query = simulate_brownian(1, 20, 3).front();
    auto state = init_state(query, data, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.1), seminorm);
    const double before = predict(state);
    const double target = before + 5.0;
    update_state(state, query, target);
    EXPECT_EQ(state.accumulator().history().back().distance, 0.0);
    EXPECT_GT(predict(state), before);
    EXPECT_LT(predict(state), target);
}

TEST(update_state, grid_mismatch) {
    const auto data = simulate_regression_sample(10, 20, 0.1, 8);
    auto seminorm = std::make_shared<const FittedSemiNorm>(fit_seminorm(SemiNormSpec::pca(2), data));
    auto state = init_state(data.curve(0), data, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.1), seminorm);
    EXPECT_EQ(code_of([&] { update_state(state, Curve(Grid(21), Eigen::VectorXd::Zero(21)), 1.0); }),
              ErrorCode::dimension);
    EXPECT_EQ(code_of([&] { init_state(data.curve(0), data.head(0), 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.1),
                                       seminorm); }),
              ErrorCode::empty_dataset);
}

TEST(predict, empty_neighborhood_is_an_error) {
    const std::vector<double> d{0.5, 0.6, 0.7}, y{1.0, 2.0, 3.0};
    const auto acc = init_accumulator(d, y, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.1, 0.01));
    EXPECT_EQ(acc.den(), 0.0);
    EXPECT_EQ(code_of([&] { acc.predict(); }), ErrorCode::empty_neighborhood);
}

TEST(predict, constants_means_and_hand_computation) {
    std::mt19937_64 rng(2);
    const auto in = random_instance(rng, 40);
    const std::vector<double> c(40, -2.5);
    for (double ell : {0.0, 0.5, 1.0})
        EXPECT_NEAR(init_accumulator(in.d, c, ell, Kernel(), BandwidthPlan::frozen(1.0, 0.1)).predict(), -2.5, 1e-12);

    // uniform kernel, everything inside: arithmetic mean
    const std::vector<double> d{0.1, 0.2, 0.15, 0.05}, y{1.0, 2.0, 6.0, 3.0};
    const auto u = init_accumulator(d, y, 0.0, Kernel(KernelKind::uniform), BandwidthPlan::frozen(1.0, 0.1, 1.0));
    EXPECT_NEAR(u.predict(), 3.0, 1e-15);

    // h = (1, 2^-1/2, 3^-1/2) with S = 1; d = (0.5, 0.5, 0.5)
    // K = 1 - 0.25, 1 - 0.5, 1 - 0.75 = 0.75, 0.5, 0.25
    const std::vector<double> d3{0.5, 0.5, 0.5}, y3{2.0, 4.0, 8.0};
    const auto h3 = init_accumulator(d3, y3, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.5, 1.0));
    EXPECT_NEAR(h3.predict(), (0.75 * 2 + 0.5 * 4 + 0.25 * 8) / 1.5, 1e-14);
}

TEST(predict, kernel_scaling_is_irrelevant) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto in = random_instance(rng, 50);
        for (double ell : {0.0, 0.5, 1.0}) {
            const auto a = init_accumulator(in.d, in.y, ell, Kernel(), BandwidthPlan::frozen(1.0, 0.2));
            const auto b =
                init_accumulator(in.d, in.y, ell, Kernel(KernelKind::quadratic, 7.5), BandwidthPlan::frozen(1.0, 0.2));
            EXPECT_TRUE(rel_close(a.predict(), b.predict(), 1e-12));
        }
    }
}

TEST(predict, ell_is_irrelevant_when_cdf_is_constant) {
    std::mt19937_64 rng(6);
    const auto in = random_instance(rng, 60);
    StateOptions opts;
    opts.cdf_reference = std::vector<double>{0.0};  // F^(h_i) = 1 for every i
    const double base = init_accumulator(in.d, in.y, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.2), opts).predict();
    for (double ell : {0.25, 0.5, 0.75, 1.0}) {
        const auto acc = init_accumulator(in.d, in.y, ell, Kernel(), BandwidthPlan::frozen(1.0, 0.2), opts);
        EXPECT_TRUE(rel_close(acc.predict(), base, 1e-12));
    }
}

TEST(predict, convex_combination_bound) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 50; ++t) {
        const auto in = random_instance(rng, 30);
        const auto acc = init_accumulator(in.d, in.y, 0.5, Kernel(), BandwidthPlan::frozen(1.0, 0.3));
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& o : acc.history()) {
            if (Kernel()(o.distance / o.bandwidth) > 0.0) {
                lo = std::min(lo, o.response);
                hi = std::max(hi, o.response);
            }
        }
        if (acc.den() > 0.0) {
            EXPECT_GE(acc.predict(), lo);
            EXPECT_LE(acc.predict(), hi);
        }
    }
}

TEST(batch_estimate, equals_constant_bandwidth_recursion) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 20; ++t) {
        const auto in = random_instance(rng, 40);
        const double h = 0.9;
        const auto acc = init_accumulator(in.d, in.y, 0.0, Kernel(), BandwidthPlan::constant(h));
        EXPECT_TRUE(rel_close(acc.predict(), batch_estimate(in.d, in.y, Kernel(), h), 1e-12));
    }
    const std::vector<double> d{0.1, 5.0}, y{7.0, -1.0};
    EXPECT_EQ(batch_estimate(d, y, Kernel(), 1.0), 7.0);
    EXPECT_EQ(batch_estimate(d, std::vector<double>{2.0, 2.0}, Kernel(), 10.0), 2.0);
    EXPECT_EQ(code_of([&] { batch_estimate(d, y, Kernel(), 0.01); }), ErrorCode::empty_neighborhood);
}

TEST(batch_plug_in, equal_bandwidths_give_unit_beta) {
    std::mt19937_64 rng(9);
    const auto in = random_instance(rng, 40);
    const auto c = batch_plug_in_constants(in.d, in.y, Kernel(), 1.5);
    EXPECT_DOUBLE_EQ(c.beta1, 1.0);
    const auto acc = init_accumulator(in.d, in.y, 0.0, Kernel(), BandwidthPlan::constant(1.5));
    EXPECT_NEAR(acc.plug_in_constants().beta1, 1.0, 1e-15);
}

TEST(empirical_cdf, examples_and_naive_oracle) {
    const std::vector<double> d{0.1, 0.2, 0.3}, y{0.0, 0.0, 0.0};
    const auto acc = init_accumulator(d, y, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.1));
    EXPECT_DOUBLE_EQ(acc.empirical_cdf(0.25), 2.0 / 3.0);
    EXPECT_EQ(acc.empirical_cdf(0.05), 0.0);
    EXPECT_EQ(acc.empirical_cdf(0.3), 1.0);
    EXPECT_EQ(acc.empirical_cdf(9.0), 1.0);

    std::mt19937_64 rng(10);
    const auto in = random_instance(rng, 200);
    const auto big = init_accumulator(in.d, in.y, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.1));
    std::uniform_real_distribution<double> t(-0.1, 2.1);
    for (int k = 0; k < 500; ++k) {
        const double x = t(rng);
        EXPECT_EQ(big.empirical_cdf(x), static_cast<double>(naive_cdf(in.d, x)));
    }
    // nondecreasing with exactly n jumps (distinct distances)
    auto sorted = in.d;
    std::sort(sorted.begin(), sorted.end());
    std::size_t jumps = 0;
    double prev = 0.0;
    for (double x : sorted) {
        const double below = big.empirical_cdf(std::nextafter(x, -1.0));
        const double at = big.empirical_cdf(x);
        EXPECT_GE(below, prev);
        if (at > below) ++jumps;
        prev = at;
    }
    EXPECT_EQ(jumps, in.d.size());
}

TEST(cdf_policy, refresh_uses_all_stored_distances) {
    std::mt19937_64 rng(11);
    const auto in = random_instance(rng, 60);
    const double S = *std::max_element(in.d.begin(), in.d.begin() + 20);
    StateOptions opts;
    opts.policy = CdfPolicy::refresh;
    const std::vector<double> d0(in.d.begin(), in.d.begin() + 20), y0(in.y.begin(), in.y.begin() + 20);
    auto acc = init_accumulator(d0, y0, 0.5, Kernel(), BandwidthPlan::frozen(1.0, 0.2), opts);
    for (std::size_t i = 20; i < 60; ++i) acc.push(in.d[i], in.y[i]);
    const auto h = direct_bandwidths(1.0, 0.2, S, 60);
    expect_sums_match(acc, direct_sums(in.d, in.y, h, in.d, 0.5, kernel_quadratic), 1e-12);
}

TEST(cdf_policy, degenerate_cdf_leaves_state_unchanged) {
    StateOptions opts;
    opts.cdf_reference = std::vector<double>{5.0};
    const std::vector<double> d{0.5}, y{1.0};
    EXPECT_EQ(code_of([&] { init_accumulator(d, y, 0.5, Kernel(), BandwidthPlan::frozen(1.0, 0.1, 1.0), opts); }),
              ErrorCode::degenerate_cdf);

    RecursiveAccumulator acc(0.5, Kernel(), BandwidthPlan::frozen(1.0, 1.0, 1.0), CdfPolicy::frozen, {0.9});
    acc.push(0.95, 1.0);  // F^(1) = 1, K(0.95) > 0
    const auto before = acc.sums();
    EXPECT_EQ(code_of([&] { acc.push(0.1, 2.0); }), ErrorCode::degenerate_cdf);  // h_2 = 0.5 < 0.9
    EXPECT_EQ(acc.size(), 1u);
    EXPECT_EQ(acc.sums().num, before.num);
    EXPECT_EQ(acc.sums().wsum, before.wsum);
}

TEST(scale_mode, running_scale) {
    const std::vector<double> d{0.2, 0.5, 0.1, 0.8}, y{1.0, 2.0, 3.0, 4.0};
    const auto acc = init_accumulator(d, y, 0.0, Kernel(), BandwidthPlan::running(1.0, 0.5));
    const std::vector<double> S{0.2, 0.5, 0.5, 0.8};
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_DOUBLE_EQ(acc.history()[i].bandwidth, S[i] * std::pow(static_cast<double>(i + 1), -0.5));
    const std::vector<double> zero{0.0}, one{1.0};
    EXPECT_EQ(code_of([&] { init_accumulator(zero, one, 0.0, Kernel(), BandwidthPlan::running(1.0, 0.5)); }),
              ErrorCode::degenerate_bandwidth);
    EXPECT_EQ(code_of([&] { init_accumulator(zero, one, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.5)); }),
              ErrorCode::degenerate_bandwidth);
}

TEST(plug_in_constants, uniform_kernel_inside) {
    const std::vector<double> d{0.01, 0.02, 0.03, 0.04}, y{1.0, 3.0, 1.0, 3.0};
    const auto acc = init_accumulator(d, y, 0.0, Kernel(KernelKind::uniform), BandwidthPlan::frozen(1.0, 0.1, 1.0));
    const auto c = acc.plug_in_constants();
    EXPECT_DOUBLE_EQ(c.m1, 1.0);
    EXPECT_DOUBLE_EQ(c.m2, 1.0);
    EXPECT_DOUBLE_EQ(c.beta1, 1.0);
    EXPECT_DOUBLE_EQ(c.sigma2, 1.0);

    const std::vector<double> flat(4, 2.0);
    const auto f = init_accumulator(d, flat, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.1, 1.0));
    EXPECT_EQ(f.plug_in_constants().sigma2, 0.0);
}

TEST(plug_in_constants, matches_the_definition) {
    std::mt19937_64 rng(12);
    const auto in = random_instance(rng, 80);
    const auto acc = init_accumulator(in.d, in.y, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.2));
    const double S = *std::max_element(in.d.begin(), in.d.end());
    const auto h = direct_bandwidths(1.0, 0.2, S, 80);
    const auto s = direct_sums(in.d, in.y, h, in.d, 0.0, kernel_quadratic);
    const auto c = acc.plug_in_constants();
    EXPECT_TRUE(rel_close(c.m1, s.m1 / 80, 1e-12));
    EXPECT_TRUE(rel_close(c.m2, s.m2 / 80, 1e-12));
    EXPECT_TRUE(rel_close(c.beta1, s.beta / (80 * naive_cdf(in.d, h.back())), 1e-12));
    const long double mean = s.num_unw / s.den_unw;
    EXPECT_TRUE(rel_close(c.sigma2, s.num2_unw / s.den_unw - mean * mean, 1e-10));
    EXPECT_LE(acc.m2_sum(), acc.m1_sum() * Kernel().sup());
}

TEST(plug_in_constants, zero_cdf_is_degenerate) {
    StateOptions opts;
    opts.cdf_reference = std::vector<double>{0.9, 0.95};
    const std::vector<double> d{0.01, 0.02, 0.03}, y{1.0, 2.0, 3.0};
    // h_3 = 3^-1 < 0.9 so F^(h_3) = 0
    const auto acc = init_accumulator(d, y, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 1.0, 1.0), opts);
    EXPECT_GT(acc.zero_cdf_count(), 0u);
    EXPECT_EQ(code_of([&] { acc.plug_in_constants(); }), ErrorCode::degenerate_cdf);
}

TEST(confidence_band, unit_constants) {
    std::vector<double> d(100, 0.1), y;
    for (int i = 0; i < 100; ++i) y.push_back(i % 2 == 0 ? 1.0 : -1.0);
    const auto acc = init_accumulator(d, y, 0.0, Kernel(KernelKind::uniform), BandwidthPlan::frozen(1.0, 0.1, 1.0));
    const auto band = acc.confidence_band(0.05);
    // z_{0.975} = 1.959963984540054
    EXPECT_NEAR(band.half_width, 0.1959963984540054, 1e-12);
    EXPECT_NEAR(band.low, acc.predict() - band.half_width, 1e-15);
    EXPECT_LE(band.low, acc.predict());
    EXPECT_GE(band.high, acc.predict());
    EXPECT_LT(acc.confidence_band(0.32).half_width, band.half_width);
}

TEST(confidence_band, quadrupling_n_halves_the_width) {
    std::mt19937_64 rng(13);
    const auto in = random_instance(rng, 10);
    std::vector<double> d4, y4;
    for (int r = 0; r < 4; ++r)
        for (std::size_t i = 0; i < 10; ++i) {
            d4.push_back(in.d[i] * 0.01);
            y4.push_back(in.y[i]);
        }
    std::vector<double> d1(d4.begin(), d4.begin() + 10), y1(y4.begin(), y4.begin() + 10);
    const auto plan = BandwidthPlan::frozen(1.0, 0.1, 1.0);
    const auto a = init_accumulator(d1, y1, 0.0, Kernel(KernelKind::uniform), plan);
    const auto b = init_accumulator(d4, y4, 0.0, Kernel(KernelKind::uniform), plan);
    ASSERT_EQ(a.weight_cdf(a.last_bandwidth()), b.weight_cdf(b.last_bandwidth()));
    EXPECT_NEAR(b.confidence_band(0.1).half_width / a.confidence_band(0.1).half_width, 0.5, 1e-12);
}

TEST(confidence_band, zero_variance_and_preconditions) {
    const std::vector<double> d{0.1, 0.2, 0.3}, y(3, 4.0);
    const auto acc = init_accumulator(d, y, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.1, 1.0));
    const auto band = acc.confidence_band(0.05);
    EXPECT_TRUE(band.zero_variance);
    EXPECT_EQ(band.low, 4.0);
    EXPECT_EQ(band.high, 4.0);
    EXPECT_EQ(code_of([&] { acc.pivot(4.0); }), ErrorCode::zero_variance);
    const auto l1 = init_accumulator(d, y, 1.0, Kernel(), BandwidthPlan::frozen(1.0, 0.1, 1.0));
    EXPECT_EQ(code_of([&] { l1.confidence_band(0.05); }), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([&] { acc.confidence_band(1.5); }), ErrorCode::invalid_argument);
}

TEST(confidence_band, pivot_inverts_the_band) {
    std::mt19937_64 rng(14);
    const auto in = random_instance(rng, 100);
    const auto acc = init_accumulator(in.d, in.y, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.2));
    const auto band = acc.confidence_band(0.05);
    EXPECT_NEAR(acc.pivot(band.low), band.z, 1e-9);
    EXPECT_NEAR(acc.pivot(band.high), -band.z, 1e-9);
}

TEST(normal_quantile, reference_values) {
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
    EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
    EXPECT_NEAR(normal_quantile(0.84), 0.994457883209753, 1e-12);
    EXPECT_THROW(normal_quantile(1.0), Error);
}

TEST(make_prediction, diagnostics) {
    std::mt19937_64 rng(15);
    const auto in = random_instance(rng, 50);
    const auto acc = init_accumulator(in.d, in.y, 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.2));
    const auto r = make_prediction(acc, 0.05);
    EXPECT_EQ(r.estimate, acc.predict());
    ASSERT_TRUE(r.band.has_value());
    EXPECT_EQ(r.band->half_width, acc.confidence_band(0.05).half_width);
    EXPECT_EQ(r.diagnostics.n, 50u);
    EXPECT_EQ(r.diagnostics.effective_sample, acc.den_unweighted());
    ASSERT_TRUE(r.diagnostics.constants.has_value());
    EXPECT_FALSE(make_prediction(acc).band.has_value());
}
