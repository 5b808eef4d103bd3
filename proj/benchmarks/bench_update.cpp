#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>

#include <benchmark/benchmark.h>

#include "funflow/curves.hpp"
#include "funflow/estimator.hpp"
#include "funflow/seminorms.hpp"

using namespace funflow;

namespace {

struct Fixture {
    Dataset data;
    Curve query;
    std::shared_ptr<const FittedSemiNorm> seminorm;

    explicit Fixture(std::size_t n)
        : data(simulate_regression_sample(n, 100, 0.1, 1)),
          query(simulate_brownian(1, 100, 2).front()),
          seminorm(std::make_shared<const FittedSemiNorm>(fit_seminorm(SemiNormSpec::pca(3), data))) {}
};

constexpr std::size_t kBlock = 64;

// Arrivals absorbed by the recursive state: O(1) amortized in n.
void recursive_update(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const Fixture f(n + kBlock);
    auto base = init_state(f.query, f.data.head(n), 0.0, Kernel(), BandwidthPlan::frozen(1.0, 0.1), f.seminorm);
    std::optional<QueryState> state;
    for (auto _ : st) {
        // copying and freeing the O(n) state stays out of the timed region
        st.PauseTiming();
        state.reset();
        state.emplace(base);
        st.ResumeTiming();
        for (std::size_t i = n; i < n + kBlock; ++i) {
            state->update(f.data.curve(i), f.data.responses()[i]);
            benchmark::DoNotOptimize(predict(*state));
        }
    }
    st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * kBlock));
}

// One arrival absorbed by recomputing every distance and the single-bandwidth estimate: O(n).
void batch_refit(benchmark::State& st) {
    const Fixture f(static_cast<std::size_t>(st.range(0)) + 1);
    for (auto _ : st) {
        const auto d = distances_to(*f.seminorm, f.query, f.data);
        const double S = *std::max_element(d.begin(), d.end());
        const double h = BandwidthPlan::frozen(1.0, 0.1).bandwidth(d.size(), S);
        benchmark::DoNotOptimize(batch_estimate(d, f.data.responses(), Kernel(), h));
    }
    st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations()));
}

void seminorm_distance(benchmark::State& st) {
    const Fixture f(200);
    const auto& x = f.data.curve(0);
    for (auto _ : st) benchmark::DoNotOptimize(f.seminorm->distance(f.query, x));
}

}  // namespace

BENCHMARK(recursive_update)->RangeMultiplier(4)->Range(100, 6400);
BENCHMARK(batch_refit)->RangeMultiplier(4)->Range(100, 6400);
BENCHMARK(seminorm_distance);
BENCHMARK_MAIN();
