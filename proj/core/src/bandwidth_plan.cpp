#include "funflow/bandwidth_plan.hpp"

#include <cmath>
#include <string>

#include "funflow/errors.hpp"

namespace funflow {

void BandwidthPlan::validate() const {
    require(C > 0.0 && std::isfinite(C), ErrorCode::invalid_argument, "bandwidth constant C must be positive");
    require(nu >= 0.0 && nu <= 1.0, ErrorCode::invalid_argument, "bandwidth exponent nu must lie in [0,1]");
    if (scale)
        require(*scale > 0.0 && std::isfinite(*scale), ErrorCode::degenerate_bandwidth,
                "bandwidth scale must be positive");
}

double BandwidthPlan::bandwidth(std::size_t i, double scale_value) const {
    return C * scale_value * std::pow(static_cast<double>(i), -nu);
}

std::string_view scale_mode_name(ScaleMode mode) noexcept { return mode == ScaleMode::frozen ? "frozen" : "running"; }

std::vector<double> bandwidth_sequence(double C, double nu, double S, std::size_t n) {
    const auto plan = BandwidthPlan::frozen(C, nu, S);
    plan.validate();
    require(nu > 0.0, ErrorCode::invalid_argument, "bandwidth exponent nu must lie in (0,1]");
    std::vector<double> h(n);
    for (std::size_t i = 1; i <= n; ++i) h[i - 1] = plan.bandwidth(i, S);
    return h;
}

}  // namespace funflow
