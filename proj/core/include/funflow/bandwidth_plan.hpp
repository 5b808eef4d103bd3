#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace funflow {

enum class ScaleMode { frozen, running };

/// h_i = C * S_i * i^(-nu). Under `frozen`, S_i = S for every i (S defaults to the
/// largest distance seen at initialization). Under `running`, S_i is the largest of
/// the first i distances.
struct BandwidthPlan {
    double C = 1.0;
    double nu = 0.1;
    ScaleMode mode = ScaleMode::frozen;
    std::optional<double> scale;

    static BandwidthPlan frozen(double C, double nu, std::optional<double> scale = std::nullopt) {
        return {C, nu, ScaleMode::frozen, scale};
    }
    static BandwidthPlan running(double C, double nu) { return {C, nu, ScaleMode::running, std::nullopt}; }
    /// h_i = h for every i (nu = 0): the single-bandwidth estimator.
    static BandwidthPlan constant(double h) { return {h, 0.0, ScaleMode::frozen, 1.0}; }

    /// Checks C > 0, nu in [0,1] and a positive frozen scale if one is set.
    void validate() const;

    /// Bandwidth for 1-based index i and scale value S_i.
    double bandwidth(std::size_t i, double scale_value) const;
};

std::string_view scale_mode_name(ScaleMode mode) noexcept;

/// h_1..h_n = C S i^(-nu).
std::vector<double> bandwidth_sequence(double C, double nu, double S, std::size_t n);

}  // namespace funflow
