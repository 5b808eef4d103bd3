#pragma once

#include <cstddef>
#include <span>

namespace funflow {

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    /// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
    double sd = 0.0;
};

Summary summarize(std::span<const double> values);
double sample_variance(std::span<const double> values);
/// Moment-based skewness g1.
double skewness(std::span<const double> values);
/// Moment-based excess kurtosis g2.
double excess_kurtosis(std::span<const double> values);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y = intercept + slope x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace funflow
