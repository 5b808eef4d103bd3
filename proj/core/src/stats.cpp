#include "funflow/stats.hpp"

#include <cmath>

#include "funflow/errors.hpp"

namespace funflow {

namespace {

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double central_moment(std::span<const double> v, double mean, int order) {
    double s = 0.0;
    for (double x : v) s += std::pow(x - mean, order);
    return s / static_cast<double>(v.size());
}

}  // namespace

Summary summarize(std::span<const double> values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    s.mean = mean_of(values);
    s.sd = values.size() > 1 ? std::sqrt(sample_variance(values)) : 0.0;
    return s;
}

double sample_variance(std::span<const double> values) {
    require(values.size() >= 2, ErrorCode::invalid_argument, "variance needs at least two values");
    const double m = mean_of(values);
    double s = 0.0;
    for (double x : values) s += (x - m) * (x - m);
    return s / static_cast<double>(values.size() - 1);
}

double skewness(std::span<const double> values) {
    require(values.size() >= 3, ErrorCode::invalid_argument, "skewness needs at least three values");
    const double m = mean_of(values);
    const double m2 = central_moment(values, m, 2);
    return central_moment(values, m, 3) / std::pow(m2, 1.5);
}

double excess_kurtosis(std::span<const double> values) {
    require(values.size() >= 4, ErrorCode::invalid_argument, "kurtosis needs at least four values");
    const double m = mean_of(values);
    const double m2 = central_moment(values, m, 2);
    return central_moment(values, m, 4) / (m2 * m2) - 3.0;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorCode::invalid_argument, "line fit needs >= 2 paired points");
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    require(sxx > 0.0, ErrorCode::invalid_argument, "line fit needs distinct x values");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

}  // namespace funflow
