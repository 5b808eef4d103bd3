#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "funflow/curves.hpp"

namespace funflow {

/// Clamped cubic B-spline basis on [0,1] with equispaced interior knots.
class CubicBSplineBasis {
public:
    explicit CubicBSplineBasis(std::size_t interior_knots);

    std::size_t interior_knots() const noexcept { return interior_; }
    /// Number of basis functions, interior_knots + 4.
    std::size_t size() const noexcept { return interior_ + 4; }
    const std::vector<double>& knots() const noexcept { return knots_; }

    /// All basis functions (or their derivative of the given order, 0..3) at x in [0,1].
    Eigen::VectorXd evaluate(double x, int derivative = 0) const;
    /// Row j holds evaluate(x[j], derivative).
    Eigen::MatrixXd design(const Eigen::VectorXd& x, int derivative = 0) const;

private:
    std::size_t interior_;
    std::vector<double> knots_;
};

/// Second derivative of the least-squares cubic spline fit with k equispaced interior
/// knots, evaluated on the curve's grid. Needs p >= k + 4.
Curve spline_second_derivative(const Curve& x, std::size_t interior_knots);

}  // namespace funflow
