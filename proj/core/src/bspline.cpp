#include "funflow/bspline.hpp"

#include <Eigen/Dense>

#include "funflow/errors.hpp"

namespace funflow {

namespace {
constexpr int kDegree = 3;
}

CubicBSplineBasis::CubicBSplineBasis(std::size_t interior_knots) : interior_(interior_knots) {
    knots_.assign(kDegree + 1, 0.0);
    for (std::size_t j = 1; j <= interior_; ++j)
        knots_.push_back(static_cast<double>(j) / static_cast<double>(interior_ + 1));
    knots_.insert(knots_.end(), kDegree + 1, 1.0);
}

Eigen::VectorXd CubicBSplineBasis::evaluate(double x, int derivative) const {
    require(derivative >= 0 && derivative <= kDegree, ErrorCode::invalid_argument,
            "spline derivative order must be in 0..3");
    require(x >= 0.0 && x <= 1.0, ErrorCode::invalid_argument, "spline argument outside [0,1]");
    const auto& t = knots_;
    const std::size_t m = t.size();

    // Knot span with t[span] <= x < t[span+1]; x == 1 belongs to the last nonempty span.
    std::size_t span = kDegree;
    while (span + 1 < m - kDegree - 1 && x >= t[span + 1]) ++span;

    // table[d][i]: degree-d basis function i at x.
    std::vector<std::vector<double>> table(kDegree + 1);
    table[0].assign(m - 1, 0.0);
    table[0][span] = 1.0;
    for (int d = 1; d <= kDegree; ++d) {
        table[d].assign(m - 1 - static_cast<std::size_t>(d), 0.0);
        for (std::size_t i = 0; i < table[d].size(); ++i) {
            double v = 0.0;
            const double left = t[i + d] - t[i];
            const double right = t[i + d + 1] - t[i + 1];
            if (left > 0.0) v += (x - t[i]) / left * table[d - 1][i];
            if (right > 0.0) v += (t[i + d + 1] - x) / right * table[d - 1][i + 1];
            table[d][i] = v;
        }
    }

    auto deriv = [&](auto&& self, std::size_t i, int degree, int order) -> double {
        if (order == 0) return table[degree][i];
        double v = 0.0;
        const double left = t[i + degree] - t[i];
        const double right = t[i + degree + 1] - t[i + 1];
        if (left > 0.0) v += self(self, i, degree - 1, order - 1) / left;
        if (right > 0.0) v -= self(self, i + 1, degree - 1, order - 1) / right;
        return degree * v;
    };

    Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) out[static_cast<Eigen::Index>(i)] = deriv(deriv, i, kDegree, derivative);
    return out;
}

Eigen::MatrixXd CubicBSplineBasis::design(const Eigen::VectorXd& x, int derivative) const {
    Eigen::MatrixXd b(x.size(), static_cast<Eigen::Index>(size()));
    for (Eigen::Index j = 0; j < x.size(); ++j) b.row(j) = evaluate(x[j], derivative).transpose();
    return b;
}

Curve spline_second_derivative(const Curve& x, std::size_t interior_knots) {
    const std::size_t p = x.size();
    require(p >= interior_knots + 4, ErrorCode::rank,
            "cubic spline with " + std::to_string(interior_knots) + " interior knots needs at least " +
                std::to_string(interior_knots + 4) + " grid points, got " + std::to_string(p));
    const CubicBSplineBasis basis(interior_knots);
    const Eigen::VectorXd t = x.grid().points();
    const Eigen::MatrixXd b = basis.design(t);
    const auto qr = b.colPivHouseholderQr();
    require(static_cast<std::size_t>(qr.rank()) == basis.size(), ErrorCode::rank,
            "spline design matrix is rank deficient on this grid");
    const Eigen::VectorXd coef = qr.solve(x.values());
    return Curve(x.grid(), Eigen::VectorXd(basis.design(t, 2) * coef));
}

}  // namespace funflow
