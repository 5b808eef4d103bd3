#include "funflow/seminorms.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "funflow/bspline.hpp"
#include "funflow/errors.hpp"

namespace funflow {

namespace {

constexpr double kRankTolerance = 1e-10;

// Gram-Schmidt under the trapezoid inner product, applied twice for stability.
void orthonormalize(std::vector<Eigen::VectorXd>& dirs, const Eigen::VectorXd& w) {
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < k; ++j) dirs[k] -= (dirs[j].cwiseProduct(w).dot(dirs[k])) * dirs[j];
        }
        const double norm = std::sqrt(dirs[k].cwiseProduct(w).dot(dirs[k]));
        require(norm > 0.0, ErrorCode::rank, "basis directions are linearly dependent");
        dirs[k] /= norm;
    }
}

// First significant coordinate made positive so fitted output is deterministic.
void normalize_sign(Eigen::VectorXd& v) {
    const double scale = v.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        if (std::abs(v[j]) > 1e-8 * scale) {
            if (v[j] < 0.0) v = -v;
            return;
        }
    }
}

Eigen::MatrixXd projection_embedding(const std::vector<Curve>& dirs, const Grid& grid) {
    const Eigen::VectorXd w = grid.weights();
    Eigen::MatrixXd e(static_cast<Eigen::Index>(dirs.size()), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 0; j < dirs.size(); ++j)
        e.row(static_cast<Eigen::Index>(j)) = dirs[j].values().cwiseProduct(w).transpose();
    return e;
}

Eigen::MatrixXd centered_matrix(const Dataset& data, bool center) {
    Eigen::MatrixXd x = data.matrix();
    if (center) x.rowwise() -= x.colwise().mean();
    return x;
}

Eigen::MatrixXd deriv_embedding(const Grid& grid, std::size_t k) {
    require(grid.size() >= k + 4, ErrorCode::rank,
            "DERIV semi-norm with " + std::to_string(k) + " interior knots needs at least " + std::to_string(k + 4) +
                " grid points");
    const CubicBSplineBasis basis(k);
    const Eigen::VectorXd t = grid.points();
    const Eigen::MatrixXd b = basis.design(t);
    const auto qr = b.colPivHouseholderQr();
    require(static_cast<std::size_t>(qr.rank()) == basis.size(), ErrorCode::rank,
            "spline design matrix is rank deficient on this grid");
    // Least-squares coefficient operator, m x p.
    const Eigen::MatrixXd coef = qr.solve(Eigen::MatrixXd::Identity(b.rows(), b.rows()));
    const Eigen::MatrixXd b2 = basis.design(t, 2);
    const Eigen::MatrixXd gram = b2.transpose() * grid.weights().asDiagonal() * b2;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double cutoff = 1e-12 * lambda.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = lambda.size() - 1; j >= 0; --j)
        if (lambda[j] > cutoff) keep.push_back(j);
    Eigen::MatrixXd root(static_cast<Eigen::Index>(keep.size()), gram.cols());
    for (std::size_t r = 0; r < keep.size(); ++r)
        root.row(static_cast<Eigen::Index>(r)) = std::sqrt(lambda[keep[r]]) * eig.eigenvectors().col(keep[r]).transpose();
    return root * coef;
}

}  // namespace

std::string_view seminorm_kind_name(SemiNormKind kind) noexcept {
    switch (kind) {
        case SemiNormKind::pca: return "pca";
        case SemiNormKind::fourier: return "fou";
        case SemiNormKind::deriv: return "deriv";
        case SemiNormKind::pls: return "pls";
    }
    return "?";
}

SemiNormSpec SemiNormSpec::parse(std::string_view text) {
    const auto colon = text.find(':');
    const auto name = text.substr(0, colon);
    SemiNormSpec spec;
    if (name == "pca") spec = pca();
    else if (name == "fou" || name == "fourier") spec = fourier();
    else if (name == "deriv") spec = deriv();
    else if (name == "pls") spec = pls();
    else fail(ErrorCode::invalid_argument, "unknown semi-norm '" + std::string(name) + "' (pca, fou, deriv, pls)");
    if (colon != std::string_view::npos) {
        const auto num = text.substr(colon + 1);
        std::size_t count = 0;
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), count);
        require(ec == std::errc{} && ptr == num.data() + num.size() && count >= 1, ErrorCode::invalid_argument,
                "bad semi-norm size in '" + std::string(text) + "'");
        spec.count = count;
    }
    return spec;
}

std::string SemiNormSpec::to_string() const {
    return std::string(seminorm_kind_name(kind)) + ":" + std::to_string(count);
}

FittedSemiNorm::FittedSemiNorm(SemiNormSpec spec, Grid grid, Eigen::MatrixXd embedding, std::vector<Curve> directions,
                               Eigen::VectorXd eigenvalues)
    : spec_(spec),
      grid_(grid),
      embedding_(std::move(embedding)),
      directions_(std::move(directions)),
      eigenvalues_(std::move(eigenvalues)) {
    require(static_cast<std::size_t>(embedding_.cols()) == grid_.size(), ErrorCode::dimension,
            "semi-norm embedding does not match its grid");
    require(embedding_.allFinite(), ErrorCode::invalid_argument, "semi-norm embedding must be finite");
    for (const auto& d : directions_)
        require(d.grid() == grid_, ErrorCode::dimension, "semi-norm direction on a different grid");
}

Eigen::VectorXd FittedSemiNorm::embed(const Curve& x) const {
    require(x.grid() == grid_, ErrorCode::dimension,
            "curve with " + std::to_string(x.size()) + " points does not match the semi-norm grid of " +
                std::to_string(grid_.size()));
    return embedding_ * x.values();
}

double FittedSemiNorm::distance(const Curve& a, const Curve& b) const {
    require(a.grid() == grid_ && b.grid() == grid_, ErrorCode::dimension,
            "curves do not match the semi-norm grid");
    return (embedding_ * (a.values() - b.values())).norm();
}

std::vector<double> distances_to(const FittedSemiNorm& s, const Curve& query, const Dataset& data) {
    const Eigen::VectorXd q = s.embed(query);
    std::vector<double> d(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) d[i] = (s.embed(data.curve(i)) - q).norm();
    return d;
}

PcaResult pca_eigenfunctions(const Dataset& data, std::size_t q, bool center) {
    require(!data.empty(), ErrorCode::empty_dataset, "PCA needs at least one curve");
    const std::size_t n = data.size();
    const std::size_t p = data.grid().size();
    require(q >= 1 && q <= std::min(n, p), ErrorCode::rank,
            "cannot extract " + std::to_string(q) + " components from " + std::to_string(n) + " curves on " +
                std::to_string(p) + " points");
    const Eigen::VectorXd w = data.grid().weights();
    const Eigen::VectorXd root_w = w.cwiseSqrt();
    // Symmetrized operator W^{1/2} (X^T X / n) W^{1/2}; eigenvectors v give u = W^{-1/2} v.
    const Eigen::MatrixXd xw = centered_matrix(data, center) * root_w.asDiagonal();
    const Eigen::MatrixXd op = (xw.transpose() * xw) / static_cast<double>(n);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(op);
    const Eigen::VectorXd& lambda = eig.eigenvalues();  // ascending
    const double top = lambda[lambda.size() - 1];
    PcaResult out;
    out.eigenvalues.resize(static_cast<Eigen::Index>(q));
    for (std::size_t j = 0; j < q; ++j) {
        const Eigen::Index idx = lambda.size() - 1 - static_cast<Eigen::Index>(j);
        if (!(top > 0.0) || lambda[idx] <= kRankTolerance * top) {
            fail(ErrorCode::rank, "empirical covariance has rank " + std::to_string(j) + ", fewer than the " +
                                      std::to_string(q) + " requested components");
        }
        Eigen::VectorXd u = eig.eigenvectors().col(idx).cwiseQuotient(root_w);
        normalize_sign(u);
        out.eigenvalues[static_cast<Eigen::Index>(j)] = lambda[idx];
        out.directions.emplace_back(data.grid(), std::move(u));
    }
    return out;
}

std::vector<Curve> pls_basis(const Dataset& data, std::size_t components, bool center) {
    require(!data.empty(), ErrorCode::empty_dataset, "PLS needs at least one curve");
    const auto& y_raw = data.responses();
    const std::size_t n = data.size();
    require(components >= 1 && components <= std::min(n, data.grid().size()), ErrorCode::rank,
            "cannot extract " + std::to_string(components) + " PLS components from " + std::to_string(n) + " curves");
    const Eigen::VectorXd w = data.grid().weights();
    Eigen::MatrixXd x = centered_matrix(data, center);
    const Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(y_raw.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd y = y0.array() - y0.mean();
    const double scale =
        y0.norm() * std::sqrt((x * w.asDiagonal()).cwiseProduct(x).sum()) + std::numeric_limits<double>::min();

    std::vector<Eigen::VectorXd> dirs;
    for (std::size_t k = 0; k < components; ++k) {
        Eigen::VectorXd weight = x.transpose() * y;  // cross-covariance function, up to 1/n
        const double norm = std::sqrt(weight.cwiseProduct(w).dot(weight));
        if (!(norm > kRankTolerance * scale)) {
            fail(ErrorCode::rank, "PLS cross-covariance vanishes after " + std::to_string(k) + " of " +
                                      std::to_string(components) + " components");
        }
        weight /= norm;
        const Eigen::VectorXd scores = x * weight.cwiseProduct(w);
        const double ss = scores.squaredNorm();
        require(ss > 0.0, ErrorCode::rank, "PLS scores vanish");
        const Eigen::VectorXd loading = x.transpose() * scores / ss;
        x -= scores * loading.transpose();
        dirs.push_back(std::move(weight));
    }
    orthonormalize(dirs, w);
    std::vector<Curve> out;
    for (auto& d : dirs) {
        normalize_sign(d);
        out.emplace_back(data.grid(), std::move(d));
    }
    return out;
}

std::vector<Curve> fourier_basis(const Grid& grid, std::size_t b) {
    require(b >= 1, ErrorCode::invalid_argument, "Fourier basis needs at least one element");
    std::vector<Curve> out;
    out.push_back(Curve::from_function(grid, [](double) { return 1.0; }));
    for (std::size_t j = 1; out.size() < b; ++j) {
        const double freq = 2.0 * std::numbers::pi * static_cast<double>(j);
        out.push_back(Curve::from_function(grid, [&](double t) { return std::numbers::sqrt2 * std::cos(freq * t); }));
        if (out.size() < b)
            out.push_back(Curve::from_function(grid, [&](double t) { return std::numbers::sqrt2 * std::sin(freq * t); }));
    }
    return out;
}

FittedSemiNorm fit_seminorm(const SemiNormSpec& spec, const Dataset& data) {
    require(!data.empty(), ErrorCode::empty_dataset, "cannot fit a semi-norm on an empty dataset");
    require(spec.count >= 1, ErrorCode::invalid_argument, "semi-norm size must be at least 1");
    const Grid& grid = data.grid();
    switch (spec.kind) {
        case SemiNormKind::pca: {
            auto pca = pca_eigenfunctions(data, spec.count, spec.center);
            auto e = projection_embedding(pca.directions, grid);
            return FittedSemiNorm(spec, grid, std::move(e), std::move(pca.directions), std::move(pca.eigenvalues));
        }
        case SemiNormKind::pls: {
            if (!data.has_responses()) fail(ErrorCode::missing_response, "the PLS semi-norm needs responses");
            auto dirs = pls_basis(data, spec.count, spec.center);
            auto e = projection_embedding(dirs, grid);
            return FittedSemiNorm(spec, grid, std::move(e), std::move(dirs));
        }
        case SemiNormKind::fourier: {
            auto dirs = fourier_basis(grid, spec.count);
            auto e = projection_embedding(dirs, grid);
            return FittedSemiNorm(spec, grid, std::move(e), std::move(dirs));
        }
        case SemiNormKind::deriv:
            return FittedSemiNorm(spec, grid, deriv_embedding(grid, spec.count));
    }
    fail(ErrorCode::invalid_argument, "unknown semi-norm kind");
}

}  // namespace funflow
