#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "funflow/curves.hpp"

namespace funflow {

enum class SemiNormKind { pca, fourier, deriv, pls };

/// Which semi-norm to fit and its size parameter: PCA components q, Fourier
/// basis size b, DERIV interior knots k, or PLS components K.
struct SemiNormSpec {
    SemiNormKind kind = SemiNormKind::pca;
    std::size_t count = 3;
    /// Mean-center curves before PCA/PLS. Off by default (uncentered covariance operator).
    bool center = false;

    static SemiNormSpec pca(std::size_t q = 3) { return {SemiNormKind::pca, q, false}; }
    static SemiNormSpec fourier(std::size_t b = 8) { return {SemiNormKind::fourier, b, false}; }
    static SemiNormSpec deriv(std::size_t k = 8) { return {SemiNormKind::deriv, k, false}; }
    static SemiNormSpec pls(std::size_t components = 5) { return {SemiNormKind::pls, components, false}; }

    /// "pca:3", "fou:8", "deriv:8", "pls:5"; the count may be omitted for the default.
    static SemiNormSpec parse(std::string_view text);
    std::string to_string() const;

    friend bool operator==(const SemiNormSpec&, const SemiNormSpec&) = default;
};

std::string_view seminorm_kind_name(SemiNormKind kind) noexcept;

/// A fitted distance between curves. Every kind is the Euclidean norm of a linear
/// image of the difference: distance(a, b) = |E (a - b)| for an embedding matrix E.
class FittedSemiNorm {
public:
    FittedSemiNorm(SemiNormSpec spec, Grid grid, Eigen::MatrixXd embedding, std::vector<Curve> directions = {},
                   Eigen::VectorXd eigenvalues = {});

    const SemiNormSpec& spec() const noexcept { return spec_; }
    const Grid& grid() const noexcept { return grid_; }
    const Eigen::MatrixXd& embedding() const noexcept { return embedding_; }
    /// L2-orthonormal basis directions (PCA, PLS, Fourier); empty for DERIV.
    const std::vector<Curve>& directions() const noexcept { return directions_; }
    /// PCA eigenvalues, descending; empty for other kinds.
    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }

    Eigen::VectorXd embed(const Curve& x) const;
    double distance(const Curve& a, const Curve& b) const;

private:
    SemiNormSpec spec_;
    Grid grid_;
    Eigen::MatrixXd embedding_;
    std::vector<Curve> directions_;
    Eigen::VectorXd eigenvalues_;
};

FittedSemiNorm fit_seminorm(const SemiNormSpec& spec, const Dataset& data);

inline double distance(const FittedSemiNorm& s, const Curve& a, const Curve& b) { return s.distance(a, b); }

/// Distances from `query` to every curve of `data`, in order.
std::vector<double> distances_to(const FittedSemiNorm& s, const Curve& query, const Dataset& data);

struct PcaResult {
    std::vector<Curve> directions;
    Eigen::VectorXd eigenvalues;
};

/// Top-q eigenpairs of the empirical covariance operator u -> (1/n) sum <X_i, u> X_i.
PcaResult pca_eigenfunctions(const Dataset& data, std::size_t q, bool center = false);

/// K PLS1 weight directions, orthonormal in L2. Responses are always centered.
std::vector<Curve> pls_basis(const Dataset& data, std::size_t components, bool center = false);

/// {1, sqrt2 cos 2 pi t, sqrt2 sin 2 pi t, sqrt2 cos 4 pi t, ...} truncated to b elements.
std::vector<Curve> fourier_basis(const Grid& grid, std::size_t b);

}  // namespace funflow
