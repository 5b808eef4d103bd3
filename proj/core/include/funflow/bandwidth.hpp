#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "funflow/bandwidth_plan.hpp"
#include "funflow/curves.hpp"
#include "funflow/kernel.hpp"
#include "funflow/seminorms.hpp"

namespace funflow {

/// Candidate (C, nu) pairs for cross-validation.
struct CVGrid {
    std::vector<double> C_values{0.5, 1.0, 2.0, 10.0};
    std::vector<double> nu_values{1.0 / 10, 1.0 / 8, 1.0 / 6, 1.0 / 5, 1.0 / 4, 1.0 / 3, 1.0 / 2, 1.0};

    void validate() const;
};

struct CVEntry {
    double C = 0.0;
    double nu = 0.0;
    /// Mean squared leave-one-out residual over the observations that had a nonempty
    /// neighborhood; +infinity when none had.
    double score = 0.0;
    std::size_t skipped = 0;
    /// More than 20% of the observations were skipped.
    bool flagged = false;
};

struct CVReport {
    std::vector<CVEntry> table;
    double C = 0.0;
    double nu = 0.0;
    double score = 0.0;

    /// Columns C,nu,score,skipped,flagged.
    void write_csv(std::ostream& out) const;
};

/// Skip fraction above which a grid pair is flagged.
inline constexpr double kCVSkipFlagFraction = 0.2;

/// Leave-one-out cross-validation of (C, nu) for r_n^[l].
///
/// For observation i the estimator is fit on the other n-1 observations, kept in
/// their original order and reindexed 1..n-1, with scale S = max_{j != i} |X_j - X_i|
/// and F^ the empirical CDF of those n-1 distances. Observations whose neighborhood
/// is empty are skipped and counted. The selected pair minimizes the score; near-ties
/// (within 1e-12 mean(Y^2)) go to the smaller C, then the smaller nu.
///
/// The semi-norm is fitted once on the whole sample.
CVReport cv_select(const Dataset& data, const CVGrid& grid, double ell, const Kernel& kernel,
                   const SemiNormSpec& spec);

/// Same, from a symmetric n x n distance matrix.
CVReport cv_select(const Eigen::MatrixXd& distances, std::span<const double> responses, const CVGrid& grid,
                   double ell, const Kernel& kernel);

/// Pairwise semi-norm distances between the curves of `data`.
Eigen::MatrixXd pairwise_distances(const FittedSemiNorm& s, const Dataset& data);

}  // namespace funflow
