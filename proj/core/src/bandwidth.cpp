#include "funflow/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "funflow/errors.hpp"

namespace funflow {

void CVGrid::validate() const {
    require(!C_values.empty() && !nu_values.empty(), ErrorCode::invalid_argument, "CV grid must be nonempty");
    for (double c : C_values) require(c > 0.0 && std::isfinite(c), ErrorCode::invalid_argument, "CV grid C must be > 0");
    for (double v : nu_values) require(v > 0.0 && v <= 1.0, ErrorCode::invalid_argument, "CV grid nu must lie in (0,1]");
}

void CVReport::write_csv(std::ostream& out) const {
    out << "C,nu,score,skipped,flagged\n";
    for (const auto& e : table) {
        out << e.C << ',' << e.nu << ',' << e.score << ',' << e.skipped << ',' << (e.flagged ? 1 : 0) << '\n';
    }
}

Eigen::MatrixXd pairwise_distances(const FittedSemiNorm& s, const Dataset& data) {
    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd emb(s.embedding().rows(), n);
    for (Eigen::Index i = 0; i < n; ++i) emb.col(i) = s.embed(data.curve(static_cast<std::size_t>(i)));
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (emb.col(i) - emb.col(j)).norm();
    return d;
}

CVReport cv_select(const Eigen::MatrixXd& distances, std::span<const double> responses, const CVGrid& grid,
                   double ell, const Kernel& kernel) {
    grid.validate();
    const std::size_t n = responses.size();
    require(n >= 3, ErrorCode::invalid_argument, "cross-validation needs at least 3 observations");
    require(static_cast<std::size_t>(distances.rows()) == n && static_cast<std::size_t>(distances.cols()) == n,
            ErrorCode::dimension, "distance matrix does not match the responses");
    require(ell >= 0.0 && ell <= 1.0, ErrorCode::invalid_argument, "l must lie in [0,1]");

    const std::size_t m = n - 1;
    // index_pow[v][k] = (k+1)^(-nu_v)
    std::vector<std::vector<double>> index_pow(grid.nu_values.size(), std::vector<double>(m));
    for (std::size_t v = 0; v < grid.nu_values.size(); ++v)
        for (std::size_t k = 0; k < m; ++k) index_pow[v][k] = std::pow(static_cast<double>(k + 1), -grid.nu_values[v]);

    const std::size_t pairs = grid.C_values.size() * grid.nu_values.size();
    std::vector<double> sse(pairs, 0.0);
    std::vector<std::size_t> skipped(pairs, 0);

    std::vector<double> d(m), y(m), sorted(m);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            d[k] = distances(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
            y[k] = responses[j];
            ++k;
        }
        sorted = d;
        std::sort(sorted.begin(), sorted.end());
        const double scale = sorted.back();
        for (std::size_t c = 0; c < grid.C_values.size(); ++c) {
            for (std::size_t v = 0; v < grid.nu_values.size(); ++v) {
                const std::size_t pair = c * grid.nu_values.size() + v;
                double num = 0.0, den = 0.0;
                if (scale > 0.0) {
                    for (std::size_t t = 0; t < m; ++t) {
                        const double h = grid.C_values[c] * scale * index_pow[v][t];
                        const double kv = kernel(d[t] / h);
                        if (kv <= 0.0) continue;
                        double w = kv;
                        if (ell > 0.0) {
                            const auto cnt = std::upper_bound(sorted.begin(), sorted.end(), h) - sorted.begin();
                            w = kv / std::pow(static_cast<double>(cnt) / static_cast<double>(m), ell);
                        }
                        num += y[t] * w;
                        den += w;
                    }
                }
                if (den > 0.0) {
                    const double r = responses[i] - num / den;
                    sse[pair] += r * r;
                } else {
                    ++skipped[pair];
                }
            }
        }
    }

    double mean_sq = 0.0;
    for (double v : responses) mean_sq += v * v;
    mean_sq /= static_cast<double>(n);
    const double tie = 1e-12 * mean_sq + std::numeric_limits<double>::denorm_min();

    CVReport report;
    for (std::size_t c = 0; c < grid.C_values.size(); ++c) {
        for (std::size_t v = 0; v < grid.nu_values.size(); ++v) {
            const std::size_t pair = c * grid.nu_values.size() + v;
            CVEntry e;
            e.C = grid.C_values[c];
            e.nu = grid.nu_values[v];
            e.skipped = skipped[pair];
            const std::size_t used = n - e.skipped;
            e.score = used == 0 ? std::numeric_limits<double>::infinity() : sse[pair] / static_cast<double>(used);
            e.flagged = static_cast<double>(e.skipped) > kCVSkipFlagFraction * static_cast<double>(n);
            report.table.push_back(e);
        }
    }
    const double best = std::min_element(report.table.begin(), report.table.end(),
                                         [](const CVEntry& a, const CVEntry& b) { return a.score < b.score; })
                            ->score;
    require(std::isfinite(best), ErrorCode::empty_neighborhood,
            "every (C, nu) pair left all leave-one-out neighborhoods empty");
    const CVEntry* chosen = nullptr;
    for (const auto& e : report.table) {
        if (e.score > best + tie) continue;
        if (!chosen || e.C < chosen->C || (e.C == chosen->C && e.nu < chosen->nu)) chosen = &e;
    }
    report.C = chosen->C;
    report.nu = chosen->nu;
    report.score = chosen->score;
    return report;
}

CVReport cv_select(const Dataset& data, const CVGrid& grid, double ell, const Kernel& kernel,
                   const SemiNormSpec& spec) {
    const auto& y = data.responses();
    const auto seminorm = fit_seminorm(spec, data);
    return cv_select(pairwise_distances(seminorm, data), y, grid, ell, kernel);
}

}  // namespace funflow
