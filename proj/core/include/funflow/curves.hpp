#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "funflow/random.hpp"

namespace funflow {

/// Uniform grid of p points on [0,1], endpoints included.
class Grid {
public:
    explicit Grid(std::size_t p);

    std::size_t size() const noexcept { return p_; }
    double step() const noexcept { return 1.0 / static_cast<double>(p_ - 1); }
    double point(std::size_t j) const noexcept {
        return j + 1 == p_ ? 1.0 : static_cast<double>(j) * step();
    }
    Eigen::VectorXd points() const;
    /// Trapezoid quadrature weights; sum to 1.
    Eigen::VectorXd weights() const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t p_;
};

/// A discretized functional observation. Values are finite.
class Curve {
public:
    Curve(Grid grid, Eigen::VectorXd values);
    Curve(Grid grid, std::span<const double> values);

    const Grid& grid() const noexcept { return grid_; }
    const Eigen::VectorXd& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return grid_.size(); }
    double operator[](std::size_t j) const { return values_[static_cast<Eigen::Index>(j)]; }

    /// Samples f at the grid points.
    template <class F>
    static Curve from_function(Grid grid, F&& f) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
        for (std::size_t j = 0; j < grid.size(); ++j) v[static_cast<Eigen::Index>(j)] = f(grid.point(j));
        return Curve(grid, std::move(v));
    }

private:
    Grid grid_;
    Eigen::VectorXd values_;
};

Curve operator+(const Curve& a, const Curve& b);
Curve operator-(const Curve& a, const Curve& b);
Curve operator*(double c, const Curve& a);

/// Ordered sample of curves on one grid, with optional scalar responses.
/// Order matters: observation i is assigned bandwidth h_i.
class Dataset {
public:
    Dataset(std::vector<Curve> curves, std::optional<std::vector<double>> responses = std::nullopt);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return curves_.size(); }
    bool empty() const noexcept { return curves_.empty(); }
    const std::vector<Curve>& curves() const noexcept { return curves_; }
    const Curve& curve(std::size_t i) const { return curves_.at(i); }
    bool has_responses() const noexcept { return responses_.has_value(); }
    /// Throws missing_response when absent.
    const std::vector<double>& responses() const;

    /// n x p matrix with one curve per row.
    Eigen::MatrixXd matrix() const;

    /// The first `count` observations, order preserved.
    Dataset head(std::size_t count) const;

private:
    Grid grid_;
    std::vector<Curve> curves_;
    std::optional<std::vector<double>> responses_;
};

/// Reads a CSV of curves (one per row, optional `# grid: t1,...,tp` header) and,
/// optionally, a single-column CSV of responses.
Dataset load_dataset(const std::filesystem::path& curves_path,
                     const std::optional<std::filesystem::path>& responses_path = std::nullopt);

std::vector<Curve> read_curves_csv(const std::filesystem::path& path);
std::vector<double> read_responses_csv(const std::filesystem::path& path);
void write_curves_csv(const std::filesystem::path& path, std::span<const Curve> curves, bool grid_header = true);
void write_responses_csv(const std::filesystem::path& path, std::span<const double> responses);

/// Trapezoid approximation of the L2[0,1] inner product.
double inner_product(const Curve& f, const Curve& g);
double l2_norm(const Curve& f);

/// r(x) = integral of x(t)^2 over [0,1], by the trapezoid rule.
double target_operator(const Curve& x);

/// Standard Brownian motions: X(0) = 0 and i.i.d. N(0, 1/(p-1)) increments.
std::vector<Curve> simulate_brownian(std::size_t n, std::size_t p, std::uint64_t seed);
std::vector<Curve> simulate_brownian(std::size_t n, std::size_t p, Rng& rng);

/// Brownian curves with Y = target_operator(X) + N(0, noise_sd^2).
Dataset simulate_regression_sample(std::size_t n, std::size_t p, double noise_sd, std::uint64_t seed);
Dataset simulate_regression_sample(std::size_t n, std::size_t p, double noise_sd, Rng& rng);

}  // namespace funflow
