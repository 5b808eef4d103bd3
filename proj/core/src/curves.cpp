#include "funflow/curves.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "funflow/errors.hpp"

namespace funflow {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_cell(std::string_view cell, const std::filesystem::path& path, std::size_t row, std::size_t col) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << path.string() << ": row " << row << ", column " << col << ": cannot parse '" << cell
            << "' as a finite number";
        fail(ErrorCode::parse, msg.str());
    }
    return value;
}

std::vector<double> parse_row(std::string_view line, const std::filesystem::path& path, std::size_t row) {
    std::vector<double> out;
    std::size_t col = 1;
    while (true) {
        const auto comma = line.find(',');
        out.push_back(parse_cell(line.substr(0, comma), path, row, col));
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
        ++col;
    }
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write " + path.string());
    return out;
}

void append_number(std::string& buf, double v) {
    char tmp[32];
    const auto [ptr, ec] = std::to_chars(tmp, tmp + sizeof tmp, v);
    buf.append(tmp, ptr);
}

}  // namespace

Grid::Grid(std::size_t p) : p_(p) {
    require(p >= 2, ErrorCode::invalid_argument, "a grid needs at least 2 points");
}

Eigen::VectorXd Grid::points() const {
    Eigen::VectorXd t(static_cast<Eigen::Index>(p_));
    for (std::size_t j = 0; j < p_; ++j) t[static_cast<Eigen::Index>(j)] = point(j);
    return t;
}

Eigen::VectorXd Grid::weights() const {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p_), step());
    w[0] *= 0.5;
    w[static_cast<Eigen::Index>(p_ - 1)] *= 0.5;
    return w;
}

Curve::Curve(Grid grid, Eigen::VectorXd values) : grid_(grid), values_(std::move(values)) {
    require(static_cast<std::size_t>(values_.size()) == grid_.size(), ErrorCode::dimension,
            "curve has " + std::to_string(values_.size()) + " values for a grid of " +
                std::to_string(grid_.size()) + " points");
    require(values_.allFinite(), ErrorCode::invalid_argument, "curve values must be finite");
}

Curve::Curve(Grid grid, std::span<const double> values)
    : Curve(grid, Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()))) {}

namespace {
void require_same_grid(const Curve& a, const Curve& b) {
    require(a.grid() == b.grid(), ErrorCode::dimension,
            "curves live on different grids (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                " points)");
}
}  // namespace

Curve operator+(const Curve& a, const Curve& b) {
    require_same_grid(a, b);
    return Curve(a.grid(), Eigen::VectorXd(a.values() + b.values()));
}

Curve operator-(const Curve& a, const Curve& b) {
    require_same_grid(a, b);
    return Curve(a.grid(), Eigen::VectorXd(a.values() - b.values()));
}

Curve operator*(double c, const Curve& a) { return Curve(a.grid(), Eigen::VectorXd(c * a.values())); }

Dataset::Dataset(std::vector<Curve> curves, std::optional<std::vector<double>> responses)
    : grid_(curves.empty() ? Grid(2) : curves.front().grid()),
      curves_(std::move(curves)),
      responses_(std::move(responses)) {
    for (const auto& c : curves_)
        require(c.grid() == grid_, ErrorCode::dimension, "all curves of a dataset must share one grid");
    if (responses_) {
        require(responses_->size() == curves_.size(), ErrorCode::dimension,
                std::to_string(responses_->size()) + " responses for " + std::to_string(curves_.size()) +
                    " curves");
        for (double y : *responses_)
            require(std::isfinite(y), ErrorCode::invalid_argument, "responses must be finite");
    }
}

const std::vector<double>& Dataset::responses() const {
    if (!responses_) fail(ErrorCode::missing_response, "dataset has no responses");
    return *responses_;
}

Eigen::MatrixXd Dataset::matrix() const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(grid_.size()));
    for (std::size_t i = 0; i < size(); ++i) m.row(static_cast<Eigen::Index>(i)) = curves_[i].values().transpose();
    return m;
}

Dataset Dataset::head(std::size_t count) const {
    count = std::min(count, size());
    std::vector<Curve> c(curves_.begin(), curves_.begin() + static_cast<std::ptrdiff_t>(count));
    if (!responses_) return Dataset(std::move(c));
    return Dataset(std::move(c),
                   std::vector<double>(responses_->begin(), responses_->begin() + static_cast<std::ptrdiff_t>(count)));
}

std::vector<Curve> read_curves_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    std::vector<std::vector<double>> rows;
    std::optional<std::vector<double>> header;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        auto text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            text.remove_prefix(1);
            text = trim(text);
            constexpr std::string_view tag = "grid:";
            if (rows.empty() && !header && text.substr(0, tag.size()) == tag) {
                text.remove_prefix(tag.size());
                header = parse_row(text, path, row);
            }
            continue;
        }
        rows.push_back(parse_row(text, path, row));
        if (rows.back().size() != rows.front().size()) {
            fail(ErrorCode::format, path.string() + ": row " + std::to_string(row) + " has " +
                                        std::to_string(rows.back().size()) + " cells, expected " +
                                        std::to_string(rows.front().size()));
        }
    }
    if (rows.empty()) return {};
    const std::size_t p = rows.front().size();
    require(p >= 2, ErrorCode::format, path.string() + ": curves need at least 2 columns");
    const Grid grid(p);
    if (header) {
        require(header->size() == p, ErrorCode::format,
                path.string() + ": grid header has " + std::to_string(header->size()) + " points, rows have " +
                    std::to_string(p));
        for (std::size_t j = 0; j < p; ++j) {
            require(std::abs((*header)[j] - grid.point(j)) <= 1e-9, ErrorCode::format,
                    path.string() + ": grid header is not the uniform grid on [0,1]");
        }
    }
    std::vector<Curve> curves;
    curves.reserve(rows.size());
    for (const auto& r : rows) curves.emplace_back(grid, std::span<const double>(r));
    return curves;
}

std::vector<double> read_responses_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    std::vector<double> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto cells = parse_row(text, path, row);
        require(cells.size() == 1, ErrorCode::format,
                path.string() + ": row " + std::to_string(row) + " must hold exactly one response");
        out.push_back(cells.front());
    }
    return out;
}

Dataset load_dataset(const std::filesystem::path& curves_path,
                     const std::optional<std::filesystem::path>& responses_path) {
    auto curves = read_curves_csv(curves_path);
    if (!responses_path) return Dataset(std::move(curves));
    auto responses = read_responses_csv(*responses_path);
    if (responses.size() != curves.size()) {
        fail(ErrorCode::dimension, responses_path->string() + " has " + std::to_string(responses.size()) +
                                       " rows but " + curves_path.string() + " has " +
                                       std::to_string(curves.size()));
    }
    return Dataset(std::move(curves), std::move(responses));
}

void write_curves_csv(const std::filesystem::path& path, std::span<const Curve> curves, bool grid_header) {
    auto out = open_output(path);
    std::string buf;
    if (grid_header && !curves.empty()) {
        const auto& g = curves.front().grid();
        buf = "# grid: ";
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (j) buf += ',';
            append_number(buf, g.point(j));
        }
        out << buf << '\n';
    }
    for (const auto& c : curves) {
        buf.clear();
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (j) buf += ',';
            append_number(buf, c[j]);
        }
        out << buf << '\n';
    }
    if (!out) fail(ErrorCode::io, "failed writing " + path.string());
}

void write_responses_csv(const std::filesystem::path& path, std::span<const double> responses) {
    auto out = open_output(path);
    std::string buf;
    for (double y : responses) {
        buf.clear();
        append_number(buf, y);
        out << buf << '\n';
    }
    if (!out) fail(ErrorCode::io, "failed writing " + path.string());
}

double inner_product(const Curve& f, const Curve& g) {
    require_same_grid(f, g);
    const auto& a = f.values();
    const auto& b = g.values();
    const Eigen::Index last = a.size() - 1;
    const double interior = a.segment(1, last - 1).dot(b.segment(1, last - 1));
    return f.grid().step() * (interior + 0.5 * (a[0] * b[0] + a[last] * b[last]));
}

double l2_norm(const Curve& f) { return std::sqrt(std::max(0.0, inner_product(f, f))); }

double target_operator(const Curve& x) { return inner_product(x, x); }

std::vector<Curve> simulate_brownian(std::size_t n, std::size_t p, Rng& rng) {
    require(n >= 1, ErrorCode::invalid_argument, "need at least one curve");
    const Grid grid(p);
    std::normal_distribution<double> increment(0.0, std::sqrt(grid.step()));
    std::vector<Curve> out;
    out.reserve(n);
    Eigen::VectorXd v(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i) {
        v[0] = 0.0;
        for (Eigen::Index j = 1; j < v.size(); ++j) v[j] = v[j - 1] + increment(rng);
        out.emplace_back(grid, v);
    }
    return out;
}

std::vector<Curve> simulate_brownian(std::size_t n, std::size_t p, std::uint64_t seed) {
    auto rng = make_stream(seed);
    return simulate_brownian(n, p, rng);
}

Dataset simulate_regression_sample(std::size_t n, std::size_t p, double noise_sd, Rng& rng) {
    require(noise_sd >= 0.0 && std::isfinite(noise_sd), ErrorCode::invalid_argument,
            "noise standard deviation must be finite and nonnegative");
    auto curves = simulate_brownian(n, p, rng);
    std::vector<double> y(n);
    if (noise_sd > 0.0) {
        std::normal_distribution<double> noise(0.0, noise_sd);
        for (std::size_t i = 0; i < n; ++i) y[i] = target_operator(curves[i]) + noise(rng);
    } else {
        for (std::size_t i = 0; i < n; ++i) y[i] = target_operator(curves[i]);
    }
    return Dataset(std::move(curves), std::move(y));
}

Dataset simulate_regression_sample(std::size_t n, std::size_t p, double noise_sd, std::uint64_t seed) {
    auto rng = make_stream(seed);
    return simulate_regression_sample(n, p, noise_sd, rng);
}

}  // namespace funflow
