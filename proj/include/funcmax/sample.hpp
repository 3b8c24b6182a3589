#pragma once

// Data model for paired multi-channel functional recordings: dense panels,
// time grids, paired differences and piecewise-linear curves.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace funcmax {

/// Ordered observation times in [0, 1].
class TimeGrid {
public:
    enum class Kind { uniform, explicit_points };

    /// t_l = l / T for l = 1..T.
    static TimeGrid uniform(std::size_t count);
    /// Throws GridError unless strictly increasing inside [0, 1].
    static TimeGrid from_points(std::vector<double> points);

    [[nodiscard]] std::span<const double> points() const noexcept { return points_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return points_[i]; }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) noexcept { return a.points_ == b.points_; }

private:
    TimeGrid(std::vector<double> points, Kind kind) : points_(std::move(points)), kind_(kind) {}

    std::vector<double> points_;
    Kind kind_ = Kind::uniform;
};

/// Union of two grids' breakpoints, sorted, duplicates removed.
TimeGrid merge_grids(const TimeGrid& a, const TimeGrid& b);

/// Dense subjects x channels x time array, time index fastest.
class Panel {
public:
    Panel() = default;
    Panel(std::size_t subjects, std::size_t channels, std::size_t times, double fill = 0.0)
        : n_(subjects), k_(channels), t_(times), values_(subjects * channels * times, fill) {}

    [[nodiscard]] std::size_t subjects() const noexcept { return n_; }
    [[nodiscard]] std::size_t channels() const noexcept { return k_; }
    [[nodiscard]] std::size_t times() const noexcept { return t_; }

    [[nodiscard]] double& at(std::size_t i, std::size_t k, std::size_t l) noexcept {
        return values_[(i * k_ + k) * t_ + l];
    }
    [[nodiscard]] double at(std::size_t i, std::size_t k, std::size_t l) const noexcept {
        return values_[(i * k_ + k) * t_ + l];
    }

    /// The T values of subject i, channel k.
    [[nodiscard]] std::span<const double> curve(std::size_t i, std::size_t k) const noexcept {
        return {values_.data() + (i * k_ + k) * t_, t_};
    }
    [[nodiscard]] std::span<double> curve(std::size_t i, std::size_t k) noexcept {
        return {values_.data() + (i * k_ + k) * t_, t_};
    }

    [[nodiscard]] std::span<const double> data() const noexcept { return values_; }
    [[nodiscard]] std::span<double> data() noexcept { return values_; }

    friend bool operator==(const Panel&, const Panel&) = default;

private:
    std::size_t n_ = 0;
    std::size_t k_ = 0;
    std::size_t t_ = 0;
    std::vector<double> values_;
};

struct PairedFunctionalSample {
    Panel x;
    Panel y;
    TimeGrid grid_x = TimeGrid::uniform(1);
    TimeGrid grid_y = TimeGrid::uniform(1);
    std::vector<std::string> channel_labels;
    std::vector<std::string> subject_ids;

    [[nodiscard]] std::size_t subjects() const noexcept { return x.subjects(); }
    [[nodiscard]] std::size_t channels() const noexcept { return x.channels(); }

    /// Checks shapes, grid lengths and finiteness; throws IngestError.
    void validate() const;
};

/// How the squared L2 norm over time is discretized for a difference matrix.
enum class Integration {
    /// (1/T) sum_l f(t_l)^2, the synchronized statistic.
    riemann,
    /// Exact integral over [0, 1] of the squared piecewise-linear interpolant,
    /// continued as a constant outside the grid span.
    exact_linear,
};

/// Paired differences Z = Y - X with their per-(k, l) means and centered
/// residuals. Immutable once built.
class DifferenceMatrix {
public:
    DifferenceMatrix(Panel z, TimeGrid grid, Integration integration = Integration::riemann);

    [[nodiscard]] std::size_t subjects() const noexcept { return z_.subjects(); }
    [[nodiscard]] std::size_t channels() const noexcept { return z_.channels(); }
    [[nodiscard]] std::size_t times() const noexcept { return z_.times(); }

    [[nodiscard]] const Panel& z() const noexcept { return z_; }
    [[nodiscard]] const Panel& centered() const noexcept { return centered_; }
    /// K x T means, time fastest.
    [[nodiscard]] std::span<const double> mean() const noexcept { return mean_; }
    [[nodiscard]] std::span<const double> mean(std::size_t k) const noexcept {
        return {mean_.data() + k * times(), times()};
    }
    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] Integration integration() const noexcept { return integration_; }

private:
    Panel z_;
    Panel centered_;
    std::vector<double> mean_;
    TimeGrid grid_;
    Integration integration_;
};

/// Piecewise-linear curve through (breakpoints[l], values[l]), constant
/// beyond the first and last breakpoint.
class InterpolatedCurve {
public:
    InterpolatedCurve(TimeGrid breakpoints, std::vector<double> values);

    [[nodiscard]] double operator()(double t) const noexcept;
    [[nodiscard]] const TimeGrid& breakpoints() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

InterpolatedCurve interpolate(std::span<const double> values, const TimeGrid& grid);

/// Synchronized path: requires grid_x == grid_y, otherwise GridMismatch.
DifferenceMatrix difference(const PairedFunctionalSample& sample);

/// Asynchronous path: both groups are interpolated and differenced on the
/// merged breakpoint set; the result integrates exactly.
DifferenceMatrix async_difference(const PairedFunctionalSample& sample);

struct CsvSchema {
    std::string subject = "subject";
    std::string channel = "channel";
    std::string time_index = "time_index";
    std::string value = "value";
    /// Optional column; when present the grid becomes explicit.
    std::string time = "time";
};

/// Reads the two groups. Subjects and channels keep first-appearance order of
/// the X file; the Y file must contain the same subjects and channels.
PairedFunctionalSample ingest_csv(const std::filesystem::path& path_x, const std::filesystem::path& path_y,
                                  const CsvSchema& schema = {});

/// Writes both groups in the ingestion layout with 17 significant digits.
/// The time column is written only for explicit grids.
void export_csv(const PairedFunctionalSample& sample, const std::filesystem::path& path_x,
                const std::filesystem::path& path_y);

}  // namespace funcmax
