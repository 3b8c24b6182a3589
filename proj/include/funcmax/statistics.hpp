#pragma once

// Statistic kernels. Every statistic here is a per-channel functional of a
// scaled mean-difference vector u_k in R^T followed by a max over channels:
//
//   Proposed    (1/T) sum_l u_l^2          (or the exact integral of u^2)
//   Max         max_l |u_l|
//   Projection  T^{-1/2} max_v |<v, u>|
//
// The observed statistic uses u = sqrt(n) * mean; the bootstrap replaces it
// with n^{-1/2} sum_i e_i * centered_i, which is why both paths share the
// kernels below.

#include "funcmax/sample.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace funcmax {

/// Fixed collection of unit vectors in R^T, stored row-major.
class ProjectionBasis {
public:
    /// Throws BasisError if rows.size() is not a multiple of T or a row is
    /// not unit-norm within 1e-12.
    ProjectionBasis(std::size_t times, std::vector<double> rows);

    [[nodiscard]] std::size_t size() const noexcept { return rows_.size() / times_; }
    [[nodiscard]] std::size_t times() const noexcept { return times_; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept {
        return {rows_.data() + r * times_, times_};
    }
    [[nodiscard]] std::span<const double> data() const noexcept { return rows_; }

    friend bool operator==(const ProjectionBasis&, const ProjectionBasis&) = default;

private:
    std::size_t times_;
    std::vector<double> rows_;
};

class StatisticKind {
public:
    enum class Tag { proposed, max, projection };

    static StatisticKind proposed() { return StatisticKind(Tag::proposed, nullptr); }
    static StatisticKind max() { return StatisticKind(Tag::max, nullptr); }
    /// Throws BasisError for an empty basis.
    static StatisticKind projection(ProjectionBasis basis);

    [[nodiscard]] Tag tag() const noexcept { return tag_; }
    [[nodiscard]] const ProjectionBasis* basis() const noexcept { return basis_.get(); }
    /// "proposed", "max" or "projection".
    [[nodiscard]] std::string_view name() const noexcept;

    friend bool operator==(const StatisticKind& a, const StatisticKind& b) noexcept;

private:
    StatisticKind(Tag tag, std::shared_ptr<const ProjectionBasis> basis) : tag_(tag), basis_(std::move(basis)) {}

    Tag tag_;
    std::shared_ptr<const ProjectionBasis> basis_;
};

/// Parses "proposed" / "max" / "projection"; throws MethodError otherwise.
StatisticKind::Tag parse_statistic_tag(std::string_view name);

struct ChannelStats {
    std::vector<double> per_channel;
    double global = 0.0;
    StatisticKind kind = StatisticKind::proposed();
};

/// T_n^k = (n/T) sum_l mean_{k,l}^2 for a Riemann difference matrix and the
/// exact integral n * int mean_k(t)^2 dt for an asynchronous one.
double channel_stat(const DifferenceMatrix& z, std::size_t k);

ChannelStats proposed_stats(const DifferenceMatrix& z);
ChannelStats max_stat(const DifferenceMatrix& z);
/// Throws BasisError if the basis length differs from z.times().
ChannelStats projection_stat(const DifferenceMatrix& z, const ProjectionBasis& basis);
/// Dispatches on kind.
ChannelStats compute_stats(const DifferenceMatrix& z, const StatisticKind& kind);

/// First R basis functions of the simulation family sampled at l/T and
/// renormalized to unit Euclidean length.
ProjectionBasis default_projection_basis(std::size_t times, std::size_t count);

/// Exact integral over [0, 1] of (n^{-1/2} sum_i (Y_i(t) - X_i(t)))^2 with
/// each curve continued as a constant outside its breakpoints.
double async_channel_stat(std::span<const InterpolatedCurve> x_curves, std::span<const InterpolatedCurve> y_curves);

namespace kernel {

/// Sum of squares in ascending index order; pairwise above 4096 terms.
double sum_of_squares(std::span<const double> u) noexcept;

/// Exact integral of the squared piecewise-linear interpolant through
/// (grid, u), constant outside the grid span.
double linear_l2(std::span<const double> u, const TimeGrid& grid) noexcept;

/// Evaluates one channel's statistic on u scaled by sqrt(scale_sq).
/// Proposed is homogeneous of degree 2, the others of degree 1, so the
/// scale enters as scale_sq or sqrt(scale_sq) respectively.
double evaluate(const StatisticKind& kind, Integration integration, const TimeGrid& grid, std::span<const double> u,
                double scale_sq) noexcept;

}  // namespace kernel

}  // namespace funcmax
