#include "funcmax/statistics.hpp"

#include "funcmax/basis.hpp"
#include "funcmax/errors.hpp"

#include <algorithm>
#include <cmath>

namespace funcmax {

namespace {

constexpr std::size_t kPairwiseThreshold = 4096;

template <class Term>
double pairwise_sum(std::size_t lo, std::size_t hi, const Term& term) noexcept {
    if (hi - lo <= kPairwiseThreshold) {
        double acc = 0.0;
        for (std::size_t l = lo; l < hi; ++l) acc += term(l);
        return acc;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term);
}

}  // namespace

ProjectionBasis::ProjectionBasis(std::size_t times, std::vector<double> rows) : times_(times), rows_(std::move(rows)) {
    if (times_ == 0 || rows_.size() % times_ != 0) throw BasisError("basis rows must all have length T");
    for (std::size_t r = 0; r < size(); ++r) {
        const double norm = std::sqrt(kernel::sum_of_squares(row(r)));
        if (std::abs(norm - 1.0) > 1e-12) throw BasisError("basis row " + std::to_string(r + 1) + " is not unit norm");
    }
}

StatisticKind StatisticKind::projection(ProjectionBasis basis) {
    if (basis.size() == 0) throw BasisError("projection basis must be non-empty");
    return StatisticKind(Tag::projection, std::make_shared<const ProjectionBasis>(std::move(basis)));
}

std::string_view StatisticKind::name() const noexcept {
    switch (tag_) {
        case Tag::proposed: return "proposed";
        case Tag::max: return "max";
        case Tag::projection: return "projection";
    }
    return "unknown";
}

bool operator==(const StatisticKind& a, const StatisticKind& b) noexcept {
    if (a.tag_ != b.tag_) return false;
    if (a.tag_ != StatisticKind::Tag::projection) return true;
    return a.basis_ == b.basis_ || *a.basis_ == *b.basis_;
}

StatisticKind::Tag parse_statistic_tag(std::string_view name) {
    if (name == "proposed") return StatisticKind::Tag::proposed;
    if (name == "max") return StatisticKind::Tag::max;
    if (name == "projection") return StatisticKind::Tag::projection;
    throw MethodError("unknown method '" + std::string(name) + "' (expected proposed, max or projection)");
}

namespace kernel {

double sum_of_squares(std::span<const double> u) noexcept {
    return pairwise_sum(0, u.size(), [u](std::size_t l) { return u[l] * u[l]; });
}

double linear_l2(std::span<const double> u, const TimeGrid& grid) noexcept {
    const auto t = grid.points();
    const std::size_t m = u.size();
    // Segment [t_l, t_{l+1}] contributes h/3 (a^2 + ab + b^2).
    const double interior = pairwise_sum(0, m - 1, [&](std::size_t l) {
        const double a = u[l];
        const double b = u[l + 1];
        return (t[l + 1] - t[l]) * (a * a + a * b + b * b) / 3.0;
    });
    return t[0] * u[0] * u[0] + interior + (1.0 - t[m - 1]) * u[m - 1] * u[m - 1];
}

double evaluate(const StatisticKind& kind, Integration integration, const TimeGrid& grid, std::span<const double> u,
                double scale_sq) noexcept {
    switch (kind.tag()) {
        case StatisticKind::Tag::proposed: {
            if (integration == Integration::exact_linear) return scale_sq * linear_l2(u, grid);
            return scale_sq * (sum_of_squares(u) / static_cast<double>(u.size()));
        }
        case StatisticKind::Tag::max: {
            double best = 0.0;
            for (double v : u) best = std::max(best, std::abs(v));
            return std::sqrt(scale_sq) * best;
        }
        case StatisticKind::Tag::projection: {
            const ProjectionBasis& basis = *kind.basis();
            double best = 0.0;
            for (std::size_t r = 0; r < basis.size(); ++r) {
                const auto v = basis.row(r);
                double dot = 0.0;
                for (std::size_t l = 0; l < u.size(); ++l) dot += v[l] * u[l];
                best = std::max(best, std::abs(dot));
            }
            return std::sqrt(scale_sq / static_cast<double>(u.size())) * best;
        }
    }
    return 0.0;
}

}  // namespace kernel

double channel_stat(const DifferenceMatrix& z, std::size_t k) {
    if (k >= z.channels()) throw DomainError("channel index out of range");
    return kernel::evaluate(StatisticKind::proposed(), z.integration(), z.grid(), z.mean(k),
                            static_cast<double>(z.subjects()));
}

ChannelStats compute_stats(const DifferenceMatrix& z, const StatisticKind& kind) {
    if (kind.tag() == StatisticKind::Tag::projection && kind.basis()->times() != z.times())
        throw BasisError("projection basis length " + std::to_string(kind.basis()->times()) +
                         " does not match T = " + std::to_string(z.times()));
    ChannelStats out;
    out.kind = kind;
    out.per_channel.resize(z.channels());
    const double n = static_cast<double>(z.subjects());
    for (std::size_t k = 0; k < z.channels(); ++k)
        out.per_channel[k] = kernel::evaluate(kind, z.integration(), z.grid(), z.mean(k), n);
    out.global = *std::ranges::max_element(out.per_channel);
    return out;
}

ChannelStats proposed_stats(const DifferenceMatrix& z) { return compute_stats(z, StatisticKind::proposed()); }

ChannelStats max_stat(const DifferenceMatrix& z) { return compute_stats(z, StatisticKind::max()); }

ChannelStats projection_stat(const DifferenceMatrix& z, const ProjectionBasis& basis) {
    return compute_stats(z, StatisticKind::projection(basis));
}

ProjectionBasis default_projection_basis(std::size_t times, std::size_t count) {
    if (count == 0 || count > times)
        throw BasisError("projection basis size must satisfy 1 <= R <= T (R = " + std::to_string(count) +
                         ", T = " + std::to_string(times) + ")");
    if (count > kBasisSize) throw BasisError("projection basis size is limited to " + std::to_string(kBasisSize));
    std::vector<double> rows(count * times);
    for (std::size_t r = 0; r < count; ++r) {
        std::span<double> row(rows.data() + r * times, times);
        for (std::size_t l = 0; l < times; ++l)
            row[l] = basis_function(r + 1, static_cast<double>(l + 1) / static_cast<double>(times));
        const double norm = std::sqrt(kernel::sum_of_squares(row));
        if (norm == 0.0) throw BasisError("basis function " + std::to_string(r + 1) + " vanishes on the grid");
        for (double& v : row) v /= norm;
    }
    return ProjectionBasis(times, std::move(rows));
}

double async_channel_stat(std::span<const InterpolatedCurve> x_curves, std::span<const InterpolatedCurve> y_curves) {
    if (x_curves.empty() || x_curves.size() != y_curves.size())
        throw DomainError("asynchronous statistic needs the same non-zero number of X and Y curves");

    std::vector<double> breakpoints;
    for (const auto* group : {&x_curves, &y_curves})
        for (const InterpolatedCurve& c : *group)
            breakpoints.insert(breakpoints.end(), c.breakpoints().points().begin(), c.breakpoints().points().end());
    std::ranges::sort(breakpoints);
    breakpoints.erase(std::ranges::unique(breakpoints).begin(), breakpoints.end());
    const TimeGrid merged = TimeGrid::from_points(std::move(breakpoints));

    // The summed difference is linear between merged breakpoints.
    std::vector<double> total(merged.size(), 0.0);
    for (std::size_t i = 0; i < x_curves.size(); ++i)
        for (std::size_t l = 0; l < merged.size(); ++l) total[l] += y_curves[i](merged[l]) - x_curves[i](merged[l]);
    return kernel::linear_l2(total, merged) / static_cast<double>(x_curves.size());
}

}  // namespace funcmax
