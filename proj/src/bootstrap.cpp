#include "funcmax/bootstrap.hpp"

#include "funcmax/errors.hpp"
#include "funcmax/parallel.hpp"
#include "funcmax/rng.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace funcmax {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Draws per block. Fixed so that every draw is computed by the same GEMM
// shape no matter how many threads share the blocks.
constexpr std::size_t kBlock = 32;

void check_kind(const DifferenceMatrix& z, const StatisticKind& kind) {
    if (kind.tag() == StatisticKind::Tag::projection && kind.basis()->times() != z.times())
        throw BasisError("projection basis length does not match T");
}

}  // namespace

void multipliers(const MultiplierPlan& plan, std::size_t draw, std::span<double> out) {
    rng::fill_normals(out.first(plan.n), plan.seed, static_cast<std::uint32_t>(draw),
                      static_cast<std::uint32_t>(static_cast<std::uint64_t>(draw) >> 32), rng::Domain::multipliers);
}

ChannelStats bootstrap_draw(const DifferenceMatrix& z, std::span<const double> e, const StatisticKind& kind) {
    if (e.size() != z.subjects()) throw DomainError("multiplier length must equal n");
    check_kind(z, kind);
    const std::size_t channels = z.channels();
    const std::size_t times = z.times();
    std::vector<double> u(times);
    ChannelStats out;
    out.kind = kind;
    out.per_channel.resize(channels);
    for (std::size_t k = 0; k < channels; ++k) {
        std::ranges::fill(u, 0.0);
        for (std::size_t i = 0; i < z.subjects(); ++i) {
            const auto c = z.centered().curve(i, k);
            for (std::size_t l = 0; l < times; ++l) u[l] += e[i] * c[l];
        }
        out.per_channel[k] =
            kernel::evaluate(kind, z.integration(), z.grid(), u, 1.0 / static_cast<double>(z.subjects()));
    }
    out.global = *std::ranges::max_element(out.per_channel);
    return out;
}

std::vector<BootstrapDistribution> run_bootstrap(const DifferenceMatrix& z, std::span<const StatisticKind> kinds,
                                                 const MultiplierPlan& plan, bool keep_channels, unsigned threads) {
    if (plan.draws == 0) throw DomainError("number of bootstrap draws must be positive");
    if (plan.n != z.subjects()) throw DomainError("multiplier plan n does not match the data");
    for (const auto& kind : kinds) check_kind(z, kind);

    const std::size_t n = z.subjects();
    const std::size_t channels = z.channels();
    const std::size_t times = z.times();
    const std::size_t width = channels * times;
    const double scale_sq = 1.0 / static_cast<double>(n);

    std::vector<BootstrapDistribution> out(kinds.size());
    for (std::size_t m = 0; m < kinds.size(); ++m) {
        out[m].kind = kinds[m];
        out[m].plan = plan;
        out[m].channels = channels;
        out[m].times = times;
        out[m].draws_global.assign(plan.draws, 0.0);
        if (keep_channels) out[m].draws_per_channel.assign(plan.draws * channels, 0.0);
    }

    const Eigen::Map<const RowMatrix> centered(z.centered().data().data(), static_cast<Eigen::Index>(n),
                                               static_cast<Eigen::Index>(width));
    const std::size_t blocks = (plan.draws + kBlock - 1) / kBlock;

    parallel_for(blocks, threads, [&](std::size_t b) {
        const std::size_t first = b * kBlock;
        const std::size_t count = std::min(kBlock, plan.draws - first);
        // Per-thread scratch, reused across blocks and calls.
        thread_local RowMatrix e, sums;
        e.resize(static_cast<Eigen::Index>(kBlock), static_cast<Eigen::Index>(n));
        sums.resize(static_cast<Eigen::Index>(kBlock), static_cast<Eigen::Index>(width));
        for (std::size_t j = 0; j < count; ++j)
            multipliers(plan, first + j, std::span<double>(e.row(static_cast<Eigen::Index>(j)).data(), n));

        // Row j holds sum_i e_i^j centered_i for every (k, l).
        const auto rows = static_cast<Eigen::Index>(count);
        sums.topRows(rows).noalias() = e.topRows(rows) * centered;

        for (std::size_t j = 0; j < count; ++j) {
            const double* row = sums.row(static_cast<Eigen::Index>(j)).data();
            for (std::size_t m = 0; m < kinds.size(); ++m) {
                double best = 0.0;
                for (std::size_t k = 0; k < channels; ++k) {
                    const double v = kernel::evaluate(kinds[m], z.integration(), z.grid(),
                                                      std::span<const double>(row + k * times, times), scale_sq);
                    if (keep_channels) out[m].draws_per_channel[(first + j) * channels + k] = v;
                    best = k == 0 ? v : std::max(best, v);
                }
                out[m].draws_global[first + j] = best;
            }
        }
    });
    return out;
}

BootstrapDistribution run_bootstrap(const DifferenceMatrix& z, const StatisticKind& kind, const MultiplierPlan& plan,
                                    bool keep_channels, unsigned threads) {
    auto all = run_bootstrap(z, std::span<const StatisticKind>(&kind, 1), plan, keep_channels, threads);
    return std::move(all.front());
}

double ecdf_tail(std::span<const double> draws, double t) {
    if (draws.empty()) throw DomainError("empirical CDF needs at least one draw");
    const auto above = std::ranges::count_if(draws, [t](double d) { return d > t; });
    return static_cast<double>(above) / static_cast<double>(draws.size());
}

double ecdf_upper_tail(std::span<const double> draws, double t) {
    if (draws.empty()) throw DomainError("empirical CDF needs at least one draw");
    const auto at_least = std::ranges::count_if(draws, [t](double d) { return d >= t; });
    return static_cast<double>(at_least) / static_cast<double>(draws.size());
}

double bootstrap_quantile(std::span<const double> draws, double gamma) {
    if (draws.empty()) throw DomainError("quantile needs at least one draw");
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0, 1)");
    const std::size_t total = draws.size();
    const auto tail = [total](std::size_t c) { return static_cast<double>(c) / static_cast<double>(total); };
    // Largest count c with c / N < gamma (evaluated exactly as the p-value
    // comparison is); the threshold is the (N - c)-th smallest draw, i.e.
    // floor((1 - gamma) N) + 1 in exact arithmetic.
    auto allowed = static_cast<std::size_t>(std::max(0.0, std::ceil(gamma * static_cast<double>(total)) - 1.0));
    allowed = std::min(allowed, total - 1);
    while (allowed + 1 < total && tail(allowed + 1) < gamma) ++allowed;
    while (allowed > 0 && !(tail(allowed) < gamma)) --allowed;
    const std::size_t rank = total - allowed;  // 1-based
    std::vector<double> sorted(draws.begin(), draws.end());
    std::ranges::nth_element(sorted, sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1));
    return sorted[rank - 1];
}

TestReport decide(const ChannelStats& stat, const BootstrapDistribution& dist, double gamma) {
    if (!(stat.kind == dist.kind))
        throw MethodError("statistic kind '" + std::string(stat.kind.name()) + "' does not match bootstrap kind '" +
                          std::string(dist.kind.name()) + "'");
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0, 1)");
    if (dist.channels != 0 && stat.per_channel.size() != dist.channels)
        throw DomainError("statistic and bootstrap disagree on the number of channels");

    TestReport r;
    r.gamma = gamma;
    r.stat = stat;
    r.kind = stat.kind;
    r.quantile = bootstrap_quantile(dist.draws_global, gamma);
    r.p_global = ecdf_upper_tail(dist.draws_global, stat.global);
    r.reject_global = r.p_global < gamma;
    r.p_channel.resize(stat.per_channel.size());
    r.reject_channel.resize(stat.per_channel.size());
    for (std::size_t k = 0; k < stat.per_channel.size(); ++k) {
        r.p_channel[k] = ecdf_upper_tail(dist.draws_global, stat.per_channel[k]);
        r.reject_channel[k] = r.p_channel[k] < gamma;
    }
    r.n = dist.plan.n;
    r.times = dist.times;
    r.channels = stat.per_channel.size();
    r.draws = dist.draws_global.size();
    r.seed = dist.plan.seed;
    return r;
}

double fwer_estimate(std::span<const TestReport> reports, std::span<const std::size_t> null_channels) {
    if (reports.empty()) return 0.0;
    std::size_t hits = 0;
    for (const TestReport& r : reports) {
        if (r.reject_channel.size() != reports.front().reject_channel.size() || r.gamma != reports.front().gamma)
            throw DomainError("reports must share K and gamma");
        const bool any = std::ranges::any_of(null_channels, [&](std::size_t k) {
            if (k >= r.reject_channel.size()) throw DomainError("null channel index out of range");
            return static_cast<bool>(r.reject_channel[k]);
        });
        hits += any ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(reports.size());
}

nlohmann::json to_json(const TestReport& report, std::span<const std::string> channel_labels) {
    nlohmann::json j;
    j["schema"] = kReportSchema;
    j["method"] = report.kind.name();
    if (report.kind.tag() == StatisticKind::Tag::projection) j["projection_R"] = report.kind.basis()->size();
    // Per-channel decisions of the competitor statistics mirror the proposed
    // rule; they are not part of those methods' original definitions.
    j["per_channel_extension"] = report.kind.tag() != StatisticKind::Tag::proposed;
    j["gamma"] = report.gamma;
    j["n"] = report.n;
    j["K"] = report.channels;
    j["T"] = report.times;
    j["N"] = report.draws;
    j["seed"] = report.seed;
    j["statistic"] = {{"global", report.stat.global}, {"per_channel", report.stat.per_channel}};
    j["quantile"] = report.quantile;
    j["p_global"] = report.p_global;
    j["reject_global"] = report.reject_global;
    j["p_channel"] = report.p_channel;
    j["reject_channel"] = report.reject_channel;
    if (!channel_labels.empty()) j["channel_labels"] = std::vector<std::string>(channel_labels.begin(), channel_labels.end());
    return j;
}

}  // namespace funcmax
