#pragma once

// Gaussian multiplier bootstrap: multiplier draws, bootstrap distributions,
// empirical-CDF tails, order-statistic quantiles and FWER-calibrated
// global / per-channel decisions.

#include "funcmax/sample.hpp"
#include "funcmax/statistics.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace funcmax {

/// Draw j's multipliers e^j in R^n are a pure function of (seed, j).
struct MultiplierPlan {
    std::size_t n = 0;
    std::size_t draws = 0;
    std::uint64_t seed = 0;
};

/// Multipliers of draw j, written to `out` (length n).
void multipliers(const MultiplierPlan& plan, std::size_t draw, std::span<double> out);

struct BootstrapDistribution {
    std::vector<double> draws_global;
    /// draws x K, empty unless requested.
    std::vector<double> draws_per_channel;
    std::size_t channels = 0;
    std::size_t times = 0;
    StatisticKind kind = StatisticKind::proposed();
    MultiplierPlan plan;
};

struct TestReport {
    double gamma = 0.05;
    ChannelStats stat;
    double quantile = 0.0;
    double p_global = 1.0;
    std::vector<double> p_channel;
    bool reject_global = false;
    std::vector<bool> reject_channel;
    StatisticKind kind = StatisticKind::proposed();
    std::size_t n = 0;
    std::size_t channels = 0;
    std::size_t times = 0;
    std::size_t draws = 0;
    std::uint64_t seed = 0;
};

inline constexpr const char* kReportSchema = "funcmax-report-v1";

/// One bootstrap replicate for explicit multipliers e (length n):
/// per-channel statistic of u = n^{-1/2} sum_i e_i centered_i.
ChannelStats bootstrap_draw(const DifferenceMatrix& z, std::span<const double> e, const StatisticKind& kind);

/// Evaluates every kind on the same multiplier draws. Work is split into
/// fixed-size blocks of draws, so the output does not depend on `threads`.
std::vector<BootstrapDistribution> run_bootstrap(const DifferenceMatrix& z, std::span<const StatisticKind> kinds,
                                                 const MultiplierPlan& plan, bool keep_channels, unsigned threads = 1);

BootstrapDistribution run_bootstrap(const DifferenceMatrix& z, const StatisticKind& kind, const MultiplierPlan& plan,
                                    bool keep_channels, unsigned threads = 1);

/// 1 - F(t) = #{draws > t} / N.
double ecdf_tail(std::span<const double> draws, double t);

/// #{draws >= t} / N, the left limit of ecdf_tail at t. Equal to it unless t
/// coincides with a draw.
double ecdf_upper_tail(std::span<const double> draws, double t);

/// Rejection threshold: the (floor((1 - gamma) N) + 1)-th smallest draw,
/// which is the ceil((1 - gamma) N)-th whenever (1 - gamma) N is not an
/// integer. With this index, stat > quantile holds exactly when
/// ecdf_upper_tail(draws, stat) < gamma, ties included.
double bootstrap_quantile(std::span<const double> draws, double gamma);

/// Global and per-channel decisions. p-values are upper tails of the global
/// (max over channels) bootstrap draws, counting draws tied with the
/// statistic, so a statistic equal to the threshold is not rejected.
TestReport decide(const ChannelStats& stat, const BootstrapDistribution& dist, double gamma);

/// Fraction of reports rejecting at least one channel in `null_channels`
/// (0-based indices).
double fwer_estimate(std::span<const TestReport> reports, std::span<const std::size_t> null_channels);

nlohmann::json to_json(const TestReport& report, std::span<const std::string> channel_labels = {});

}  // namespace funcmax
