#pragma once

// Monte Carlo harness: empirical level, power and channel-wise FWER of the
// three statistics under the simulation DGP.

#include "funcmax/simulation.hpp"
#include "funcmax/statistics.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace funcmax {

/// One grid point of an experiment; the remaining DGP parameters come from
/// ExperimentSpec::dgp.
struct Cell {
    std::size_t n = 100;
    double rho = 0.0;
    double sparsity = 0.0;
    double delta = 0.0;

    friend bool operator==(const Cell&, const Cell&) = default;
};

struct ExperimentSpec {
    DgpConfig dgp;
    double gamma = 0.05;
    std::size_t runs = 2000;
    std::size_t draws = 300;
    std::vector<StatisticKind::Tag> methods{StatisticKind::Tag::proposed};
    std::size_t projection_r = 10;
    std::vector<Cell> grid;

    static constexpr std::size_t kPaperRuns = 5000;
    static constexpr std::size_t kPaperDraws = 500;

    /// Throws SpecError.
    void validate() const;
    /// runs = 5000, N = 500.
    void use_paper_scale() noexcept;
    /// The DGP for one cell, with its permutation resolved.
    [[nodiscard]] DgpConfig cell_config(const Cell& cell) const;
};

/// Parses a spec. Besides an explicit "grid" array, a "sweep" object with
/// arrays "n", "rho", "s", "delta" is expanded as a Cartesian product.
ExperimentSpec parse_experiment_spec(const nlohmann::json& j);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);
void to_json(nlohmann::json& j, const ExperimentSpec& spec);

/// Power signal grid used by default, delta = 0, .05, ..., .4.
std::vector<double> default_delta_grid();

struct CellResult {
    std::string method;
    Noise noise = Noise::gaussian;
    std::size_t n = 0;
    std::size_t channels = 0;
    std::size_t times = 0;
    double rho = 0.0;
    double sparsity = 0.0;
    double delta = 0.0;
    double gamma = 0.05;
    std::size_t runs = 0;
    std::size_t draws = 0;
    std::size_t rejections = 0;
    double rate = 0.0;
    double mc_stderr = 0.0;
    std::uint64_t seed = 0;
};

/// sqrt(rate (1 - rate) / runs).
double binomial_stderr(double rate, std::size_t runs) noexcept;

/// Random streams of run r in a cell: the DGP run index and the multiplier
/// seed. Depends only on (experiment seed, cell, r).
struct RunStreams {
    std::uint64_t data_run_index = 0;
    std::uint64_t multiplier_seed = 0;
};
RunStreams run_streams(const ExperimentSpec& spec, const Cell& cell, std::size_t run);

/// The statistic kinds of the spec, in spec order.
std::vector<StatisticKind> spec_kinds(const ExperimentSpec& spec);

/// Global rejection rates for cells with delta = 0; SpecError otherwise.
std::vector<CellResult> run_level(const ExperimentSpec& spec, unsigned threads = 1);
/// Global rejection rates for every cell.
std::vector<CellResult> run_power(const ExperimentSpec& spec, unsigned threads = 1);
/// Fraction of runs with at least one per-channel rejection among the true
/// null channels floor(K s)+1..K (every channel when delta = 0). SpecError when a
/// cell has no null channel.
std::vector<CellResult> run_channelwise_fwer(const ExperimentSpec& spec, unsigned threads = 1);

/// CSV with header method,noise,n,K,T,rho,s,delta,gamma,runs,N,rate,mc_stderr,seed,
/// rows sorted by the first eight columns, 17 significant digits.
void write_results(std::vector<CellResult> results, const std::filesystem::path& path);
std::vector<CellResult> read_results(const std::filesystem::path& path);

/// Long-format delta,rate,method files, one per (noise, n, rho, s), named
/// power_<noise>_n<n>_rho<rho>_s<s>.csv inside `directory`.
void write_plot_files(const std::vector<CellResult>& results, const std::filesystem::path& directory);

}  // namespace funcmax
