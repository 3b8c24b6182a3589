#pragma once

// Data-generating process for the simulation study: a 50-term Fourier-type
// expansion with power-law coefficient decay under a fixed random
// permutation, equicorrelated mixing across channels, and constant-mean
// sparse alternatives.

#include "funcmax/basis.hpp"
#include "funcmax/sample.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace funcmax {

enum class Noise { gaussian, chisq1_standardized };

std::string_view noise_name(Noise noise) noexcept;
/// Accepts "gaussian" and "chisq1"; throws SpecError otherwise.
Noise parse_noise(std::string_view name);

struct DgpConfig {
    std::size_t n = 100;
    std::size_t channels = 80;
    std::size_t times = 300;
    double alpha = 0.55;
    double rho = 0.0;
    Noise noise = Noise::gaussian;
    double sparsity = 0.0;
    double delta = 0.0;
    std::uint64_t seed = 0;
    /// Permutation of 1..50; filled from `seed` when empty.
    std::vector<std::size_t> sigma_perm;

    /// Throws SpecError on out-of-range parameters or a bad permutation.
    void validate() const;
    /// Returns a copy whose sigma_perm is populated.
    [[nodiscard]] DgpConfig resolved() const;
};

/// Fisher-Yates permutation of 1..50 from a dedicated stream of `seed`.
std::vector<std::size_t> draw_permutation(std::uint64_t seed);

/// Sigma_rho^{1/2} = a I + b J for the K x K equicorrelation matrix.
struct EquicorrelationRoot {
    double a = 1.0;
    double b = 0.0;
    std::size_t channels = 1;

    /// x <- (a I + b J) x.
    void apply(std::span<double> x) const noexcept;
};

EquicorrelationRoot equicorrelation_root(std::size_t channels, double rho);

/// i.i.d. scores g_{ikj}, laid out n x K x 50. Each (i, k) block is keyed by
/// (seed, run_index, i, k).
std::vector<double> draw_scores(const DgpConfig& config, std::uint64_t run_index);

/// Curves on t_l = l/T from explicit scores (n x K x 50), then mixed across
/// channels. Returns the raw n x K x T panel.
Panel curves_from_scores(const DgpConfig& config, std::span<const double> scores);

/// Null differences for one Monte Carlo run.
DifferenceMatrix generate_null(const DgpConfig& config, std::uint64_t run_index);

/// Adds delta to every curve of channels 1..floor(K s).
DifferenceMatrix apply_alternative(const DifferenceMatrix& z, const DgpConfig& config);

/// Number of channels carrying signal, floor(K s).
std::size_t signal_channels(std::size_t channels, double sparsity) noexcept;

/// generate_null followed by apply_alternative.
DifferenceMatrix generate(const DgpConfig& config, std::uint64_t run_index);

void to_json(nlohmann::json& j, const DgpConfig& config);
void from_json(const nlohmann::json& j, DgpConfig& config);

}  // namespace funcmax
