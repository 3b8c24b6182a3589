#include "funcmax/simulation.hpp"

#include "funcmax/errors.hpp"
#include "funcmax/rng.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace funcmax {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

std::string_view noise_name(Noise noise) noexcept {
    return noise == Noise::gaussian ? "gaussian" : "chisq1";
}

Noise parse_noise(std::string_view name) {
    if (name == "gaussian" || name == "normal") return Noise::gaussian;
    if (name == "chisq1" || name == "chisq") return Noise::chisq1_standardized;
    throw SpecError("unknown noise law '" + std::string(name) + "' (expected gaussian or chisq1)");
}

void DgpConfig::validate() const {
    if (n == 0 || channels == 0 || times == 0) throw SpecError("n, K and T must be positive");
    if (!(alpha > 0.5)) throw SpecError("alpha must exceed 1/2");
    if (!(rho >= 0.0 && rho < 1.0)) throw SpecError("rho must lie in [0, 1)");
    if (!(sparsity >= 0.0 && sparsity <= 1.0)) throw SpecError("s must lie in [0, 1]");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw SpecError("delta must be finite and non-negative");
    if (!sigma_perm.empty()) {
        if (sigma_perm.size() != kBasisSize) throw SpecError("sigma_perm must have 50 entries");
        std::vector<std::size_t> sorted = sigma_perm;
        std::ranges::sort(sorted);
        for (std::size_t j = 0; j < kBasisSize; ++j)
            if (sorted[j] != j + 1) throw SpecError("sigma_perm must be a permutation of 1..50");
    }
}

DgpConfig DgpConfig::resolved() const {
    DgpConfig out = *this;
    if (out.sigma_perm.empty()) out.sigma_perm = draw_permutation(seed);
    out.validate();
    return out;
}

std::vector<std::size_t> draw_permutation(std::uint64_t seed) {
    std::vector<std::size_t> perm(kBasisSize);
    std::iota(perm.begin(), perm.end(), std::size_t{1});
    for (std::size_t i = kBasisSize - 1; i > 0; --i) {
        const double u = rng::uniform_at(seed, static_cast<std::uint32_t>(i), 0u, rng::Domain::permutation);
        const auto j = std::min(i, static_cast<std::size_t>(u * static_cast<double>(i + 1)));
        std::swap(perm[i], perm[j]);
    }
    return perm;
}

void EquicorrelationRoot::apply(std::span<double> x) const noexcept {
    const double total = std::accumulate(x.begin(), x.end(), 0.0);
    for (double& v : x) v = a * v + b * total;
}

EquicorrelationRoot equicorrelation_root(std::size_t channels, double rho) {
    if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("rho must lie in [0, 1)");
    if (channels == 0) throw DomainError("K must be positive");
    // Eigenvalues 1 - rho (multiplicity K - 1) and 1 + (K - 1) rho on the
    // all-ones direction.
    const double k = static_cast<double>(channels);
    const double small = std::sqrt(1.0 - rho);
    const double large = std::sqrt(1.0 + (k - 1.0) * rho);
    return {small, (large - small) / k, channels};
}

std::vector<double> draw_scores(const DgpConfig& config, std::uint64_t run_index) {
    const std::uint64_t key = rng::derive(config.seed, run_index);
    std::vector<double> scores(config.n * config.channels * kBasisSize);
    for (std::size_t i = 0; i < config.n; ++i) {
        for (std::size_t k = 0; k < config.channels; ++k) {
            std::span<double> block(scores.data() + (i * config.channels + k) * kBasisSize, kBasisSize);
            rng::fill_normals(block, key, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k),
                              rng::Domain::scores);
            if (config.noise == Noise::chisq1_standardized)
                for (double& g : block) g = (g * g - 1.0) / std::numbers::sqrt2;
        }
    }
    return scores;
}

Panel curves_from_scores(const DgpConfig& config, std::span<const double> scores) {
    const DgpConfig cfg = config.resolved();
    const std::size_t rows = cfg.n * cfg.channels;
    if (scores.size() != rows * kBasisSize) throw DomainError("scores must have n * K * 50 entries");

    // Row j of the design holds j^{-alpha} phi_{sigma(j)} on the grid.
    RowMatrix design(static_cast<Eigen::Index>(kBasisSize), static_cast<Eigen::Index>(cfg.times));
    for (std::size_t j = 0; j < kBasisSize; ++j) {
        const double weight = std::pow(static_cast<double>(j + 1), -cfg.alpha);
        for (std::size_t l = 0; l < cfg.times; ++l) {
            const double t = static_cast<double>(l + 1) / static_cast<double>(cfg.times);
            design(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) =
                weight * basis_function(cfg.sigma_perm[j], t);
        }
    }

    Panel out(cfg.n, cfg.channels, cfg.times);
    const Eigen::Map<const RowMatrix> g(scores.data(), static_cast<Eigen::Index>(rows),
                                        static_cast<Eigen::Index>(kBasisSize));
    Eigen::Map<RowMatrix> v(out.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cfg.times));
    v.noalias() = g * design;

    if (cfg.rho != 0.0) {
        const EquicorrelationRoot root = equicorrelation_root(cfg.channels, cfg.rho);
        std::vector<double> total(cfg.times);
        for (std::size_t i = 0; i < cfg.n; ++i) {
            std::ranges::fill(total, 0.0);
            for (std::size_t k = 0; k < cfg.channels; ++k) {
                const auto c = out.curve(i, k);
                for (std::size_t l = 0; l < cfg.times; ++l) total[l] += c[l];
            }
            for (std::size_t k = 0; k < cfg.channels; ++k) {
                auto c = out.curve(i, k);
                for (std::size_t l = 0; l < cfg.times; ++l) c[l] = root.a * c[l] + root.b * total[l];
            }
        }
    }
    return out;
}

DifferenceMatrix generate_null(const DgpConfig& config, std::uint64_t run_index) {
    const DgpConfig cfg = config.resolved();
    return DifferenceMatrix(curves_from_scores(cfg, draw_scores(cfg, run_index)), TimeGrid::uniform(cfg.times));
}

std::size_t signal_channels(std::size_t channels, double sparsity) noexcept {
    // Tolerance keeps products like 80 * 0.3 from flooring to 23.
    const double raw = std::floor(static_cast<double>(channels) * sparsity + 1e-9);
    return std::min(channels, static_cast<std::size_t>(std::max(0.0, raw)));
}

DifferenceMatrix apply_alternative(const DifferenceMatrix& z, const DgpConfig& config) {
    if (config.delta == 0.0) return z;
    const std::size_t active = signal_channels(z.channels(), config.sparsity);
    Panel shifted = z.z();
    for (std::size_t i = 0; i < shifted.subjects(); ++i)
        for (std::size_t k = 0; k < active; ++k)
            for (double& v : shifted.curve(i, k)) v += config.delta;
    return DifferenceMatrix(std::move(shifted), z.grid(), z.integration());
}

DifferenceMatrix generate(const DgpConfig& config, std::uint64_t run_index) {
    const DgpConfig cfg = config.resolved();
    DifferenceMatrix null = generate_null(cfg, run_index);
    if (cfg.delta == 0.0) return null;
    return apply_alternative(null, cfg);
}

void to_json(nlohmann::json& j, const DgpConfig& c) {
    j = nlohmann::json{{"n", c.n},
                       {"K", c.channels},
                       {"T", c.times},
                       {"alpha", c.alpha},
                       {"rho", c.rho},
                       {"noise", noise_name(c.noise)},
                       {"s", c.sparsity},
                       {"delta", c.delta},
                       {"seed", c.seed},
                       {"sigma_perm", c.sigma_perm}};
}

void from_json(const nlohmann::json& j, DgpConfig& c) {
    if (!j.is_object()) throw SpecError("DGP config must be a JSON object");
    DgpConfig d;
    c.n = j.value("n", d.n);
    c.channels = j.value("K", d.channels);
    c.times = j.value("T", d.times);
    c.alpha = j.value("alpha", d.alpha);
    c.rho = j.value("rho", d.rho);
    c.noise = parse_noise(j.value("noise", std::string(noise_name(d.noise))));
    c.sparsity = j.value("s", d.sparsity);
    c.delta = j.value("delta", d.delta);
    c.seed = j.value("seed", d.seed);
    c.sigma_perm = j.value("sigma_perm", std::vector<std::size_t>{});
    c.validate();
}

}  // namespace funcmax
