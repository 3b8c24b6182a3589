#include "funcmax/basis.hpp"
#include "funcmax/errors.hpp"
#include "funcmax/simulation.hpp"

#include <catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace funcmax;

namespace {

struct Moments {
    double mean = 0, var = 0, skew = 0;
};

Moments moments(std::span<const double> x) {
    const double count = static_cast<double>(x.size());
    long double s1 = 0;
    for (double v : x) s1 += v;
    const double mean = static_cast<double>(s1 / count);
    long double m2 = 0, m3 = 0;
    for (double v : x) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    const double var = static_cast<double>(m2 / count);
    return {mean, var, static_cast<double>(m3 / count) / std::pow(var, 1.5)};
}

DgpConfig small_config(std::size_t n, std::size_t channels, std::size_t times, double rho = 0.0) {
    DgpConfig c;
    c.n = n;
    c.channels = channels;
    c.times = times;
    c.rho = rho;
    c.seed = 20240611;
    return c.resolved();
}

// sum_j j^{-2 alpha} phi_{sigma(j)}(t)^2: pointwise variance of one channel.
double closed_form_variance(const DgpConfig& c, double t) {
    double v = 0;
    for (std::size_t j = 0; j < kBasisSize; ++j)
        v += std::pow(static_cast<double>(j + 1), -2.0 * c.alpha) * std::pow(basis_function(c.sigma_perm[j], t), 2);
    return v;
}

}  // namespace

TEST_CASE("basis is orthonormal under fine quadrature", "[basis]") {
    const std::size_t points = 10000;
    std::vector<double> values(kBasisSize * points);
    for (std::size_t v = 0; v < kBasisSize; ++v)
        for (std::size_t q = 0; q < points; ++q)
            values[v * points + q] = basis_function(v + 1, (static_cast<double>(q) + 0.5) / points);
    double worst = 0;
    for (std::size_t a = 0; a < kBasisSize; ++a)
        for (std::size_t b = a; b < kBasisSize; ++b) {
            double ip = 0;
            for (std::size_t q = 0; q < points; ++q) ip += values[a * points + q] * values[b * points + q];
            worst = std::max(worst, std::abs(ip / points - (a == b ? 1.0 : 0.0)));
        }
    CHECK(worst <= 1e-6);
    CHECK(basis_function(1, 0.3) == 1.0);
    CHECK(basis_function(2, 0.5) == Catch::Approx(std::numbers::sqrt2));
    CHECK(basis_function(3, 0.5) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("equicorrelation root closed form", "[simulation]") {
    const auto identity = equicorrelation_root(5, 0.0);
    CHECK(identity.a == 1.0);
    CHECK(identity.b == 0.0);

    const auto r = equicorrelation_root(2, 0.5);
    CHECK(r.a == Catch::Approx(0.7071068).margin(5e-8));
    CHECK(r.b == Catch::Approx(0.2588190).margin(5e-8));
    CHECK_THROWS_AS(equicorrelation_root(3, 1.0), DomainError);
    CHECK_THROWS_AS(equicorrelation_root(3, -0.1), DomainError);
}

TEST_CASE("equicorrelation root squares to the correlation matrix", "[simulation][property]") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> unif(0.0, 0.999);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 1 + gen() % 100;
        const double rho = trial == 0 ? 0.9 : unif(gen);
        const auto r = equicorrelation_root(k, rho);
        // Entries of (aI + bJ)^2 computed by explicit matrix product on
        // a diagonal row and an off-diagonal pair.
        double diag = 0, off = 0;
        for (std::size_t m = 0; m < k; ++m) {
            const double row0 = (m == 0 ? r.a : 0.0) + r.b;
            const double row1 = (m == 1 ? r.a : 0.0) + r.b;
            diag += row0 * row0;
            off += row0 * row1;
        }
        CHECK(std::abs(diag - 1.0) <= 1e-12);
        if (k > 1) CHECK(std::abs(off - rho) <= 1e-12);

        std::vector<double> x(k, 0.0);
        x[0] = 1.0;
        r.apply(x);
        CHECK(x[0] == Catch::Approx(r.a + r.b));
        if (k > 1) CHECK(x[1] == Catch::Approx(r.b));
    }
}

TEST_CASE("score moments match both noise laws", "[simulation]") {
    DgpConfig c = small_config(20000, 50, 1);
    c.channels = 1;
    const double count = 1e6;
    for (Noise noise : {Noise::gaussian, Noise::chisq1_standardized}) {
        c.noise = noise;
        const auto g = draw_scores(c, 3);
        REQUIRE(g.size() == 1'000'000);
        const Moments m = moments(g);
        const double fourth = noise == Noise::gaussian ? 3.0 : 15.0;
        CHECK(std::abs(m.mean) <= 4.0 / std::sqrt(count));
        CHECK(std::abs(m.var - 1.0) <= 4.0 * std::sqrt((fourth - 1.0) / count));
        if (noise == Noise::gaussian)
            CHECK(std::abs(m.skew) <= 4.0 * std::sqrt(6.0 / count));
        else
            CHECK(m.skew == Catch::Approx(2.0 * std::numbers::sqrt2).epsilon(0.05));
    }
}

TEST_CASE("scores and curves are deterministic per run index", "[simulation][determinism]") {
    const auto c = small_config(4, 3, 20, 0.3);
    CHECK(draw_scores(c, 7) == draw_scores(c, 7));
    CHECK(draw_scores(c, 7) != draw_scores(c, 8));
    CHECK(generate_null(c, 11).z() == generate_null(c, 11).z());

    // Subject i's block depends only on (seed, run, i, k), not on n.
    auto bigger = c;
    bigger.n = 9;
    const auto a = draw_scores(c, 2), b = draw_scores(bigger, 2);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
}

TEST_CASE("single-term expansion gives multiples of one basis function", "[simulation]") {
    const auto c = small_config(3, 2, 25);
    std::vector<double> scores(3 * 2 * kBasisSize, 0.0);
    for (std::size_t row = 0; row < 6; ++row) scores[row * kBasisSize] = 0.5 + static_cast<double>(row);
    const Panel p = curves_from_scores(c, scores);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 2; ++k)
            for (std::size_t l = 0; l < 25; ++l) {
                const double t = static_cast<double>(l + 1) / 25.0;
                const double expected = scores[(i * 2 + k) * kBasisSize] * basis_function(c.sigma_perm[0], t);
                CHECK(p.at(i, k, l) == Catch::Approx(expected).margin(1e-12));
            }
}

TEST_CASE("pointwise variance matches the closed form and is exchangeable across channels", "[simulation]") {
    for (double rho : {0.0, 0.6}) {
        const auto c = small_config(10000, 4, 4, rho);  // t = 0.5 at l = 2
        const auto z = generate_null(c, 1);
        const double expected = closed_form_variance(c, 0.5);
        for (std::size_t k = 0; k < 4; ++k) {
            std::vector<double> col(c.n);
            for (std::size_t i = 0; i < c.n; ++i) col[i] = z.z().at(i, k, 1);
            CHECK(moments(col).var == Catch::Approx(expected).epsilon(0.05));
        }
    }
}

TEST_CASE("channels are uncorrelated without mixing and correlated with it", "[simulation]") {
    for (double rho : {0.0, 0.5}) {
        const auto c = small_config(10000, 2, 4, rho);
        const auto z = generate_null(c, 2);
        std::vector<double> a(c.n), b(c.n);
        for (std::size_t i = 0; i < c.n; ++i) {
            a[i] = z.z().at(i, 0, 1);
            b[i] = z.z().at(i, 1, 1);
        }
        const Moments ma = moments(a), mb = moments(b);
        double cov = 0;
        for (std::size_t i = 0; i < c.n; ++i) cov += (a[i] - ma.mean) * (b[i] - mb.mean);
        const double corr = cov / static_cast<double>(c.n) / std::sqrt(ma.var * mb.var);
        CHECK(std::abs(corr - rho) <= 4.0 / std::sqrt(static_cast<double>(c.n)));
    }
}

TEST_CASE("alternatives shift the leading floor(K s) channels", "[simulation]") {
    auto c = small_config(3, 80, 10);
    c.sparsity = 0.1;
    c.delta = 0.2;
    const auto null = generate_null(c, 4);
    const auto alt = apply_alternative(null, c);
    CHECK(signal_channels(80, 0.1) == 8);
    CHECK(signal_channels(80, 0.3) == 24);
    CHECK(signal_channels(80, 0.0) == 0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 80; ++k)
            for (std::size_t l = 0; l < 10; ++l) {
                const double diff = alt.z().at(i, k, l) - null.z().at(i, k, l);
                if (k < 8)
                    CHECK(diff == Catch::Approx(0.2).margin(1e-12));
                else
                    CHECK(diff == 0.0);
            }
    CHECK(generate(c, 4).z() == alt.z());

    c.sparsity = 1.0;
    const auto all = apply_alternative(null, c);
    for (std::size_t k = 0; k < 80; ++k) CHECK(all.mean(k)[0] - null.mean(k)[0] == Catch::Approx(0.2).margin(1e-12));

    c.delta = 0.0;
    CHECK(apply_alternative(null, c).z() == null.z());
}

TEST_CASE("permutations are bijections fixed by the seed", "[simulation]") {
    for (std::uint64_t seed : {0ull, 1ull, 99ull, 0xdeadbeefull}) {
        auto p = draw_permutation(seed);
        CHECK(p == draw_permutation(seed));
        std::ranges::sort(p);
        for (std::size_t j = 0; j < kBasisSize; ++j) CHECK(p[j] == j + 1);
    }
    CHECK(draw_permutation(1) != draw_permutation(2));
}

TEST_CASE("DGP configs validate and round-trip through JSON", "[simulation][json]") {
    DgpConfig c = small_config(12, 5, 30, 0.25);
    c.noise = Noise::chisq1_standardized;
    c.sparsity = 0.4;
    c.delta = 0.15;
    const nlohmann::json j = c;
    CHECK(j.at("noise") == "chisq1");
    const auto back = j.get<DgpConfig>();
    CHECK(back.n == 12);
    CHECK(back.channels == 5);
    CHECK(back.rho == 0.25);
    CHECK(back.noise == Noise::chisq1_standardized);
    CHECK(back.sigma_perm == c.sigma_perm);
    CHECK(generate(back, 3).z() == generate(c, 3).z());

    DgpConfig bad = c;
    bad.alpha = 0.5;
    CHECK_THROWS_AS(bad.validate(), SpecError);
    bad = c;
    bad.rho = 1.0;
    CHECK_THROWS_AS(bad.validate(), SpecError);
    bad = c;
    bad.sigma_perm[0] = bad.sigma_perm[1];
    CHECK_THROWS_AS(bad.validate(), SpecError);
    CHECK_THROWS_AS(parse_noise("laplace"), SpecError);
}
