#include "funcmax/errors.hpp"
#include "funcmax/sample.hpp"

#include "test_util.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace funcmax;
using funcmax::testing::TempDir;
using funcmax::testing::write_text;

namespace {

PairedFunctionalSample random_sample(std::size_t n, std::size_t channels, std::size_t times, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 3.0);
    PairedFunctionalSample s;
    s.x = Panel(n, channels, times);
    s.y = Panel(n, channels, times);
    for (double& v : s.x.data()) v = normal(gen);
    for (double& v : s.y.data()) v = normal(gen) * 1e-7 + 1e5;
    s.grid_x = TimeGrid::uniform(times);
    s.grid_y = TimeGrid::uniform(times);
    return s;
}

}  // namespace

TEST_CASE("uniform grid uses right endpoints l/T", "[grid]") {
    const TimeGrid g = TimeGrid::uniform(4);
    REQUIRE(g.size() == 4);
    CHECK(g[0] == 0.25);
    CHECK(g[3] == 1.0);
    CHECK(g.kind() == TimeGrid::Kind::uniform);
}

TEST_CASE("explicit grids must be strictly increasing inside [0, 1]", "[grid]") {
    CHECK_THROWS_AS(TimeGrid::from_points({0.0, 0.5, 0.5}), GridError);
    CHECK_THROWS_AS(TimeGrid::from_points({0.2, 0.1}), GridError);
    CHECK_THROWS_AS(TimeGrid::from_points({0.0, 1.5}), GridError);
    CHECK_THROWS_AS(TimeGrid::from_points({}), GridError);
    CHECK(TimeGrid::from_points({0.0, 0.3, 1.0}).kind() == TimeGrid::Kind::explicit_points);
}

TEST_CASE("ingest reads a minimal well-formed panel", "[csv]") {
    TempDir dir("ingest_min");
    write_text(dir / "x.csv", "subject,channel,time_index,value\ns1,ch1,1,1\ns1,ch1,2,3\n");
    write_text(dir / "y.csv", "subject,channel,time_index,value\ns1,ch1,1,2\ns1,ch1,2,4\n");
    const auto s = ingest_csv(dir / "x.csv", dir / "y.csv");
    CHECK(s.subjects() == 1);
    CHECK(s.channels() == 1);
    CHECK(s.x.times() == 2);
    CHECK(s.x.at(0, 0, 1) == 3.0);
    CHECK(s.y.at(0, 0, 0) == 2.0);
    CHECK(s.grid_x == TimeGrid::uniform(2));
}

TEST_CASE("ingest reports the first missing cell", "[csv]") {
    TempDir dir("ingest_missing");
    write_text(dir / "x.csv", "subject,channel,time_index,value\ns1,ch1,1,0\ns1,ch1,2,0\ns1,ch1,4,0\n");
    write_text(dir / "y.csv", "subject,channel,time_index,value\ns1,ch1,1,0\ns1,ch1,2,0\ns1,ch1,3,0\ns1,ch1,4,0\n");
    try {
        (void)ingest_csv(dir / "x.csv", dir / "y.csv");
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(std::string(e.what()) == "s1/ch1/t3 missing");
    }
}

TEST_CASE("ingest rejects malformed content", "[csv]") {
    TempDir dir("ingest_bad");
    const std::string good = "subject,channel,time_index,value\ns1,ch1,1,0\ns1,ch1,2,0\n";
    write_text(dir / "good.csv", good);

    SECTION("non-finite value") {
        write_text(dir / "x.csv", "subject,channel,time_index,value\ns1,ch1,1,nan\ns1,ch1,2,0\n");
        CHECK_THROWS_AS(ingest_csv(dir / "x.csv", dir / "good.csv"), IngestError);
    }
    SECTION("unparsable value") {
        write_text(dir / "x.csv", "subject,channel,time_index,value\ns1,ch1,1,abc\ns1,ch1,2,0\n");
        CHECK_THROWS_AS(ingest_csv(dir / "x.csv", dir / "good.csv"), IngestError);
    }
    SECTION("duplicate cell") {
        write_text(dir / "x.csv", "subject,channel,time_index,value\ns1,ch1,1,0\ns1,ch1,1,0\ns1,ch1,2,0\n");
        CHECK_THROWS_AS(ingest_csv(dir / "x.csv", dir / "good.csv"), IngestError);
    }
    SECTION("missing header column") {
        write_text(dir / "x.csv", "subject,channel,value\ns1,ch1,0\n");
        CHECK_THROWS_AS(ingest_csv(dir / "x.csv", dir / "good.csv"), IngestError);
    }
    SECTION("zero time index") {
        write_text(dir / "x.csv", "subject,channel,time_index,value\ns1,ch1,0,0\ns1,ch1,1,0\n");
        CHECK_THROWS_AS(ingest_csv(dir / "x.csv", dir / "good.csv"), IngestError);
    }
    SECTION("subjects differ between groups") {
        write_text(dir / "x.csv", "subject,channel,time_index,value\ns2,ch1,1,0\ns2,ch1,2,0\n");
        CHECK_THROWS_AS(ingest_csv(dir / "x.csv", dir / "good.csv"), IngestError);
    }
    SECTION("missing file") {
        CHECK_THROWS_AS(ingest_csv(dir / "nope.csv", dir / "good.csv"), IngestError);
    }
}

TEST_CASE("ingest aligns Y to the subject and channel order of X", "[csv]") {
    TempDir dir("ingest_align");
    write_text(dir / "x.csv", "subject,channel,time_index,value\na,c1,1,1\na,c2,1,2\nb,c1,1,3\nb,c2,1,4\n");
    write_text(dir / "y.csv", "value,time_index,channel,subject\n40,1,c2,b\n30,1,c1,b\n20,1,c2,a\n10,1,c1,a\n");
    const auto s = ingest_csv(dir / "x.csv", dir / "y.csv");
    CHECK(s.subject_ids == std::vector<std::string>{"a", "b"});
    CHECK(s.channel_labels == std::vector<std::string>{"c1", "c2"});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k < 2; ++k) CHECK(s.y.at(i, k, 0) == 10.0 * s.x.at(i, k, 0));
}

TEST_CASE("an explicit time column yields an explicit grid", "[csv]") {
    TempDir dir("ingest_time");
    write_text(dir / "x.csv", "subject,channel,time_index,value,time\ns1,ch1,1,0,0\ns1,ch1,2,1,0.4\ns1,ch1,3,2,1\n");
    write_text(dir / "y.csv", "subject,channel,time_index,value,time\ns1,ch1,1,0,0\ns1,ch1,2,1,1\n");
    const auto s = ingest_csv(dir / "x.csv", dir / "y.csv");
    CHECK(s.grid_x.kind() == TimeGrid::Kind::explicit_points);
    CHECK(s.grid_x.points()[1] == 0.4);
    CHECK(s.grid_y.size() == 2);
    CHECK_THROWS_AS(difference(s), GridMismatch);

    write_text(dir / "bad.csv", "subject,channel,time_index,value,time\ns1,ch1,1,0,0\ns1,ch1,2,1,0.5\ns2,ch1,1,0,0\ns2,ch1,2,1,0.6\n");
    CHECK_THROWS_AS(ingest_csv(dir / "bad.csv", dir / "bad.csv"), IngestError);
}

TEST_CASE("export then ingest is the identity on well-formed samples", "[csv][property]") {
    TempDir dir("roundtrip");
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + gen() % 6, channels = 1 + gen() % 4, times = 1 + gen() % 9;
        PairedFunctionalSample s = random_sample(n, channels, times, gen());
        if (trial % 3 == 0) {
            std::vector<double> pts(times);
            for (std::size_t l = 0; l < times; ++l) pts[l] = (static_cast<double>(l) + 0.3) / static_cast<double>(times);
            s.grid_x = TimeGrid::from_points(pts);
            s.grid_y = s.grid_x;
        }
        export_csv(s, dir / "x.csv", dir / "y.csv");
        const auto back = ingest_csv(dir / "x.csv", dir / "y.csv");
        CHECK(back.x == s.x);
        CHECK(back.y == s.y);
        CHECK(back.grid_x == s.grid_x);
        CHECK(back.grid_y == s.grid_y);
    }
}

TEST_CASE("a full-size 841 x 68 x 274 panel round-trips bit-exactly", "[csv][large]") {
    TempDir dir("roundtrip_large");
    const PairedFunctionalSample s = random_sample(841, 68, 274, 2024);
    export_csv(s, dir / "x.csv", dir / "y.csv");
    const auto back = ingest_csv(dir / "x.csv", dir / "y.csv");
    CHECK(back.x == s.x);
    CHECK(back.y == s.y);
}

TEST_CASE("difference computes Y - X with means and centered residuals", "[difference]") {
    PairedFunctionalSample s;
    s.x = Panel(2, 1, 2, 0.0);
    s.y = Panel(2, 1, 2);
    s.y.at(0, 0, 0) = 1;
    s.y.at(0, 0, 1) = 3;
    s.y.at(1, 0, 0) = 3;
    s.y.at(1, 0, 1) = 1;
    s.grid_x = s.grid_y = TimeGrid::uniform(2);
    const DifferenceMatrix z = difference(s);
    CHECK(z.mean(0)[0] == 2.0);
    CHECK(z.mean(0)[1] == 2.0);
    CHECK(z.centered().at(0, 0, 0) == -1.0);
    CHECK(z.centered().at(0, 0, 1) == 1.0);
    CHECK(z.centered().at(1, 0, 0) == 1.0);
    CHECK(z.centered().at(1, 0, 1) == -1.0);
}

TEST_CASE("difference of identical groups is zero", "[difference]") {
    PairedFunctionalSample s = random_sample(5, 3, 4, 1);
    s.y = s.x;
    const DifferenceMatrix z = difference(s);
    CHECK(std::ranges::all_of(z.z().data(), [](double v) { return v == 0.0; }));
    CHECK(std::ranges::all_of(z.mean(), [](double v) { return v == 0.0; }));
}

TEST_CASE("difference invariants hold on random samples", "[difference][property]") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 1 + gen() % 12, channels = 1 + gen() % 4, times = 1 + gen() % 7;
        PairedFunctionalSample s = random_sample(n, channels, times, gen());
        const DifferenceMatrix z = difference(s);

        for (std::size_t k = 0; k < channels; ++k) {
            for (std::size_t l = 0; l < times; ++l) {
                long double direct = 0;
                double centered_sum = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    direct += z.z().at(i, k, l);
                    centered_sum += z.centered().at(i, k, l);
                }
                direct /= static_cast<long double>(n);
                const double m = z.mean(k)[l];
                CHECK(std::abs(m - static_cast<double>(direct)) <= 1e-12 * std::max(1.0, std::abs(m)));
                CHECK(std::abs(centered_sum) <= static_cast<double>(n) * 1e-12 * std::max(1.0, std::abs(m)));
            }
        }

        // Swapping the groups negates differences and means.
        PairedFunctionalSample swapped = s;
        std::swap(swapped.x, swapped.y);
        const DifferenceMatrix neg = difference(swapped);
        for (std::size_t c = 0; c < z.z().data().size(); ++c) CHECK(neg.z().data()[c] == -z.z().data()[c]);
        for (std::size_t c = 0; c < z.mean().size(); ++c) CHECK(neg.mean()[c] == Catch::Approx(-z.mean()[c]).margin(1e-9));

        // Reversing subject order leaves the mean unchanged (up to rounding).
        PairedFunctionalSample rev = s;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < channels; ++k) {
                std::ranges::copy(s.x.curve(n - 1 - i, k), rev.x.curve(i, k).begin());
                std::ranges::copy(s.y.curve(n - 1 - i, k), rev.y.curve(i, k).begin());
            }
        const DifferenceMatrix zr = difference(rev);
        for (std::size_t c = 0; c < z.mean().size(); ++c)
            CHECK(zr.mean()[c] == Catch::Approx(z.mean()[c]).epsilon(1e-12).margin(1e-9));
    }
}

TEST_CASE("interpolation is piecewise linear with constant extension", "[interpolate]") {
    const auto line = interpolate(std::vector<double>{0.0, 1.0}, TimeGrid::from_points({0.0, 1.0}));
    CHECK(line(0.5) == 0.5);

    const auto flat = interpolate(std::vector<double>{2.0, 2.0, 2.0}, TimeGrid::from_points({0.1, 0.5, 0.7}));
    for (double t : {0.0, 0.1, 0.3, 0.66, 0.9, 1.0}) CHECK(flat(t) == 2.0);

    const auto shifted = interpolate(std::vector<double>{0.0, 4.0}, TimeGrid::from_points({0.25, 0.75}));
    CHECK(shifted(0.1) == 0.0);
    CHECK(shifted(0.9) == 4.0);
    CHECK(shifted(0.5) == 2.0);

    const auto single = interpolate(std::vector<double>{7.0}, TimeGrid::uniform(1));
    CHECK(single(0.0) == 7.0);
    CHECK(single(0.4) == 7.0);
}

TEST_CASE("interpolating then resampling on the same uniform grid is exact", "[interpolate][property]") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> normal;
    for (std::size_t times : {1u, 2u, 7u, 64u, 300u}) {
        std::vector<double> v(times);
        for (double& x : v) x = normal(gen);
        const TimeGrid g = TimeGrid::uniform(times);
        const auto curve = interpolate(v, g);
        for (std::size_t l = 0; l < times; ++l) CHECK(curve(g[l]) == v[l]);
    }
}

TEST_CASE("async difference on identical grids reproduces the synchronized values", "[difference]") {
    const PairedFunctionalSample s = random_sample(4, 2, 6, 9);
    const DifferenceMatrix sync = difference(s);
    const DifferenceMatrix async = async_difference(s);
    CHECK(async.integration() == Integration::exact_linear);
    CHECK(async.z() == sync.z());
}

TEST_CASE("async difference evaluates both groups on the merged grid", "[difference]") {
    PairedFunctionalSample s;
    s.x = Panel(1, 1, 2);
    s.y = Panel(1, 1, 3);
    s.x.at(0, 0, 0) = 0.0;
    s.x.at(0, 0, 1) = 1.0;  // x(t) = t on [0, 1]
    s.y.at(0, 0, 0) = 1.0;
    s.y.at(0, 0, 1) = 1.0;
    s.y.at(0, 0, 2) = 1.0;  // y = 1
    s.grid_x = TimeGrid::from_points({0.0, 1.0});
    s.grid_y = TimeGrid::from_points({0.0, 0.25, 1.0});
    const DifferenceMatrix z = async_difference(s);
    REQUIRE(z.times() == 3);
    CHECK(z.z().at(0, 0, 0) == 1.0);
    CHECK(z.z().at(0, 0, 1) == 0.75);
    CHECK(z.z().at(0, 0, 2) == 0.0);
}
