#include "funcmax/experiments.hpp"

#include "funcmax/bootstrap.hpp"
#include "funcmax/errors.hpp"
#include "funcmax/parallel.hpp"
#include "funcmax/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace funcmax {

namespace {

enum class Metric { global, fwer };

constexpr std::uint64_t kMultiplierTag = 0x424f4f5453545250ull;

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t word) noexcept {
    for (int b = 0; b < 8; ++b) {
        h ^= (word >> (8 * b)) & 0xffu;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Cells that describe the same distribution share a hash: without signal the
// sparsity is irrelevant, so a delta = 0 power cell replays the level cell.
std::uint64_t cell_hash(const Cell& cell, Noise noise) noexcept {
    const double s = cell.delta == 0.0 ? 0.0 : cell.sparsity;
    std::uint64_t h = 0xcbf29ce484222325ull;
    h = fnv1a(h, cell.n);
    h = fnv1a(h, std::bit_cast<std::uint64_t>(cell.rho + 0.0));
    h = fnv1a(h, std::bit_cast<std::uint64_t>(s + 0.0));
    h = fnv1a(h, std::bit_cast<std::uint64_t>(cell.delta + 0.0));
    h = fnv1a(h, static_cast<std::uint64_t>(noise));
    return h;
}

// Channels without signal; all of them when delta = 0.
std::vector<std::size_t> null_channel_set(const DgpConfig& cfg) {
    std::vector<std::size_t> out;
    const std::size_t first = cfg.delta == 0.0 ? 0 : signal_channels(cfg.channels, cfg.sparsity);
    for (std::size_t k = first; k < cfg.channels; ++k) out.push_back(k);
    return out;
}

std::vector<CellResult> run_cell(const ExperimentSpec& spec, const Cell& cell, Metric metric, unsigned threads) {
    const DgpConfig cfg = spec.cell_config(cell);
    const std::vector<StatisticKind> kinds = spec_kinds(spec);
    const std::vector<std::size_t> nulls = null_channel_set(cfg);
    if (metric == Metric::fwer && nulls.empty())
        throw SpecError("channel-wise FWER needs at least one null channel (s < 1)");

    // hits[r * methods + m] is 1 when method m rejects in run r.
    std::vector<std::uint8_t> hits(spec.runs * kinds.size(), 0);
    parallel_for(spec.runs, threads, [&](std::size_t r) {
        const RunStreams streams = run_streams(spec, cell, r);
        const DifferenceMatrix z = generate(cfg, streams.data_run_index);
        const MultiplierPlan plan{z.subjects(), spec.draws, streams.multiplier_seed};
        const auto dists = run_bootstrap(z, kinds, plan, false, 1);
        for (std::size_t m = 0; m < kinds.size(); ++m) {
            const TestReport report = decide(compute_stats(z, kinds[m]), dists[m], spec.gamma);
            bool hit = report.reject_global;
            if (metric == Metric::fwer)
                hit = std::ranges::any_of(nulls, [&](std::size_t k) { return static_cast<bool>(report.reject_channel[k]); });
            hits[r * kinds.size() + m] = hit ? 1 : 0;
        }
    });

    std::vector<CellResult> out;
    for (std::size_t m = 0; m < kinds.size(); ++m) {
        CellResult res;
        res.method = std::string(kinds[m].name());
        res.noise = cfg.noise;
        res.n = cfg.n;
        res.channels = cfg.channels;
        res.times = cfg.times;
        res.rho = cfg.rho;
        res.sparsity = cfg.sparsity;
        res.delta = cfg.delta;
        res.gamma = spec.gamma;
        res.runs = spec.runs;
        res.draws = spec.draws;
        for (std::size_t r = 0; r < spec.runs; ++r) res.rejections += hits[r * kinds.size() + m];
        res.rate = static_cast<double>(res.rejections) / static_cast<double>(res.runs);
        res.mc_stderr = binomial_stderr(res.rate, res.runs);
        res.seed = spec.dgp.seed;
        out.push_back(std::move(res));
    }
    return out;
}

std::vector<CellResult> run_all(const ExperimentSpec& spec, Metric metric, unsigned threads) {
    spec.validate();
    std::vector<CellResult> out;
    for (const Cell& cell : spec.grid) {
        auto cell_results = run_cell(spec, cell, metric, threads);
        out.insert(out.end(), cell_results.begin(), cell_results.end());
    }
    return out;
}

auto sort_key(const CellResult& r) {
    return std::tie(r.method, r.noise, r.n, r.channels, r.times, r.rho, r.sparsity, r.delta);
}

void append_number(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    out.append(buf, res.ptr);
}

std::string format_number(double v) {
    std::string s;
    append_number(s, v);
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Spec

void ExperimentSpec::validate() const {
    dgp.validate();
    if (!(gamma > 0.0 && gamma < 1.0)) throw SpecError("gamma must lie in (0, 1)");
    if (runs == 0) throw SpecError("runs must be positive");
    if (draws == 0) throw SpecError("N must be positive");
    if (methods.empty()) throw SpecError("at least one method is required");
    if (grid.empty()) throw SpecError("experiment grid is empty");
    if (std::ranges::find(methods, StatisticKind::Tag::projection) != methods.end() &&
        (projection_r == 0 || projection_r > dgp.times || projection_r > kBasisSize))
        throw SpecError("projection_R must satisfy 1 <= R <= min(T, 50)");
    for (const Cell& c : grid) (void)cell_config(c);
}

void ExperimentSpec::use_paper_scale() noexcept {
    runs = kPaperRuns;
    draws = kPaperDraws;
}

DgpConfig ExperimentSpec::cell_config(const Cell& cell) const {
    DgpConfig cfg = dgp;
    cfg.n = cell.n;
    cfg.rho = cell.rho;
    cfg.sparsity = cell.sparsity;
    cfg.delta = cell.delta;
    try {
        return cfg.resolved();
    } catch (const SpecError& e) {
        throw SpecError(std::string("invalid grid cell: ") + e.what());
    }
}

std::vector<double> default_delta_grid() { return {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4}; }

ExperimentSpec parse_experiment_spec(const nlohmann::json& j) {
    try {
        if (!j.is_object()) throw SpecError("experiment spec must be a JSON object");
        ExperimentSpec spec;
        if (j.contains("dgp")) spec.dgp = j.at("dgp").get<DgpConfig>();
        spec.dgp = spec.dgp.resolved();
        spec.gamma = j.value("gamma", spec.gamma);
        spec.runs = j.value("runs", spec.runs);
        spec.draws = j.value("N", spec.draws);
        spec.projection_r = j.value("projection_R", spec.projection_r);
        if (j.contains("methods")) {
            spec.methods.clear();
            for (const auto& m : j.at("methods")) spec.methods.push_back(parse_statistic_tag(m.get<std::string>()));
        }
        const Cell base{spec.dgp.n, spec.dgp.rho, spec.dgp.sparsity, spec.dgp.delta};
        if (j.contains("grid")) {
            for (const auto& c : j.at("grid")) {
                Cell cell = base;
                cell.n = c.value("n", cell.n);
                cell.rho = c.value("rho", cell.rho);
                cell.sparsity = c.value("s", cell.sparsity);
                cell.delta = c.value("delta", cell.delta);
                spec.grid.push_back(cell);
            }
        }
        if (j.contains("sweep")) {
            const auto& sw = j.at("sweep");
            const auto ns = sw.value("n", std::vector<std::size_t>{base.n});
            const auto rhos = sw.value("rho", std::vector<double>{base.rho});
            const auto ss = sw.value("s", std::vector<double>{base.sparsity});
            const auto deltas = sw.value("delta", std::vector<double>{base.delta});
            for (std::size_t n : ns)
                for (double rho : rhos)
                    for (double s : ss)
                        for (double d : deltas) spec.grid.push_back(Cell{n, rho, s, d});
        }
        if (spec.grid.empty()) spec.grid.push_back(base);
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("malformed experiment spec: ") + e.what());
    } catch (const MethodError& e) {
        throw SpecError(e.what());
    }
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open spec " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("spec " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_experiment_spec(j);
}

void to_json(nlohmann::json& j, const ExperimentSpec& spec) {
    j = nlohmann::json::object();
    j["dgp"] = spec.dgp;
    j["gamma"] = spec.gamma;
    j["runs"] = spec.runs;
    j["N"] = spec.draws;
    j["projection_R"] = spec.projection_r;
    auto methods = nlohmann::json::array();
    for (auto tag : spec.methods) {
        switch (tag) {
            case StatisticKind::Tag::proposed: methods.push_back("proposed"); break;
            case StatisticKind::Tag::max: methods.push_back("max"); break;
            case StatisticKind::Tag::projection: methods.push_back("projection"); break;
        }
    }
    j["methods"] = methods;
    auto grid = nlohmann::json::array();
    for (const Cell& c : spec.grid) grid.push_back({{"n", c.n}, {"rho", c.rho}, {"s", c.sparsity}, {"delta", c.delta}});
    j["grid"] = grid;
}

// ---------------------------------------------------------------------------
// Runs

double binomial_stderr(double rate, std::size_t runs) noexcept {
    if (runs == 0) return 0.0;
    return std::sqrt(rate * (1.0 - rate) / static_cast<double>(runs));
}

RunStreams run_streams(const ExperimentSpec& spec, const Cell& cell, std::size_t run) {
    RunStreams s;
    s.data_run_index = rng::derive(cell_hash(cell, spec.dgp.noise), run);
    s.multiplier_seed = rng::derive(rng::derive(spec.dgp.seed, s.data_run_index), kMultiplierTag);
    return s;
}

std::vector<StatisticKind> spec_kinds(const ExperimentSpec& spec) {
    std::vector<StatisticKind> kinds;
    for (auto tag : spec.methods) {
        switch (tag) {
            case StatisticKind::Tag::proposed: kinds.push_back(StatisticKind::proposed()); break;
            case StatisticKind::Tag::max: kinds.push_back(StatisticKind::max()); break;
            case StatisticKind::Tag::projection:
                kinds.push_back(StatisticKind::projection(default_projection_basis(spec.dgp.times, spec.projection_r)));
                break;
        }
    }
    return kinds;
}

std::vector<CellResult> run_level(const ExperimentSpec& spec, unsigned threads) {
    for (const Cell& c : spec.grid)
        if (c.delta != 0.0) throw SpecError("level experiments require delta = 0 in every cell");
    return run_all(spec, Metric::global, threads);
}

std::vector<CellResult> run_power(const ExperimentSpec& spec, unsigned threads) {
    return run_all(spec, Metric::global, threads);
}

std::vector<CellResult> run_channelwise_fwer(const ExperimentSpec& spec, unsigned threads) {
    for (const Cell& c : spec.grid)
        if (c.delta != 0.0 && signal_channels(spec.dgp.channels, c.sparsity) >= spec.dgp.channels)
            throw SpecError("channel-wise FWER needs at least one null channel (s < 1)");
    return run_all(spec, Metric::fwer, threads);
}

// ---------------------------------------------------------------------------
// Output

void write_results(std::vector<CellResult> results, const std::filesystem::path& path) {
    std::ranges::stable_sort(results, [](const CellResult& a, const CellResult& b) { return sort_key(a) < sort_key(b); });
    std::string buf = "method,noise,n,K,T,rho,s,delta,gamma,runs,N,rate,mc_stderr,seed\n";
    for (const CellResult& r : results) {
        buf += r.method + ',' + std::string(noise_name(r.noise)) + ',' + std::to_string(r.n) + ',' +
               std::to_string(r.channels) + ',' + std::to_string(r.times) + ',';
        for (double v : {r.rho, r.sparsity, r.delta, r.gamma}) {
            append_number(buf, v);
            buf += ',';
        }
        buf += std::to_string(r.runs) + ',' + std::to_string(r.draws) + ',';
        append_number(buf, r.rate);
        buf += ',';
        append_number(buf, r.mc_stderr);
        buf += ',' + std::to_string(r.seed) + '\n';
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write results to " + path.string());
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) throw IoError("failed writing " + path.string());
}

std::vector<CellResult> read_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<CellResult> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 14) throw IoError("malformed results row: " + line);
        auto num = [](const std::string& s) {
            double v = 0.0;
            std::from_chars(s.data(), s.data() + s.size(), v);
            return v;
        };
        CellResult r;
        r.method = f[0];
        r.noise = parse_noise(f[1]);
        r.n = std::stoull(f[2]);
        r.channels = std::stoull(f[3]);
        r.times = std::stoull(f[4]);
        r.rho = num(f[5]);
        r.sparsity = num(f[6]);
        r.delta = num(f[7]);
        r.gamma = num(f[8]);
        r.runs = std::stoull(f[9]);
        r.draws = std::stoull(f[10]);
        r.rate = num(f[11]);
        r.mc_stderr = num(f[12]);
        r.seed = std::stoull(f[13]);
        r.rejections = static_cast<std::size_t>(std::llround(r.rate * static_cast<double>(r.runs)));
        out.push_back(std::move(r));
    }
    return out;
}

void write_plot_files(const std::vector<CellResult>& results, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    std::map<std::tuple<Noise, std::size_t, double, double>, std::vector<const CellResult*>> groups;
    for (const CellResult& r : results) groups[{r.noise, r.n, r.rho, r.sparsity}].push_back(&r);
    for (auto& [key, rows] : groups) {
        const auto& [noise, n, rho, s] = key;
        std::ranges::stable_sort(rows, [](const CellResult* a, const CellResult* b) {
            return std::tie(a->method, a->delta) < std::tie(b->method, b->delta);
        });
        const auto path = directory / ("power_" + std::string(noise_name(noise)) + "_n" + std::to_string(n) + "_rho" +
                                       format_number(rho) + "_s" + format_number(s) + ".csv");
        std::ofstream os(path);
        if (!os) throw IoError("cannot write " + path.string());
        os << "delta,rate,method\n";
        for (const CellResult* r : rows) os << format_number(r->delta) << ',' << format_number(r->rate) << ',' << r->method << '\n';
    }
}

}  // namespace funcmax
