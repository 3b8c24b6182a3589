#include "cli.hpp"

#include "funcmax/bootstrap.hpp"
#include "funcmax/errors.hpp"
#include "funcmax/experiments.hpp"
#include "funcmax/parallel.hpp"
#include "funcmax/rng.hpp"
#include "funcmax/sample.hpp"
#include "funcmax/simulation.hpp"
#include "funcmax/statistics.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>

namespace funcmax::cli {

namespace {

StatisticKind select_kind(const CliConfig& config, std::size_t times) {
    switch (parse_statistic_tag(config.method)) {
        case StatisticKind::Tag::proposed: return StatisticKind::proposed();
        case StatisticKind::Tag::max: return StatisticKind::max();
        case StatisticKind::Tag::projection:
            return StatisticKind::projection(default_projection_basis(times, config.projection_r));
    }
    throw MethodError("unknown method");
}

void print_summary(const TestReport& r, const PairedFunctionalSample& sample, std::ostream& out) {
    out << "method      " << r.kind.name() << (r.kind.tag() != StatisticKind::Tag::proposed ? " (per-channel rule is an extension)" : "")
        << "\n";
    out << "n=" << r.n << " K=" << r.channels << " T=" << r.times << " N=" << r.draws << " seed=" << r.seed << "\n";
    out << std::setprecision(6);
    out << "statistic   " << r.stat.global << "\n";
    out << "quantile    " << r.quantile << " (1 - gamma = " << 1.0 - r.gamma << ")\n";
    out << "p_global    " << r.p_global << (r.reject_global ? "  REJECT" : "  retain") << "\n";
    std::size_t rejected = 0;
    for (bool b : r.reject_channel) rejected += b ? 1 : 0;
    out << "channels rejected at FWER " << r.gamma << ": " << rejected << " of " << r.channels << "\n";
    for (std::size_t k = 0; k < r.channels; ++k) {
        if (!r.reject_channel[k]) continue;
        const std::string label = sample.channel_labels.empty() ? "ch" + std::to_string(k + 1) : sample.channel_labels[k];
        out << "  " << label << "  stat=" << r.stat.per_channel[k] << "  p=" << r.p_channel[k] << "\n";
    }
}

}  // namespace

int cmd_test(const CliConfig& config, std::ostream& out, std::ostream& err) {
    PairedFunctionalSample sample;
    try {
        sample = ingest_csv(config.input_x, config.input_y);
    } catch (const IngestError& e) {
        err << "error: " << e.what() << "\n";
        return kBadCsv;
    }

    DifferenceMatrix z = [&] {
        if (config.async) return async_difference(sample);
        return difference(sample);
    }();

    const StatisticKind kind = select_kind(config, z.times());
    const ChannelStats stat = compute_stats(z, kind);
    const MultiplierPlan plan{z.subjects(), config.draws, config.seed};
    const BootstrapDistribution dist = run_bootstrap(z, kind, plan, false, resolve_threads(config.threads));
    const TestReport report = decide(stat, dist, config.gamma);
    const nlohmann::json j = to_json(report, sample.channel_labels);

    if (config.out.empty()) {
        print_summary(report, sample, err);
        out << j.dump(2) << "\n";
    } else {
        std::ofstream os(config.out);
        if (!os) throw IoError("cannot write report to " + config.out);
        os << j.dump(2) << "\n";
        print_summary(report, sample, out);
    }
    return kOk;
}

int cmd_simulate(const CliConfig& config, std::ostream& out, std::ostream&) {
    DgpConfig cfg;
    try {
        std::ifstream in(config.spec_path);
        if (!in) throw SpecError("cannot open " + config.spec_path);
        nlohmann::json j;
        in >> j;
        // Accept either a bare DGP config or an experiment spec with a "dgp" entry.
        cfg = (j.contains("dgp") ? j.at("dgp") : j).get<DgpConfig>();
        cfg = cfg.resolved();
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("invalid DGP config: ") + e.what());
    }

    // X is an independent null draw, Y = X + d with d from the configured DGP.
    DgpConfig base = cfg;
    base.delta = 0.0;
    const DifferenceMatrix x = generate_null(base, rng::derive(config.run_index, 0x58ull));
    const DifferenceMatrix d = generate(cfg, config.run_index);

    PairedFunctionalSample sample;
    sample.x = x.z();
    sample.y = x.z();
    auto ys = sample.y.data();
    const auto ds = d.z().data();
    for (std::size_t c = 0; c < ys.size(); ++c) ys[c] += ds[c];
    sample.grid_x = TimeGrid::uniform(cfg.times);
    sample.grid_y = sample.grid_x;

    const std::string prefix = config.out.empty() ? "funcmax_sim" : config.out;
    export_csv(sample, prefix + "_x.csv", prefix + "_y.csv");
    out << "wrote " << prefix << "_x.csv and " << prefix << "_y.csv (n=" << cfg.n << " K=" << cfg.channels
        << " T=" << cfg.times << ")\n";
    return kOk;
}

int cmd_experiment(const CliConfig& config, std::ostream& out, std::ostream& err) {
    ExperimentSpec spec = load_experiment_spec(config.spec_path);
    if (config.paper_scale) spec.use_paper_scale();
    if (config.command == Command::compare) {
        spec.methods = {StatisticKind::Tag::proposed, StatisticKind::Tag::max, StatisticKind::Tag::projection};
        spec.validate();
    }
    const unsigned threads = resolve_threads(config.threads);

    std::vector<CellResult> results;
    switch (config.command) {
        case Command::level: results = run_level(spec, threads); break;
        case Command::fwer: results = run_channelwise_fwer(spec, threads); break;
        default: results = run_power(spec, threads); break;
    }

    const std::string path = config.out.empty() ? "funcmax_results.csv" : config.out;
    write_results(results, path);
    if (!config.plot_dir.empty()) write_plot_files(results, config.plot_dir);
    err << "wrote " << results.size() << " rows to " << path << "\n";
    out << std::setprecision(4);
    for (const CellResult& r : results)
        out << r.method << " " << noise_name(r.noise) << " n=" << r.n << " rho=" << r.rho << " s=" << r.sparsity
            << " delta=" << r.delta << " rate=" << r.rate << " (se " << r.mc_stderr << ")\n";
    return kOk;
}

}  // namespace funcmax::cli
