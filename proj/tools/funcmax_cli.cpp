// funcmax: paired two-sample tests for many functional means, and the
// Monte Carlo experiments that calibrate them.

#include "cli.hpp"

#include "funcmax/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using funcmax::cli::CliConfig;
using funcmax::cli::Command;

void add_common(CLI::App* sub, CliConfig& cfg) {
    sub->add_option("--threads", cfg.threads, "Worker threads (default: FUNCMAX_THREADS or all cores)");
    sub->add_option("--out", cfg.out, "Output path");
}

void add_experiment(CLI::App* sub, CliConfig& cfg) {
    sub->add_option("spec", cfg.spec_path, "Experiment spec (JSON)")->required();
    sub->add_flag("--paper-scale", cfg.paper_scale, "Use 5000 runs and N = 500 bootstrap draws");
    sub->add_option("--plot-dir", cfg.plot_dir, "Also write long-format delta,rate,method files here");
    add_common(sub, cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"funcmax: max-L2 multiplier-bootstrap tests for paired multi-channel functional data"};
    app.require_subcommand(1);
    CliConfig cfg;

    auto* test = app.add_subcommand("test", "Test equality of functional means on paired CSV panels");
    test->add_option("x", cfg.input_x, "CSV panel of the first group")->required();
    test->add_option("y", cfg.input_y, "CSV panel of the second group")->required();
    test->add_option("--gamma", cfg.gamma, "Family-wise level")->check(CLI::Range(0.0, 1.0));
    test->add_option("--draws,-N", cfg.draws, "Bootstrap draws")->check(CLI::PositiveNumber);
    test->add_option("--seed", cfg.seed, "Multiplier seed");
    test->add_option("--method", cfg.method, "proposed | max | projection")
        ->check(CLI::IsMember({"proposed", "max", "projection"}));
    test->add_option("--projection-R", cfg.projection_r, "Number of projection directions")->check(CLI::PositiveNumber);
    test->add_flag("--async", cfg.async, "Groups are on different grids; integrate interpolants exactly");
    add_common(test, cfg);

    auto* simulate = app.add_subcommand("simulate", "Write a simulated paired panel (PREFIX_x.csv, PREFIX_y.csv)");
    simulate->add_option("config", cfg.spec_path, "DGP config (JSON)")->required();
    simulate->add_option("--run-index", cfg.run_index, "Monte Carlo run index");
    add_common(simulate, cfg);

    auto* level = app.add_subcommand("level", "Empirical level (all cells must have delta = 0)");
    auto* power = app.add_subcommand("power", "Empirical power over the spec grid");
    auto* compare = app.add_subcommand("compare", "Power of all three methods on shared draws");
    auto* fwer = app.add_subcommand("fwer", "Channel-wise family-wise error among true null channels");
    for (auto* sub : {level, power, compare, fwer}) add_experiment(sub, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : funcmax::cli::kFailure;
    }

    if (test->parsed()) cfg.command = Command::test;
    if (simulate->parsed()) cfg.command = Command::simulate;
    if (level->parsed()) cfg.command = Command::level;
    if (power->parsed()) cfg.command = Command::power;
    if (compare->parsed()) cfg.command = Command::compare;
    if (fwer->parsed()) cfg.command = Command::fwer;
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) {
        std::cerr << "error: --gamma must lie in (0, 1)\n";
        return funcmax::cli::kFailure;
    }

    try {
        switch (cfg.command) {
            case Command::test: return funcmax::cli::cmd_test(cfg, std::cout, std::cerr);
            case Command::simulate: return funcmax::cli::cmd_simulate(cfg, std::cout, std::cerr);
            default: return funcmax::cli::cmd_experiment(cfg, std::cout, std::cerr);
        }
    } catch (const funcmax::GridMismatch& e) {
        std::cerr << "error: GridMismatch: " << e.what() << " (pass --async)\n";
        return funcmax::cli::kGridMismatch;
    } catch (const funcmax::IngestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return funcmax::cli::kBadCsv;
    } catch (const funcmax::SpecError& e) {
        std::cerr << "error: invalid spec: " << e.what() << "\n";
        return funcmax::cli::kBadSpec;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return funcmax::cli::kFailure;
    }
}
