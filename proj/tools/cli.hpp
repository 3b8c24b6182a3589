#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace funcmax::cli {

enum class Command { test, simulate, level, power, compare, fwer };

struct CliConfig {
    Command command = Command::test;
    double gamma = 0.05;
    std::size_t draws = 300;
    std::uint64_t seed = 0;
    std::string method = "proposed";
    std::size_t projection_r = 10;
    bool async = false;
    bool paper_scale = false;
    unsigned threads = 0;
    std::string input_x;
    std::string input_y;
    std::string spec_path;
    std::string out;
    std::string plot_dir;
    std::uint64_t run_index = 0;
};

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kGridMismatch = 2;
inline constexpr int kBadCsv = 3;
inline constexpr int kBadSpec = 4;

int cmd_test(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const CliConfig& config, std::ostream& out, std::ostream& err);
/// level, power, compare and fwer.
int cmd_experiment(const CliConfig& config, std::ostream& out, std::ostream& err);

}  // namespace funcmax::cli
