#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace skyrmion::cli {

struct RunConfig {
    std::string command; // solve sweep-beta spectrum resolvent phase-diagram verify
    std::vector<double> r{1.0};
    std::vector<double> beta;
    std::optional<double> beta_min, beta_max;
    int beta_count = 8;
    int grid_points = 4096;
    std::optional<double> rmax;
    std::vector<int> modes{0, 1, 2, 3};
    std::uint64_t seed = 42;
    std::string out = "-"; // "-": primary output on stdout, sidecar on stderr
    std::string format = "csv";
    std::string suite = "all";
    double s = 0.0;              // resolvent weight exponent
    std::string xi = "zero";     // resolvent potential: zero | solved
    double xi_beta = 0.1;        // beta of the solved correction
};

// Parses argv (flags override the --config file) and runs the command.
// Exit codes: 0 success, 1 verification failed, 2 validation error, 3 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Betas from --beta, or geometric from --beta-max down to --beta-min.
std::vector<double> beta_list(const RunConfig& cfg);

// 17 significant digits, C locale.
std::string num(double v);

} // namespace skyrmion::cli
