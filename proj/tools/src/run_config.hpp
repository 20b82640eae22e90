#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace ptcli {

// Thrown after help text has been printed; carries the process exit code.
struct CliExit {
    int code = 0;
};

// Fully resolved invocation: one subcommand plus every parameter it needs.
struct RunConfig {
    std::string subcommand; // scan-h3 | scan-h2 | matrix2x2 | rspe | converge | threshold
    std::string model;      // matrix2x2/threshold: gain|detuned|h3; rspe kind; converge: h3|h2

    // 2x2 model parameters
    double e1 = 0.0;
    double e2 = 2.0;
    double e = 1.0;
    double b = 1.0;

    // oscillator models
    double omega1 = 1.0;
    double omega2 = 2.0;
    unsigned r = 1;
    unsigned s = 1;

    // eps grid (scans) or single eps (converge)
    std::string eps_spec;
    std::vector<double> eps_grid;
    double eps_value = 0.0;

    // truncation
    std::string trunc_spec;
    std::vector<std::size_t> trunc;
    std::string sizes_spec;
    std::vector<std::vector<std::size_t>> sizes;
    std::size_t quad_order = 0;

    // scan options
    double reality_tol = 1e-8;
    double match_tol = 0.0;
    std::size_t levels = 5;
    bool no_refine = false;

    // rspe
    std::size_t order = 12;
    std::size_t level = 0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;

    // threshold
    std::string pair_a = "0";
    std::string pair_b = "1";
    std::string bracket_spec;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double tol = 1e-6;

    // output
    std::string out_path;
    std::string format; // csv | json (default depends on the subcommand)
};

// Inclusive eps grid "start:stop:step" (endpoints included when within half a
// step), or a single value. Values within |step|*1e-9 of zero are snapped to
// exactly 0 so the grid anchor is hit despite accumulation error.
std::vector<double> parse_eps_grid(const std::string& spec);

// "128" or "24x32" -> truncation vector (expected_rank entries when nonzero).
std::vector<std::size_t> parse_trunc(const std::string& spec, std::size_t expected_rank);

// Comma-separated list of truncation specs, e.g. "64,128,256" or "16x16,24x24".
std::vector<std::vector<std::size_t>> parse_sizes(const std::string& spec,
                                                  std::size_t expected_rank);

// "lo:hi" -> two doubles.
std::pair<double, double> parse_bracket(const std::string& spec);

// Flat key=value config file -> synthetic argument list (the file replaces
// the whole command line; it must contain a "subcommand" key).
std::vector<std::string> args_from_config_file(const std::string& path);

// Parse command-line arguments (argv[1..]) into a validated RunConfig.
// Throws CliExit after printing help, std::invalid_argument on bad input.
RunConfig parse_args(const std::vector<std::string>& args);

// Resolved configuration echoed into output headers, in a fixed key order.
std::vector<std::pair<std::string, std::string>> canonical_items(const RunConfig& cfg);

// Execute the configured operation; returns the process exit code (0).
int run(const RunConfig& cfg);

} // namespace ptcli
