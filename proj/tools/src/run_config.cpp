#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "emit.hpp"
#include "ptspectra/closed_forms.hpp"
#include "ptspectra/oscillator_basis.hpp"
#include "ptspectra/rspe.hpp"
#include "ptspectra/scan.hpp"

namespace ptcli {

namespace {

double parse_double_strict(const std::string& text, const std::string& what) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    double value = 0.0;
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(value)) {
        throw std::invalid_argument(what + ": '" + text + "' is not a finite number");
    }
    return value;
}

std::size_t parse_size_strict(const std::string& text, const std::string& what) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    std::size_t value = 0;
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end) {
        throw std::invalid_argument(what + ": '" + text + "' is not a non-negative integer");
    }
    return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = text.find(sep, pos);
        if (next == std::string::npos) {
            parts.push_back(text.substr(pos));
            return parts;
        }
        parts.push_back(text.substr(pos, next - pos));
        pos = next + 1;
    }
}

std::string trim(const std::string& text) {
    std::size_t a = 0;
    std::size_t b = text.size();
    while (a < b && std::isspace(static_cast<unsigned char>(text[a]))) {
        ++a;
    }
    while (b > a && std::isspace(static_cast<unsigned char>(text[b - 1]))) {
        --b;
    }
    return text.substr(a, b - a);
}

std::string trunc_to_spec(const std::vector<std::size_t>& trunc) {
    if (trunc.empty()) {
        return "2";
    }
    std::string out;
    for (std::size_t i = 0; i < trunc.size(); ++i) {
        if (i > 0) {
            out += 'x';
        }
        out += std::to_string(trunc[i]);
    }
    return out;
}

} // namespace

std::vector<double> parse_eps_grid(const std::string& spec) {
    const std::vector<std::string> parts = split(spec, ':');
    if (parts.size() == 1) {
        return {parse_double_strict(parts[0], "eps")};
    }
    if (parts.size() != 3) {
        throw std::invalid_argument("eps grid '" + spec +
                                    "' must be a single value or start:stop:step");
    }
    const double start = parse_double_strict(parts[0], "eps start");
    const double stop = parse_double_strict(parts[1], "eps stop");
    const double step = parse_double_strict(parts[2], "eps step");
    if (step == 0.0) {
        throw std::invalid_argument("eps grid step must be nonzero");
    }
    if (start == stop) {
        return {start};
    }
    if ((stop - start) * step <= 0.0) {
        throw std::invalid_argument("eps grid step direction does not reach stop from start");
    }
    std::vector<double> grid;
    const double half = std::abs(step) / 2.0;
    for (std::size_t k = 0;; ++k) {
        if (k > 1000000) {
            throw std::invalid_argument("eps grid has more than 1e6 points");
        }
        double v = start + static_cast<double>(k) * step;
        if ((step > 0.0 && v > stop + half) || (step < 0.0 && v < stop - half)) {
            break;
        }
        if (std::abs(v) <= std::abs(step) * 1e-9) {
            v = 0.0;
        }
        grid.push_back(v);
    }
    return grid;
}

std::vector<std::size_t> parse_trunc(const std::string& spec, std::size_t expected_rank) {
    const std::vector<std::string> parts = split(spec, 'x');
    std::vector<std::size_t> trunc;
    trunc.reserve(parts.size());
    for (const std::string& p : parts) {
        const std::size_t n = parse_size_strict(p, "truncation");
        if (n == 0) {
            throw std::invalid_argument("truncation sizes must be >= 1");
        }
        trunc.push_back(n);
    }
    if (expected_rank != 0 && trunc.size() != expected_rank) {
        throw std::invalid_argument("truncation '" + spec + "' must have " +
                                    std::to_string(expected_rank) + " axis size(s)");
    }
    return trunc;
}

std::vector<std::vector<std::size_t>> parse_sizes(const std::string& spec,
                                                  std::size_t expected_rank) {
    std::vector<std::vector<std::size_t>> sizes;
    for (const std::string& p : split(spec, ',')) {
        sizes.push_back(parse_trunc(p, expected_rank));
    }
    return sizes;
}

std::pair<double, double> parse_bracket(const std::string& spec) {
    const std::vector<std::string> parts = split(spec, ':');
    if (parts.size() != 2) {
        throw std::invalid_argument("bracket '" + spec + "' must be lo:hi");
    }
    return {parse_double_strict(parts[0], "bracket lo"),
            parse_double_strict(parts[1], "bracket hi")};
}

std::vector<std::string> args_from_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open config file '" + path + "'");
    }
    std::string subcommand;
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config file '" + path + "' line " +
                                        std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument("config file '" + path + "' line " +
                                        std::to_string(lineno) + ": empty key");
        }
        if (key == "subcommand") {
            subcommand = value;
        } else {
            entries.emplace_back(key, value);
        }
    }
    if (subcommand.empty()) {
        throw std::invalid_argument("config file '" + path + "' must set subcommand=<name>");
    }
    std::vector<std::string> args;
    args.push_back(subcommand);
    for (const auto& [key, value] : entries) {
        if (key == "model") {
            // Positional sub-model: pass the bare value.
            args.push_back(value);
            continue;
        }
        if (key == "no-refine") {
            if (value == "1" || value == "true" || value == "yes") {
                args.push_back("--no-refine");
            } else if (value != "0" && value != "false" && value != "no") {
                throw std::invalid_argument("config file '" + path +
                                            "': no-refine must be a boolean");
            }
            continue;
        }
        args.push_back("--" + key);
        args.push_back(value);
    }
    return args;
}

namespace {

const std::vector<std::string> kGainDetuned = {"gain", "detuned"};
const std::vector<std::string> kRspeKinds = {"gain", "detuned", "lambda-pm", "h2"};
const std::vector<std::string> kConvergeModels = {"h3", "h2"};
const std::vector<std::string> kThresholdModels = {"gain", "detuned", "h3"};

void add_output_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--out", cfg.out_path, "Output file path (default: stdout)");
    sub->add_option("--format", cfg.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
}

void add_scan_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--reality-tol", cfg.reality_tol,
                    "Reality tolerance: |Im| <= tol*(1+|lambda|)");
    sub->add_option("--match-tol", cfg.match_tol,
                    "Trajectory matching tolerance (0 = auto from level gaps)");
    sub->add_option("--levels", cfg.levels, "Number of lowest levels to track");
    sub->add_flag("--no-refine", cfg.no_refine, "Disable local grid refinement at flag flips");
}

} // namespace

RunConfig parse_args(const std::vector<std::string>& raw_args) {
    std::vector<std::string> args = raw_args;

    // --config replaces the entire command line.
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        bool is_config = false;
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) {
                throw std::invalid_argument("--config requires a file path");
            }
            path = args[i + 1];
            is_config = true;
            if (args.size() != 2) {
                throw std::invalid_argument(
                    "--config replaces all other arguments; do not mix it with flags");
            }
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            is_config = true;
            if (args.size() != 1) {
                throw std::invalid_argument(
                    "--config replaces all other arguments; do not mix it with flags");
            }
        }
        if (is_config) {
            args = args_from_config_file(path);
            break;
        }
    }

    RunConfig cfg;
    std::string eps_spec;
    std::string trunc_spec;
    std::string sizes_spec;
    std::string bracket_spec;

    CLI::App app{"pt-spectra: spectra, PT-breaking thresholds and perturbation series "
                 "of PT-symmetric Hamiltonians"};
    app.require_subcommand(1);

    CLI::App* scan_h3 = app.add_subcommand(
        "scan-h3", "Scan the x^2(ix)^eps family over an eps grid (basis truncation N)");
    scan_h3->add_option("--eps", eps_spec, "eps grid start:stop:step (or a single value)")
        ->required();
    scan_h3->add_option("--trunc", trunc_spec, "Basis size N (default 64)");
    scan_h3->add_option("--quad-order", cfg.quad_order,
                        "Quadrature order for the potential (0 = default 4N)");
    add_scan_options(scan_h3, cfg);
    add_output_options(scan_h3, cfg);

    CLI::App* scan_h2 = app.add_subcommand(
        "scan-h2", "Scan the coupled-oscillator family over an eps grid (truncation N1xN2)");
    scan_h2->add_option("--omega1", cfg.omega1, "First oscillator frequency");
    scan_h2->add_option("--omega2", cfg.omega2, "Second oscillator frequency");
    scan_h2->add_option("--r", cfg.r, "Coupling power on the first coordinate");
    scan_h2->add_option("--s", cfg.s, "Coupling power on the second coordinate");
    scan_h2->add_option("--eps", eps_spec, "eps grid start:stop:step (or a single value)")
        ->required();
    scan_h2->add_option("--trunc", trunc_spec, "Truncation N1xN2 (default 16x16)");
    scan_h2->add_option("--quad-order", cfg.quad_order, "Unused for polynomial couplings");
    add_scan_options(scan_h2, cfg);
    add_output_options(scan_h2, cfg);

    CLI::App* matrix2x2 =
        app.add_subcommand("matrix2x2", "Scan a closed-form 2x2 model over an eps grid");
    matrix2x2->add_option("model", cfg.model, "Model: gain or detuned")
        ->required()
        ->check(CLI::IsMember(kGainDetuned));
    matrix2x2->add_option("--e1", cfg.e1, "Gain model: first diagonal level");
    matrix2x2->add_option("--e2", cfg.e2, "Gain model: second diagonal level");
    matrix2x2->add_option("--e", cfg.e, "Detuned model: diagonal level");
    matrix2x2->add_option("--b", cfg.b, "Detuned model: real coupling");
    matrix2x2->add_option("--eps", eps_spec, "eps grid start:stop:step (or a single value)")
        ->required();
    add_scan_options(matrix2x2, cfg);
    add_output_options(matrix2x2, cfg);

    CLI::App* rspe = app.add_subcommand(
        "rspe", "Rayleigh-Schrodinger perturbation series with a radius estimate");
    rspe->add_option("kind", cfg.model, "Series kind: gain, detuned, lambda-pm, or h2")
        ->required()
        ->check(CLI::IsMember(kRspeKinds));
    rspe->add_option("--order", cfg.order, "Highest series order K");
    rspe->add_option("--e1", cfg.e1, "Gain model: first diagonal level");
    rspe->add_option("--e2", cfg.e2, "Gain model: second diagonal level");
    rspe->add_option("--e", cfg.e, "Detuned model: diagonal level");
    rspe->add_option("--b", cfg.b, "Detuned model: real coupling");
    rspe->add_option("--level", cfg.level, "2x2 kinds: level index (0 or 1)");
    rspe->add_option("--omega1", cfg.omega1, "Oscillator frequency 1");
    rspe->add_option("--omega2", cfg.omega2, "Oscillator frequency 2");
    rspe->add_option("--r", cfg.r, "h2: coupling power on the first coordinate");
    rspe->add_option("--s", cfg.s, "h2: coupling power on the second coordinate");
    rspe->add_option("--n1", cfg.n1, "h2: level quantum number n1");
    rspe->add_option("--n2", cfg.n2, "h2: level quantum number n2");
    rspe->add_option("--trunc", trunc_spec, "h2: truncation N1xN2 (default 8x8)");
    add_output_options(rspe, cfg);

    CLI::App* converge =
        app.add_subcommand("converge", "Eigenvalue convergence table across truncation sizes");
    converge->add_option("model", cfg.model, "Model: h3 or h2")
        ->required()
        ->check(CLI::IsMember(kConvergeModels));
    converge->add_option("--eps", eps_spec, "Single eps value")->required();
    converge->add_option("--sizes", sizes_spec,
                         "Comma-separated truncations, e.g. 64,128 or 16x16,24x24")
        ->required();
    converge->add_option("--levels", cfg.levels, "Number of lowest levels to tabulate");
    converge->add_option("--omega1", cfg.omega1, "h2: oscillator frequency 1");
    converge->add_option("--omega2", cfg.omega2, "h2: oscillator frequency 2");
    converge->add_option("--r", cfg.r, "h2: coupling power on the first coordinate");
    converge->add_option("--s", cfg.s, "h2: coupling power on the second coordinate");
    converge->add_option("--quad-order", cfg.quad_order,
                         "Quadrature order for the h3 potential (0 = default 4N)");
    converge->add_option("--match-tol", cfg.match_tol,
                         "Trajectory matching tolerance (0 = auto)");
    add_output_options(converge, cfg);

    CLI::App* threshold = app.add_subcommand(
        "threshold", "Locate a PT-breaking threshold of a level pair by bisection");
    threshold->add_option("model", cfg.model, "Model: gain, detuned, or h3")
        ->required()
        ->check(CLI::IsMember(kThresholdModels));
    threshold->add_option("--e1", cfg.e1, "Gain model: first diagonal level");
    threshold->add_option("--e2", cfg.e2, "Gain model: second diagonal level");
    threshold->add_option("--e", cfg.e, "Detuned model: diagonal level");
    threshold->add_option("--b", cfg.b, "Detuned model: real coupling");
    threshold->add_option("--trunc", trunc_spec, "h3: basis size N (default 64)");
    threshold->add_option("--quad-order", cfg.quad_order,
                          "Quadrature order for the h3 potential (0 = default 4N)");
    threshold->add_option("--pair-a", cfg.pair_a, "First label of the coalescing pair");
    threshold->add_option("--pair-b", cfg.pair_b, "Second label of the coalescing pair");
    threshold->add_option("--bracket", bracket_spec, "Bisection bracket lo:hi")->required();
    threshold->add_option("--tol", cfg.tol, "Bisection tolerance on eps");
    threshold->add_option("--reality-tol", cfg.reality_tol,
                          "Reality tolerance: |Im| <= tol*(1+|lambda|)");
    threshold->add_option("--match-tol", cfg.match_tol,
                          "Trajectory matching tolerance (0 = auto)");
    add_output_options(threshold, cfg);

    std::vector<const char*> argv;
    argv.push_back("pt-spectra");
    for (const std::string& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        throw CliExit{0};
    } catch (const CLI::CallForAllHelp& e) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        throw CliExit{0};
    } catch (const CLI::ParseError& e) {
        throw std::invalid_argument(std::string("command line: ") + e.what());
    }

    if (scan_h3->parsed()) {
        cfg.subcommand = "scan-h3";
        cfg.eps_grid = parse_eps_grid(eps_spec);
        cfg.trunc = parse_trunc(trunc_spec.empty() ? "64" : trunc_spec, 1);
    } else if (scan_h2->parsed()) {
        cfg.subcommand = "scan-h2";
        cfg.eps_grid = parse_eps_grid(eps_spec);
        cfg.trunc = parse_trunc(trunc_spec.empty() ? "16x16" : trunc_spec, 2);
    } else if (matrix2x2->parsed()) {
        cfg.subcommand = "matrix2x2";
        cfg.eps_grid = parse_eps_grid(eps_spec);
        cfg.trunc.clear();
        cfg.levels = 2;
    } else if (rspe->parsed()) {
        cfg.subcommand = "rspe";
        if (cfg.model == "h2") {
            cfg.trunc = parse_trunc(trunc_spec.empty() ? "8x8" : trunc_spec, 2);
        }
        if ((cfg.model == "gain" || cfg.model == "detuned") && cfg.level > 1) {
            throw std::invalid_argument("rspe: --level must be 0 or 1 for 2x2 kinds");
        }
    } else if (converge->parsed()) {
        cfg.subcommand = "converge";
        cfg.eps_value = parse_double_strict(eps_spec, "eps");
        cfg.sizes = parse_sizes(sizes_spec, cfg.model == "h2" ? 2 : 1);
        if (converge->count("--levels") == 0) {
            cfg.levels = 3; // converge default differs from the scan default
        }
    } else if (threshold->parsed()) {
        cfg.subcommand = "threshold";
        if (cfg.model == "h3") {
            cfg.trunc = parse_trunc(trunc_spec.empty() ? "64" : trunc_spec, 1);
        } else {
            cfg.trunc.clear();
        }
        const auto [lo, hi] = parse_bracket(bracket_spec);
        cfg.bracket_lo = lo;
        cfg.bracket_hi = hi;
        cfg.bracket_spec = bracket_spec;
    }

    cfg.eps_spec = eps_spec;
    cfg.trunc_spec = cfg.trunc.empty() && cfg.subcommand != "rspe" ? "" : trunc_to_spec(cfg.trunc);
    if (cfg.subcommand == "matrix2x2") {
        cfg.trunc_spec = "2";
    }
    cfg.sizes_spec = sizes_spec;
    if (cfg.format.empty()) {
        cfg.format = (cfg.subcommand == "scan-h3" || cfg.subcommand == "scan-h2" ||
                      cfg.subcommand == "matrix2x2")
                         ? "csv"
                         : "json";
    }
    return cfg;
}

std::vector<std::pair<std::string, std::string>> canonical_items(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> items;
    items.emplace_back("subcommand", cfg.subcommand);
    if (!cfg.model.empty()) {
        items.emplace_back("model", cfg.model);
    }
    const bool uses_gain = (cfg.subcommand == "matrix2x2" || cfg.subcommand == "rspe" ||
                            cfg.subcommand == "threshold") &&
                           cfg.model == "gain";
    const bool uses_detuned = (cfg.subcommand == "matrix2x2" || cfg.subcommand == "rspe" ||
                               cfg.subcommand == "threshold") &&
                              cfg.model == "detuned";
    const bool uses_osc_pair = cfg.subcommand == "scan-h2" ||
                               (cfg.subcommand == "rspe" &&
                                (cfg.model == "lambda-pm" || cfg.model == "h2")) ||
                               (cfg.subcommand == "converge" && cfg.model == "h2");
    const bool uses_rs =
        cfg.subcommand == "scan-h2" || (cfg.subcommand == "rspe" && cfg.model == "h2") ||
        (cfg.subcommand == "converge" && cfg.model == "h2");
    if (uses_gain) {
        items.emplace_back("e1", format_double(cfg.e1));
        items.emplace_back("e2", format_double(cfg.e2));
    }
    if (uses_detuned) {
        items.emplace_back("e", format_double(cfg.e));
        items.emplace_back("b", format_double(cfg.b));
    }
    if (uses_osc_pair) {
        items.emplace_back("omega1", format_double(cfg.omega1));
        items.emplace_back("omega2", format_double(cfg.omega2));
    }
    if (uses_rs) {
        items.emplace_back("r", std::to_string(cfg.r));
        items.emplace_back("s", std::to_string(cfg.s));
    }
    if (!cfg.eps_spec.empty()) {
        items.emplace_back("eps", cfg.eps_spec);
    }
    if (!cfg.trunc.empty()) {
        items.emplace_back("trunc", cfg.trunc_spec);
    }
    if (!cfg.sizes_spec.empty()) {
        items.emplace_back("sizes", cfg.sizes_spec);
    }
    if (cfg.subcommand == "scan-h3" || cfg.subcommand == "converge" ||
        (cfg.subcommand == "threshold" && cfg.model == "h3")) {
        items.emplace_back("quad_order", std::to_string(cfg.quad_order));
    }
    if (cfg.subcommand == "scan-h3" || cfg.subcommand == "scan-h2" ||
        cfg.subcommand == "matrix2x2" || cfg.subcommand == "threshold") {
        items.emplace_back("reality_tol", format_double(cfg.reality_tol));
        items.emplace_back("match_tol", format_double(cfg.match_tol));
    }
    if (cfg.subcommand == "scan-h3" || cfg.subcommand == "scan-h2" ||
        cfg.subcommand == "matrix2x2" || cfg.subcommand == "converge") {
        items.emplace_back("levels", std::to_string(cfg.levels));
    }
    if (cfg.subcommand == "scan-h3" || cfg.subcommand == "scan-h2" ||
        cfg.subcommand == "matrix2x2") {
        items.emplace_back("refine", cfg.no_refine ? "0" : "1");
    }
    if (cfg.subcommand == "rspe") {
        items.emplace_back("order", std::to_string(cfg.order));
        if (cfg.model == "gain" || cfg.model == "detuned") {
            items.emplace_back("level", std::to_string(cfg.level));
        }
        if (cfg.model == "h2") {
            items.emplace_back("n1", std::to_string(cfg.n1));
            items.emplace_back("n2", std::to_string(cfg.n2));
        }
    }
    if (cfg.subcommand == "threshold") {
        items.emplace_back("pair_a", cfg.pair_a);
        items.emplace_back("pair_b", cfg.pair_b);
        items.emplace_back("bracket", cfg.bracket_spec);
        items.emplace_back("tol", format_double(cfg.tol));
    }
    items.emplace_back("format", cfg.format);
    return items;
}

namespace {

ptspectra::ScanConfig scan_config_from(const RunConfig& cfg) {
    ptspectra::ScanConfig sc;
    sc.eps_grid = cfg.eps_grid;
    sc.truncation = cfg.trunc;
    sc.quad_order = cfg.quad_order;
    sc.reality_tol = cfg.reality_tol;
    sc.match_tol = cfg.match_tol;
    sc.track_count = cfg.levels;
    sc.refine = !cfg.no_refine;
    return sc;
}

int run_scan(const RunConfig& cfg, const ptspectra::ModelFamily& family) {
    const ptspectra::ScanConfig sc = scan_config_from(cfg);
    const ptspectra::ScanResult result = ptspectra::scan(family, sc);
    HeaderItems items = canonical_items(cfg);
    if (cfg.subcommand == "matrix2x2") {
        const double threshold = cfg.model == "gain"
                                     ? ptspectra::threshold_gain_coupling({cfg.e1, cfg.e2, 0.0})
                                     : ptspectra::threshold_detuned({cfg.e, cfg.b, 0.0});
        items.emplace_back("closed_form_threshold", format_double(threshold));
    }
    if (result.resonance_warning) {
        std::cerr << "warning: near-resonant frequency ratio; unperturbed levels may be "
                     "degenerate\n";
    }
    const std::string text = cfg.format == "json"
                                 ? trajectories_json(result, items, cfg.trunc_spec)
                                 : trajectories_csv(result, items, cfg.trunc_spec);
    write_output(cfg.out_path, text);
    return 0;
}

int run_rspe(const RunConfig& cfg) {
    std::vector<ptspectra::RspeSeries> series;
    if (cfg.model == "gain") {
        const std::vector<double> h0 = {cfg.e1, cfg.e2};
        const ptspectra::DenseMatrix w = {{ptspectra::Complex(0.0, 0.0),
                                           ptspectra::Complex(0.0, 1.0)},
                                          {ptspectra::Complex(0.0, 1.0),
                                           ptspectra::Complex(0.0, 0.0)}};
        series.push_back(ptspectra::rspe_matrix(h0, w, cfg.level, cfg.order));
    } else if (cfg.model == "detuned") {
        // In the eigenbasis of the unperturbed coupling the detuned model has
        // diagonal part {e - |b|, e + |b|} and the same i*sigma_x perturbation.
        const std::vector<double> h0 = {cfg.e - std::abs(cfg.b), cfg.e + std::abs(cfg.b)};
        const ptspectra::DenseMatrix w = {{ptspectra::Complex(0.0, 0.0),
                                           ptspectra::Complex(0.0, 1.0)},
                                          {ptspectra::Complex(0.0, 1.0),
                                           ptspectra::Complex(0.0, 0.0)}};
        series.push_back(ptspectra::rspe_matrix(h0, w, cfg.level, cfg.order));
    } else if (cfg.model == "lambda-pm") {
        auto [plus, minus] = ptspectra::series_lambda_pm(cfg.omega1, cfg.omega2, cfg.order);
        series.push_back(std::move(plus));
        series.push_back(std::move(minus));
    } else { // h2
        const std::size_t n1 = cfg.trunc.at(0);
        const std::size_t n2 = cfg.trunc.at(1);
        if (cfg.n1 >= n1 || cfg.n2 >= n2) {
            throw std::invalid_argument("rspe: level (n1,n2) must lie inside the truncation box");
        }
        if (cfg.r % 2 == 0 && cfg.s % 2 == 0) {
            throw std::invalid_argument("rspe: coupling powers (r, s) must not both be even");
        }
        std::vector<double> h0;
        h0.reserve(n1 * n2);
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            for (std::size_t i2 = 0; i2 < n2; ++i2) {
                h0.push_back((2.0 * static_cast<double>(i1) + 1.0) * cfg.omega1 +
                             (2.0 * static_cast<double>(i2) + 1.0) * cfg.omega2);
            }
        }
        const ptspectra::DenseMatrix w =
            ptspectra::Complex(0.0, 1.0) *
            ptspectra::kron(ptspectra::monomial_matrix({cfg.omega1, n1}, cfg.r),
                            ptspectra::monomial_matrix({cfg.omega2, n2}, cfg.s));
        ptspectra::RspeSeries s =
            ptspectra::rspe_matrix(h0, w, cfg.n1 * n2 + cfg.n2, cfg.order);
        s.label = std::to_string(cfg.n1) + "," + std::to_string(cfg.n2);
        series.push_back(std::move(s));
    }
    const HeaderItems items = canonical_items(cfg);
    const std::string text =
        cfg.format == "csv" ? rspe_csv(series, items) : rspe_json(series, items);
    write_output(cfg.out_path, text);
    return 0;
}

int run_converge(const RunConfig& cfg) {
    std::unique_ptr<ptspectra::ModelFamily> family;
    if (cfg.model == "h3") {
        family = std::make_unique<ptspectra::H3Family>();
    } else {
        family = std::make_unique<ptspectra::H2Family>(
            ptspectra::ModelH2{cfg.omega1, cfg.omega2, cfg.r, cfg.s});
    }
    ptspectra::ScanConfig sc;
    sc.quad_order = cfg.quad_order;
    sc.match_tol = cfg.match_tol;
    const ptspectra::ConvergenceTable table =
        ptspectra::truncation_convergence(*family, cfg.eps_value, cfg.sizes, cfg.levels, sc);
    const HeaderItems items = canonical_items(cfg);
    const std::string text =
        cfg.format == "csv" ? convergence_csv(table, items) : convergence_json(table, items);
    write_output(cfg.out_path, text);
    return 0;
}

int run_threshold(const RunConfig& cfg) {
    if (cfg.format == "csv") {
        throw std::invalid_argument("threshold reports are JSON only");
    }
    std::unique_ptr<ptspectra::ModelFamily> family;
    if (cfg.model == "gain") {
        family = std::make_unique<ptspectra::GainCouplingFamily>(cfg.e1, cfg.e2);
    } else if (cfg.model == "detuned") {
        family = std::make_unique<ptspectra::DetunedFamily>(cfg.e, cfg.b);
    } else {
        family = std::make_unique<ptspectra::H3Family>();
    }
    ptspectra::ScanConfig sc;
    sc.truncation = cfg.trunc;
    sc.quad_order = cfg.quad_order;
    sc.reality_tol = cfg.reality_tol;
    sc.match_tol = cfg.match_tol;
    const ptspectra::ThresholdReport report = ptspectra::locate_threshold(
        *family, cfg.pair_a, cfg.pair_b, cfg.bracket_lo, cfg.bracket_hi, cfg.tol, sc);
    const HeaderItems items = canonical_items(cfg);
    write_output(cfg.out_path, threshold_json(report, items));
    return 0;
}

} // namespace

int run(const RunConfig& cfg) {
    if (cfg.subcommand == "scan-h3") {
        const ptspectra::H3Family family;
        return run_scan(cfg, family);
    }
    if (cfg.subcommand == "scan-h2") {
        const ptspectra::H2Family family(ptspectra::ModelH2{cfg.omega1, cfg.omega2, cfg.r, cfg.s});
        return run_scan(cfg, family);
    }
    if (cfg.subcommand == "matrix2x2") {
        if (cfg.model == "gain") {
            const ptspectra::GainCouplingFamily family(cfg.e1, cfg.e2);
            return run_scan(cfg, family);
        }
        const ptspectra::DetunedFamily family(cfg.e, cfg.b);
        return run_scan(cfg, family);
    }
    if (cfg.subcommand == "rspe") {
        return run_rspe(cfg);
    }
    if (cfg.subcommand == "converge") {
        return run_converge(cfg);
    }
    if (cfg.subcommand == "threshold") {
        return run_threshold(cfg);
    }
    throw std::invalid_argument("unknown subcommand '" + cfg.subcommand + "'");
}

} // namespace ptcli
