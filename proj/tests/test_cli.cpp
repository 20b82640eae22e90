#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "emit.hpp"
#include "run_config.hpp"

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string& work_dir() {
    static const std::string dir = [] {
        char tmpl[] = "/tmp/ptspectra_cli_XXXXXX";
        const char* d = mkdtemp(tmpl);
        REQUIRE(d != nullptr);
        return std::string(d);
    }();
    return dir;
}

// Run the installed binary with a fixed environment; returns exit code and
// captured streams. `extra_env` is prepended as VAR=value pairs.
CliResult run_cli(const std::string& args, const std::string& extra_env = "") {
    const char* bin = std::getenv("PT_SPECTRA_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "PT_SPECTRA_BIN must point at the pt-spectra binary");
    static int seq = 0;
    const std::string out = work_dir() + "/out" + std::to_string(seq);
    const std::string err = work_dir() + "/err" + std::to_string(seq);
    ++seq;
    const std::string cmd = "env " + (extra_env.empty() ? std::string("-u PT_SPECTRA_THREADS")
                                                        : extra_env) +
                            " " + std::string(bin) + " " + args + " > " + out + " 2> " + err;
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    std::remove(out.c_str());
    std::remove(err.c_str());
    return r;
}

} // namespace

// ---------------------------------------------------------------------------
// In-process units of the CLI support library
// ---------------------------------------------------------------------------

TEST_CASE("format_double emits shortest round-trip decimals") {
    for (double v : {0.1, 1.0 / 3.0, 2.0, -1.0000000000000002, 1e-300, 6.02214076e23,
                     3.0204479180442196, 0.0}) {
        const std::string s = ptcli::format_double(v);
        CHECK(std::stod(s) == v);
        // Shortest: 17 significant digits at most, no trailing garbage.
        CHECK(s.size() <= 24);
    }
    CHECK(ptcli::format_double(1.0) == "1");
    CHECK(ptcli::format_double(0.5) == "0.5");
    CHECK(ptcli::format_double(1e22) == "1e+22");
}

TEST_CASE("csv serialization: quoting and byte-identical round-trip") {
    ptcli::CsvTable t;
    t.comments = {"pt-spectra 0.0.0-test", "subcommand=none"};
    t.columns = {"label", "value"};
    t.rows = {{"0,0", "1.5"}, {"plain", "x\"y"}, {"third", ""}};
    const std::string text = ptcli::serialize_csv(t);

    // Quoted only where needed.
    CHECK(text.find("\"0,0\"") != std::string::npos);
    CHECK(text.find("\"x\"\"y\"") != std::string::npos);
    CHECK(text.find("plain,") != std::string::npos);

    const auto back = ptcli::parse_csv(text);
    CHECK(back.comments == t.comments);
    CHECK(back.columns == t.columns);
    CHECK(back.rows == t.rows);
    CHECK(ptcli::serialize_csv(back) == text);
}

TEST_CASE("eps grid parsing: inclusivity, direction, zero snapping") {
    // Inclusive endpoint within half a step, even with accumulation noise.
    const auto g = ptcli::parse_eps_grid("0:1:0.25");
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == doctest::Approx(1.0).epsilon(1e-15));

    // A stop short of the next step is not overshot.
    CHECK(ptcli::parse_eps_grid("0:1:0.3").size() == 4); // 0, .3, .6, .9

    // Descending grids.
    const auto d = ptcli::parse_eps_grid("0.5:-0.5:-0.25");
    REQUIRE(d.size() == 5);
    CHECK(d.front() == 0.5);
    CHECK(d.back() == doctest::Approx(-0.5));

    // Accumulated values that should be zero are snapped to exactly 0.0.
    const auto z = ptcli::parse_eps_grid("-0.6:0:0.02");
    CHECK(z.back() == 0.0);

    // Single values parse as one-point grids.
    const auto s = ptcli::parse_eps_grid("0.125");
    REQUIRE(s.size() == 1);
    CHECK(s[0] == 0.125);

    CHECK_THROWS_AS((void)ptcli::parse_eps_grid("0:1:0"), std::invalid_argument);
    CHECK_THROWS_AS((void)ptcli::parse_eps_grid("0:1:-0.1"), std::invalid_argument);
    CHECK_THROWS_AS((void)ptcli::parse_eps_grid("a:b:c"), std::invalid_argument);
    CHECK_THROWS_AS((void)ptcli::parse_eps_grid(""), std::invalid_argument);
    CHECK_THROWS_AS((void)ptcli::parse_eps_grid("0:1:1e-9"), std::invalid_argument);
}

TEST_CASE("truncation and size-list parsing") {
    CHECK(ptcli::parse_trunc("64", 1) == std::vector<std::size_t>{64});
    CHECK(ptcli::parse_trunc("16x24", 2) == (std::vector<std::size_t>{16, 24}));
    CHECK_THROWS_AS((void)ptcli::parse_trunc("16x24", 1), std::invalid_argument);
    CHECK_THROWS_AS((void)ptcli::parse_trunc("64", 2), std::invalid_argument);
    CHECK_THROWS_AS((void)ptcli::parse_trunc("0", 1), std::invalid_argument);
    CHECK_THROWS_AS((void)ptcli::parse_trunc("axb", 2), std::invalid_argument);

    const auto sizes = ptcli::parse_sizes("8,16,32", 1);
    REQUIRE(sizes.size() == 3);
    CHECK(sizes[2] == std::vector<std::size_t>{32});
    const auto sizes2 = ptcli::parse_sizes("8x8,12x12", 2);
    REQUIRE(sizes2.size() == 2);
    CHECK(sizes2[1] == (std::vector<std::size_t>{12, 12}));
    CHECK_THROWS_AS((void)ptcli::parse_sizes("", 1), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// End-to-end subprocess checks
// ---------------------------------------------------------------------------

TEST_CASE("cli: scan-h3 CSV contract") {
    const auto r = run_cli("scan-h3 --eps -0.1:0.1:0.05 --trunc 16");
    REQUIRE(r.code == 0);
    CHECK(r.err.empty());

    // Header comment block: version first, then the effective config echo.
    CHECK(r.out.rfind("# pt-spectra 1.0.0\n", 0) == 0);
    CHECK(r.out.find("# subcommand=scan-h3\n") != std::string::npos);
    CHECK(r.out.find("# eps=-0.1:0.1:0.05\n") != std::string::npos);
    CHECK(r.out.find("# trunc=16\n") != std::string::npos);

    // Exact column header.
    CHECK(r.out.find("label,eps,re_lambda,im_lambda,residual,real_flag,trunc\n") !=
          std::string::npos);

    // Round-trip through the CSV layer is byte-identical.
    const auto table = ptcli::parse_csv(r.out);
    CHECK(ptcli::serialize_csv(table) == r.out);
    REQUIRE(table.columns.size() == 7);
    for (const auto& row : table.rows) {
        REQUIRE(row.size() == 7);
        CHECK(row[6] == "16");
        CHECK((row[5] == "0" || row[5] == "1"));
        // eps/re/im/residual parse as doubles that round-trip.
        (void)std::stod(row[1]);
        (void)std::stod(row[2]);
    }
    // 5 labels x 5 grid points, all real at these couplings.
    CHECK(table.rows.size() == 25);
}

TEST_CASE("cli: byte-identical reruns across thread counts") {
    const std::string args = "scan-h3 --eps -0.2:0.2:0.05 --trunc 24";
    const auto a = run_cli(args, "PT_SPECTRA_THREADS=1");
    const auto b = run_cli(args, "PT_SPECTRA_THREADS=4");
    const auto c = run_cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
}

TEST_CASE("cli: --out writes the same bytes as stdout") {
    const std::string path = work_dir() + "/traj.csv";
    const auto to_file = run_cli("matrix2x2 gain --e1 0 --e2 2 --eps 0:0.5:0.1 --out " + path);
    REQUIRE(to_file.code == 0);
    CHECK(to_file.out.empty());
    const auto to_stdout = run_cli("matrix2x2 gain --e1 0 --e2 2 --eps 0:0.5:0.1");
    CHECK(slurp(path) == to_stdout.out);
    // The gain header carries the closed-form threshold for reference.
    CHECK(to_stdout.out.find("# closed_form_threshold=1\n") != std::string::npos);
}

TEST_CASE("cli: config file replaces the command line") {
    const std::string cfg = work_dir() + "/run.cfg";
    {
        std::ofstream f(cfg);
        f << "# comment line\n"
          << "subcommand=rspe\n"
          << "model=lambda-pm\n"
          << "omega1=1\n"
          << "omega2=2\n"
          << "order=16\n";
    }
    const auto via_config = run_cli("--config " + cfg);
    const auto via_flags = run_cli("rspe lambda-pm --omega1 1 --omega2 2 --order 16");
    REQUIRE(via_config.code == 0);
    CHECK(via_config.out == via_flags.out);

    // Mixing --config with other flags is rejected.
    const auto mixed = run_cli("--config " + cfg + " --order 8");
    CHECK(mixed.code == 1);
    CHECK(mixed.err.find("error: invalid-config:") == 0);

    const auto missing = run_cli("--config " + work_dir() + "/absent.cfg");
    CHECK(missing.code == 1);
}

TEST_CASE("cli: exit codes and diagnostics") {
    // Invalid configuration -> 1 with a single machine-parsable line.
    const auto bad_grid = run_cli("scan-h3 --eps 0.1:0.5:0.1 --trunc 16");
    CHECK(bad_grid.code == 1);
    CHECK(bad_grid.err.rfind("error: invalid-config:", 0) == 0);
    CHECK(bad_grid.err.find('\n') == bad_grid.err.size() - 1); // one line

    const auto bad_flag = run_cli("scan-h3 --eps 0:0.1:0.05 --bogus 3");
    CHECK(bad_flag.code == 1);
    CHECK(bad_flag.err.rfind("error: invalid-config:", 0) == 0);

    const auto no_sub = run_cli("");
    CHECK(no_sub.code == 1);

    const auto unknown = run_cli("frobnicate --eps 0:1:0.1");
    CHECK(unknown.code == 1);

    // Numerical failure -> 2 (a single step across the exceptional point).
    const auto ambig = run_cli("matrix2x2 gain --e1 0 --e2 2 --eps 0:2:2");
    CHECK(ambig.code == 2);
    CHECK(ambig.err.rfind("error: numerical-failure:", 0) == 0);
    CHECK(ambig.err.find("match_tol") != std::string::npos);

    // Threshold reports have no CSV rendering.
    const auto thcsv = run_cli("threshold gain --bracket 0.5:1.5 --format csv");
    CHECK(thcsv.code == 1);

    // Help exits cleanly.
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("scan-h2 --help").code == 0);
}

TEST_CASE("cli: JSON outputs parse and carry the meta block") {
    const auto r = run_cli("rspe lambda-pm --omega1 1 --omega2 2 --order 40");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["meta"]["version"] == "1.0.0");
    CHECK(j["meta"]["config"]["subcommand"] == "rspe");
    REQUIRE(j["series"].size() == 2);
    CHECK(j["series"][0]["label"] == "lambda+");
    CHECK(j["series"][1]["label"] == "lambda-");
    const double c2 = j["series"][0]["coefficients"][2][0].get<double>();
    CHECK(c2 == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
    const double rad = j["series"][0]["radius_estimate"].get<double>();
    CHECK(rad == doctest::Approx(3.0).epsilon(0.01));

    const auto th = run_cli("threshold gain --e1 0 --e2 2 --bracket 0.5:1.5 --tol 1e-7");
    REQUIRE(th.code == 0);
    const auto tj = nlohmann::json::parse(th.out);
    CHECK(tj["eps_star"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(tj["evidence"]["truncations_agree"].get<bool>());
    CHECK(tj["pair"][0] == "0");

    const auto cv = run_cli("converge h3 --eps 0 --sizes 8,16,32");
    REQUIRE(cv.code == 0);
    const auto cj = nlohmann::json::parse(cv.out);
    REQUIRE(cj["rows"].size() == 3);
    for (const auto& row : cj["rows"]) {
        for (const auto& d : row["diffs"]) {
            CHECK(d.get<double>() == 0.0);
        }
    }

    // Infinite radius estimates serialize as the string "inf".
    const auto sh = run_cli("rspe gain --e1 0 --e2 2 --order 8");
    REQUIRE(sh.code == 0);
    const auto sj = nlohmann::json::parse(sh.out);
    CHECK(sj["series"][0]["radius_estimate"] == "inf");
}

TEST_CASE("cli: scan JSON format mirrors the CSV trajectories") {
    const auto r = run_cli("scan-h3 --eps 0:0.1:0.05 --trunc 12 --format json");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["meta"]["config"]["trunc"] == "12");
    REQUIRE(j["trajectories"].size() == 5);
    const auto& t0 = j["trajectories"][0];
    CHECK(t0["label"] == "0");
    REQUIRE(t0["points"].size() == 3);
    CHECK(t0["points"][0]["eps"].get<double>() == 0.0);
    CHECK(t0["points"][0]["lambda"][0].get<double>() == doctest::Approx(1.0));
    CHECK(t0["points"][0]["real"].get<bool>());

    // CSV of the same run agrees pointwise (both emit full-precision decimals).
    const auto c = run_cli("scan-h3 --eps 0:0.1:0.05 --trunc 12");
    const auto table = ptcli::parse_csv(c.out);
    CHECK(table.rows.size() == 15);
    CHECK(std::stod(table.rows[0][2]) == t0["points"][0]["lambda"][0].get<double>());
}

TEST_CASE("cli: rspe CSV format") {
    const auto r = run_cli("rspe gain --e1 0 --e2 2 --order 12 --format csv");
    REQUIRE(r.code == 0);
    const auto table = ptcli::parse_csv(r.out);
    REQUIRE(table.columns ==
            (std::vector<std::string>{"label", "order", "re_c", "im_c", "radius_estimate"}));
    REQUIRE(table.rows.size() == 13);
    CHECK(table.rows[2][2] == "0.5"); // c2 of the gain ground level
    CHECK(table.rows[0][4] == table.rows[1][4]); // radius repeated per row
}
