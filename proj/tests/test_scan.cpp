#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <vector>

#include "ptspectra/closed_forms.hpp"
#include "ptspectra/errors.hpp"
#include "ptspectra/scan.hpp"

using namespace ptspectra;

namespace {

std::vector<double> grid(double start, double stop, double step) {
    std::vector<double> g;
    const long n = std::lround((stop - start) / step);
    for (long k = 0; k <= n; ++k) {
        double v = start + static_cast<double>(k) * step;
        if (std::abs(v) < 1e-12) {
            v = 0.0;
        }
        g.push_back(v);
    }
    return g;
}

const Trajectory& by_label(const ScanResult& r, const std::string& label) {
    for (const auto& t : r.trajectories) {
        if (t.label == label) {
            return t;
        }
    }
    throw std::runtime_error("label not found: " + label);
}

} // namespace

TEST_CASE("gain-coupling scan reproduces the closed-form threshold behaviour") {
    GainCouplingFamily fam(0.0, 2.0); // threshold 1
    ScanConfig cfg;
    cfg.eps_grid = grid(0.0, 2.0, 0.05);
    cfg.track_count = 2;
    const auto r = scan(fam, cfg);
    REQUIRE(r.trajectories.size() == 2);
    CHECK_FALSE(r.resonance_warning);

    const auto& t0 = by_label(r, "0");
    const auto& t1 = by_label(r, "1");
    for (const auto& p : t0.points) {
        const auto expect = eig_gain_coupling({0.0, 2.0, p.eps});
        // Either slot may carry this trajectory; distance to the closer one.
        const double d =
            std::min(std::abs(p.lambda - expect.first), std::abs(p.lambda - expect.second));
        CHECK(d < 1e-12);
        CHECK(p.residual < 1e-12);
        CHECK(p.real_flag == (p.eps <= 1.0));
    }
    // Conjugate partners beyond threshold.
    for (std::size_t i = 0; i < t0.points.size(); ++i) {
        if (!t0.points[i].real_flag) {
            CHECK(std::abs(t0.points[i].lambda - std::conj(t1.points[i].lambda)) < 1e-12);
        }
    }
    // Refinement inserted points at a tenth of the step near the flip.
    CHECK(t0.points.size() > cfg.eps_grid.size());
    bool has_fine = false;
    for (std::size_t i = 1; i < t0.points.size(); ++i) {
        const double d = t0.points[i].eps - t0.points[i - 1].eps;
        if (d > 0.004 && d < 0.006) {
            has_fine = true;
        }
    }
    CHECK(has_fine);
}

TEST_CASE("scan over a reversed grid visits the same points with the same values") {
    DetunedFamily fam(0.5, 1.0); // threshold 1
    ScanConfig up, down;
    up.eps_grid = grid(0.0, 0.8, 0.08);
    down.eps_grid = up.eps_grid;
    std::reverse(down.eps_grid.begin(), down.eps_grid.end());
    up.track_count = down.track_count = 2;
    up.refine = down.refine = false;
    const auto ru = scan(fam, up);
    const auto rd = scan(fam, down);
    REQUIRE(ru.trajectories.size() == rd.trajectories.size());
    for (std::size_t t = 0; t < ru.trajectories.size(); ++t) {
        REQUIRE(ru.trajectories[t].points.size() == rd.trajectories[t].points.size());
        for (std::size_t i = 0; i < ru.trajectories[t].points.size(); ++i) {
            CHECK(ru.trajectories[t].points[i].eps == rd.trajectories[t].points[i].eps);
            CHECK(ru.trajectories[t].points[i].lambda == rd.trajectories[t].points[i].lambda);
        }
    }
}

TEST_CASE("scan validates its configuration") {
    GainCouplingFamily fam(0.0, 2.0);
    ScanConfig cfg;
    cfg.track_count = 2;

    cfg.eps_grid = {0.1, 0.2, 0.3}; // no anchor
    CHECK_THROWS_AS((void)scan(fam, cfg), std::invalid_argument);

    cfg.eps_grid = {0.0, 0.2, 0.1}; // not monotone
    CHECK_THROWS_AS((void)scan(fam, cfg), std::invalid_argument);

    cfg.eps_grid = {0.0, 0.1, 0.1}; // repeated point
    CHECK_THROWS_AS((void)scan(fam, cfg), std::invalid_argument);

    cfg.eps_grid = {0.0, 0.1};
    cfg.track_count = 0;
    CHECK_THROWS_AS((void)scan(fam, cfg), std::invalid_argument);

    cfg.track_count = 3; // only 2 levels exist in a 2x2 model
    CHECK_THROWS_AS((void)scan(fam, cfg), std::invalid_argument);

    cfg.track_count = 2;
    cfg.reality_tol = -1.0;
    CHECK_THROWS_AS((void)scan(fam, cfg), std::invalid_argument);

    cfg.reality_tol = 1e-8;
    cfg.match_tol = -0.5;
    CHECK_THROWS_AS((void)scan(fam, cfg), std::invalid_argument);

    // H3 requires a truncation of rank 1.
    H3Family h3;
    ScanConfig c3;
    c3.eps_grid = {0.0, 0.1};
    c3.truncation = {16, 16};
    CHECK_THROWS_AS((void)scan(h3, c3), std::invalid_argument);
}

TEST_CASE("coarse steps across an exceptional point raise NonConvergence") {
    GainCouplingFamily fam(0.0, 2.0);
    ScanConfig cfg;
    cfg.track_count = 2;
    cfg.eps_grid = {0.0, 2.0}; // single step across the threshold at 1
    CHECK_THROWS_AS((void)scan(fam, cfg), NonConvergence);
}

TEST_CASE("H3 scan: positive eps stays real; labels anchor at 2n+1") {
    H3Family fam;
    ScanConfig cfg;
    cfg.truncation = {32};
    cfg.eps_grid = grid(0.0, 0.3, 0.05);
    cfg.track_count = 5;
    const auto r = scan(fam, cfg);
    REQUIRE(r.trajectories.size() == 5);
    for (std::size_t n = 0; n < 5; ++n) {
        const auto& t = r.trajectories[n];
        CHECK(t.label == std::to_string(n));
        CHECK(t.points.front().eps == 0.0);
        CHECK(std::abs(t.points.front().lambda - Complex(2.0 * n + 1.0, 0.0)) < 1e-12);
        for (const auto& p : t.points) {
            CHECK(p.real_flag);
            CHECK(p.residual < 1e-10);
        }
    }
}

TEST_CASE("H3 negative-eps scan reproduces the sequential PT breaking") {
    H3Family fam;
    ScanConfig cfg;
    cfg.truncation = {64};
    cfg.eps_grid = grid(-0.45, 0.0, 0.025);
    cfg.track_count = 7;
    const auto r = scan(fam, cfg);

    // Ground state stays real on the whole window.
    for (const auto& p : by_label(r, "0").points) {
        CHECK(p.real_flag);
    }

    // Levels 5 and 6 break together somewhere in (-0.45, -0.30): equal flip
    // eps (they coalesce pairwise), complex-conjugate partners beyond.
    const auto& t5 = by_label(r, "5");
    const auto& t6 = by_label(r, "6");
    REQUIRE(t5.points.size() == t6.points.size());
    // Largest (least negative) eps at which each level has gone complex.
    const auto first_break = [](const Trajectory& t) {
        double flip = -1e9;
        bool broken = false;
        for (const auto& p : t.points) {
            if (!p.real_flag) {
                broken = true;
                flip = std::max(flip, p.eps);
            }
        }
        REQUIRE(broken);
        return flip;
    };
    const double flip5 = first_break(t5);
    const double flip6 = first_break(t6);
    CHECK(flip5 == flip6);
    CHECK(flip5 < -0.30);
    CHECK(flip5 > -0.45);

    // Beyond the break the pair is complex conjugate.
    for (std::size_t i = 0; i < t5.points.size(); ++i) {
        if (!t5.points[i].real_flag) {
            CHECK(std::abs(t5.points[i].lambda - std::conj(t6.points[i].lambda)) <
                  1e-6 * (1.0 + std::abs(t5.points[i].lambda)));
        }
    }
}

TEST_CASE("certify_reality and certify_lowest") {
    H3Family fam;
    ScanConfig cfg;
    cfg.truncation = {48};
    cfg.track_count = 5;

    // All five lowest levels certify at eps = 0.1 (real and truncation-stable).
    const auto batch = certify_lowest(fam, cfg, {0.1, -0.1});
    REQUIRE(batch.size() == 10);
    for (const auto& c : batch) {
        CHECK(c.certified);
        CHECK(c.real_within_tol);
        CHECK(c.truncation_converged);
        CHECK(c.im_abs <= cfg.reality_tol * (1.0 + std::abs(c.lambda)));
        CHECK(c.doubling_shift <= 10.0 * cfg.reality_tol * (1.0 + std::abs(c.lambda)));
    }

    // A single-label certification agrees with the batch result.
    const auto one = certify_reality(fam, "2", 0.1, cfg);
    CHECK(one.label == "2");
    CHECK(one.certified);
    const auto* match = &batch[0];
    for (const auto& c : batch) {
        if (c.label == "2" && c.eps == 0.1) {
            match = &c;
        }
    }
    CHECK(one.lambda == match->lambda);

    // Beyond a detuned threshold the pair must fail reality certification.
    DetunedFamily det(0.0, 0.5); // threshold 0.5
    ScanConfig dc;
    dc.track_count = 2;
    const auto broken = certify_lowest(det, dc, {0.8});
    REQUIRE(broken.size() == 2);
    for (const auto& c : broken) {
        CHECK_FALSE(c.real_within_tol);
        CHECK_FALSE(c.certified);
        CHECK(c.im_abs > 0.1);
    }

    // Unknown labels are rejected.
    CHECK_THROWS_AS((void)certify_reality(fam, "999", 0.1, cfg), std::invalid_argument);
}

TEST_CASE("locate_threshold: closed-form models to tight tolerance") {
    GainCouplingFamily fam(0.0, 2.0);
    ScanConfig cfg;
    cfg.track_count = 2;
    const auto rep = locate_threshold(fam, "0", "1", 0.0, 2.0, 1e-9, cfg);
    CHECK(std::abs(rep.eps_star - 1.0) <= 2e-9);
    CHECK(rep.uncertainty <= 2e-9);
    CHECK(rep.side == 1);
    CHECK(rep.truncations_agree);
    CHECK(rep.max_im_beyond > 0.0);

    DetunedFamily det(1.0, -0.75); // threshold |b| = 0.75
    const auto rd = locate_threshold(det, "0", "1", 0.0, 2.0, 1e-9, cfg);
    CHECK(std::abs(rd.eps_star - 0.75) <= 2e-9);

    // Negative-side bracket works symmetrically.
    const auto rn = locate_threshold(fam, "0", "1", 0.0, -2.0, 1e-9, cfg);
    CHECK(std::abs(rn.eps_star + 1.0) <= 2e-9);
    CHECK(rn.side == -1);

    // Invalid brackets: pair already complex at lo, or still real at hi.
    CHECK_THROWS_AS((void)locate_threshold(fam, "0", "1", 1.5, 2.0, 1e-6, cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)locate_threshold(fam, "0", "1", 0.0, 0.5, 1e-6, cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)locate_threshold(fam, "0", "7", 0.0, 2.0, 1e-6, cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)locate_threshold(fam, "0", "1", 0.0, 2.0, 0.0, cfg),
                    std::invalid_argument);
}

TEST_CASE("truncation_convergence tabulates decreasing differences") {
    H3Family fam;
    ScanConfig cfg;
    // eps = 0: every size gives exactly {1,3,5}, so diffs are exactly zero.
    const auto t0 = truncation_convergence(fam, 0.0, {{8}, {16}, {32}}, 3, cfg);
    REQUIRE(t0.rows.size() == 3);
    for (const auto& row : t0.rows) {
        for (double d : row.diffs) {
            CHECK(d == 0.0);
        }
        CHECK(row.diffs_decreasing);
    }

    // eps = 0.3: values settle as the truncation grows.
    const auto t = truncation_convergence(fam, 0.3, {{16}, {32}, {64}}, 3, cfg);
    for (const auto& row : t.rows) {
        REQUIRE(row.diffs.size() == 2);
        CHECK(row.diffs[1] < 1e-6);
        CHECK(row.diffs[1] <= row.diffs[0] + 1e-12);
    }

    // Sizes must increase strictly.
    CHECK_THROWS_AS((void)truncation_convergence(fam, 0.1, {{32}, {16}}, 3, cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)truncation_convergence(fam, 0.1, {}, 3, cfg), std::invalid_argument);
}

TEST_CASE("scan_worker_count respects PT_SPECTRA_THREADS") {
    // Explicit positive cap.
    setenv("PT_SPECTRA_THREADS", "3", 1);
    CHECK(scan_worker_count(100) == 3);
    CHECK(scan_worker_count(2) == 2); // never more workers than jobs

    // Zero = auto (hardware concurrency, at least 1).
    setenv("PT_SPECTRA_THREADS", "0", 1);
    CHECK(scan_worker_count(100) >= 1);

    // Invalid values are a configuration error.
    setenv("PT_SPECTRA_THREADS", "abc", 1);
    CHECK_THROWS_AS((void)scan_worker_count(4), std::invalid_argument);
    setenv("PT_SPECTRA_THREADS", "-2", 1);
    CHECK_THROWS_AS((void)scan_worker_count(4), std::invalid_argument);
    setenv("PT_SPECTRA_THREADS", "3x", 1);
    CHECK_THROWS_AS((void)scan_worker_count(4), std::invalid_argument);

    // Empty string counts as unset (auto).
    setenv("PT_SPECTRA_THREADS", "", 1);
    CHECK(scan_worker_count(4) >= 1);

    unsetenv("PT_SPECTRA_THREADS");
    CHECK(scan_worker_count(100) >= 1);
}

TEST_CASE("scan results are identical across worker counts") {
    H3Family fam;
    ScanConfig cfg;
    cfg.truncation = {24};
    cfg.eps_grid = grid(-0.2, 0.2, 0.05);
    cfg.track_count = 4;

    setenv("PT_SPECTRA_THREADS", "1", 1);
    const auto r1 = scan(fam, cfg);
    setenv("PT_SPECTRA_THREADS", "5", 1);
    const auto r5 = scan(fam, cfg);
    unsetenv("PT_SPECTRA_THREADS");

    REQUIRE(r1.trajectories.size() == r5.trajectories.size());
    for (std::size_t t = 0; t < r1.trajectories.size(); ++t) {
        const auto& a = r1.trajectories[t];
        const auto& b = r5.trajectories[t];
        REQUIRE(a.points.size() == b.points.size());
        for (std::size_t i = 0; i < a.points.size(); ++i) {
            CHECK(a.points[i].eps == b.points[i].eps);
            CHECK(a.points[i].lambda == b.points[i].lambda); // bitwise
            CHECK(a.points[i].residual == b.points[i].residual);
            CHECK(a.points[i].real_flag == b.points[i].real_flag);
        }
    }
}

TEST_CASE("H2 scan carries the resonance warning and tracks labelled boxes") {
    H2Family fam({1.0, 2.0, 1, 1});
    ScanConfig cfg;
    cfg.truncation = {10, 10};
    cfg.eps_grid = grid(0.0, 0.4, 0.1);
    cfg.track_count = 3;
    const auto r = scan(fam, cfg);
    CHECK(r.resonance_warning);
    REQUIRE(r.trajectories.size() == 3);
    CHECK(r.trajectories[0].label == "0,0");
    CHECK(std::abs(r.trajectories[0].points.front().lambda - Complex(3.0, 0.0)) < 1e-12);
    // Level ordering at eps=0: 3, 5, 7 for omega=(1,2).
    CHECK(std::abs(r.trajectories[1].points.front().lambda - Complex(5.0, 0.0)) < 1e-12);

    H2Family irr({1.0, std::sqrt(2.0), 1, 1});
    ScanConfig c2;
    c2.truncation = {8, 8};
    c2.eps_grid = grid(0.0, 0.2, 0.1);
    c2.track_count = 2;
    CHECK_FALSE(scan(irr, c2).resonance_warning);

    // Rank mismatch is rejected.
    ScanConfig bad = cfg;
    bad.truncation = {10};
    CHECK_THROWS_AS((void)scan(fam, bad), std::invalid_argument);
}
