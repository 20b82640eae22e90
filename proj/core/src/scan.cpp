#include "ptspectra/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <thread>

#include "ptspectra/errors.hpp"
#include "ptspectra/linalg.hpp"

namespace ptspectra {

namespace {

// Maximum eps distance covered by a single continuation step when walking to
// an off-grid point (certification, threshold probes, convergence tables).
constexpr double kMaxContinuationStep = 0.1;

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string trunc_to_string(const std::vector<std::size_t>& trunc) {
    if (trunc.empty()) {
        return "2"; // fixed-dimension 2x2 models
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

void run_parallel(std::size_t jobs, const std::function<void(std::size_t)>& body) {
    if (jobs == 0) {
        return;
    }
    const std::size_t workers = scan_worker_count(jobs);
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs) {
                    return;
                }
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (std::thread& th : pool) {
        th.join();
    }
    // Deterministic error selection: rethrow the failure at the lowest index.
    for (std::size_t i = 0; i < jobs; ++i) {
        if (errors[i]) {
            std::rethrow_exception(errors[i]);
        }
    }
}

bool lambda_is_real(const Complex& v, double rtol) {
    return std::abs(v.imag()) <= rtol * (1.0 + std::abs(v));
}

std::vector<Complex> sorted_spectrum(const DenseMatrix& m) {
    std::vector<Complex> sp = eigenvalues(m).eigenvalues;
    std::sort(sp.begin(), sp.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) {
            return a.real() < b.real();
        }
        return a.imag() < b.imag();
    });
    return sp;
}

// Exact min-sum assignment of |prev[i] - cands[j]| (shortest augmenting
// paths with potentials, 1-based with a sentinel column 0). Requires
// cands.size() >= prev.size(). Ties are broken toward the lower candidate
// index, so the result is deterministic.
std::vector<std::size_t> assign_min_cost(const std::vector<Complex>& prev,
                                         const std::vector<Complex>& cands) {
    const std::size_t t = prev.size();
    const std::size_t n = cands.size();
    if (n < t) {
        throw std::invalid_argument("assign_min_cost: fewer candidates than tracks");
    }
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(t + 1, 0.0);
    std::vector<double> v(n + 1, 0.0);
    std::vector<double> minv(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0);
    std::vector<std::size_t> way(n + 1, 0);
    const auto cost = [&](std::size_t i, std::size_t j) {
        return std::abs(prev[i - 1] - cands[j - 1]);
    };
    for (std::size_t i = 1; i <= t; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if (!(delta < kInf)) {
                throw NonConvergence("assign_min_cost: augmenting path search failed");
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> match(t, 0);
    for (std::size_t j = 1; j <= n; ++j) {
        if (p[j] != 0) {
            match[p[j] - 1] = j - 1;
        }
    }
    return match;
}

// Assign tracks to candidates and enforce the matching tolerance.
std::vector<Complex> match_step(const std::vector<Complex>& prev, const std::vector<Complex>& cands,
                                const std::vector<std::string>& labels, double match_tol,
                                double eps) {
    const std::vector<std::size_t> idx = assign_min_cost(prev, cands);
    std::vector<Complex> out(prev.size());
    for (std::size_t i = 0; i < prev.size(); ++i) {
        const double d = std::abs(prev[i] - cands[idx[i]]);
        if (d > match_tol) {
            throw NonConvergence("matching ambiguity at eps=" + fmt_double(eps) + ": label '" +
                                 labels[i] + "' moved by " + fmt_double(d) +
                                 " which exceeds match_tol=" + fmt_double(match_tol) +
                                 "; refine the eps grid or raise match_tol");
        }
        out[i] = cands[idx[i]];
    }
    return out;
}

struct TrackSet {
    std::vector<std::string> labels;
    std::vector<double> anchors; // unperturbed level values, ascending
};

TrackSet tracked_levels(const ModelFamily& family, const std::vector<std::size_t>& trunc,
                        std::size_t count) {
    const auto levels = family.unperturbed_levels(trunc);
    if (count == 0) {
        throw std::invalid_argument("scan: track_count must be >= 1");
    }
    if (count > levels.size()) {
        throw std::invalid_argument("scan: track_count " + std::to_string(count) +
                                    " exceeds the number of basis levels " +
                                    std::to_string(levels.size()));
    }
    TrackSet ts;
    ts.labels.reserve(count);
    ts.anchors.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        ts.labels.push_back(levels[i].first);
        ts.anchors.push_back(levels[i].second);
    }
    return ts;
}

// match_tol resolution: explicit positive value wins; 0 selects 0.4 times
// the smallest positive gap among the tracked unperturbed levels plus the
// first untracked neighbour.
double resolve_match_tol(const ModelFamily& family, const std::vector<std::size_t>& trunc,
                         std::size_t count, double requested) {
    if (requested < 0.0 || !std::isfinite(requested)) {
        throw std::invalid_argument("scan: match_tol must be >= 0");
    }
    if (requested > 0.0) {
        return requested;
    }
    const auto levels = family.unperturbed_levels(trunc);
    const std::size_t upto = std::min(levels.size(), count + 1);
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < upto; ++i) {
        const double g = levels[i].second - levels[i - 1].second;
        if (g > 0.0) {
            min_gap = std::min(min_gap, g);
        }
    }
    if (!std::isfinite(min_gap)) {
        throw std::invalid_argument(
            "scan: unperturbed levels are degenerate; specify match_tol explicitly");
    }
    return 0.4 * min_gap;
}

// Stateful continuation walker used by certification, threshold location and
// convergence tables: evaluates the tracked eigenvalues at arbitrary eps by
// chaining matching steps (at most kMaxContinuationStep apart) from the
// nearest previously evaluated point, anchored at eps = 0.
class Continuer {
public:
    Continuer(const ModelFamily& family, std::vector<std::size_t> trunc, std::size_t quad_order,
              double match_tol, std::size_t count)
        : family_(family), trunc_(std::move(trunc)), quad_order_(quad_order) {
        tracks_ = tracked_levels(family, trunc_, count);
        match_tol_ = resolve_match_tol(family, trunc_, count, match_tol);
        std::vector<Complex> anchor_vals(tracks_.anchors.size());
        for (std::size_t i = 0; i < tracks_.anchors.size(); ++i) {
            anchor_vals[i] = Complex(tracks_.anchors[i], 0.0);
        }
        cache_[0.0] = match_step(anchor_vals, spectrum_at(0.0), tracks_.labels, match_tol_, 0.0);
    }

    const std::vector<std::string>& labels() const { return tracks_.labels; }

    const std::vector<Complex>& eval(double eps) {
        if (!std::isfinite(eps)) {
            throw std::invalid_argument("continuation: eps must be finite");
        }
        auto hit = cache_.find(eps);
        if (hit != cache_.end()) {
            return hit->second;
        }
        // Nearest cached point (ties toward the smaller eps).
        auto ub = cache_.upper_bound(eps);
        double start = 0.0;
        if (ub == cache_.begin()) {
            start = ub->first;
        } else {
            auto below = std::prev(ub);
            if (ub == cache_.end() || eps - below->first <= ub->first - eps) {
                start = below->first;
            } else {
                start = ub->first;
            }
        }
        const double gap = eps - start;
        const auto nsteps =
            std::max<std::size_t>(1, static_cast<std::size_t>(
                                         std::ceil(std::abs(gap) / kMaxContinuationStep)));
        std::vector<Complex> cur = cache_.at(start);
        for (std::size_t k = 1; k <= nsteps; ++k) {
            const double e =
                (k == nsteps) ? eps
                              : start + gap * (static_cast<double>(k) / static_cast<double>(nsteps));
            cur = match_step(cur, spectrum_at(e), tracks_.labels, match_tol_, e);
            cache_[e] = cur;
        }
        return cache_.at(eps);
    }

private:
    std::vector<Complex> spectrum_at(double eps) const {
        try {
            return sorted_spectrum(family_.build(eps, trunc_, quad_order_));
        } catch (const NonConvergence& ex) {
            throw NonConvergence(std::string(ex.what()) + " [at eps=" + fmt_double(eps) +
                                 ", trunc=" + trunc_to_string(trunc_) + "]");
        }
    }

    const ModelFamily& family_;
    std::vector<std::size_t> trunc_;
    std::size_t quad_order_;
    double match_tol_ = 0.0;
    TrackSet tracks_;
    std::map<double, std::vector<Complex>> cache_;
};

void validate_truncation(const ModelFamily& family, const std::vector<std::size_t>& trunc) {
    if (trunc.size() != family.truncation_rank()) {
        throw std::invalid_argument("scan: model '" + family.name() + "' expects " +
                                    std::to_string(family.truncation_rank()) +
                                    " truncation entries, got " + std::to_string(trunc.size()));
    }
    for (std::size_t n : trunc) {
        if (n == 0) {
            throw std::invalid_argument("scan: truncation sizes must be >= 1");
        }
    }
}

void validate_scan_config(const ScanConfig& cfg) {
    if (!(cfg.reality_tol > 0.0) || !std::isfinite(cfg.reality_tol)) {
        throw std::invalid_argument("scan: reality_tol must be positive");
    }
}

} // namespace

std::size_t scan_worker_count(std::size_t jobs) {
    if (jobs == 0) {
        return 0;
    }
    std::size_t cap = 0;
    if (const char* env = std::getenv("PT_SPECTRA_THREADS")) {
        if (*env != '\0') {
            // strtoull would silently wrap a leading minus; demand digits only.
            for (const char* p = env; *p != '\0'; ++p) {
                if (*p < '0' || *p > '9') {
                    throw std::invalid_argument(
                        "PT_SPECTRA_THREADS must be a non-negative integer (0 = auto)");
                }
            }
            char* end = nullptr;
            const unsigned long long parsed = std::strtoull(env, &end, 10);
            if (end == env || *end != '\0') {
                throw std::invalid_argument(
                    "PT_SPECTRA_THREADS must be a non-negative integer (0 = auto)");
            }
            cap = static_cast<std::size_t>(parsed);
        }
    }
    if (cap == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        cap = hw == 0 ? 4 : hw;
    }
    return std::max<std::size_t>(1, std::min(jobs, cap));
}

// ---------------------------------------------------------------------------
// Model families
// ---------------------------------------------------------------------------

GainCouplingFamily::GainCouplingFamily(double e1, double e2) : e1_(e1), e2_(e2) {
    if (!(std::isfinite(e1) && std::isfinite(e2))) {
        throw std::invalid_argument("gain-coupling model: levels must be finite");
    }
}

DenseMatrix GainCouplingFamily::build(double eps, const std::vector<std::size_t>&,
                                      std::size_t) const {
    return assemble_gain_coupling({e1_, e2_, eps});
}

std::vector<std::pair<std::string, double>>
GainCouplingFamily::unperturbed_levels(const std::vector<std::size_t>&) const {
    const double lo = std::min(e1_, e2_);
    const double hi = std::max(e1_, e2_);
    return {{"0", lo}, {"1", hi}};
}

std::vector<std::size_t>
GainCouplingFamily::doubled(const std::vector<std::size_t>& trunc) const {
    return trunc;
}

DetunedFamily::DetunedFamily(double e, double b) : e_(e), b_(b) {
    if (!(std::isfinite(e) && std::isfinite(b))) {
        throw std::invalid_argument("detuned model: parameters must be finite");
    }
}

DenseMatrix DetunedFamily::build(double eps, const std::vector<std::size_t>&, std::size_t) const {
    return assemble_detuned({e_, b_, eps});
}

std::vector<std::pair<std::string, double>>
DetunedFamily::unperturbed_levels(const std::vector<std::size_t>&) const {
    return {{"0", e_ - std::abs(b_)}, {"1", e_ + std::abs(b_)}};
}

std::vector<std::size_t> DetunedFamily::doubled(const std::vector<std::size_t>& trunc) const {
    return trunc;
}

H2Family::H2Family(ModelH2 m) : m_(m) {
    // Validate eagerly so configuration errors surface before any scan work.
    (void)build_h2(m_, 0.0, 1, 1);
}

DenseMatrix H2Family::build(double eps, const std::vector<std::size_t>& trunc,
                            std::size_t) const {
    return build_h2(m_, eps, trunc.at(0), trunc.at(1)).matrix;
}

std::vector<std::pair<std::string, double>>
H2Family::unperturbed_levels(const std::vector<std::size_t>& trunc) const {
    const std::size_t n1 = trunc.at(0);
    const std::size_t n2 = trunc.at(1);
    struct Entry {
        double value;
        std::size_t i1;
        std::size_t i2;
    };
    std::vector<Entry> entries;
    entries.reserve(n1 * n2);
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
        for (std::size_t i2 = 0; i2 < n2; ++i2) {
            const double v = (2.0 * static_cast<double>(i1) + 1.0) * m_.omega1 +
                             (2.0 * static_cast<double>(i2) + 1.0) * m_.omega2;
            entries.push_back({v, i1, i2});
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.value != b.value) {
            return a.value < b.value;
        }
        if (a.i1 != b.i1) {
            return a.i1 < b.i1;
        }
        return a.i2 < b.i2;
    });
    std::vector<std::pair<std::string, double>> out;
    out.reserve(entries.size());
    for (const Entry& e : entries) {
        out.emplace_back(std::to_string(e.i1) + "," + std::to_string(e.i2), e.value);
    }
    return out;
}

std::vector<std::size_t> H2Family::doubled(const std::vector<std::size_t>& trunc) const {
    // x4/3 per axis (rounded up) rather than x2: doubling both axes would
    // quadruple the matrix dimension.
    std::vector<std::size_t> out;
    out.reserve(trunc.size());
    for (std::size_t n : trunc) {
        out.push_back((n * 4 + 2) / 3);
    }
    return out;
}

bool H2Family::resonance_warning() const {
    return h2_resonance_warning(m_.omega1, m_.omega2);
}

DenseMatrix H3Family::build(double eps, const std::vector<std::size_t>& trunc,
                            std::size_t quad_order) const {
    return build_h3(eps, trunc.at(0), quad_order).matrix;
}

std::vector<std::pair<std::string, double>>
H3Family::unperturbed_levels(const std::vector<std::size_t>& trunc) const {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(trunc.at(0));
    for (std::size_t n = 0; n < trunc.at(0); ++n) {
        out.emplace_back(std::to_string(n), 2.0 * static_cast<double>(n) + 1.0);
    }
    return out;
}

std::vector<std::size_t> H3Family::doubled(const std::vector<std::size_t>& trunc) const {
    return {trunc.at(0) * 2};
}

// ---------------------------------------------------------------------------
// Grid scan
// ---------------------------------------------------------------------------

namespace {

struct GridPoint {
    double eps;
    std::vector<Complex> spectrum; // sorted by (re, im)
};

struct WalkResult {
    std::vector<std::vector<Complex>> values; // [track][point]
    std::vector<std::vector<char>> flags;     // [track][point]
};

WalkResult walk_grid(const std::vector<GridPoint>& pts, std::size_t anchor_idx,
                     const TrackSet& tracks, double match_tol, double rtol) {
    const std::size_t count = tracks.labels.size();
    const std::size_t npts = pts.size();
    WalkResult wr;
    wr.values.assign(count, std::vector<Complex>(npts));
    wr.flags.assign(count, std::vector<char>(npts, 0));

    std::vector<Complex> anchor_vals(count);
    for (std::size_t i = 0; i < count; ++i) {
        anchor_vals[i] = Complex(tracks.anchors[i], 0.0);
    }
    std::vector<Complex> cur =
        match_step(anchor_vals, pts[anchor_idx].spectrum, tracks.labels, match_tol, 0.0);
    for (std::size_t t = 0; t < count; ++t) {
        wr.values[t][anchor_idx] = cur[t];
    }
    std::vector<Complex> up = cur;
    for (std::size_t i = anchor_idx + 1; i < npts; ++i) {
        up = match_step(up, pts[i].spectrum, tracks.labels, match_tol, pts[i].eps);
        for (std::size_t t = 0; t < count; ++t) {
            wr.values[t][i] = up[t];
        }
    }
    std::vector<Complex> down = cur;
    for (std::size_t i = anchor_idx; i-- > 0;) {
        down = match_step(down, pts[i].spectrum, tracks.labels, match_tol, pts[i].eps);
        for (std::size_t t = 0; t < count; ++t) {
            wr.values[t][i] = down[t];
        }
    }
    for (std::size_t t = 0; t < count; ++t) {
        for (std::size_t i = 0; i < npts; ++i) {
            wr.flags[t][i] = lambda_is_real(wr.values[t][i], rtol) ? 1 : 0;
        }
    }
    return wr;
}

std::size_t find_anchor(const std::vector<GridPoint>& pts) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].eps == 0.0) {
            return i;
        }
    }
    throw std::invalid_argument("scan: eps grid must contain 0 (label anchor)");
}

} // namespace

ScanResult scan(const ModelFamily& family, const ScanConfig& cfg) {
    validate_scan_config(cfg);
    validate_truncation(family, cfg.truncation);
    if (cfg.eps_grid.empty()) {
        throw std::invalid_argument("scan: eps grid is empty");
    }
    for (double e : cfg.eps_grid) {
        if (!std::isfinite(e)) {
            throw std::invalid_argument("scan: eps grid contains a non-finite value");
        }
    }
    for (std::size_t i = 1; i < cfg.eps_grid.size(); ++i) {
        const double d = cfg.eps_grid[i] - cfg.eps_grid[i - 1];
        const double d0 = cfg.eps_grid[1] - cfg.eps_grid[0];
        if (d == 0.0 || (d > 0.0) != (d0 > 0.0)) {
            throw std::invalid_argument("scan: eps grid must be strictly monotone");
        }
    }

    const TrackSet tracks = tracked_levels(family, cfg.truncation, cfg.track_count);
    const double match_tol =
        resolve_match_tol(family, cfg.truncation, cfg.track_count, cfg.match_tol);
    const std::string trunc_str = trunc_to_string(cfg.truncation);

    const auto eval_point = [&](double e) -> GridPoint {
        try {
            return {e, sorted_spectrum(family.build(e, cfg.truncation, cfg.quad_order))};
        } catch (const NonConvergence& ex) {
            throw NonConvergence(std::string(ex.what()) + " [at eps=" + fmt_double(e) +
                                 ", trunc=" + trunc_str + "]");
        }
    };

    std::vector<GridPoint> pts(cfg.eps_grid.size());
    run_parallel(pts.size(), [&](std::size_t i) { pts[i] = eval_point(cfg.eps_grid[i]); });

    std::size_t anchor_idx = find_anchor(pts);
    WalkResult wr = walk_grid(pts, anchor_idx, tracks, match_tol, cfg.reality_tol);

    // One local refinement pass: subdivide by 10 every grid gap within
    // +-5 gaps of a reality-flag flip.
    if (cfg.refine && pts.size() >= 2) {
        std::set<std::size_t> gaps;
        for (std::size_t t = 0; t < tracks.labels.size(); ++t) {
            for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
                if (wr.flags[t][i] != wr.flags[t][i + 1]) {
                    const std::size_t lo = i >= 5 ? i - 5 : 0;
                    const std::size_t hi = std::min(i + 5, pts.size() - 2);
                    for (std::size_t g = lo; g <= hi; ++g) {
                        gaps.insert(g);
                    }
                }
            }
        }
        if (!gaps.empty()) {
            std::vector<double> extra;
            for (std::size_t g : gaps) {
                const double a = pts[g].eps;
                const double b = pts[g + 1].eps;
                for (int k = 1; k <= 9; ++k) {
                    extra.push_back(a + (b - a) * (static_cast<double>(k) / 10.0));
                }
            }
            std::vector<GridPoint> fine(extra.size());
            run_parallel(fine.size(), [&](std::size_t i) { fine[i] = eval_point(extra[i]); });
            for (GridPoint& gp : fine) {
                pts.push_back(std::move(gp));
            }
            const bool ascending = cfg.eps_grid.size() < 2 || cfg.eps_grid[1] > cfg.eps_grid[0];
            std::sort(pts.begin(), pts.end(), [&](const GridPoint& a, const GridPoint& b) {
                return ascending ? a.eps < b.eps : a.eps > b.eps;
            });
            anchor_idx = find_anchor(pts);
            wr = walk_grid(pts, anchor_idx, tracks, match_tol, cfg.reality_tol);
        }
    }

    // Residuals: rebuild each matrix once and evaluate all tracked labels.
    std::vector<std::vector<double>> residuals(tracks.labels.size(),
                                               std::vector<double>(pts.size(), 0.0));
    run_parallel(pts.size(), [&](std::size_t i) {
        DenseMatrix m;
        try {
            m = family.build(pts[i].eps, cfg.truncation, cfg.quad_order);
        } catch (const NonConvergence& ex) {
            throw NonConvergence(std::string(ex.what()) + " [at eps=" + fmt_double(pts[i].eps) +
                                 ", trunc=" + trunc_str + "]");
        }
        for (std::size_t t = 0; t < tracks.labels.size(); ++t) {
            residuals[t][i] = eigen_residual(m, wr.values[t][i]);
        }
    });

    ScanResult result;
    result.truncation = cfg.truncation;
    result.resonance_warning = family.resonance_warning();
    result.trajectories.reserve(tracks.labels.size());
    for (std::size_t t = 0; t < tracks.labels.size(); ++t) {
        Trajectory tr;
        tr.label = tracks.labels[t];
        tr.points.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            tr.points.push_back(
                {pts[i].eps, wr.values[t][i], residuals[t][i], wr.flags[t][i] != 0});
        }
        std::sort(tr.points.begin(), tr.points.end(),
                  [](const TrajectoryPoint& a, const TrajectoryPoint& b) { return a.eps < b.eps; });
        result.trajectories.push_back(std::move(tr));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Certification
// ---------------------------------------------------------------------------

std::vector<CertifyResult> certify_lowest(const ModelFamily& family, const ScanConfig& cfg,
                                          const std::vector<double>& eps_values) {
    validate_scan_config(cfg);
    validate_truncation(family, cfg.truncation);
    if (eps_values.empty()) {
        throw std::invalid_argument("certify: no eps values given");
    }
    for (double e : eps_values) {
        if (!std::isfinite(e)) {
            throw std::invalid_argument("certify: eps must be finite");
        }
    }

    Continuer base(family, cfg.truncation, cfg.quad_order, cfg.match_tol, cfg.track_count);
    const std::vector<std::size_t> dbl_trunc = family.doubled(cfg.truncation);
    const bool have_dbl = dbl_trunc != cfg.truncation;
    std::unique_ptr<Continuer> dbl;
    if (have_dbl) {
        dbl = std::make_unique<Continuer>(family, dbl_trunc, cfg.quad_order, cfg.match_tol,
                                          cfg.track_count);
    }

    // Warm the caches walking outward from 0 so chained continuation steps
    // are shared across targets (deterministic order: by |eps|, then sign).
    std::vector<double> order = eps_values;
    std::sort(order.begin(), order.end(), [](double a, double b) {
        if (std::abs(a) != std::abs(b)) {
            return std::abs(a) < std::abs(b);
        }
        return a < b;
    });
    for (double e : order) {
        base.eval(e);
        if (have_dbl) {
            dbl->eval(e);
        }
    }

    std::vector<CertifyResult> out;
    out.reserve(eps_values.size() * cfg.track_count);
    for (double e : eps_values) {
        const std::vector<Complex>& v0 = base.eval(e);
        const std::vector<Complex>& v1 = have_dbl ? dbl->eval(e) : v0;
        for (std::size_t t = 0; t < cfg.track_count; ++t) {
            CertifyResult r;
            r.label = base.labels()[t];
            r.eps = e;
            r.lambda = v0[t];
            r.lambda_doubled = v1[t];
            r.im_abs = std::abs(v0[t].imag());
            r.doubling_shift = std::abs(v0[t] - v1[t]);
            const double scale = 1.0 + std::abs(v0[t]);
            r.real_within_tol = r.im_abs <= cfg.reality_tol * scale;
            r.truncation_converged = r.doubling_shift <= 10.0 * cfg.reality_tol * scale;
            r.certified = r.real_within_tol && r.truncation_converged;
            out.push_back(std::move(r));
        }
    }
    return out;
}

CertifyResult certify_reality(const ModelFamily& family, const std::string& label, double eps,
                              const ScanConfig& cfg) {
    validate_truncation(family, cfg.truncation);
    const auto levels = family.unperturbed_levels(cfg.truncation);
    std::size_t idx = levels.size();
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i].first == label) {
            idx = i;
            break;
        }
    }
    if (idx == levels.size()) {
        throw std::invalid_argument("certify: unknown label '" + label + "'");
    }
    ScanConfig local = cfg;
    local.track_count = idx + 1;
    const std::vector<CertifyResult> all = certify_lowest(family, local, {eps});
    return all.at(idx);
}

// ---------------------------------------------------------------------------
// Threshold location
// ---------------------------------------------------------------------------

ThresholdReport locate_threshold(const ModelFamily& family, const std::string& label_a,
                                 const std::string& label_b, double eps_lo, double eps_hi,
                                 double tol, const ScanConfig& cfg) {
    validate_scan_config(cfg);
    validate_truncation(family, cfg.truncation);
    if (!(std::isfinite(eps_lo) && std::isfinite(eps_hi)) || eps_lo == eps_hi) {
        throw std::invalid_argument("threshold: bracket endpoints must be finite and distinct");
    }
    if (!(tol > 0.0) || !std::isfinite(tol)) {
        throw std::invalid_argument("threshold: bisection tolerance must be positive");
    }
    if (label_a == label_b) {
        throw std::invalid_argument("threshold: pair labels must be distinct");
    }

    const auto levels = family.unperturbed_levels(cfg.truncation);
    std::size_t ia = levels.size(), ib = levels.size();
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i].first == label_a) {
            ia = i;
        }
        if (levels[i].first == label_b) {
            ib = i;
        }
    }
    if (ia == levels.size()) {
        throw std::invalid_argument("threshold: unknown label '" + label_a + "'");
    }
    if (ib == levels.size()) {
        throw std::invalid_argument("threshold: unknown label '" + label_b + "'");
    }
    const std::size_t depth = std::max(ia, ib) + 1;

    Continuer base(family, cfg.truncation, cfg.quad_order, cfg.match_tol, depth);
    const std::vector<std::size_t> dbl_trunc = family.doubled(cfg.truncation);
    const bool have_dbl = dbl_trunc != cfg.truncation;
    std::unique_ptr<Continuer> dbl;
    if (have_dbl) {
        dbl = std::make_unique<Continuer>(family, dbl_trunc, cfg.quad_order, cfg.match_tol, depth);
    }

    bool agree = true;
    const auto pair_real_in = [&](Continuer& c, double e) {
        const std::vector<Complex>& v = c.eval(e);
        return lambda_is_real(v[ia], cfg.reality_tol) && lambda_is_real(v[ib], cfg.reality_tol);
    };
    // Verdicts come from the doubled truncation (the more accurate one);
    // agreement with the base truncation is tracked as evidence.
    const auto verdict = [&](double e) {
        const bool vb = pair_real_in(base, e);
        if (!have_dbl) {
            return vb;
        }
        const bool vd = pair_real_in(*dbl, e);
        if (vb != vd) {
            agree = false;
        }
        return vd;
    };

    if (!verdict(eps_lo)) {
        throw std::invalid_argument("threshold: pair {" + label_a + "," + label_b +
                                    "} is not real at eps_lo=" + fmt_double(eps_lo));
    }
    if (verdict(eps_hi)) {
        throw std::invalid_argument("threshold: pair {" + label_a + "," + label_b +
                                    "} is still real at eps_hi=" + fmt_double(eps_hi));
    }

    double lo = eps_lo;
    double hi = eps_hi;
    int iters = 0;
    while (std::abs(hi - lo) > tol) {
        if (++iters > 200) {
            throw NonConvergence("threshold: bisection failed to reach tolerance " +
                                 fmt_double(tol));
        }
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break; // double resolution floor
        }
        if (verdict(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    Continuer& authoritative = have_dbl ? *dbl : base;
    const std::vector<Complex>& vr = authoritative.eval(lo);
    const std::vector<Complex>& vc = authoritative.eval(hi);

    ThresholdReport rep;
    rep.label_a = label_a;
    rep.label_b = label_b;
    rep.eps_star = 0.5 * (lo + hi);
    rep.uncertainty = std::abs(hi - lo);
    rep.side = rep.eps_star > 0.0 ? 1 : (rep.eps_star < 0.0 ? -1 : 0);
    rep.min_gap = std::abs(vr[ia] - vr[ib]);
    rep.max_im_beyond = std::max(std::abs(vc[ia].imag()), std::abs(vc[ib].imag()));
    rep.truncations_agree = agree;
    return rep;
}

// ---------------------------------------------------------------------------
// Truncation convergence
// ---------------------------------------------------------------------------

ConvergenceTable truncation_convergence(const ModelFamily& family, double eps,
                                        const std::vector<std::vector<std::size_t>>& sizes,
                                        std::size_t k, const ScanConfig& cfg) {
    validate_scan_config(cfg);
    if (sizes.empty()) {
        throw std::invalid_argument("converge: no truncation sizes given");
    }
    if (!std::isfinite(eps)) {
        throw std::invalid_argument("converge: eps must be finite");
    }
    for (const auto& s : sizes) {
        validate_truncation(family, s);
    }
    for (std::size_t i = 1; i < sizes.size(); ++i) {
        std::size_t dim_prev = 1, dim_cur = 1;
        for (std::size_t v : sizes[i - 1]) {
            dim_prev *= v;
        }
        for (std::size_t v : sizes[i]) {
            dim_cur *= v;
        }
        if (dim_cur <= dim_prev) {
            throw std::invalid_argument("converge: truncation sizes must be strictly increasing");
        }
    }

    ConvergenceTable table;
    table.sizes = sizes;
    std::vector<std::string> labels;
    std::vector<std::vector<Complex>> per_size; // [size][track]
    for (const auto& s : sizes) {
        Continuer c(family, s, cfg.quad_order, cfg.match_tol, k);
        if (labels.empty()) {
            labels = c.labels();
        } else if (labels != c.labels()) {
            throw std::invalid_argument(
                "converge: tracked label sets differ across truncations; increase the smallest "
                "size");
        }
        per_size.push_back(c.eval(eps));
    }

    table.rows.reserve(k);
    for (std::size_t t = 0; t < k; ++t) {
        ConvergenceRow row;
        row.label = labels[t];
        row.values.reserve(sizes.size());
        for (std::size_t s = 0; s < sizes.size(); ++s) {
            row.values.push_back(per_size[s][t]);
        }
        for (std::size_t s = 1; s < sizes.size(); ++s) {
            row.diffs.push_back(std::abs(row.values[s] - row.values[s - 1]));
        }
        row.diffs_decreasing = true;
        for (std::size_t d = 1; d < row.diffs.size(); ++d) {
            if (row.diffs[d] > row.diffs[d - 1]) {
                row.diffs_decreasing = false;
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace ptspectra
