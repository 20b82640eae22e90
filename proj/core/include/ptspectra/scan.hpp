#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ptspectra/closed_forms.hpp"
#include "ptspectra/dense_matrix.hpp"
#include "ptspectra/hamiltonians.hpp"

namespace ptspectra {

// A model family exposes everything the scanner needs: matrix builds at
// (eps, truncation), the unperturbed levels used to anchor trajectory labels
// at eps = 0, and the truncation-doubling rule for certification.
class ModelFamily {
public:
    virtual ~ModelFamily() = default;

    virtual std::string name() const = 0;

    // Number of entries expected in a truncation spec (0 = fixed dimension,
    // truncation ignored).
    virtual std::size_t truncation_rank() const = 0;

    virtual DenseMatrix build(double eps, const std::vector<std::size_t>& trunc,
                              std::size_t quad_order) const = 0;

    // Labelled unperturbed levels sorted ascending by energy. For truncated
    // models the labels enumerate basis states inside the truncation box.
    virtual std::vector<std::pair<std::string, double>>
    unperturbed_levels(const std::vector<std::size_t>& trunc) const = 0;

    // Truncation used for doubling checks (identity for fixed-dimension
    // models; x2 per axis for H3; x4/3 per axis for H2 where x2 per axis
    // would quadruple the dimension).
    virtual std::vector<std::size_t> doubled(const std::vector<std::size_t>& trunc) const = 0;

    // True when unperturbed levels may be (near-)degenerate (H2 with a
    // near-rational frequency ratio); surfaced in scan output headers.
    virtual bool resonance_warning() const { return false; }
};

class GainCouplingFamily final : public ModelFamily {
public:
    GainCouplingFamily(double e1, double e2);
    std::string name() const override { return "gain"; }
    std::size_t truncation_rank() const override { return 0; }
    DenseMatrix build(double eps, const std::vector<std::size_t>& trunc,
                      std::size_t quad_order) const override;
    std::vector<std::pair<std::string, double>>
    unperturbed_levels(const std::vector<std::size_t>& trunc) const override;
    std::vector<std::size_t> doubled(const std::vector<std::size_t>& trunc) const override;

private:
    double e1_;
    double e2_;
};

class DetunedFamily final : public ModelFamily {
public:
    DetunedFamily(double e, double b);
    std::string name() const override { return "detuned"; }
    std::size_t truncation_rank() const override { return 0; }
    DenseMatrix build(double eps, const std::vector<std::size_t>& trunc,
                      std::size_t quad_order) const override;
    std::vector<std::pair<std::string, double>>
    unperturbed_levels(const std::vector<std::size_t>& trunc) const override;
    std::vector<std::size_t> doubled(const std::vector<std::size_t>& trunc) const override;

private:
    double e_;
    double b_;
};

class H2Family final : public ModelFamily {
public:
    explicit H2Family(ModelH2 m);
    std::string name() const override { return "h2"; }
    std::size_t truncation_rank() const override { return 2; }
    DenseMatrix build(double eps, const std::vector<std::size_t>& trunc,
                      std::size_t quad_order) const override;
    std::vector<std::pair<std::string, double>>
    unperturbed_levels(const std::vector<std::size_t>& trunc) const override;
    std::vector<std::size_t> doubled(const std::vector<std::size_t>& trunc) const override;
    bool resonance_warning() const override;
    const ModelH2& model() const { return m_; }

private:
    ModelH2 m_;
};

class H3Family final : public ModelFamily {
public:
    H3Family() = default;
    std::string name() const override { return "h3"; }
    std::size_t truncation_rank() const override { return 1; }
    DenseMatrix build(double eps, const std::vector<std::size_t>& trunc,
                      std::size_t quad_order) const override;
    std::vector<std::pair<std::string, double>>
    unperturbed_levels(const std::vector<std::size_t>& trunc) const override;
    std::vector<std::size_t> doubled(const std::vector<std::size_t>& trunc) const override;
};

struct ScanConfig {
    std::vector<double> eps_grid;        // strictly monotone, must contain 0
    std::vector<std::size_t> truncation; // rank entries (empty for 2x2 models)
    std::size_t quad_order = 0;          // 0 = default
    double reality_tol = 1e-8;           // |Im| <= tol * (1 + |lambda|)
    double match_tol = 0.0;              // 0 = auto: 0.4 * min gap of tracked levels
    std::size_t track_count = 5;
    bool refine = true;                  // local x10 refinement around flag flips
};

struct TrajectoryPoint {
    double eps = 0.0;
    Complex lambda;
    double residual = 0.0;
    bool real_flag = false;
};

struct Trajectory {
    std::string label;
    std::vector<TrajectoryPoint> points; // ordered by eps ascending
};

struct ScanResult {
    std::vector<Trajectory> trajectories; // in ascending unperturbed-level order
    std::vector<std::size_t> truncation;
    bool resonance_warning = false;
};

// Scan the eps grid, tracking the track_count lowest unperturbed levels by
// continuation from the eps = 0 anchor. Grid points are evaluated in
// parallel (PT_SPECTRA_THREADS caps workers, 0 or unset = auto). When two
// trajectories approach within match_tol of a common predecessor the
// colliding cluster is matched by optimal assignment; a genuinely ambiguous
// match throws NonConvergence. Reality-flag flips trigger one local
// refinement pass (factor 10, +-5 coarse steps).
ScanResult scan(const ModelFamily& family, const ScanConfig& cfg);

struct CertifyResult {
    std::string label;
    double eps = 0.0;
    Complex lambda;         // at the base truncation
    Complex lambda_doubled; // at the doubled truncation
    double im_abs = 0.0;
    double doubling_shift = 0.0;
    bool real_within_tol = false;
    bool truncation_converged = false;
    bool certified = false; // both of the above
};

// Certify reality of one labelled eigenvalue at a single eps: continuation
// from 0 to eps at the base and doubled truncations; certified when
// |Im| <= reality_tol * (1 + |lambda|) and the doubled truncation moves the
// eigenvalue by <= 10 * reality_tol * (1 + |lambda|). Failure to converge in
// truncation is reported, not thrown.
CertifyResult certify_reality(const ModelFamily& family, const std::string& label, double eps,
                              const ScanConfig& cfg);

// Batch variant: certifies the track_count lowest labels at each eps in
// cfg.eps_grid (excluding 0), sharing the continuation work.
std::vector<CertifyResult> certify_lowest(const ModelFamily& family, const ScanConfig& cfg,
                                          const std::vector<double>& eps_values);

struct ThresholdReport {
    std::string label_a;
    std::string label_b;
    double eps_star = 0.0;
    double uncertainty = 0.0;
    int side = 0;             // sign of eps_star
    double min_gap = 0.0;     // |lambda_a - lambda_b| at the real end of the final bracket
    double max_im_beyond = 0.0; // max |Im| at the complex end of the final bracket
    bool truncations_agree = false; // doubled truncation gives the same verdict at both ends
};

// Locate the PT-breaking threshold of a labelled pair by bisection on
// [eps_lo, eps_hi] (pair real at eps_lo, complex at eps_hi; else
// invalid_argument). Eigenvalues at each probe are identified by
// continuation from the nearest previously evaluated point, starting from
// the eps = 0 anchor. The verdict at each probe is cross-checked at the
// doubled truncation.
ThresholdReport locate_threshold(const ModelFamily& family, const std::string& label_a,
                                 const std::string& label_b, double eps_lo, double eps_hi,
                                 double tol, const ScanConfig& cfg);

struct ConvergenceRow {
    std::string label;
    std::vector<Complex> values; // one per size
    std::vector<double> diffs;   // |values[i] - values[i-1]|, size-1 entries
    bool diffs_decreasing = true;
};

struct ConvergenceTable {
    std::vector<std::vector<std::size_t>> sizes; // truncation spec per column
    std::vector<ConvergenceRow> rows;
};

// Eigenvalues of the k lowest labels at eps for each truncation in sizes
// (each entry a full truncation spec), with successive differences.
ConvergenceTable truncation_convergence(const ModelFamily& family, double eps,
                                        const std::vector<std::vector<std::size_t>>& sizes,
                                        std::size_t k, const ScanConfig& cfg);

// Worker count used by the parallel grid evaluator: the PT_SPECTRA_THREADS
// environment variable caps it (0 or unset = hardware concurrency).
std::size_t scan_worker_count(std::size_t jobs);

} // namespace ptspectra
