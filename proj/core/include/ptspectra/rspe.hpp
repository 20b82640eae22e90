#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ptspectra/dense_matrix.hpp"

namespace ptspectra {

// Rayleigh-Schrodinger perturbation series of one eigenvalue:
// lambda(eps) = sum_k coefficients[k] * eps^k, with a convergence-radius
// estimate (positive, or +infinity when no geometric growth is detectable at
// the computed order).
struct RspeSeries {
    std::string label;
    std::vector<Complex> coefficients; // c_0 .. c_K
    double radius_estimate = 0.0;
};

// Perturbation series of the eigenvalue of diag(h0_diag) + eps*w continued
// from level `level`, to order K inclusive, in intermediate normalization
// (the component of the corrected eigenvector along the unperturbed level is
// held at 1). Requires the level to be non-degenerate: the spectral gap
// min_{i != m} |d_i - d_m| must exceed 1e-12, else invalid_argument
// (resonance).
RspeSeries rspe_matrix(const std::vector<double>& h0_diag, const DenseMatrix& w,
                       std::size_t level, std::size_t order);

// Closed-form Taylor series (even powers of eps) of the classical squared
// normal frequencies lambda_pm = (w1^2 + w2^2) +- sqrt((w1^2 - w2^2)^2 - eps^2)
// to order K inclusive. The exact convergence radius is |w1^2 - w2^2|;
// requires w1 != w2.
std::pair<RspeSeries, RspeSeries> series_lambda_pm(double omega1, double omega2,
                                                   std::size_t order);

// Convergence-radius estimate 1/limsup |c_{2k}|^{1/(2k)} from the even-order
// coefficients: local decay slopes of log|c| between consecutive nonzero
// even orders, a least-squares fit of slope against 1/order over the last
// half, extrapolated to order -> infinity. Requires at least 6 nonzero
// even-order coefficients (invalid_argument otherwise). Returns +infinity
// when the extrapolated slope diverges to -infinity (entire series).
double radius_estimate(const std::vector<Complex>& coefficients);

// Horner evaluation of the truncated series at eps.
Complex partial_sum(const RspeSeries& series, double eps);

} // namespace ptspectra
