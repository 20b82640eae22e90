#include "ptspectra/rspe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ptspectra {

namespace {

constexpr double kDegenerateGap = 1e-12;
constexpr double kCoefficientFloor = 1e-300;

double estimate_or_infinity(const std::vector<Complex>& coefficients) {
    try {
        return radius_estimate(coefficients);
    } catch (const std::invalid_argument&) {
        return std::numeric_limits<double>::infinity();
    }
}

} // namespace

RspeSeries rspe_matrix(const std::vector<double>& h0_diag, const DenseMatrix& w,
                       std::size_t level, std::size_t order) {
    const std::size_t n = h0_diag.size();
    if (n == 0) {
        throw std::invalid_argument("rspe_matrix: empty unperturbed diagonal");
    }
    w.require_square("rspe_matrix");
    if (w.rows() != n) {
        throw std::invalid_argument("rspe_matrix: perturbation dimension mismatch");
    }
    w.assert_finite();
    if (level >= n) {
        throw std::invalid_argument("rspe_matrix: level index out of range");
    }
    for (double d : h0_diag) {
        if (!std::isfinite(d)) {
            throw std::invalid_argument("rspe_matrix: unperturbed diagonal must be finite");
        }
    }
    const double dm = h0_diag[level];
    for (std::size_t i = 0; i < n; ++i) {
        if (i != level && std::abs(h0_diag[i] - dm) <= kDegenerateGap) {
            throw std::invalid_argument(
                "rspe_matrix: degenerate unperturbed level (gap <= 1e-12); the non-resonant "
                "recursion does not apply");
        }
    }

    // Intermediate normalization: psi_0 = e_m and (psi_k)_m = 0 for k >= 1.
    //   E_k       = (W psi_{k-1})_m
    //   (psi_k)_i = [ sum_{j=1}^{k-1} E_j (psi_{k-j})_i - (W psi_{k-1})_i ] / (d_i - d_m)
    std::vector<Complex> energies(order + 1, Complex(0.0, 0.0));
    energies[0] = Complex(dm, 0.0);
    std::vector<std::vector<Complex>> psi;
    psi.reserve(order + 1);
    psi.emplace_back(n, Complex(0.0, 0.0));
    psi[0][level] = Complex(1.0, 0.0);

    std::vector<Complex> wpsi(n);
    for (std::size_t k = 1; k <= order; ++k) {
        const std::vector<Complex>& prev = psi[k - 1];
        for (std::size_t i = 0; i < n; ++i) {
            Complex acc(0.0, 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                acc += w(i, j) * prev[j];
            }
            wpsi[i] = acc;
        }
        energies[k] = wpsi[level];
        std::vector<Complex> cur(n, Complex(0.0, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            if (i == level) {
                continue;
            }
            Complex acc = -wpsi[i];
            for (std::size_t j = 1; j < k; ++j) {
                acc += energies[j] * psi[k - j][i];
            }
            cur[i] = acc / Complex(h0_diag[i] - dm, 0.0);
        }
        psi.push_back(std::move(cur));
    }

    RspeSeries series;
    series.label = std::to_string(level);
    series.coefficients = std::move(energies);
    series.radius_estimate = estimate_or_infinity(series.coefficients);
    return series;
}

std::pair<RspeSeries, RspeSeries> series_lambda_pm(double omega1, double omega2,
                                                   std::size_t order) {
    if (!(std::isfinite(omega1) && std::isfinite(omega2)) || omega1 <= 0.0 || omega2 <= 0.0) {
        throw std::invalid_argument("series_lambda_pm: frequencies must be finite and positive");
    }
    if (omega1 == omega2) {
        throw std::invalid_argument(
            "series_lambda_pm: equal frequencies (the square root branches coincide)");
    }
    const double s = omega1 * omega1 + omega2 * omega2;
    const double d = std::abs(omega1 * omega1 - omega2 * omega2);

    // sqrt(d^2 - eps^2) = sum_k b_k eps^{2k} with b_0 = d and
    // b_{k+1} = b_k * (1/2 - k)/(k + 1) * (-1/d^2).
    RspeSeries plus, minus;
    plus.label = "lambda+";
    minus.label = "lambda-";
    plus.coefficients.assign(order + 1, Complex(0.0, 0.0));
    minus.coefficients.assign(order + 1, Complex(0.0, 0.0));
    plus.coefficients[0] = Complex(s + d, 0.0);
    minus.coefficients[0] = Complex(s - d, 0.0);
    double b = d;
    for (std::size_t k = 0; 2 * (k + 1) <= order; ++k) {
        b *= (0.5 - static_cast<double>(k)) / (static_cast<double>(k) + 1.0) * (-1.0 / (d * d));
        plus.coefficients[2 * (k + 1)] = Complex(b, 0.0);
        minus.coefficients[2 * (k + 1)] = Complex(-b, 0.0);
    }
    plus.radius_estimate = estimate_or_infinity(plus.coefficients);
    minus.radius_estimate = estimate_or_infinity(minus.coefficients);
    return {std::move(plus), std::move(minus)};
}

double radius_estimate(const std::vector<Complex>& coefficients) {
    // Data points (j, log|c_j|) over nonzero even orders j >= 2.
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t j = 2; j < coefficients.size(); j += 2) {
        const double mag = std::abs(coefficients[j]);
        if (mag > kCoefficientFloor) {
            xs.push_back(static_cast<double>(j));
            ys.push_back(std::log(mag));
        }
    }
    if (xs.size() < 6) {
        throw std::invalid_argument(
            "radius_estimate: needs at least 6 nonzero even-order coefficients");
    }

    // Local decay slopes and their midpoints.
    std::vector<double> slope;
    std::vector<double> mid;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        slope.push_back((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]));
        mid.push_back(0.5 * (xs[i] + xs[i + 1]));
    }

    // Least-squares fit slope ~ a + b/order over the last half, extrapolated
    // to order -> infinity (slope -> a); radius = exp(-a).
    const std::size_t start = slope.size() / 2;
    double s1 = 0.0, sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
    for (std::size_t i = start; i < slope.size(); ++i) {
        const double x = 1.0 / mid[i];
        const double y = slope[i];
        s1 += 1.0;
        sx += x;
        sxx += x * x;
        sy += y;
        sxy += x * y;
    }
    const double det = s1 * sxx - sx * sx;
    double a = 0.0;
    if (det != 0.0 && std::isfinite(det)) {
        a = (sxx * sy - sx * sxy) / det;
    } else {
        a = sy / s1;
    }
    const double radius = std::exp(-a);
    if (std::isnan(radius) || radius <= 0.0) {
        throw std::invalid_argument("radius_estimate: coefficient decay is not geometric");
    }
    return radius; // +infinity when the extrapolated slope diverges
}

Complex partial_sum(const RspeSeries& series, double eps) {
    Complex acc(0.0, 0.0);
    for (std::size_t k = series.coefficients.size(); k-- > 0;) {
        acc = acc * eps + series.coefficients[k];
    }
    return acc;
}

} // namespace ptspectra
