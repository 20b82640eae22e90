#include "ptspectra/hamiltonians.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "ptspectra/linalg.hpp"

namespace ptspectra {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void check_parity_pair(unsigned r, unsigned s) {
    if (r == 0 || s == 0) {
        throw std::invalid_argument("build_h2: coupling powers r, s must be >= 1");
    }
    if (r % 2 == 0 && s % 2 == 0) {
        throw std::invalid_argument(
            "build_h2: coupling powers (r, s) must not both be even (no anticommuting parity)");
    }
}

} // namespace

bool h2_resonance_warning(double omega1, double omega2) {
    if (!(std::isfinite(omega1) && std::isfinite(omega2)) || omega1 <= 0.0 || omega2 <= 0.0) {
        throw std::invalid_argument("h2_resonance_warning: frequencies must be finite and positive");
    }
    const double ratio = omega1 / omega2;
    // Walk the continued-fraction convergents p_k/q_k of the ratio and keep
    // the best approximation with denominator <= 64.
    double x = ratio;
    std::int64_t p_prev = 1, p_prev2 = 0;
    std::int64_t q_prev = 0, q_prev2 = 1;
    double best_err = std::abs(ratio - std::llround(ratio));
    for (int k = 0; k < 40; ++k) {
        const double a_float = std::floor(x);
        if (a_float > 1e15) {
            break;
        }
        const auto a = static_cast<std::int64_t>(a_float);
        const std::int64_t p = a * p_prev + p_prev2;
        const std::int64_t q = a * q_prev + q_prev2;
        if (q > 64) {
            break;
        }
        if (q >= 1) {
            const double err = std::abs(ratio - static_cast<double>(p) / static_cast<double>(q));
            if (err < best_err) {
                best_err = err;
            }
        }
        const double frac = x - a_float;
        if (frac < 1e-15) {
            break;
        }
        x = 1.0 / frac;
        p_prev2 = p_prev;
        p_prev = p;
        q_prev2 = q_prev;
        q_prev = q;
    }
    return best_err <= 1e-9 * std::max(1.0, ratio);
}

TruncatedHamiltonian build_h2(const ModelH2& m, double eps, std::size_t n1, std::size_t n2) {
    if (!(std::isfinite(m.omega1) && std::isfinite(m.omega2)) || m.omega1 <= 0.0 ||
        m.omega2 <= 0.0) {
        throw std::invalid_argument("build_h2: frequencies must be finite and positive");
    }
    if (!std::isfinite(eps)) {
        throw std::invalid_argument("build_h2: eps must be finite");
    }
    check_parity_pair(m.r, m.s);
    if (n1 == 0 || n2 == 0) {
        throw std::invalid_argument("build_h2: truncation sizes must be >= 1");
    }

    const BasisSpec b1{m.omega1, n1};
    const BasisSpec b2{m.omega2, n2};
    const DenseMatrix x1r = monomial_matrix(b1, m.r);
    const DenseMatrix x2s = monomial_matrix(b2, m.s);

    const std::size_t dim = n1 * n2;
    DenseMatrix h = Complex(0.0, eps) * kron(x1r, x2s);
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
        const double e1 = (2.0 * static_cast<double>(i1) + 1.0) * m.omega1;
        for (std::size_t i2 = 0; i2 < n2; ++i2) {
            const double e2 = (2.0 * static_cast<double>(i2) + 1.0) * m.omega2;
            h(i1 * n2 + i2, i1 * n2 + i2) += e1 + e2;
        }
    }
    h.assert_finite();

    std::vector<int> parity(dim, 1);
    const bool on_first_axis = (m.r % 2 == 1);
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
        for (std::size_t i2 = 0; i2 < n2; ++i2) {
            const std::size_t n = on_first_axis ? i1 : i2;
            parity[i1 * n2 + i2] = (n % 2 == 0) ? 1 : -1;
        }
    }

    TruncatedHamiltonian out;
    out.matrix = std::move(h);
    out.parity = std::move(parity);
    out.basis = {b1, b2};
    out.model_tag = "h2";
    out.eps = eps;
    out.resonance_warning = h2_resonance_warning(m.omega1, m.omega2);
    return out;
}

TruncatedHamiltonian build_h3(double eps, std::size_t n, std::size_t quad_order) {
    if (!std::isfinite(eps) || !(eps > -1.0 && eps < 1.0)) {
        throw std::invalid_argument("build_h3: eps must satisfy -1 < eps < 1");
    }
    if (n == 0) {
        throw std::invalid_argument("build_h3: truncation size must be >= 1");
    }

    const BasisSpec b{1.0, n};
    const DenseMatrix x2 = monomial_matrix(b, 2);

    // Potential assembled as cos(pi eps/2)*A - X^2 first so that at eps = 0
    // (where A coincides bitwise with the monomial X^2 and the sine factor
    // vanishes) the result is exactly diag(2n+1).
    const double c = std::cos(kPi * eps / 2.0);
    const double s = std::sin(kPi * eps / 2.0);
    const DenseMatrix abs_pow =
        (eps == 0.0) ? monomial_matrix(b, 2) : abs_power_matrix(b, 2.0 + eps, quad_order);

    DenseMatrix h(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double re = c * abs_pow(i, j).real() - x2(i, j).real();
            h(i, j) = Complex(re, 0.0);
        }
        h(i, i) += 2.0 * static_cast<double>(i) + 1.0;
    }
    if (eps != 0.0) {
        const DenseMatrix signed_pow = signed_abs_power_matrix(b, 2.0 + eps, quad_order);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                h(i, j) += Complex(0.0, s * signed_pow(i, j).real());
            }
        }
    }
    h.assert_finite();

    std::vector<int> parity(n, 1);
    for (std::size_t i = 1; i < n; i += 2) {
        parity[i] = -1;
    }

    TruncatedHamiltonian out;
    out.matrix = std::move(h);
    out.parity = std::move(parity);
    out.basis = {b};
    out.model_tag = "h3";
    out.eps = eps;
    return out;
}

double form_positivity_gap(const TruncatedHamiltonian& h) {
    const std::size_t dim = h.matrix.rows();
    DenseMatrix g = h.matrix.hermitian_part();
    if (h.model_tag == "h3") {
        if (h.basis.size() != 1 || h.basis[0].size != dim) {
            throw std::invalid_argument("form_positivity_gap: inconsistent basis metadata");
        }
        g = g - momentum_squared_matrix(h.basis[0]);
    } else if (h.model_tag == "h2") {
        if (h.basis.size() != 2 || h.basis[0].size * h.basis[1].size != dim) {
            throw std::invalid_argument("form_positivity_gap: inconsistent basis metadata");
        }
        const DenseMatrix p1 = momentum_squared_matrix(h.basis[0]);
        const DenseMatrix p2 = momentum_squared_matrix(h.basis[1]);
        g = g - kron(p1, DenseMatrix::identity(h.basis[1].size)) -
            kron(DenseMatrix::identity(h.basis[0].size), p2);
    } else {
        throw std::invalid_argument("form_positivity_gap: model '" + h.model_tag +
                                    "' has no kinetic matrix");
    }

    const Spectrum spec = eigenvalues(g);
    double min_eig = std::numeric_limits<double>::infinity();
    for (const Complex& ev : spec.eigenvalues) {
        min_eig = std::min(min_eig, ev.real());
    }
    return min_eig;
}

double pt_defect(const DenseMatrix& m, const std::vector<int>& parity) {
    m.require_square("pt_defect");
    if (parity.size() != m.rows()) {
        throw std::invalid_argument("pt_defect: parity vector length must match matrix dimension");
    }
    for (int p : parity) {
        if (p != 1 && p != -1) {
            throw std::invalid_argument("pt_defect: parity entries must be +-1");
        }
    }
    double defect = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double sign = static_cast<double>(parity[i] * parity[j]);
            const Complex d = sign * std::conj(m(i, j)) - m(i, j);
            defect = std::max(defect, std::abs(d));
        }
    }
    return defect;
}

double pt_defect(const TruncatedHamiltonian& h) {
    return pt_defect(h.matrix, h.parity);
}

} // namespace ptspectra
