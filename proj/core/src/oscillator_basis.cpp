#include "ptspectra/oscillator_basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ptspectra/errors.hpp"

namespace ptspectra {

namespace {

constexpr std::size_t kMaxHalflineBasis = 600;

void check_basis(const BasisSpec& b, const char* who) {
    if (!(b.frequency > 0.0) || !std::isfinite(b.frequency))
        throw std::invalid_argument(std::string(who) + ": frequency must be positive");
    if (b.size < 1) throw std::invalid_argument(std::string(who) + ": size must be >= 1");
}

// Implicit-shift QL iteration on a symmetric tridiagonal matrix
// (diagonal d, subdiagonal e), accumulating the first components of the
// normalized eigenvectors in z. On return d holds ascending eigenvalues and
// z the matching first components.
void ql_tridiag_first_row(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
    const std::size_t n = d.size();
    e.resize(n, 0.0); // e[n-1] is a sentinel zero
    z.assign(n, 0.0);
    if (n == 0) return;
    z[0] = 1.0;
    const double eps = std::numeric_limits<double>::epsilon();

    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        while (true) {
            std::size_t m = l;
            while (m + 1 < n) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
                ++m;
            }
            if (m == l) break;
            if (++iter > 50) throw NonConvergence("golub_welsch: QL iteration failed to converge");

            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? r : -r));
            double s = 1.0, c = 1.0, p = 0.0;
            bool aborted = false;
            for (std::size_t i = m; i-- > l;) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    aborted = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if (!aborted) {
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
    }

    // Sort ascending, carrying z.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    std::vector<double> ds(n), zs(n);
    for (std::size_t i = 0; i < n; ++i) {
        ds[i] = d[idx[i]];
        zs[i] = z[idx[i]];
    }
    d = std::move(ds);
    z = std::move(zs);
}

} // namespace

QuadratureRule gauss_hermite(std::size_t n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
    std::vector<double> d(n, 0.0), e(n, 0.0), z;
    for (std::size_t k = 1; k < n; ++k) e[k - 1] = std::sqrt(0.5 * static_cast<double>(k));
    ql_tridiag_first_row(d, e, z);

    const double mu0 = std::sqrt(M_PI);
    QuadratureRule rule;
    rule.nodes = d;
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) rule.weights[i] = mu0 * z[i] * z[i];

    // Enforce the exact symmetry of the Hermite rule.
    for (std::size_t i = 0; i < n / 2; ++i) {
        const std::size_t j = n - 1 - i;
        const double v = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        rule.nodes[i] = -v;
        rule.nodes[j] = v;
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.weights[i] = rule.weights[j] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

HalflineRule scaled_gauss_laguerre(std::size_t n, double alpha) {
    if (n < 1) throw std::invalid_argument("scaled_gauss_laguerre: n must be >= 1");
    if (!(alpha > -1.0))
        throw std::invalid_argument("scaled_gauss_laguerre: alpha must exceed -1");
    std::vector<double> d(n), e(n, 0.0), z;
    for (std::size_t k = 0; k < n; ++k) d[k] = 2.0 * static_cast<double>(k) + alpha + 1.0;
    for (std::size_t k = 1; k < n; ++k)
        e[k - 1] = std::sqrt(static_cast<double>(k) * (static_cast<double>(k) + alpha));
    ql_tridiag_first_row(d, e, z);

    const double log_mu0 = std::lgamma(alpha + 1.0);
    HalflineRule rule;
    rule.t = d;
    rule.scaled_weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        // w_i = mu0 * z_i^2; carry log(w_i) + t_i so nothing underflows while
        // the scaled weight itself stays of polynomial size.
        const double az = std::abs(z[i]);
        const double logw = (az > 0.0) ? log_mu0 + 2.0 * std::log(az)
                                       : -std::numeric_limits<double>::infinity();
        rule.scaled_weights[i] = std::exp(logw + d[i]);
    }
    return rule;
}

std::vector<double> hermite_functions(std::size_t nmax, double x) {
    std::vector<double> phi(nmax);
    if (nmax == 0) return phi;
    phi[0] = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
    if (nmax > 1) phi[1] = std::sqrt(2.0) * x * phi[0];
    for (std::size_t k = 2; k < nmax; ++k) {
        const double kd = static_cast<double>(k);
        phi[k] = std::sqrt(2.0 / kd) * x * phi[k - 1] - std::sqrt((kd - 1.0) / kd) * phi[k - 2];
    }
    return phi;
}

DenseMatrix position_matrix(const BasisSpec& b) {
    check_basis(b, "position_matrix");
    const std::size_t n = b.size;
    DenseMatrix x(n, n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double v = std::sqrt((static_cast<double>(k) + 1.0) / (2.0 * b.frequency));
        x(k, k + 1) = v;
        x(k + 1, k) = v;
    }
    return x;
}

DenseMatrix monomial_matrix(const BasisSpec& b, unsigned r) {
    check_basis(b, "monomial_matrix");
    if (r < 1) throw std::invalid_argument("monomial_matrix: r must be >= 1");
    const std::size_t n = b.size;
    const BasisSpec padded{b.frequency, n + r};
    const DenseMatrix x = position_matrix(padded);
    DenseMatrix p = x;
    for (unsigned k = 1; k < r; ++k) p = p * x;

    DenseMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if ((i + j + r) % 2 != 0) continue; // parity selection: exact zero
            // Symmetrize away the last-ulp asymmetry of the floating product.
            out(i, j) = 0.5 * (p(i, j).real() + p(j, i).real());
        }
    out.assert_finite();
    return out;
}

namespace {

// Core of the |x|^s / sign(x)|x|^s matrix elements at omega=1 and fixed
// quadrature order. parity = 0 computes even-pair entries of |x|^s with the
// rule for weight t^{(s-1)/2} e^{-t}; parity = 1 computes odd-pair entries of
// sign(x)|x|^s with weight t^{s/2} e^{-t} (both choices make the transformed
// integrand a polynomial, so the rules are exact once the order covers the
// degree). Entries of the other parity class stay exactly zero.
DenseMatrix halfline_power_eval(std::size_t n, double s, int parity, std::size_t order) {
    const double alpha = (parity == 0) ? 0.5 * (s - 1.0) : 0.5 * s;
    const HalflineRule rule = scaled_gauss_laguerre(order, alpha);

    DenseMatrix a(n, n);
    std::vector<double> acc(n * n, 0.0);
    for (std::size_t q = 0; q < rule.t.size(); ++q) {
        const double t = rule.t[q];
        if (!(t > 0.0)) continue;
        double f = rule.scaled_weights[q];
        if (parity == 1) f /= std::sqrt(t); // the t^{-1/2} left from dx = dt/(2 sqrt t)
        if (f == 0.0) continue;
        const std::vector<double> phi = hermite_functions(n, std::sqrt(t));
        for (std::size_t m = 0; m < n; ++m) {
            const double fm = f * phi[m];
            for (std::size_t k = m + (parity == 0 ? 0 : 1); k < n; k += 2)
                acc[m * n + k] += fm * phi[k];
        }
    }
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t k = m; k < n; ++k) {
            if ((k - m) % 2 != static_cast<std::size_t>(parity)) continue;
            a(m, k) = acc[m * n + k];
            a(k, m) = acc[m * n + k];
        }
    return a;
}

DenseMatrix halfline_power_matrix(const BasisSpec& b, double s, int parity, std::size_t quad_order,
                                  const char* who) {
    check_basis(b, who);
    if (!(s > 0.0) || !std::isfinite(s))
        throw std::invalid_argument(std::string(who) + ": s must be positive");
    if (b.size > kMaxHalflineBasis)
        throw std::invalid_argument(std::string(who) + ": basis size exceeds the supported " +
                                    std::to_string(kMaxHalflineBasis) +
                                    " (tail weights would underflow inside the support)");

    const std::size_t n = b.size;
    const std::size_t cap = 64 * n;
    std::size_t order = (quad_order == 0) ? 4 * n : quad_order;
    order = std::max<std::size_t>(order, 2);

    DenseMatrix prev = halfline_power_eval(n, s, parity, order);
    while (true) {
        const std::size_t next = 2 * order;
        DenseMatrix cur = halfline_power_eval(n, s, parity, next);
        double diff = 0.0;
        for (std::size_t k = 0; k < prev.data().size(); ++k)
            diff = std::max(diff, std::abs(cur.data()[k] - prev.data()[k]));
        if (diff <= quadrature_stabilization_tol) {
            // omega scaling: <|x|^s>_omega = omega^{-s/2} <|x|^s>_{omega=1}.
            const double scale = std::pow(b.frequency, -0.5 * s);
            if (scale != 1.0) cur = Complex(scale, 0.0) * cur;
            cur.assert_finite();
            return cur;
        }
        if (next > cap)
            throw NonConvergence(std::string(who) + ": quadrature non-stabilization (order " +
                                 std::to_string(next) + " exceeds cap " + std::to_string(cap) +
                                 ", entry change " + std::to_string(diff) + ")");
        order = next;
        prev = std::move(cur);
    }
}

} // namespace

DenseMatrix abs_power_matrix(const BasisSpec& b, double s, std::size_t quad_order) {
    return halfline_power_matrix(b, s, 0, quad_order, "abs_power_matrix");
}

DenseMatrix signed_abs_power_matrix(const BasisSpec& b, double s, std::size_t quad_order) {
    return halfline_power_matrix(b, s, 1, quad_order, "signed_abs_power_matrix");
}

DenseMatrix momentum_squared_matrix(const BasisSpec& b) {
    check_basis(b, "momentum_squared_matrix");
    const std::size_t n = b.size;
    DenseMatrix p2 = monomial_matrix(b, 2);
    const double w2 = b.frequency * b.frequency;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            p2(i, j) = -w2 * p2(i, j);
            if (i == j)
                p2(i, i) += (2.0 * static_cast<double>(i) + 1.0) * b.frequency;
        }
    return p2;
}

} // namespace ptspectra
