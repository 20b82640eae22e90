#include "ptspectra/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "ptspectra/errors.hpp"

namespace ptspectra {

namespace {

constexpr double kDeflationTol = 1e-14;
constexpr int kMaxItersPerEigenvalue = 40;

// Complex Givens rotation G = [[c, s], [-conj(s), c]] with real c >= 0 such
// that G * [a, b]^T = [r, 0]^T.
struct Givens {
    double c;
    Complex s;
    Complex r;
};

Givens make_givens(Complex a, Complex b) {
    const double aa = std::abs(a), ab = std::abs(b);
    if (ab == 0.0) return {1.0, Complex(0.0, 0.0), a};
    if (aa == 0.0) return {0.0, std::conj(b) / ab, Complex(ab, 0.0)};
    const double d = std::hypot(aa, ab);
    const Complex phase = a / aa;
    return {aa / d, phase * std::conj(b) / d, phase * d};
}

} // namespace

std::pair<Complex, Complex> eig2x2(Complex a, Complex b, Complex c, Complex d) {
    const Complex m = 0.5 * (a + d);
    const Complex det = a * d - b * c;
    const Complex disc = std::sqrt(m * m - det);
    // Take the root of larger magnitude first, recover the other from the
    // determinant to avoid cancellation.
    const Complex big = (std::abs(m + disc) >= std::abs(m - disc)) ? m + disc : m - disc;
    const Complex small = (big != Complex(0.0, 0.0)) ? det / big : m - disc;
    return {big, small};
}

DenseMatrix hessenberg_reduce(const DenseMatrix& a) {
    a.require_square("hessenberg_reduce");
    const std::size_t n = a.rows();
    DenseMatrix h = a;
    if (n < 3) return h;

    std::vector<Complex> v(n), tmp(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        // Householder vector for column k, rows k+1..n-1.
        double xnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) xnorm2 += std::norm(h(i, k));
        const double xnorm = std::sqrt(xnorm2);
        if (xnorm == 0.0) continue;
        const Complex x0 = h(k + 1, k);
        const Complex phase = (x0 == Complex(0.0, 0.0)) ? Complex(1.0, 0.0) : x0 / std::abs(x0);
        const Complex alpha = -phase * xnorm;

        double vnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            v[i] = h(i, k) - (i == k + 1 ? alpha : Complex(0.0, 0.0));
            vnorm2 += std::norm(v[i]);
        }
        if (vnorm2 == 0.0) continue;
        const double inv = 1.0 / std::sqrt(vnorm2);
        for (std::size_t i = k + 1; i < n; ++i) v[i] *= inv;

        // Left: H -= 2 v (v^H H) on rows k+1..n-1, columns k..n-1.
        for (std::size_t j = k; j < n; ++j) {
            Complex dot(0.0, 0.0);
            for (std::size_t i = k + 1; i < n; ++i) dot += std::conj(v[i]) * h(i, j);
            tmp[j] = dot;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex vi2 = 2.0 * v[i];
            for (std::size_t j = k; j < n; ++j) h(i, j) -= vi2 * tmp[j];
        }
        // Right: H -= 2 (H v) v^H on all rows, columns k+1..n-1.
        for (std::size_t i = 0; i < n; ++i) {
            Complex dot(0.0, 0.0);
            for (std::size_t j = k + 1; j < n; ++j) dot += h(i, j) * v[j];
            tmp[i] = dot;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const Complex d2 = 2.0 * tmp[i];
            for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= d2 * std::conj(v[j]);
        }

        h(k + 1, k) = alpha;
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = Complex(0.0, 0.0);
    }
    // Exact zeros below the first subdiagonal.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j + 1 < i; ++j) h(i, j) = Complex(0.0, 0.0);
    return h;
}

namespace {

// Wilkinson shift: the eigenvalue of the trailing 2x2 block closer to the
// bottom-right entry.
Complex wilkinson_shift(const DenseMatrix& h, std::size_t hi) {
    const Complex a = h(hi - 1, hi - 1), b = h(hi - 1, hi);
    const Complex c = h(hi, hi - 1), d = h(hi, hi);
    const auto [e1, e2] = eig2x2(a, b, c, d);
    return (std::abs(e1 - d) <= std::abs(e2 - d)) ? e1 : e2;
}

// One implicit single-shift QR sweep on the active window [lo, hi] of the
// Hessenberg matrix h. Updates are restricted to the active rows/columns
// (eigenvalue-only computation).
void qr_sweep(DenseMatrix& h, std::size_t lo, std::size_t hi, Complex shift) {
    for (std::size_t k = lo; k < hi; ++k) {
        Complex x, y;
        if (k == lo) {
            x = h(lo, lo) - shift;
            y = h(lo + 1, lo);
        } else {
            x = h(k, k - 1);
            y = h(k + 1, k - 1);
        }
        const Givens g = make_givens(x, y);
        const Complex cs(g.c, 0.0);

        // Left rotation on rows k, k+1 over columns k-1..hi (k-1 only exists
        // for chase steps, where it holds the bulge).
        const std::size_t jstart = (k == lo) ? lo : k - 1;
        for (std::size_t j = jstart; j <= hi; ++j) {
            const Complex t1 = h(k, j), t2 = h(k + 1, j);
            h(k, j) = cs * t1 + g.s * t2;
            h(k + 1, j) = -std::conj(g.s) * t1 + cs * t2;
        }
        if (k != lo) {
            h(k, k - 1) = g.r;
            h(k + 1, k - 1) = Complex(0.0, 0.0);
        }
        // Right rotation (conjugate transpose) on columns k, k+1 over rows
        // lo..min(k+2, hi); creates the next bulge at (k+2, k).
        const std::size_t iend = std::min(k + 2, hi);
        for (std::size_t i = lo; i <= iend; ++i) {
            const Complex t1 = h(i, k), t2 = h(i, k + 1);
            h(i, k) = cs * t1 + std::conj(g.s) * t2;
            h(i, k + 1) = -g.s * t1 + cs * t2;
        }
    }
}

} // namespace

Spectrum eigenvalues(const DenseMatrix& a) {
    a.require_square("eigenvalues");
    const std::size_t n = a.rows();
    if (n == 0) throw std::invalid_argument("eigenvalues: empty matrix");

    Spectrum out;
    out.eigenvalues.resize(n);
    if (n == 1) {
        out.eigenvalues[0] = a(0, 0);
        return out;
    }
    if (n == 2) {
        const auto [e1, e2] = eig2x2(a(0, 0), a(0, 1), a(1, 0), a(1, 1));
        out.eigenvalues = {e1, e2};
        return out;
    }

    DenseMatrix h = hessenberg_reduce(a);
    const double hnorm = h.frobenius_norm();
    if (hnorm == 0.0) {
        std::fill(out.eigenvalues.begin(), out.eigenvalues.end(), Complex(0.0, 0.0));
        return out;
    }

    auto negligible = [&](std::size_t i) {
        double scale = std::abs(h(i - 1, i - 1)) + std::abs(h(i, i));
        if (scale == 0.0) scale = hnorm;
        return std::abs(h(i, i - 1)) <= kDeflationTol * scale;
    };

    std::size_t hi = n - 1;
    int iters = 0;
    while (true) {
        // Deflate converged trailing eigenvalues.
        while (hi > 0 && negligible(hi)) {
            h(hi, hi - 1) = Complex(0.0, 0.0);
            out.eigenvalues[hi] = h(hi, hi);
            --hi;
            iters = 0;
        }
        if (hi == 0) {
            out.eigenvalues[0] = h(0, 0);
            break;
        }
        // Find the start of the active block: largest lo <= hi with a
        // negligible subdiagonal below it (or 0).
        std::size_t lo = hi;
        while (lo > 0 && !negligible(lo)) --lo;
        if (lo > 0) h(lo, lo - 1) = Complex(0.0, 0.0);

        if (lo == hi - 1) {
            // 2x2 block: closed form.
            const auto [e1, e2] = eig2x2(h(lo, lo), h(lo, hi), h(hi, lo), h(hi, hi));
            out.eigenvalues[hi] = e1;
            out.eigenvalues[lo] = e2;
            if (lo == 0) break;
            hi = lo - 1;
            iters = 0;
            continue;
        }

        ++iters;
        if (iters > kMaxItersPerEigenvalue)
            throw NonConvergence("eigenvalues: QR iteration cap (40) exceeded");
        Complex shift;
        if (iters % 10 == 0) {
            // Exceptional shift: deterministic perturbation to break
            // stagnation. The active block has hi - lo >= 2 here, so both
            // subdiagonal entries exist.
            shift = h(hi, hi) + 0.75 * (std::abs(h(hi, hi - 1)) + std::abs(h(hi - 1, hi - 2)));
        } else {
            shift = wilkinson_shift(h, hi);
        }
        qr_sweep(h, lo, hi, shift);
    }
    return out;
}

namespace {

// LU factorization with partial pivoting, in place. Returns the permutation
// (row i of the factor corresponds to row perm[i] of the input) and the
// pivot-sign parity. Zero pivots are left in place (handled by callers).
struct LuFactor {
    DenseMatrix lu;
    std::vector<std::size_t> perm;
    int sign = 1;
};

LuFactor lu_factor(const DenseMatrix& a) {
    a.require_square("lu_factor");
    const std::size_t n = a.rows();
    LuFactor f{a, std::vector<std::size_t>(n), 1};
    std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
    DenseMatrix& m = f.lu;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(m(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(m(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
            f.sign = -f.sign;
        }
        const Complex pivot = m(k, k);
        if (pivot == Complex(0.0, 0.0)) continue;
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex l = m(i, k) / pivot;
            m(i, k) = l;
            if (l == Complex(0.0, 0.0)) continue;
            for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= l * m(k, j);
        }
    }
    return f;
}

// Solve (P A) x = P b given LU = lu_factor(A), i.e. A x = b.
std::vector<Complex> lu_solve(const LuFactor& f, const std::vector<Complex>& b) {
    const std::size_t n = f.lu.rows();
    std::vector<Complex> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
    // Forward: L y = Pb (unit diagonal).
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
    // Back: U x = y.
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
        x[i] /= f.lu(i, i);
    }
    return x;
}

// Solve A^H x = b given LU = lu_factor(A): A^H = U^H L^H P.
std::vector<Complex> lu_solve_adjoint(const LuFactor& f, const std::vector<Complex>& b) {
    const std::size_t n = f.lu.rows();
    std::vector<Complex> y(b);
    // U^H y' = b (U^H lower triangular).
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) y[i] -= std::conj(f.lu(j, i)) * y[j];
        y[i] /= std::conj(f.lu(i, i));
    }
    // L^H z = y' (L^H unit upper triangular).
    for (std::size_t i = n; i-- > 0;)
        for (std::size_t j = i + 1; j < n; ++j) y[i] -= std::conj(f.lu(j, i)) * y[j];
    // x = P^T z.
    std::vector<Complex> x(n);
    for (std::size_t i = 0; i < n; ++i) x[f.perm[i]] = y[i];
    return x;
}

double vec_norm(const std::vector<Complex>& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

} // namespace

Complex lu_determinant(const DenseMatrix& a) {
    LuFactor f = lu_factor(a);
    Complex det(static_cast<double>(f.sign), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) det *= f.lu(i, i);
    return det;
}

double eigen_residual(const DenseMatrix& a, Complex lambda) {
    a.require_square("eigen_residual");
    const std::size_t n = a.rows();
    const double anorm = a.frobenius_norm();
    const double denom = (anorm > 0.0) ? anorm : 1.0;

    DenseMatrix b = a;
    for (std::size_t i = 0; i < n; ++i) b(i, i) -= lambda;
    LuFactor f = lu_factor(b);
    // Replace (near-)zero pivots so the solves stay finite; inverse iteration
    // then returns a correspondingly tiny singular-value estimate.
    const double tiny = 1e-300 + 1e-18 * denom;
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(f.lu(i, i)) < tiny) f.lu(i, i) = Complex(tiny, 0.0);

    // Inverse iteration on B^H B: v <- normalize(B^{-1} B^{-H} v).
    std::vector<Complex> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = Complex(1.0 + 0.01 * static_cast<double>(i), 0.0);
    double nv = vec_norm(v);
    for (auto& z : v) z /= nv;

    double sigma = 0.0;
    for (int it = 0; it < 6; ++it) {
        std::vector<Complex> u = lu_solve_adjoint(f, v);
        std::vector<Complex> w = lu_solve(f, u);
        const double wn = vec_norm(w);
        if (!std::isfinite(wn) || wn == 0.0) return 0.0;
        sigma = 1.0 / std::sqrt(wn);
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
    }
    return sigma / denom;
}

double multiset_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("multiset_distance: size mismatch");
    const std::size_t n = a.size();
    if (n == 0) return 0.0;

    // Global greedy: match the closest remaining pair until all elements are
    // used, which is equivalent to sweeping all pairs in order of increasing
    // distance. A sort-by-real-part pairing would be cheaper but mispairs
    // conjugate partners whose real parts interleave within rounding noise.
    struct Edge {
        double d;
        std::uint32_t i, j;
    };
    std::vector<Edge> edges;
    edges.reserve(n * n);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < n; ++j) {
            edges.push_back({std::abs(a[i] - b[j]), i, j});
        }
    }
    std::sort(edges.begin(), edges.end(),
              [](const Edge& x, const Edge& y) { return x.d < y.d; });
    std::vector<bool> usedA(n, false), usedB(n, false);
    double worst = 0.0;
    std::size_t matched = 0;
    for (const Edge& e : edges) {
        if (usedA[e.i] || usedB[e.j]) continue;
        usedA[e.i] = usedB[e.j] = true;
        worst = std::max(worst, e.d);
        if (++matched == n) break;
    }
    return worst;
}

double conjugation_closure_defect(const std::vector<Complex>& eigs) {
    std::vector<Complex> conj(eigs.size());
    for (std::size_t i = 0; i < eigs.size(); ++i) conj[i] = std::conj(eigs[i]);
    return multiset_distance(eigs, conj);
}

} // namespace ptspectra
