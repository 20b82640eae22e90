#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "oracles.hpp"
#include "ptspectra/closed_forms.hpp"
#include "ptspectra/dense_matrix.hpp"
#include "ptspectra/errors.hpp"
#include "ptspectra/hamiltonians.hpp"
#include "ptspectra/rspe.hpp"

using namespace ptspectra;

namespace {

// The 2x2 gain-coupling problem in series form: diag(e1, e2) + eps * W with
// W = [[0, i], [i, 0]].
DenseMatrix gain_w() {
    DenseMatrix w(2, 2);
    w(0, 1) = Complex(0.0, 1.0);
    w(1, 0) = Complex(0.0, 1.0);
    return w;
}

} // namespace

TEST_CASE("rspe_matrix reproduces the gain-coupling binomial series exactly") {
    // Exact expansion: lambda_0(eps) = 1 - sqrt(1 - eps^2) around e = (0, 2)
    // gives c2 = 1/2, c4 = 1/8, c6 = 1/16, c8 = 5/128; odd orders vanish.
    const auto s = rspe_matrix({0.0, 2.0}, gain_w(), 0, 8);
    CHECK(s.label == "0");
    REQUIRE(s.coefficients.size() == 9);
    const double expect[9] = {0.0, 0.0, 0.5, 0.0, 0.125, 0.0, 0.0625, 0.0, 0.0390625};
    for (int k = 0; k <= 8; ++k) {
        CHECK(s.coefficients[k].real() == doctest::Approx(expect[k]).epsilon(1e-14));
        CHECK(s.coefficients[k].imag() == 0.0); // products of pure imaginaries
    }

    // The mirror level: lambda_1 = 1 + sqrt(1 - eps^2): same magnitudes,
    // opposite signs, constant term 2.
    const auto t = rspe_matrix({0.0, 2.0}, gain_w(), 1, 8);
    CHECK(t.coefficients[0].real() == doctest::Approx(2.0));
    for (int k = 2; k <= 8; k += 2) {
        CHECK(t.coefficients[k].real() == doctest::Approx(-expect[k]).epsilon(1e-13));
    }

    // Partial sums approach the closed form inside the radius.
    const auto exact = [](double eps) { return 1.0 - std::sqrt(1.0 - eps * eps); };
    const auto s40 = rspe_matrix({0.0, 2.0}, gain_w(), 0, 40);
    for (double eps : {0.1, 0.3, 0.5}) {
        CHECK(partial_sum(s40, eps).real() == doctest::Approx(exact(eps)).epsilon(1e-12));
        CHECK(partial_sum(s40, eps).imag() == 0.0);
    }
}

TEST_CASE("rspe_matrix input validation") {
    CHECK_THROWS_AS((void)rspe_matrix({0.0, 1e-13}, gain_w(), 0, 4), std::invalid_argument);
    CHECK_THROWS_AS((void)rspe_matrix({0.0, 2.0}, gain_w(), 2, 4), std::invalid_argument);
    CHECK_THROWS_AS((void)rspe_matrix({0.0, 2.0, 4.0}, gain_w(), 0, 4), std::invalid_argument);
    CHECK_THROWS_AS((void)rspe_matrix({0.0, 2.0}, DenseMatrix(3, 3), 0, 4),
                    std::invalid_argument);
}

TEST_CASE("rspe_matrix on the detuned model via the rotated basis") {
    // H = [[e + i eps, b], [b, e - i eps]] conjugated by the Hadamard
    // rotation becomes diag(e - b, e + b) + i eps sigma_x (for b > 0), the
    // same W as the gain model: the series of level 0 is
    // (e - b) + b (1 - sqrt(1 - (eps/b)^2)) = e - sqrt(b^2 - eps^2).
    const double e = 0.5, b = 2.0;
    const auto s = rspe_matrix({e - b, e + b}, gain_w(), 0, 40);
    const auto exact = [&](double eps) { return e - std::sqrt(b * b - eps * eps); };
    for (double eps : {0.2, 0.9}) {
        CHECK(partial_sum(s, eps).real() == doctest::Approx(exact(eps)).epsilon(1e-12));
    }
    // c2 = 1/(2b) by the binomial expansion.
    CHECK(s.coefficients[2].real() == doctest::Approx(1.0 / (2.0 * b)).epsilon(1e-13));
}

TEST_CASE("rspe_matrix H2 series: even, real, with the hand-derived c2") {
    // omega = (1, 2), r = s = 1, level (0,0) in an 8x8 box. The quadratic
    // coefficient of the ground level is 1/48: it must match both the exact
    // value and Richardson-differentiated closed-form energies.
    const ModelH2 m{1.0, 2.0, 1, 1};
    const std::size_t n1 = 8, n2 = 8;
    std::vector<double> diag(n1 * n2);
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            diag[i * n2 + j] = (2.0 * i + 1.0) + 2.0 * (2.0 * j + 1.0);
        }
    }
    const auto h = build_h2(m, 1.0, n1, n2); // eps=1 so matrix = diag + 1*W
    DenseMatrix w = h.matrix;
    for (std::size_t i = 0; i < n1 * n2; ++i) {
        w(i, i) -= Complex(diag[i], 0.0);
    }
    const auto s = rspe_matrix(diag, w, 0, 10);

    CHECK(s.coefficients[0].real() == doctest::Approx(3.0));
    CHECK(s.coefficients[2].real() == doctest::Approx(1.0 / 48.0).epsilon(1e-12));
    for (std::size_t k = 1; k < s.coefficients.size(); k += 2) {
        CHECK(std::abs(s.coefficients[k]) < 1e-14); // odd orders vanish
    }
    for (const auto& c : s.coefficients) {
        CHECK(std::abs(c.imag()) < 1e-14); // PT forces real coefficients
    }

    // Richardson cross-check through the closed-form quantum energy.
    const auto e0 = [](double eps) {
        return quantum_levels_r1s1({1.0, 2.0, eps}, 0, 0).real();
    };
    CHECK(s.coefficients[2].real() ==
          doctest::Approx(0.5 * oracles::second_derivative_at_zero(e0, 1e-2)).epsilon(1e-7));

    // Low orders are truncation-insensitive: the 12x12 box agrees at c2/c4.
    std::vector<double> diag2(12 * 12);
    for (std::size_t i = 0; i < 12; ++i) {
        for (std::size_t j = 0; j < 12; ++j) {
            diag2[i * 12 + j] = (2.0 * i + 1.0) + 2.0 * (2.0 * j + 1.0);
        }
    }
    const auto h2 = build_h2(m, 1.0, 12, 12);
    DenseMatrix w2 = h2.matrix;
    for (std::size_t i = 0; i < 144; ++i) {
        w2(i, i) -= Complex(diag2[i], 0.0);
    }
    const auto s2 = rspe_matrix(diag2, w2, 0, 10);
    CHECK(s2.coefficients[2].real() == doctest::Approx(s.coefficients[2].real()).epsilon(1e-13));
    CHECK(s2.coefficients[4].real() == doctest::Approx(s.coefficients[4].real()).epsilon(1e-10));
}

TEST_CASE("series_lambda_pm matches the binomial expansion and radius") {
    // omega = (1,2): S = 5, D = 3. lambda_+ = 5 + 3 sqrt(1 - (eps/3)^2):
    // c0 = 8, c2 = -1/6, c4 = -1/216; lambda_- mirrors with +.
    const auto [sp, sm] = series_lambda_pm(1.0, 2.0, 8);
    CHECK(sp.label == "lambda+");
    CHECK(sm.label == "lambda-");
    CHECK(sp.coefficients[0].real() == doctest::Approx(8.0));
    CHECK(sm.coefficients[0].real() == doctest::Approx(2.0));
    CHECK(sp.coefficients[2].real() == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
    CHECK(sm.coefficients[2].real() == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(sp.coefficients[4].real() == doctest::Approx(-1.0 / 216.0).epsilon(1e-15));
    CHECK(sm.coefficients[4].real() == doctest::Approx(1.0 / 216.0).epsilon(1e-15));
    for (std::size_t k = 1; k < sp.coefficients.size(); k += 2) {
        CHECK(sp.coefficients[k] == Complex(0.0, 0.0));
    }

    // Partial sums vs the closed form well inside the radius 3.
    const auto [sp40, sm40] = series_lambda_pm(1.0, 2.0, 40);
    for (double eps : {0.5, 1.0, 1.5}) {
        const auto [lp, lm] = classical_lambda_pm({1.0, 2.0, eps});
        CHECK(partial_sum(sp40, eps).real() == doctest::Approx(lp.real()).epsilon(1e-10));
        CHECK(partial_sum(sm40, eps).real() == doctest::Approx(lm.real()).epsilon(1e-10));
    }

    CHECK_THROWS_AS((void)series_lambda_pm(2.0, 2.0, 8), std::invalid_argument);
    CHECK_THROWS_AS((void)series_lambda_pm(0.0, 2.0, 8), std::invalid_argument);
}

TEST_CASE("radius_estimate: exact geometric series and square-root singularities") {
    // c_{2k} = 4^{-k} has radius exactly 2; slopes are constant so the
    // extrapolation is exact up to rounding.
    std::vector<Complex> geo(41, Complex(0.0, 0.0));
    for (std::size_t k = 0; 2 * k <= 40; ++k) {
        geo[2 * k] = Complex(std::pow(4.0, -static_cast<double>(k)), 0.0);
    }
    CHECK(radius_estimate(geo) == doctest::Approx(2.0).epsilon(1e-9));

    // Square-root-type series at order 40 land within a percent.
    const auto [sp, sm] = series_lambda_pm(1.0, 2.0, 40);
    CHECK(radius_estimate(sp.coefficients) == doctest::Approx(3.0).epsilon(0.01));
    CHECK(radius_estimate(sm.coefficients) == doctest::Approx(3.0).epsilon(0.01));
    CHECK(sp.radius_estimate == doctest::Approx(3.0).epsilon(0.01));

    const auto g = rspe_matrix({0.0, 2.0}, gain_w(), 0, 40);
    CHECK(g.radius_estimate == doctest::Approx(1.0).epsilon(0.01));

    // Detuned series: radius |b|.
    const auto d = rspe_matrix({0.5 - 2.0, 0.5 + 2.0}, gain_w(), 0, 40);
    CHECK(d.radius_estimate == doctest::Approx(2.0).epsilon(0.01));

    // Too little data is rejected...
    CHECK_THROWS_AS((void)radius_estimate({Complex(1.0, 0.0)}), std::invalid_argument);
    std::vector<Complex> short_series(9, Complex(1.0, 0.0));
    CHECK_THROWS_AS((void)radius_estimate(short_series), std::invalid_argument);

    // ...and an identically-zero tail reads as entire (infinite radius)
    // through the series container, which reports +inf rather than throwing.
    const auto diag_series = rspe_matrix({0.0, 2.0}, DenseMatrix(2, 2), 0, 40);
    CHECK(std::isinf(diag_series.radius_estimate));
}

TEST_CASE("partial_sum is an exact Horner evaluation") {
    RspeSeries s;
    s.coefficients = {Complex(1.0, 0.0), Complex(-2.0, 1.0), Complex(0.5, 0.0)};
    const double x = 0.75;
    const Complex expect =
        s.coefficients[0] + x * (s.coefficients[1] + x * s.coefficients[2]);
    CHECK(partial_sum(s, x) == expect);
    CHECK(partial_sum(s, 0.0) == s.coefficients[0]);
}
