#include "doctest.h"

#include "gmrfsim/chebyshev.hpp"
#include "gmrfsim/instrument.hpp"
#include "gmrfsim/rng.hpp"
#include "gmrfsim/validate.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

using namespace gmrfsim;

namespace {

// Independent coefficient oracle: c_k = (2/pi) \int_0^pi f(x(cos t)) cos(k t) dt
double coeff_by_quadrature(const TargetFunction& f, const Interval& iv, int k) {
    const auto integrand = [&](double theta) {
        const double t = std::cos(theta);
        const double x = 0.5 * (t * iv.length() + iv.a + iv.b);
        return f(x) * std::cos(k * theta);
    };
    return 2.0 / std::numbers::pi *
           testutil::adaptive_simpson(integrand, 0.0, std::numbers::pi, 1e-13);
}

// Direct evaluation through the trigonometric definition T_k(t) = cos(k acos t)
double eval_by_definition(const ChebSeries& s, double x) {
    const double t = shift_to_unit(x, s.interval);
    double acc = 0.5 * s.coeffs[0];
    for (int k = 1; k <= s.order(); ++k) acc += s.coeffs[k] * std::cos(k * std::acos(t));
    return acc;
}

} // namespace

TEST_CASE("shift_to_unit maps the interval ends to -1 and 1") {
    const Interval iv{2.0, 10.0};
    CHECK(shift_to_unit(2.0, iv) == doctest::Approx(-1.0));
    CHECK(shift_to_unit(10.0, iv) == doctest::Approx(1.0));
    CHECK(shift_to_unit(6.0, iv) == doctest::Approx(0.0));
    CHECK(!is_extrapolating(ChebSeries{iv, {2.0}}, 6.0));
    CHECK(is_extrapolating(ChebSeries{iv, {2.0}}, 1.999999));
    CHECK(is_extrapolating(ChebSeries{iv, {2.0}}, 10.000001));
}

TEST_CASE("target function evaluates P by Horner and screens positivity") {
    TargetFunction f;
    f.P_coeffs = {2.0, -1.0, 0.5}; // 2 - x + x^2/2, positive everywhere
    f.mode = TargetFunction::Mode::inv_sqrt;
    CHECK(f.eval_P(2.0) == doctest::Approx(2.0));
    CHECK(f(2.0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    f.mode = TargetFunction::Mode::inv;
    CHECK(f(2.0) == doctest::Approx(0.5));
    CHECK_NOTHROW(f.check_positive({0.0, 4.0}));

    TargetFunction g;
    g.P_coeffs = {-1.0, 1.0}; // x - 1 changes sign on [0, 2]
    CHECK_THROWS(g.check_positive({0.0, 2.0}));
}

TEST_CASE("dct coefficients match adaptive quadrature of the projection integral") {
    TargetFunction f;
    f.P_coeffs = {1.0, 1.0}; // 1 + x
    f.mode = TargetFunction::Mode::inv_sqrt;
    const Interval iv{0.0, 50.0};
    const int K = 24;
    const ChebSeries s = cheb_coeffs(f, iv, K);
    REQUIRE(s.order() == K);
    for (int k = 0; k <= K; ++k) {
        const double ref = coeff_by_quadrature(f, iv, k);
        CHECK(std::abs(s.coeffs[k] - ref) < 1e-10);
    }

    SUBCASE("same series under the inverse mode") {
        f.mode = TargetFunction::Mode::inv;
        const ChebSeries si = cheb_coeffs(f, iv, 16);
        for (int k = 0; k <= 16; ++k)
            CHECK(std::abs(si.coeffs[k] - coeff_by_quadrature(f, iv, k)) < 1e-10);
    }
}

TEST_CASE("constant target gives c_0 = 2 f and numerically zero higher coefficients") {
    TargetFunction f;
    f.P_coeffs = {4.0};
    f.mode = TargetFunction::Mode::inv_sqrt; // f = 1/2
    const ChebSeries s = cheb_coeffs(f, {0.0, 7.0}, 8);
    CHECK(s.coeffs[0] == doctest::Approx(1.0).epsilon(1e-15));
    for (int k = 1; k <= 8; ++k) CHECK(std::abs(s.coeffs[k]) < 1e-15);
}

TEST_CASE("cheb_coeffs input validation") {
    TargetFunction f;
    f.P_coeffs = {1.0, 1.0};
    CHECK_THROWS(cheb_coeffs(f, {0.0, 1.0}, 8, 8)); // J < 2(K+1)
    TargetFunction g;
    g.P_coeffs = {0.0, 1.0}; // 1/sqrt(x) blows up at the left end
    CHECK_THROWS(cheb_coeffs(g, {0.0, 1.0}, 8));
}

TEST_CASE("scalar evaluation agrees with the cos(k acos) definition") {
    TargetFunction f;
    f.P_coeffs = {1.0, 0.3, 0.01};
    f.mode = TargetFunction::Mode::inv_sqrt;
    const Interval iv{0.0, 30.0};
    const ChebSeries s = cheb_coeffs(f, iv, 30);
    for (int i = 0; i <= 200; ++i) {
        const double x = iv.a + iv.length() * i / 200.0;
        CHECK(cheb_eval_scalar(s, x) == doctest::Approx(eval_by_definition(s, x)).epsilon(1e-12));
    }
    // and the series actually approximates f here
    for (int i = 0; i <= 20; ++i) {
        const double x = iv.a + iv.length() * i / 20.0;
        CHECK(cheb_eval_scalar(s, x) == doctest::Approx(f(x)).epsilon(1e-8));
    }
}

TEST_CASE("matrix apply reproduces the dense spectral evaluation of the series") {
    // z = p(S) eps computed by the three-term matrix recurrence must match
    // V p(Lambda) V' eps from a dense eigendecomposition
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        const PrecisionOperator op = testutil::random_operator(seed, 12);
        const int n = op.S.n();
        const Interval iv = gershgorin_interval(op.S);
        const ChebSeries s = cheb_coeffs(op.P, iv, 40);

        const EigenDecomposition eig = jacobi_eigh(op.S.to_dense(), n);
        const std::vector<double> eps = standard_normal_vector(seed, 9, n);

        // w = V' eps, scale by p(lambda_i), map back
        std::vector<double> w(n, 0.0), ref(n, 0.0);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) w[j] += eig.V[static_cast<std::size_t>(i) * n + j] * eps[i];
        for (int j = 0; j < n; ++j) w[j] *= cheb_eval_scalar(s, eig.eigenvalues[j]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) ref[i] += eig.V[static_cast<std::size_t>(i) * n + j] * w[j];

        const std::vector<double> z = cheb_matrix_apply(s, op.S, eps);
        double scale = 0.0;
        for (double v : ref) scale = std::max(scale, std::abs(v));
        for (int i = 0; i < n; ++i) CHECK(std::abs(z[i] - ref[i]) <= 1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("matrix apply on the identity reduces to scalar evaluation at 1") {
    const int n = 9;
    const SparseSymMatrix I = SparseSymMatrix::identity(n);
    TargetFunction f;
    f.P_coeffs = {1.0, 1.0, 0.5};
    f.mode = TargetFunction::Mode::inv_sqrt;
    const ChebSeries s = cheb_coeffs(f, {0.0, 2.0}, 21);
    const double f1 = cheb_eval_scalar(s, 1.0);
    const std::vector<double> eps = standard_normal_vector(5, 0, n);
    const std::vector<double> z = cheb_matrix_apply(s, I, eps);
    for (int i = 0; i < n; ++i) CHECK(z[i] == doctest::Approx(f1 * eps[i]).epsilon(1e-12));
}

TEST_CASE("the constant series acts as the scaled identity map") {
    const ChebSeries s{{0.0, 5.0}, {2.0, 0.0, 0.0}};
    const PrecisionOperator op = testutil::random_operator(8, 16);
    const std::vector<double> eps = standard_normal_vector(8, 2, op.S.n());
    const std::vector<double> z = cheb_matrix_apply(s, op.S, eps);
    for (int i = 0; i < op.S.n(); ++i) CHECK(z[i] == eps[i]);
}

TEST_CASE("matrix apply costs exactly K matvecs and four work vectors") {
    const PrecisionOperator op = testutil::random_operator(9, 24);
    TargetFunction f;
    f.P_coeffs = {1.0, 1.0};
    f.mode = TargetFunction::Mode::inv_sqrt;
    const Interval iv = gershgorin_interval(op.S);
    const std::vector<double> eps = standard_normal_vector(9, 1, op.S.n());

    for (int K : {0, 1, 17}) {
        const ChebSeries s = cheb_coeffs(f, iv, K);
        stats::reset();
        (void)cheb_matrix_apply(s, op.S, eps);
        const auto snap = stats::snapshot();
        CHECK(snap.matvec_calls == static_cast<std::uint64_t>(K));
        CHECK(snap.work_vector_allocs == 4);
        CHECK(snap.fma_ops == static_cast<std::uint64_t>(K) * op.S.nnz());
    }
}

TEST_CASE("truncation and tail sums") {
    const ChebSeries s{{0.0, 1.0}, {1.0, 0.5, 0.25, 0.125}};
    CHECK(s.order() == 3);
    CHECK(s.tail_sum(3) == 0.0);
    CHECK(s.tail_sum(1) == doctest::Approx(0.375));
    CHECK(s.tail_sum(0) == doctest::Approx(0.875));
    const ChebSeries t = s.truncated(1);
    CHECK(t.order() == 1);
    CHECK(t.coeffs == std::vector<double>{1.0, 0.5});
    CHECK(t.interval.b == 1.0);
    CHECK_THROWS(s.truncated(4));
}

TEST_CASE("series text round-trip is exact") {
    TargetFunction f;
    f.P_coeffs = {1.0, 2.0, 1.0};
    f.mode = TargetFunction::Mode::inv_sqrt;
    const ChebSeries s = cheb_coeffs(f, {0.0, 11.5}, 33);
    std::ostringstream out;
    write_series(s, out);
    std::istringstream in(out.str());
    const ChebSeries back = read_series(in);
    REQUIRE(back.order() == s.order());
    CHECK(back.interval.a == s.interval.a);
    CHECK(back.interval.b == s.interval.b);
    for (int k = 0; k <= s.order(); ++k) CHECK(back.coeffs[k] == s.coeffs[k]);
}
