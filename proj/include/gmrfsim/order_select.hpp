#pragma once

#include "gmrfsim/chebyshev.hpp"

#include <optional>
#include <utility>

namespace gmrfsim {

/// Parameters of the variance-test criterion: sample size N, significance
/// alpha, allowed relative degradation gamma of the type-I error, and the
/// optional Euclidean tolerance eta for order reduction.
struct TestConfig {
    int N = 1000;
    double alpha = 0.05;
    double gamma = 0.10;
    std::optional<double> eta;

    void validate() const; // throws on out-of-range fields
};

/// Outcome of order selection: the threshold epsilon, the order L meeting the
/// test criterion, the reduced effective order, and the dropped-tail sum.
struct OrderDecision {
    double epsilon = 0.0;
    int L = 0;
    int K_eff = 0;
    double tail_sum = 0.0;
};

/// chi-square CDF with dof degrees of freedom, i.e. the regularized lower
/// incomplete gamma P(dof/2, x/2). Absolute error <= 1e-12 (large dof handled
/// by a Stirling-form prefactor, not lgamma). Returns 0 for x <= 0.
double chisq_cdf(double x, int dof);

/// Inverse of chisq_cdf in p, by bracketed bisection; |cdf(result) - p| <= 1e-10.
double chisq_quantile(double p, int dof);

/// Probability that the two-sided variance test at significance alpha rejects
/// when the true/tested variance ratio is X:
///   R(X) = 1 - [F(q_hi X) - F(q_lo X)],  F = chi-square(N-1) CDF,
/// with q_lo, q_hi the alpha/2 and 1-alpha/2 quantiles. R(1) = alpha.
double rejection_prob(double X, const TestConfig& cfg);

/// Both roots X_lo < 1 < X_hi of R(X) = (1+gamma) alpha, by bisection on
/// [1e-6, 1] and [1, 1e4] to 1e-12 in X. Throws if gamma is too large for a
/// bracketing root.
std::pair<double, double> rejection_roots(const TestConfig& cfg);

/// epsilon_{N,gamma} = min(1 - X_lo, X_hi - 1): |X - 1| <= epsilon implies the
/// rejection probability stays below (1+gamma) alpha on both sides.
double epsilon_threshold(const TestConfig& cfg);

/// Reference tabulations of epsilon_{N,gamma} are reported on a 2e-5 grid;
/// rounding to that grid reproduces every published cell exactly. Display
/// convenience only: order selection always uses the continuous value.
double quantize_table_epsilon(double epsilon);

inline constexpr int kTableNs[] = {50, 100, 500, 1000, 5000, 10000};
inline constexpr double kTableGammas[] = {0.001, 0.01, 0.05, 0.10, 0.20, 0.50, 1.00};

/// Smallest K <= K_max whose order-K series p for f = 1/sqrt(P) satisfies
///   max over [a,b] of |(1/P(x) - p(x)^2) / p(x)^2| <= epsilon
/// on a 10001-point grid, re-verified at 10x resolution. Search is doubling
/// then bisection (error taken monotone in K for bracketing only; the
/// returned K is re-checked against K-1). Throws if unmet at K_max, with the
/// achieved error in the message.
std::pair<int, ChebSeries> min_order(const TargetFunction& P, const Interval& interval,
                                     double epsilon, int K_max = 4096);

/// Relative squared-approximation error max_x |(1/P - p^2)/p^2| on a grid.
double eval_criterion_error(const ChebSeries& series, const TargetFunction& P, int grid_points);

/// Smallest K_eff with tail sum_{k > K_eff} |c_k| <= eta / (normD_inv * norm_eps):
/// then ||z^(L) - z^(K_eff)|| <= eta for any noise of Euclidean norm <= norm_eps.
/// norm_eps is typically sqrt(n), the root expected squared norm of n standard
/// normals. epsilon_record is carried into the returned decision for reporting.
OrderDecision reduce_order(const ChebSeries& series, double eta, double normD_inv,
                           double norm_eps, double epsilon_record = 0.0);

} // namespace gmrfsim
