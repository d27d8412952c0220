#pragma once

#include "gmrfsim/sparse.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace gmrfsim {

/// Truncated Chebyshev series on [a, b]:
///   f(x) ~ c_0/2 + sum_{k=1..K} c_k T_k((2x - b - a)/(b - a)).
/// coeffs stores c_0 raw; the 1/2 factor is applied at evaluation.
struct ChebSeries {
    Interval interval;
    std::vector<double> coeffs; // c_0 .. c_K

    int order() const { return static_cast<int>(coeffs.size()) - 1; }

    /// Copy truncated to order K (K <= order()).
    ChebSeries truncated(int K) const;

    /// sum_{k = K_eff+1 .. K} |c_k|
    double tail_sum(int K_eff) const;
};

/// The function being approximated: f = 1/sqrt(P) or 1/P for a polynomial
/// P(x) = b_0 + b_1 x + ... + b_L x^L that must be strictly positive on the
/// working interval.
struct TargetFunction {
    enum class Mode { inv_sqrt, inv };

    std::vector<double> P_coeffs; // b_0 .. b_L
    Mode mode = Mode::inv_sqrt;

    double eval_P(double x) const;  // Horner
    double operator()(double x) const;
    int degree() const { return static_cast<int>(P_coeffs.size()) - 1; }

    /// Throws if P <= 0 at any of `samples` points of [a, b] (endpoints included).
    void check_positive(const Interval& interval, int samples = 1001) const;
};

/// Affine map of [a,b] onto [-1,1]: x -> (2x - b - a)/(b - a).
double shift_to_unit(double x, const Interval& interval);

/// Chebyshev coefficients c_0..c_K of f on [a, b] from J+1 cosine-spaced
/// samples via a type-I discrete cosine transform:
///   c_k = (2/J) [ f_0/2 + sum_{j=1..J-1} f_j cos(k j pi / J) + (-1)^k f_J/2 ].
/// J = 0 picks the default max(512, 8(K+1)) rounded up to a power of two.
/// Requires J >= 2(K+1); throws if f is non-finite at a sample point.
ChebSeries cheb_coeffs(const TargetFunction& f, const Interval& interval, int K, int J = 0);

/// Series evaluation by the forward three-term recurrence
/// T_{k+1} = 2 t T_k - T_{k-1}. Finite outside [a,b] too (extrapolation);
/// use is_extrapolating to detect that case.
double cheb_eval_scalar(const ChebSeries& series, double x);
bool is_extrapolating(const ChebSeries& series, double x);

/// u = c_0/2 eps + sum_{k=1..K} c_k T_k^{[a,b]}(S) eps via the matrix
/// recurrence: exactly K sparse matvecs and 4 length-n work vectors
/// (u, u0, um1, um2). K = 0 needs no matvec and returns c_0/2 eps.
std::vector<double> cheb_matrix_apply(const ChebSeries& series, const SparseSymMatrix& S,
                                      const std::vector<double>& eps);

/// Text round-trip: line 1 "a b K", then K+1 coefficient lines, full precision.
void write_series(const ChebSeries& series, std::ostream& out);
void write_series(const ChebSeries& series, const std::string& path);
ChebSeries read_series(std::istream& in);
ChebSeries read_series_file(const std::string& path);

} // namespace gmrfsim
