#include "gmrfsim/chebyshev.hpp"
#include "gmrfsim/instrument.hpp"

#include <fftw3.h>

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace gmrfsim {

ChebSeries ChebSeries::truncated(int K) const {
    if (K < 0 || K > order()) throw std::invalid_argument("truncated: bad order");
    ChebSeries s;
    s.interval = interval;
    s.coeffs.assign(coeffs.begin(), coeffs.begin() + K + 1);
    return s;
}

double ChebSeries::tail_sum(int K_eff) const {
    double s = 0.0;
    for (int k = order(); k > K_eff; --k) s += std::abs(coeffs[k]);
    return s;
}

double TargetFunction::eval_P(double x) const {
    double p = 0.0;
    for (auto it = P_coeffs.rbegin(); it != P_coeffs.rend(); ++it) p = p * x + *it;
    return p;
}

double TargetFunction::operator()(double x) const {
    double p = eval_P(x);
    return mode == Mode::inv_sqrt ? 1.0 / std::sqrt(p) : 1.0 / p;
}

void TargetFunction::check_positive(const Interval& interval, int samples) const {
    if (P_coeffs.empty()) throw std::invalid_argument("TargetFunction: empty polynomial");
    for (int i = 0; i < samples; ++i) {
        double x = interval.a + (interval.b - interval.a) * i / (samples - 1.0);
        if (!(eval_P(x) > 0.0)) {
            std::ostringstream msg;
            msg << "P(" << x << ") = " << eval_P(x) << " is not strictly positive";
            throw std::domain_error(msg.str());
        }
    }
}

double shift_to_unit(double x, const Interval& interval) {
    if (!(interval.a < interval.b))
        throw std::invalid_argument("shift_to_unit: degenerate interval");
    return (2.0 * x - interval.b - interval.a) / (interval.b - interval.a);
}

namespace {

int default_quadrature_order(int K) {
    int J = std::max(512, 8 * (K + 1));
    int p = 1;
    while (p < J) p *= 2;
    return p;
}

} // namespace

ChebSeries cheb_coeffs(const TargetFunction& f, const Interval& interval, int K, int J) {
    if (K < 0) throw std::invalid_argument("cheb_coeffs: K must be >= 0");
    if (!(interval.a < interval.b)) throw std::invalid_argument("cheb_coeffs: need a < b");
    if (J == 0) J = default_quadrature_order(K);
    if (J < 2 * (K + 1)) throw std::invalid_argument("cheb_coeffs: J too small");

    const double half_len = 0.5 * (interval.b - interval.a);
    const double mid = 0.5 * (interval.b + interval.a);
    const double pi = 3.14159265358979323846264338328;

    double* samples = fftw_alloc_real(J + 1);
    double* transformed = fftw_alloc_real(J + 1);
    for (int j = 0; j <= J; ++j) {
        // cos is even around j = J/2; evaluate the angle directly for symmetry.
        double x = std::cos(pi * j / J);
        double y = mid + half_len * x;
        double v = f(y);
        if (!std::isfinite(v)) {
            fftw_free(samples);
            fftw_free(transformed);
            std::ostringstream msg;
            msg << "cheb_coeffs: target not finite at x = " << y;
            throw std::domain_error(msg.str());
        }
        samples[j] = v;
    }

    // REDFT00 on J+1 points: Y_k = f_0 + (-1)^k f_J + 2 sum_{j=1..J-1} f_j cos(pi j k / J),
    // which is twice the half-weighted endpoint sum, so c_k = Y_k / J.
    fftw_plan plan =
        fftw_plan_r2r_1d(J + 1, samples, transformed, FFTW_REDFT00, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    ChebSeries series;
    series.interval = interval;
    series.coeffs.resize(K + 1);
    for (int k = 0; k <= K; ++k) series.coeffs[k] = transformed[k] / J;

    fftw_free(samples);
    fftw_free(transformed);
    return series;
}

double cheb_eval_scalar(const ChebSeries& series, double x) {
    const double t = shift_to_unit(x, series.interval);
    const int K = series.order();
    double acc = 0.5 * series.coeffs[0];
    if (K >= 1) acc += series.coeffs[1] * t;
    double tkm2 = 1.0, tkm1 = t;
    for (int k = 2; k <= K; ++k) {
        double tk = 2.0 * t * tkm1 - tkm2;
        acc += series.coeffs[k] * tk;
        tkm2 = tkm1;
        tkm1 = tk;
    }
    return acc;
}

bool is_extrapolating(const ChebSeries& series, double x) {
    return x < series.interval.a || x > series.interval.b;
}

std::vector<double> cheb_matrix_apply(const ChebSeries& series, const SparseSymMatrix& S,
                                      const std::vector<double>& eps) {
    const int n = S.n();
    if (static_cast<int>(eps.size()) != n)
        throw std::invalid_argument("cheb_matrix_apply: dimension mismatch");
    const int K = series.order();
    const double alpha = 2.0 / series.interval.length();
    const double beta = (series.interval.b + series.interval.a) / series.interval.length();

    // The 4 work vectors of the recurrence. All are allocated up front so the
    // storage accounting is the same on every path.
    std::vector<double> u(n), u0(n), um1(n), um2(n);
    stats::work_vector_allocs.fetch_add(4, std::memory_order_relaxed);

    for (int i = 0; i < n; ++i) u[i] = 0.5 * series.coeffs[0] * eps[i];
    if (K == 0) return u;

    um2 = eps;
    S.matvec(eps, um1); // um1 = alpha S eps - beta eps
    for (int i = 0; i < n; ++i) um1[i] = alpha * um1[i] - beta * eps[i];
    for (int i = 0; i < n; ++i) u[i] += series.coeffs[1] * um1[i];

    for (int k = 2; k <= K; ++k) {
        // u0 = 2 (alpha S - beta I) um1 - um2: the T_{k+1} = 2 t T_k - T_{k-1}
        // step on the shifted variable t = alpha x - beta
        S.matvec(um1, u0);
        for (int i = 0; i < n; ++i) u0[i] = 2.0 * (alpha * u0[i] - beta * um1[i]) - um2[i];
        for (int i = 0; i < n; ++i) u[i] += series.coeffs[k] * u0[i];
        std::swap(um2, um1); // shift without copying
        std::swap(um1, u0);
    }
    return u;
}

void write_series(const ChebSeries& series, std::ostream& out) {
    out.precision(17);
    out << series.interval.a << " " << series.interval.b << " " << series.order() << "\n";
    for (double c : series.coeffs) out << c << "\n";
}

void write_series(const ChebSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_series(series, out);
}

ChebSeries read_series(std::istream& in) {
    ChebSeries s;
    int K = -1;
    if (!(in >> s.interval.a >> s.interval.b >> K) || K < 0)
        throw std::runtime_error("series file: bad header");
    s.coeffs.resize(K + 1);
    for (int k = 0; k <= K; ++k)
        if (!(in >> s.coeffs[k])) throw std::runtime_error("series file: truncated");
    return s;
}

ChebSeries read_series_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return read_series(in);
}

} // namespace gmrfsim
