#include "gmrfsim/order_select.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gmrfsim {

void TestConfig::validate() const {
    if (N < 2) throw std::invalid_argument("TestConfig: N must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("TestConfig: alpha in (0,1)");
    if (!(gamma >= 0.0)) throw std::invalid_argument("TestConfig: gamma must be >= 0");
    if (eta && !(*eta > 0.0)) throw std::invalid_argument("TestConfig: eta must be > 0");
}

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

// Stirling tail phi(a): lnGamma(a) = (a - 1/2) ln a - a + ln(2 pi)/2 + phi(a).
double stirling_phi(double a) {
    const double ia = 1.0 / a, ia2 = ia * ia;
    return ia * (1.0 / 12 +
                 ia2 * (-1.0 / 360 +
                        ia2 * (1.0 / 1260 + ia2 * (-1.0 / 1680 + ia2 * (1.0 / 1188)))));
}

// log(x^a e^-x / Gamma(a)). The direct form loses ~a*ulp through lgamma for
// large a; writing x = a(1+u) cancels the big terms analytically:
//   a ln x - x - lnGamma(a) = a(log1p(u) - u) + ln(a)/2 - ln(2 pi)/2 - phi(a).
double log_prefactor(double a, double x) {
    if (a < 10.0) return a * std::log(x) - x - std::lgamma(a);
    const double u = x / a - 1.0;
    double f;
    if (std::abs(u) < 1e-3) {
        f = -u * u * (1.0 / 2 - u * (1.0 / 3 - u * (1.0 / 4 - u * (1.0 / 5 - u / 6))));
    } else {
        f = std::log1p(u) - u;
    }
    return a * f + 0.5 * std::log(a) - 0.5 * std::log(2.0 * kPi) - stirling_phi(a);
}

// Regularized lower incomplete gamma P(a, x), absolute error well under 1e-12.
double reg_lower_gamma(double a, double x) {
    if (x <= 0.0) return 0.0;
    const double logpre = log_prefactor(a, x);
    if (x < a + 1.0) {
        // ascending series: P = pre * sum_{n>=0} x^n / (a (a+1) ... (a+n))
        double term = 1.0 / a, sum = term;
        for (int n = 1; n < 200000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-17) break;
        }
        return sum * std::exp(logpre);
    }
    // Lentz continued fraction for Q, then P = 1 - Q.
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 200000; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(logpre) * h;
}

} // namespace

double chisq_cdf(double x, int dof) {
    if (dof < 1) throw std::invalid_argument("chisq_cdf: dof must be >= 1");
    if (x <= 0.0) return 0.0;
    return reg_lower_gamma(0.5 * dof, 0.5 * x);
}

double chisq_quantile(double p, int dof) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("chisq_quantile: p must be in (0,1)");
    double lo = 0.0, hi = dof + 10.0 * std::sqrt(2.0 * dof) + 10.0;
    while (chisq_cdf(hi, dof) < p) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (chisq_cdf(mid, dof) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// R(X) with quantiles precomputed, for the root searches.
struct RejectionCurve {
    double q_lo, q_hi;
    int dof;

    explicit RejectionCurve(const TestConfig& cfg) : dof(cfg.N - 1) {
        q_lo = chisq_quantile(cfg.alpha / 2.0, dof);
        q_hi = chisq_quantile(1.0 - cfg.alpha / 2.0, dof);
    }
    double operator()(double X) const {
        return 1.0 - (chisq_cdf(q_hi * X, dof) - chisq_cdf(q_lo * X, dof));
    }
};

double bisect_root(const RejectionCurve& R, double target, double lo, double hi) {
    // sign of R - target differs at lo and hi (checked by caller)
    const bool rising = R(hi) > target;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        const bool above = R(mid) > target;
        if (above == rising)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double rejection_prob(double X, const TestConfig& cfg) {
    cfg.validate();
    if (!(X > 0.0)) throw std::domain_error("rejection_prob: X must be > 0");
    return RejectionCurve(cfg)(X);
}

std::pair<double, double> rejection_roots(const TestConfig& cfg) {
    cfg.validate();
    if (!(cfg.gamma > 0.0)) throw std::invalid_argument("rejection_roots: gamma must be > 0");
    const double target = (1.0 + cfg.gamma) * cfg.alpha;
    const RejectionCurve R(cfg);
    const double lo_end = 1e-6, hi_end = 1e4;
    if (!(R(lo_end) > target && R(hi_end) > target && R(1.0) < target)) {
        std::ostringstream msg;
        msg << "rejection_roots: no bracketing root for target " << target
            << " (gamma too large for this N/alpha)";
        throw std::domain_error(msg.str());
    }
    const double x_lo = bisect_root(R, target, lo_end, 1.0);
    const double x_hi = bisect_root(R, target, 1.0, hi_end);
    return {x_lo, x_hi};
}

double epsilon_threshold(const TestConfig& cfg) {
    const auto [x_lo, x_hi] = rejection_roots(cfg);
    return std::min(1.0 - x_lo, x_hi - 1.0);
}

double quantize_table_epsilon(double epsilon) {
    const double q = 2e-5;
    return std::round(epsilon / q) * q;
}

double eval_criterion_error(const ChebSeries& series, const TargetFunction& P, int grid_points) {
    const Interval iv = series.interval;
    double worst = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const double x = iv.a + (iv.b - iv.a) * i / (grid_points - 1.0);
        const double p = cheb_eval_scalar(series, x);
        const double p2 = p * p;
        const double err = std::abs((1.0 / P.eval_P(x) - p2) / p2);
        if (!std::isfinite(err)) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, err);
    }
    return worst;
}

namespace {
constexpr int kSelectGrid = 10001;
constexpr int kVerifyGrid = 100001;
} // namespace

std::pair<int, ChebSeries> min_order(const TargetFunction& P, const Interval& interval,
                                     double epsilon, int K_max) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("min_order: epsilon must be > 0");
    if (P.mode != TargetFunction::Mode::inv_sqrt)
        throw std::invalid_argument("min_order: target must be 1/sqrt(P)");
    P.check_positive(interval);

    auto error_at = [&](int K) {
        return eval_criterion_error(cheb_coeffs(P, interval, K), P, kSelectGrid);
    };

    int K_hi = 0;
    double err = error_at(0);
    if (err > epsilon) {
        int K_lo = 0;
        K_hi = 1;
        while ((err = error_at(K_hi)) > epsilon) {
            K_lo = K_hi;
            K_hi *= 2;
            if (K_hi > K_max) {
                std::ostringstream msg;
                msg << "min_order: criterion unmet at K_max = " << K_max
                    << " (achieved error " << error_at(K_max) << ", target " << epsilon << ")";
                throw std::runtime_error(msg.str());
            }
        }
        while (K_hi - K_lo > 1) {
            const int mid = K_lo + (K_hi - K_lo) / 2;
            (error_at(mid) <= epsilon ? K_hi : K_lo) = mid;
        }
    }
    // the error is not exactly monotone in K; make "smallest" locally honest
    while (K_hi > 0 && error_at(K_hi - 1) <= epsilon) --K_hi;

    ChebSeries series = cheb_coeffs(P, interval, K_hi);
    while (eval_criterion_error(series, P, kVerifyGrid) > epsilon) {
        if (++K_hi > K_max)
            throw std::runtime_error("min_order: verification grid failure below K_max");
        series = cheb_coeffs(P, interval, K_hi);
    }
    return {K_hi, series};
}

OrderDecision reduce_order(const ChebSeries& series, double eta, double normD_inv,
                           double norm_eps, double epsilon_record) {
    if (!(eta > 0.0)) throw std::invalid_argument("reduce_order: eta must be > 0");
    if (!(normD_inv > 0.0) || !(norm_eps > 0.0))
        throw std::invalid_argument("reduce_order: norms must be > 0");
    const double threshold = eta / (normD_inv * norm_eps);
    const int L = series.order();
    double tail = 0.0;
    int K_eff = L;
    for (int k = L; k >= 1; --k) {
        const double next = tail + std::abs(series.coeffs[k]);
        if (next > threshold) break;
        tail = next;
        K_eff = k - 1;
    }
    OrderDecision d;
    d.epsilon = epsilon_record;
    d.L = L;
    d.K_eff = K_eff;
    d.tail_sum = tail;
    return d;
}

} // namespace gmrfsim
