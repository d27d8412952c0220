#include "gmrfsim/simulate.hpp"
#include "gmrfsim/instrument.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace gmrfsim {

void SimRequest::validate() const {
    cfg.validate();
    if (n_sims < 1) throw std::invalid_argument("SimRequest: n_sims must be >= 1");
    if (forced_order && *forced_order < 0)
        throw std::invalid_argument("SimRequest: forced_order must be >= 0");
    op.D.validate_invertible();
    if (op.S.n() != op.D.n()) throw std::invalid_argument("SimRequest: S/D dimension mismatch");
}

SimResult simulate(const SimRequest& req) {
    req.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const auto matvecs_before = stats::matvec_calls.load(std::memory_order_relaxed);

    SimResult res;
    res.interval = gershgorin_interval(req.op.S, true);
    if (!(res.interval.b > res.interval.a)) {
        // S = 0 gives the degenerate interval [0, 0]; any interval containing
        // the spectrum {0} is valid, so widen the top.
        res.interval.b = res.interval.a + 1.0;
    }
    req.op.P.check_positive(res.interval);

    if (req.forced_order) {
        res.series = cheb_coeffs(req.op.P, res.interval, *req.forced_order);
        res.decision.epsilon = 0.0;
        res.decision.L = *req.forced_order;
        res.decision.K_eff = *req.forced_order;
        res.decision.tail_sum = 0.0;
    } else {
        const double eps = epsilon_threshold(req.cfg);
        auto [L, series] = min_order(req.op.P, res.interval, eps);
        if (req.cfg.eta) {
            const double n = static_cast<double>(req.op.n());
            res.decision =
                reduce_order(series, *req.cfg.eta, req.op.D.inv_inf_norm(), std::sqrt(n), eps);
        } else {
            res.decision.epsilon = eps;
            res.decision.L = L;
            res.decision.K_eff = L;
            res.decision.tail_sum = 0.0;
        }
        res.series = series.truncated(res.decision.K_eff);
    }

    res.vectors.reserve(req.n_sims);
    const int n = req.op.n();
    for (int s = 0; s < req.n_sims; ++s) {
        const std::vector<double> eps_vec =
            standard_normal_vector(req.seed, static_cast<std::uint64_t>(s), n);
        std::vector<double> u = cheb_matrix_apply(res.series, req.op.S, eps_vec);
        std::vector<double> z;
        req.op.D.apply_inverse(u, z);
        for (double v : z)
            if (!std::isfinite(v))
                throw std::runtime_error("simulate: non-finite output (interval or P invalid)");
        res.vectors.push_back(std::move(z));
    }

    res.matvec_count = stats::matvec_calls.load(std::memory_order_relaxed) - matvecs_before;
    res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

double approx_error_bound(const ChebSeries& series, const PrecisionOperator& op, int grid) {
    if (grid < 2) throw std::invalid_argument("approx_error_bound: grid must be >= 2");
    const Interval iv = series.interval;
    double worst = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double x = iv.a + (iv.b - iv.a) * i / (grid - 1.0);
        const double d = op.P(x) - cheb_eval_scalar(series, x); // op.P is 1/sqrt(P)
        worst = std::max(worst, d * d);
    }
    return op.n() * op.D.inv_inf_norm() * worst;
}

} // namespace gmrfsim
