#pragma once

#include "gmrfsim/fem.hpp"
#include "gmrfsim/order_select.hpp"
#include "gmrfsim/rng.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace gmrfsim {

struct SimRequest {
    PrecisionOperator op;
    TestConfig cfg;
    std::uint64_t seed = 0;
    int n_sims = 1;
    std::optional<int> forced_order;

    void validate() const;
};

struct SimResult {
    std::vector<std::vector<double>> vectors; // n_sims simulated fields z
    OrderDecision decision;
    ChebSeries series; // the truncated series actually applied
    Interval interval;
    std::uint64_t matvec_count = 0;
    double wall_time_s = 0.0;
};

/// The end-to-end pipeline: spectral interval by the clamped Gershgorin bound,
/// series for 1/sqrt(P), order selection (or forced_order), then per replicate
/// z = D^{-1} P_{-1/2}(S) eps with eps from stream = replicate index.
SimResult simulate(const SimRequest& req);

/// n ||D^{-1}||_inf max over an equispaced grid of (1/sqrt(P) - p)^2: an upper
/// bound on the max-norm covariance error of the approximate sampler.
double approx_error_bound(const ChebSeries& series, const PrecisionOperator& op, int grid);

} // namespace gmrfsim
