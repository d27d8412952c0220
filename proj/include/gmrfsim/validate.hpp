#pragma once

#include "gmrfsim/fem.hpp"
#include "gmrfsim/order_select.hpp"
#include "gmrfsim/simulate.hpp"

#include <cstdint>
#include <vector>

namespace gmrfsim {

/// Dense symmetric eigendecomposition by cyclic Jacobi rotations, for
/// oracle-scale problems (n <= 512). Eigenvalues ascending; eigenvectors_col j
/// stored in column j of the row-major n x n matrix V.
struct EigenDecomposition {
    int n = 0;
    std::vector<double> eigenvalues;
    std::vector<double> V; // row-major; column j is the j-th eigenvector
};

EigenDecomposition jacobi_eigh(std::vector<double> dense, int n);

/// V diag(1/sqrt(P(lambda_i))) V^T: the matrix square-root inverse defining the
/// exact sampler. Throws if P(lambda_i) <= 0 or n > 512.
std::vector<double> dense_sqrt_inv_oracle(const PrecisionOperator& op);

/// Exact covariance Q^{-1} = D^{-1} V diag(1/P(lambda)) V^T D^{-1}.
std::vector<double> dense_covariance_exact(const PrecisionOperator& op);

/// Approximate-sampler covariance D^{-1} V diag(p(lambda)^2) V^T D^{-1} with
/// p the truncated series (evaluated at the true eigenvalues).
std::vector<double> dense_covariance_series(const PrecisionOperator& op, const ChebSeries& series);

/// max_i |(1/P(lambda_i) - p(lambda_i)^2) / p(lambda_i)^2| over the spectrum.
double eigen_grid_error(const PrecisionOperator& op, const ChebSeries& series);

struct GridGeometry {
    int nx = 0;
    int ny = 0;
    double h = 1.0;
};

/// Drops a margin of `margin_cells` nodes from every side of the grid.
std::vector<std::vector<double>> crop_grid_vectors(const std::vector<std::vector<double>>& vectors,
                                                   const GridGeometry& geom, int margin_cells,
                                                   GridGeometry& cropped_geom);

struct VariogramEstimate {
    std::vector<double> lags;
    std::vector<double> gamma_hat;
    std::vector<long long> counts; // pair draws per bin and simulation
};

/// Per-simulation semivariance curves plus the pooled estimate; per-sim curves
/// feed jackknife error bars. Pair positions above the subsample cap are drawn
/// once (seeded) and shared by all simulations so curves stay comparable.
struct VariogramData {
    std::vector<double> lags;
    std::vector<long long> counts;
    std::vector<std::vector<double>> per_sim; // [sim][bin]

    VariogramEstimate combined() const;
};

VariogramData variogram_data(const std::vector<std::vector<double>>& vectors,
                             const GridGeometry& geom, double max_lag, int n_bins,
                             std::uint64_t subsample_seed = 12345,
                             std::size_t max_pair_evals = 10000000);

/// gamma_hat(h) = mean over simulations and node pairs of (z_i - z_j)^2 / 2,
/// isotropic Euclidean binning. Empty bins are dropped.
VariogramEstimate empirical_variogram(const std::vector<std::vector<double>>& vectors,
                                      const GridGeometry& geom, double max_lag, int n_bins,
                                      std::uint64_t subsample_seed = 12345,
                                      std::size_t max_pair_evals = 10000000);

/// sum over bins of bin_width * |gamma_hat - model|, the integrated absolute
/// deviation used by the mesh and order sweeps.
double variogram_deviation(const VariogramEstimate& v, const MaternParams& params);

struct VarianceTestReport {
    double t = 0.0;       // (N-1) S^2 / target_var
    double lower = 0.0;   // chi-square alpha/2 quantile
    double upper = 0.0;   // chi-square 1-alpha/2 quantile
    bool reject = false;
};

/// Two-sided chi-square variance test with unbiased S^2 about the sample mean.
VarianceTestReport variance_test(const std::vector<double>& samples, double target_var,
                                 double alpha);

struct ProjectionSummary {
    int n_directions = 0;
    double max_rejection = 0.0; // max over directions of R(X)
    double max_ratio_gap = 0.0; // max |X - 1|
    double bound = 0.0;         // (1+gamma) alpha
    bool pass = false;
};

/// Exact rejection probability per random unit direction v, from the dense
/// covariances: X = v' Sigma v / v' Sigma_s v, R = rejection_prob(X).
/// When the series meets the relative-error criterion, max R <= (1+gamma) alpha.
ProjectionSummary projection_test_suite(const PrecisionOperator& op, const ChebSeries& series,
                                        const TestConfig& cfg, int n_directions,
                                        std::uint64_t seed);

/// Reference sampler factoring Q = D P(S) D once with a banded Cholesky and
/// drawing z = L^{-T} eps. Exact up to floating error; used for cross-method
/// variogram parity at scales past the dense oracle.
class BandedCholeskySampler {
public:
    explicit BandedCholeskySampler(const PrecisionOperator& op);

    std::vector<double> sample(const std::vector<double>& eps) const;
    int n() const { return n_; }
    int bandwidth() const { return bw_; }

private:
    int n_ = 0;
    int bw_ = 0;
    std::vector<double> band_; // column j holds L(j..j+bw, j)
};

} // namespace gmrfsim
