#include "gmrfsim/validate.hpp"

#include "gmrfsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gmrfsim {

namespace {

constexpr int kJacobiMaxN = 512;

double frobenius(const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

double off_diag_norm(const std::vector<double>& a, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) s += a[static_cast<std::size_t>(i) * n + j] * a[static_cast<std::size_t>(i) * n + j];
    return std::sqrt(2.0 * s);
}

} // namespace

EigenDecomposition jacobi_eigh(std::vector<double> a, int n) {
    if (n <= 0 || a.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("jacobi_eigh: dense size does not match n");
    if (n > kJacobiMaxN)
        throw std::invalid_argument("jacobi_eigh: n = " + std::to_string(n) + " exceeds the dense-oracle cap " +
                                    std::to_string(kJacobiMaxN));

    const double fro = frobenius(a);
    // enforce exact symmetry so rotations preserve it bit-for-bit
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const std::size_t ij = static_cast<std::size_t>(i) * n + j;
            const std::size_t ji = static_cast<std::size_t>(j) * n + i;
            if (std::abs(a[ij] - a[ji]) > 1e-10 * std::max(1.0, fro))
                throw std::invalid_argument("jacobi_eigh: matrix is not symmetric");
            const double m = 0.5 * (a[ij] + a[ji]);
            a[ij] = a[ji] = m;
        }

    std::vector<double> V(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) V[static_cast<std::size_t>(i) * n + i] = 1.0;

    auto A = [&a, n](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };

    const double tol = 1e-13 * std::max(fro, 1e-300);
    for (int sweep = 0; sweep < 100; ++sweep) {
        if (off_diag_norm(a, n) <= tol) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (apq == 0.0) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 0.5 / theta;
                } else {
                    t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                A(p, p) -= t * apq;
                A(q, q) += t * apq;
                A(p, q) = A(q, p) = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = A(i, p);
                    const double aiq = A(i, q);
                    A(i, p) = A(p, i) = aip - s * (aiq + tau * aip);
                    A(i, q) = A(q, i) = aiq + s * (aip - tau * aiq);
                }
                for (int i = 0; i < n; ++i) {
                    const std::size_t ip = static_cast<std::size_t>(i) * n + p;
                    const std::size_t iq = static_cast<std::size_t>(i) * n + q;
                    const double vip = V[ip];
                    const double viq = V[iq];
                    V[ip] = vip - s * (viq + tau * vip);
                    V[iq] = viq + s * (vip - tau * viq);
                }
            }
        }
    }
    if (off_diag_norm(a, n) > 1e-10 * std::max(fro, 1e-300))
        throw std::runtime_error("jacobi_eigh: rotation sweeps did not converge");

    EigenDecomposition e;
    e.n = n;
    e.eigenvalues.resize(n);
    for (int i = 0; i < n; ++i) e.eigenvalues[i] = A(i, i);

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(),
              [&e](int x, int y) { return e.eigenvalues[x] < e.eigenvalues[y]; });

    EigenDecomposition out;
    out.n = n;
    out.eigenvalues.resize(n);
    out.V.resize(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        out.eigenvalues[j] = e.eigenvalues[perm[j]];
        for (int i = 0; i < n; ++i)
            out.V[static_cast<std::size_t>(i) * n + j] = V[static_cast<std::size_t>(i) * n + perm[j]];
    }
    return out;
}

namespace {

// M = V diag(w) V^T, row-major
std::vector<double> spectral_assemble(const EigenDecomposition& e, const std::vector<double>& w) {
    const int n = e.n;
    std::vector<double> M(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                s += e.V[static_cast<std::size_t>(i) * n + k] * w[k] * e.V[static_cast<std::size_t>(j) * n + k];
            M[static_cast<std::size_t>(i) * n + j] = s;
            M[static_cast<std::size_t>(j) * n + i] = s;
        }
    }
    return M;
}

std::vector<double> spectrum_P(const PrecisionOperator& op, const EigenDecomposition& e) {
    std::vector<double> P(e.n);
    for (int k = 0; k < e.n; ++k) {
        P[k] = op.P.eval_P(e.eigenvalues[k]);
        if (!(P[k] > 0.0))
            throw std::runtime_error("dense oracle: P is not positive at eigenvalue " +
                                     std::to_string(e.eigenvalues[k]));
    }
    return P;
}

void scale_by_inv_diag(std::vector<double>& M, const DiagonalMatrix& D) {
    const int n = D.n();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M[static_cast<std::size_t>(i) * n + j] /= D.entries[i] * D.entries[j];
}

} // namespace

std::vector<double> dense_sqrt_inv_oracle(const PrecisionOperator& op) {
    const EigenDecomposition e = jacobi_eigh(op.S.to_dense(), op.n());
    std::vector<double> w = spectrum_P(op, e);
    for (double& v : w) v = 1.0 / std::sqrt(v);
    return spectral_assemble(e, w);
}

std::vector<double> dense_covariance_exact(const PrecisionOperator& op) {
    const EigenDecomposition e = jacobi_eigh(op.S.to_dense(), op.n());
    std::vector<double> w = spectrum_P(op, e);
    for (double& v : w) v = 1.0 / v;
    std::vector<double> M = spectral_assemble(e, w);
    scale_by_inv_diag(M, op.D);
    return M;
}

std::vector<double> dense_covariance_series(const PrecisionOperator& op, const ChebSeries& series) {
    const EigenDecomposition e = jacobi_eigh(op.S.to_dense(), op.n());
    std::vector<double> w(e.n);
    for (int k = 0; k < e.n; ++k) {
        const double p = cheb_eval_scalar(series, e.eigenvalues[k]);
        w[k] = p * p;
    }
    std::vector<double> M = spectral_assemble(e, w);
    scale_by_inv_diag(M, op.D);
    return M;
}

double eigen_grid_error(const PrecisionOperator& op, const ChebSeries& series) {
    const EigenDecomposition e = jacobi_eigh(op.S.to_dense(), op.n());
    const std::vector<double> P = spectrum_P(op, e);
    double worst = 0.0;
    for (int k = 0; k < e.n; ++k) {
        const double p = cheb_eval_scalar(series, e.eigenvalues[k]);
        const double p2 = p * p;
        if (!(p2 > 0.0)) throw std::runtime_error("eigen_grid_error: series square vanished");
        worst = std::max(worst, std::abs((1.0 / P[k] - p2) / p2));
    }
    return worst;
}

std::vector<std::vector<double>> crop_grid_vectors(const std::vector<std::vector<double>>& vectors,
                                                   const GridGeometry& geom, int margin_cells,
                                                   GridGeometry& cropped_geom) {
    if (margin_cells < 0) throw std::invalid_argument("crop_grid_vectors: negative margin");
    const int nx = geom.nx - 2 * margin_cells;
    const int ny = geom.ny - 2 * margin_cells;
    if (nx < 1 || ny < 1) throw std::invalid_argument("crop_grid_vectors: margin swallows the grid");
    cropped_geom = {nx, ny, geom.h};
    std::vector<std::vector<double>> out;
    out.reserve(vectors.size());
    for (const auto& z : vectors) {
        if (z.size() != static_cast<std::size_t>(geom.nx) * geom.ny)
            throw std::invalid_argument("crop_grid_vectors: vector does not match the grid");
        std::vector<double> c(static_cast<std::size_t>(nx) * ny);
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix)
                c[static_cast<std::size_t>(iy) * nx + ix] =
                    z[static_cast<std::size_t>(iy + margin_cells) * geom.nx + (ix + margin_cells)];
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

struct LagOffset {
    int dx;
    int dy;        // may be negative; dx > 0 or (dx == 0 and dy > 0)
    int bin;
    double dist;
    long long pairs; // full pair count for this offset
    long long draws; // pairs actually evaluated (== pairs unless subsampled)
};

} // namespace

VariogramEstimate VariogramData::combined() const {
    VariogramEstimate v;
    v.lags = lags;
    const std::size_t n_sims = per_sim.size();
    v.counts.resize(counts.size());
    v.gamma_hat.assign(lags.size(), 0.0);
    for (std::size_t b = 0; b < lags.size(); ++b) {
        v.counts[b] = counts[b] * static_cast<long long>(n_sims);
        double s = 0.0;
        for (std::size_t k = 0; k < n_sims; ++k) s += per_sim[k][b];
        v.gamma_hat[b] = n_sims ? s / static_cast<double>(n_sims) : 0.0;
    }
    return v;
}

VariogramData variogram_data(const std::vector<std::vector<double>>& vectors,
                             const GridGeometry& geom, double max_lag, int n_bins,
                             std::uint64_t subsample_seed, std::size_t max_pair_evals) {
    if (vectors.empty()) throw std::invalid_argument("variogram: no simulations");
    if (geom.nx < 2 || geom.ny < 1 || !(geom.h > 0.0))
        throw std::invalid_argument("variogram: bad grid geometry");
    if (!(max_lag > 0.0) || n_bins < 1) throw std::invalid_argument("variogram: bad lag binning");
    const std::size_t n_expect = static_cast<std::size_t>(geom.nx) * geom.ny;
    for (const auto& z : vectors)
        if (z.size() != n_expect) throw std::invalid_argument("variogram: vector does not match the grid");

    const double w = max_lag / n_bins;
    const int max_dx = std::min(geom.nx - 1, static_cast<int>(std::floor(max_lag / geom.h)));
    const int max_dy = std::min(geom.ny - 1, static_cast<int>(std::floor(max_lag / geom.h)));

    std::vector<LagOffset> offsets;
    long long evals_per_sim = 0;
    for (int dx = 0; dx <= max_dx; ++dx) {
        for (int dy = (dx == 0 ? 1 : -max_dy); dy <= max_dy; ++dy) {
            const double dist = geom.h * std::hypot(static_cast<double>(dx), static_cast<double>(dy));
            if (dist > max_lag) continue;
            int bin = static_cast<int>(std::floor(dist / w));
            if (bin >= n_bins) bin = n_bins - 1; // dist == max_lag lands on the closed end
            const long long pairs =
                static_cast<long long>(geom.nx - dx) * static_cast<long long>(geom.ny - std::abs(dy));
            offsets.push_back({dx, dy, bin, dist, pairs, pairs});
            evals_per_sim += pairs;
        }
    }
    if (offsets.empty()) throw std::invalid_argument("variogram: max_lag below the grid spacing");

    const long long n_sims = static_cast<long long>(vectors.size());
    const long long budget = static_cast<long long>(max_pair_evals);
    const bool subsample = evals_per_sim * n_sims > budget;
    if (subsample) {
        const double rate = static_cast<double>(budget) / (static_cast<double>(evals_per_sim) * n_sims);
        for (auto& o : offsets) o.draws = std::max<long long>(1, std::llround(o.pairs * rate));
    }

    std::vector<long long> counts(n_bins, 0);
    std::vector<double> dist_sum(n_bins, 0.0);
    for (const auto& o : offsets) {
        counts[o.bin] += o.draws;
        dist_sum[o.bin] += o.dist * static_cast<double>(o.draws);
    }

    // pair positions are a pure function of (subsample_seed, offset index, draw
    // index), so every simulation sees the same pair set
    std::vector<std::vector<double>> acc(vectors.size(), std::vector<double>(n_bins, 0.0));
    for (std::size_t oi = 0; oi < offsets.size(); ++oi) {
        const auto& o = offsets[oi];
        const int span_x = geom.nx - o.dx;
        const int span_y = geom.ny - std::abs(o.dy);
        const int base_y = std::max(0, -o.dy);
        const std::uint64_t key = detail::stream_key(subsample_seed, static_cast<std::uint64_t>(oi));
        for (std::size_t s = 0; s < vectors.size(); ++s) {
            const double* z = vectors[s].data();
            double bin_acc = 0.0;
            if (!subsample) {
                for (int iy = 0; iy < span_y; ++iy) {
                    const int y0 = base_y + iy;
                    const std::size_t r0 = static_cast<std::size_t>(y0) * geom.nx;
                    const std::size_t r1 = static_cast<std::size_t>(y0 + o.dy) * geom.nx;
                    for (int ix = 0; ix < span_x; ++ix) {
                        const double d = z[r0 + ix] - z[r1 + ix + o.dx];
                        bin_acc += d * d;
                    }
                }
            } else {
                for (long long t = 0; t < o.draws; ++t) {
                    const std::uint64_t r = detail::counter_u64(key, static_cast<std::uint64_t>(t));
                    const int ix = static_cast<int>((r >> 32) % static_cast<std::uint64_t>(span_x));
                    const int iy = base_y + static_cast<int>((r & 0xffffffffULL) %
                                                             static_cast<std::uint64_t>(span_y));
                    const double d = z[static_cast<std::size_t>(iy) * geom.nx + ix] -
                                     z[static_cast<std::size_t>(iy + o.dy) * geom.nx + ix + o.dx];
                    bin_acc += d * d;
                }
            }
            acc[s][o.bin] += 0.5 * bin_acc;
        }
    }

    int empty_bins = 0;
    for (int b = 0; b < n_bins; ++b)
        if (counts[b] == 0) ++empty_bins;
    if (empty_bins > 0)
        std::cerr << "variogram: dropping " << empty_bins << " empty lag bin(s)\n";

    VariogramData out;
    out.per_sim.assign(vectors.size(), {});
    for (int b = 0; b < n_bins; ++b) {
        if (counts[b] == 0) continue;
        out.lags.push_back(dist_sum[b] / static_cast<double>(counts[b]));
        out.counts.push_back(counts[b]);
        for (std::size_t s = 0; s < vectors.size(); ++s)
            out.per_sim[s].push_back(acc[s][b] / static_cast<double>(counts[b]));
    }
    return out;
}

VariogramEstimate empirical_variogram(const std::vector<std::vector<double>>& vectors,
                                      const GridGeometry& geom, double max_lag, int n_bins,
                                      std::uint64_t subsample_seed, std::size_t max_pair_evals) {
    return variogram_data(vectors, geom, max_lag, n_bins, subsample_seed, max_pair_evals).combined();
}

double variogram_deviation(const VariogramEstimate& v, const MaternParams& params) {
    if (v.lags.empty()) return 0.0;
    double total = 0.0;
    const std::size_t m = v.lags.size();
    for (std::size_t b = 0; b < m; ++b) {
        const double left = (b == 0) ? 0.0 : 0.5 * (v.lags[b - 1] + v.lags[b]);
        const double right = (b + 1 == m) ? v.lags[b] + 0.5 * (v.lags[b] - left)
                                          : 0.5 * (v.lags[b] + v.lags[b + 1]);
        const double width = right - left;
        total += width * std::abs(v.gamma_hat[b] - matern_variogram(v.lags[b], params));
    }
    return total;
}

VarianceTestReport variance_test(const std::vector<double>& samples, double target_var,
                                 double alpha) {
    const int N = static_cast<int>(samples.size());
    if (N < 2) throw std::invalid_argument("variance_test: need at least two samples");
    if (!(target_var > 0.0)) throw std::invalid_argument("variance_test: target variance must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("variance_test: alpha out of (0,1)");

    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / N;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);

    VarianceTestReport r;
    r.t = ss / target_var; // (N-1) S^2 / sigma0^2
    r.lower = chisq_quantile(alpha / 2.0, N - 1);
    r.upper = chisq_quantile(1.0 - alpha / 2.0, N - 1);
    r.reject = (r.t < r.lower) || (r.t > r.upper);
    return r;
}

ProjectionSummary projection_test_suite(const PrecisionOperator& op, const ChebSeries& series,
                                        const TestConfig& cfg, int n_directions,
                                        std::uint64_t seed) {
    cfg.validate();
    if (n_directions < 1) throw std::invalid_argument("projection_test_suite: n_directions < 1");
    const int n = op.n();
    const EigenDecomposition e = jacobi_eigh(op.S.to_dense(), n);
    const std::vector<double> P = spectrum_P(op, e);
    std::vector<double> inv_P(n), p2(n);
    for (int k = 0; k < n; ++k) {
        inv_P[k] = 1.0 / P[k];
        const double p = cheb_eval_scalar(series, e.eigenvalues[k]);
        p2[k] = p * p;
    }

    const int dof = cfg.N - 1;
    const double q_lo = chisq_quantile(cfg.alpha / 2.0, dof);
    const double q_hi = chisq_quantile(1.0 - cfg.alpha / 2.0, dof);

    ProjectionSummary out;
    out.n_directions = n_directions;
    out.bound = (1.0 + cfg.gamma) * cfg.alpha;

    std::vector<double> u(n);
    for (int d = 0; d < n_directions; ++d) {
        const std::vector<double> v = standard_normal_vector(seed, static_cast<std::uint64_t>(d), n);
        for (int i = 0; i < n; ++i) u[i] = v[i] / op.D.entries[i];
        // w = V^T u
        double num = 0.0, den = 0.0;
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += e.V[static_cast<std::size_t>(i) * n + k] * u[i];
            num += s * s * inv_P[k];
            den += s * s * p2[k];
        }
        if (!(den > 0.0)) throw std::runtime_error("projection_test_suite: degenerate direction");
        const double X = num / den;
        const double R = 1.0 - (chisq_cdf(q_hi * X, dof) - chisq_cdf(q_lo * X, dof));
        out.max_rejection = std::max(out.max_rejection, R);
        out.max_ratio_gap = std::max(out.max_ratio_gap, std::abs(X - 1.0));
    }
    out.pass = out.max_rejection <= out.bound + 1e-9;
    return out;
}

namespace {

// C = A B for symmetric sparse A, B with symmetric product (as arises for
// polynomials of one matrix); only the upper triangle is emitted and mirrored.
SparseSymMatrix sparse_sym_product(const SparseSymMatrix& A, const SparseSymMatrix& B) {
    const int n = A.n();
    if (B.n() != n) throw std::invalid_argument("sparse_sym_product: size mismatch");
    std::vector<Triplet> trips;
    std::vector<double> accum(n, 0.0);
    std::vector<int> touched;
    touched.reserve(64);
    for (int i = 0; i < n; ++i) {
        for (std::size_t ia = A.row_offsets()[i]; ia < A.row_offsets()[i + 1]; ++ia) {
            const int k = A.col_indices()[ia];
            const double av = A.values()[ia];
            for (std::size_t ib = B.row_offsets()[k]; ib < B.row_offsets()[k + 1]; ++ib) {
                const int j = B.col_indices()[ib];
                if (j < i) continue; // upper triangle only
                if (accum[j] == 0.0 && std::find(touched.begin(), touched.end(), j) == touched.end())
                    touched.push_back(j);
                accum[j] += av * B.values()[ib];
            }
        }
        for (int j : touched) {
            trips.push_back({i, j, accum[j]});
            accum[j] = 0.0;
        }
        touched.clear();
    }
    return from_triplets(n, trips, SymmetryMode::strict);
}

// M = P(S) for P(x) = b_0 + ... + b_L x^L by Horner steps on the matrix.
SparseSymMatrix sparse_polynomial(const SparseSymMatrix& S, const std::vector<double>& b) {
    const int n = S.n();
    const int L = static_cast<int>(b.size()) - 1;
    if (L < 0) throw std::invalid_argument("sparse_polynomial: empty coefficients");

    auto scaled_plus_diag = [n](const SparseSymMatrix& M, double scale, double diag) {
        std::vector<Triplet> trips;
        trips.reserve(M.nnz() / 2 + n);
        for (int i = 0; i < n; ++i)
            for (std::size_t idx = M.row_offsets()[i]; idx < M.row_offsets()[i + 1]; ++idx) {
                const int j = M.col_indices()[idx];
                if (j < i) continue;
                double v = scale * M.values()[idx];
                if (i == j) v += diag;
                trips.push_back({i, j, v});
            }
        return from_triplets(n, trips, SymmetryMode::strict);
    };

    if (L == 0) return scaled_plus_diag(SparseSymMatrix::identity(n), 0.0, b[0]);
    SparseSymMatrix acc = scaled_plus_diag(S, b[L], b[L - 1]);
    for (int l = L - 2; l >= 0; --l) {
        acc = sparse_sym_product(acc, S);
        acc = scaled_plus_diag(acc, 1.0, b[l]);
    }
    return acc;
}

} // namespace

BandedCholeskySampler::BandedCholeskySampler(const PrecisionOperator& op) {
    n_ = op.n();
    if (op.D.n() != n_) throw std::invalid_argument("BandedCholeskySampler: operator size mismatch");
    op.D.validate_invertible();

    const SparseSymMatrix M = sparse_polynomial(op.S, op.P.P_coeffs);

    bw_ = 0;
    for (int i = 0; i < n_; ++i)
        for (std::size_t idx = M.row_offsets()[i]; idx < M.row_offsets()[i + 1]; ++idx)
            bw_ = std::max(bw_, std::abs(M.col_indices()[idx] - i));

    const std::size_t stride = static_cast<std::size_t>(bw_) + 1;
    band_.assign(static_cast<std::size_t>(n_) * stride, 0.0);
    auto entry = [this, stride](int i, int j) -> double& {
        return band_[static_cast<std::size_t>(j) * stride + (i - j)];
    };

    // Q = D M D, lower triangle into the band
    for (int i = 0; i < n_; ++i)
        for (std::size_t idx = M.row_offsets()[i]; idx < M.row_offsets()[i + 1]; ++idx) {
            const int j = M.col_indices()[idx];
            if (j > i) continue;
            entry(i, j) = op.D.entries[i] * M.values()[idx] * op.D.entries[j];
        }

    // in-place banded Cholesky Q = L L^T
    for (int j = 0; j < n_; ++j) {
        double d = entry(j, j);
        const int k_lo = std::max(0, j - bw_);
        for (int k = k_lo; k < j; ++k) d -= entry(j, k) * entry(j, k);
        if (!(d > 0.0))
            throw std::runtime_error("BandedCholeskySampler: matrix is not positive definite at column " +
                                     std::to_string(j));
        const double ljj = std::sqrt(d);
        entry(j, j) = ljj;
        const int i_hi = std::min(n_ - 1, j + bw_);
        for (int i = j + 1; i <= i_hi; ++i) {
            double s = entry(i, j);
            const int kk_lo = std::max(0, i - bw_);
            for (int k = kk_lo; k < j; ++k) s -= entry(i, k) * entry(j, k);
            entry(i, j) = s / ljj;
        }
    }
}

std::vector<double> BandedCholeskySampler::sample(const std::vector<double>& eps) const {
    if (eps.size() != static_cast<std::size_t>(n_))
        throw std::invalid_argument("BandedCholeskySampler::sample: noise length mismatch");
    const std::size_t stride = static_cast<std::size_t>(bw_) + 1;
    auto L = [this, stride](int i, int j) -> double {
        return band_[static_cast<std::size_t>(j) * stride + (i - j)];
    };
    std::vector<double> z(n_);
    for (int i = n_ - 1; i >= 0; --i) {
        double s = eps[i];
        const int j_hi = std::min(n_ - 1, i + bw_);
        for (int j = i + 1; j <= j_hi; ++j) s -= L(j, i) * z[j];
        z[i] = s / L(i, i);
    }
    return z;
}

} // namespace gmrfsim
