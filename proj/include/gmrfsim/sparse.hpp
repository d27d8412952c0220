#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <tuple>
#include <vector>

namespace gmrfsim {

/// Closed interval [a, b]. For PSD spectral bounds a >= 0.
struct Interval {
    double a = 0.0;
    double b = 0.0;
    double length() const { return b - a; }
};

struct Triplet {
    int row;
    int col;
    double value;
};

enum class SymmetryMode {
    strict,     // both orientations present must agree exactly
    symmetrize, // disagreeing orientations are averaged
};

/// Symmetric sparse matrix in compressed-row form. The full pattern (both
/// triangles) is stored so matvec is a single branch-free sweep; memory is
/// traded for speed because the simulation algorithm is matvec-bound.
/// Immutable after construction.
class SparseSymMatrix {
public:
    SparseSymMatrix() = default;

    static SparseSymMatrix identity(int n);

    int n() const { return n_; }
    std::size_t nnz() const { return values_.size(); }

    const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
    const std::vector<int>& col_indices() const { return col_indices_; }
    const std::vector<double>& values() const { return values_; }

    /// Stored value at (i, j); zero if the entry is not stored.
    double at(int i, int j) const;

    /// y = S x. Counts one multiply-add per stored entry.
    void matvec(const std::vector<double>& x, std::vector<double>& y) const;
    std::vector<double> matvec(const std::vector<double>& x) const;

    /// Dense row-major copy, for oracles and small-n checks.
    std::vector<double> to_dense() const;

    friend SparseSymMatrix from_triplets(int n, const std::vector<Triplet>& triplets,
                                         SymmetryMode mode);

private:
    int n_ = 0;
    std::vector<std::size_t> row_offsets_;
    std::vector<int> col_indices_;
    std::vector<double> values_;
};

/// Builds a symmetric matrix from (row, col, value) triplets.
/// Duplicates of the same ordered pair are summed. A pair given in only one
/// orientation is mirrored. If both orientations are present with different
/// accumulated values: strict mode throws, symmetrize mode stores the average.
SparseSymMatrix from_triplets(int n, const std::vector<Triplet>& triplets,
                              SymmetryMode mode = SymmetryMode::strict);

/// Diagonal matrix with nonzero (for this library's uses: strictly positive)
/// entries.
struct DiagonalMatrix {
    std::vector<double> entries;

    int n() const { return static_cast<int>(entries.size()); }
    /// max_i |1/d_i|
    double inv_inf_norm() const;
    void apply(const std::vector<double>& x, std::vector<double>& y) const;
    void apply_inverse(const std::vector<double>& x, std::vector<double>& y) const;
    void validate_invertible() const; // throws on zero/non-finite entries
};

/// Gershgorin disc bound. Unclamped: [min_i (S_ii - r_i), max_i (S_ii + r_i)]
/// with r_i the off-diagonal absolute row sum. With clamp_psd the lower end is
/// 0 and the upper end is the max absolute row sum (the PSD form used by the
/// simulation pipeline).
Interval gershgorin_interval(const SparseSymMatrix& S, bool clamp_psd = true);

/// sqrt(sum_ij S_ij^2) = sqrt(trace(S^2)); bounds every |eigenvalue|.
double trace_bound(const SparseSymMatrix& S);

/// (x' S x) / (x' x). Throws on x = 0.
double rayleigh_quotient(const SparseSymMatrix& S, const std::vector<double>& x);

/// Matrix Market coordinate I/O ("matrix coordinate real symmetric"); files
/// store the lower triangle, expanded to the full pattern on load.
void write_matrix_market(const SparseSymMatrix& S, std::ostream& out);
void write_matrix_market(const SparseSymMatrix& S, const std::string& path);
SparseSymMatrix read_matrix_market(std::istream& in);
SparseSymMatrix read_matrix_market_file(const std::string& path);

} // namespace gmrfsim
