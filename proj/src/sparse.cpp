#include "gmrfsim/sparse.hpp"
#include "gmrfsim/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gmrfsim {

SparseSymMatrix from_triplets(int n, const std::vector<Triplet>& triplets, SymmetryMode mode) {
    if (n < 1) throw std::invalid_argument("from_triplets: n must be >= 1");

    // Accumulate per ordered pair. FEM assemblies list both (i,j) and (j,i)
    // explicitly, each carrying the full coefficient, so orientations must not
    // be pooled.
    std::map<std::pair<int, int>, double> acc;
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
            throw std::out_of_range("from_triplets: index out of range");
        if (!std::isfinite(t.value))
            throw std::invalid_argument("from_triplets: non-finite value");
        acc[{t.row, t.col}] += t.value;
    }

    std::map<std::pair<int, int>, double> sym;
    for (const auto& [ij, v] : acc) {
        auto [i, j] = ij;
        if (i == j) {
            sym[ij] = v;
            continue;
        }
        auto mirror = acc.find({j, i});
        if (mirror == acc.end()) {
            sym[{i, j}] = v;
            sym[{j, i}] = v;
        } else if (v == mirror->second) {
            sym[ij] = v;
        } else if (mode == SymmetryMode::symmetrize) {
            sym[ij] = 0.5 * (v + mirror->second);
        } else {
            std::ostringstream msg;
            msg << "from_triplets: asymmetric entries at (" << i << "," << j << "): " << v
                << " vs " << mirror->second;
            throw std::invalid_argument(msg.str());
        }
    }

    SparseSymMatrix S;
    S.n_ = n;
    S.row_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (const auto& [ij, v] : sym) {
        (void)v;
        ++S.row_offsets_[static_cast<std::size_t>(ij.first) + 1];
    }
    for (int i = 0; i < n; ++i) S.row_offsets_[i + 1] += S.row_offsets_[i];
    S.col_indices_.resize(sym.size());
    S.values_.resize(sym.size());
    std::vector<std::size_t> cursor(S.row_offsets_.begin(), S.row_offsets_.end() - 1);
    for (const auto& [ij, v] : sym) { // map order: rows ascending, cols ascending within row
        std::size_t pos = cursor[ij.first]++;
        S.col_indices_[pos] = ij.second;
        S.values_[pos] = v;
    }
    return S;
}

SparseSymMatrix SparseSymMatrix::identity(int n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, t);
}

double SparseSymMatrix::at(int i, int j) const {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        if (col_indices_[k] == j) return values_[k];
    return 0.0;
}

void SparseSymMatrix::matvec(const std::vector<double>& x, std::vector<double>& y) const {
    if (static_cast<int>(x.size()) != n_)
        throw std::invalid_argument("matvec: dimension mismatch");
    y.assign(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
            s += values_[k] * x[col_indices_[k]];
        y[i] = s;
    }
    stats::matvec_calls.fetch_add(1, std::memory_order_relaxed);
    stats::fma_ops.fetch_add(values_.size(), std::memory_order_relaxed);
}

std::vector<double> SparseSymMatrix::matvec(const std::vector<double>& x) const {
    std::vector<double> y;
    matvec(x, y);
    return y;
}

std::vector<double> SparseSymMatrix::to_dense() const {
    std::vector<double> d(static_cast<std::size_t>(n_) * n_, 0.0);
    for (int i = 0; i < n_; ++i)
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
            d[static_cast<std::size_t>(i) * n_ + col_indices_[k]] = values_[k];
    return d;
}

double DiagonalMatrix::inv_inf_norm() const {
    double m = 0.0;
    for (double d : entries) m = std::max(m, std::abs(1.0 / d));
    return m;
}

void DiagonalMatrix::apply(const std::vector<double>& x, std::vector<double>& y) const {
    if (x.size() != entries.size()) throw std::invalid_argument("diagonal apply: size mismatch");
    y.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = entries[i] * x[i];
}

void DiagonalMatrix::apply_inverse(const std::vector<double>& x, std::vector<double>& y) const {
    if (x.size() != entries.size()) throw std::invalid_argument("diagonal apply: size mismatch");
    y.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] / entries[i];
}

void DiagonalMatrix::validate_invertible() const {
    for (double d : entries)
        if (d == 0.0 || !std::isfinite(d))
            throw std::invalid_argument("diagonal matrix not invertible");
}

Interval gershgorin_interval(const SparseSymMatrix& S, bool clamp_psd) {
    double lo = 0.0, hi = 0.0, max_abs_row = 0.0;
    bool first = true;
    for (int i = 0; i < S.n(); ++i) {
        double diag = 0.0, off = 0.0, abs_row = 0.0;
        for (std::size_t k = S.row_offsets()[i]; k < S.row_offsets()[i + 1]; ++k) {
            double v = S.values()[k];
            abs_row += std::abs(v);
            if (S.col_indices()[k] == i)
                diag = v;
            else
                off += std::abs(v);
        }
        max_abs_row = std::max(max_abs_row, abs_row);
        double a = diag - off, b = diag + off;
        if (first) {
            lo = a;
            hi = b;
            first = false;
        } else {
            lo = std::min(lo, a);
            hi = std::max(hi, b);
        }
    }
    if (clamp_psd) return {0.0, max_abs_row};
    return {lo, hi};
}

double trace_bound(const SparseSymMatrix& S) {
    double s = 0.0;
    for (double v : S.values()) s += v * v;
    return std::sqrt(s);
}

double rayleigh_quotient(const SparseSymMatrix& S, const std::vector<double>& x) {
    double xx = 0.0;
    for (double v : x) xx += v * v;
    if (xx == 0.0) throw std::invalid_argument("rayleigh_quotient: zero vector");
    std::vector<double> y;
    S.matvec(x, y);
    double xy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) xy += x[i] * y[i];
    return xy / xx;
}

void write_matrix_market(const SparseSymMatrix& S, std::ostream& out) {
    std::size_t count = 0;
    for (int i = 0; i < S.n(); ++i)
        for (std::size_t k = S.row_offsets()[i]; k < S.row_offsets()[i + 1]; ++k)
            if (S.col_indices()[k] <= i) ++count;
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << S.n() << " " << S.n() << " " << count << "\n";
    out.precision(17);
    for (int i = 0; i < S.n(); ++i)
        for (std::size_t k = S.row_offsets()[i]; k < S.row_offsets()[i + 1]; ++k)
            if (S.col_indices()[k] <= i)
                out << (i + 1) << " " << (S.col_indices()[k] + 1) << " " << S.values()[k] << "\n";
}

void write_matrix_market(const SparseSymMatrix& S, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_matrix_market(S, out);
}

SparseSymMatrix read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("matrix market: empty stream");
    if (line.find("%%MatrixMarket") != 0 || line.find("coordinate") == std::string::npos ||
        line.find("symmetric") == std::string::npos)
        throw std::runtime_error("matrix market: expected coordinate real symmetric header");
    while (std::getline(in, line) && (line.empty() || line[0] == '%')) {
    }
    std::istringstream dims(line);
    long rows = 0, cols = 0, entries = 0;
    dims >> rows >> cols >> entries;
    if (rows != cols || rows < 1) throw std::runtime_error("matrix market: bad dimensions");
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(entries) * 2);
    for (long e = 0; e < entries; ++e) {
        long i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v)) throw std::runtime_error("matrix market: truncated entries");
        t.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), v});
        if (i != j) t.push_back({static_cast<int>(j - 1), static_cast<int>(i - 1), v});
    }
    return from_triplets(static_cast<int>(rows), t);
}

SparseSymMatrix read_matrix_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return read_matrix_market(in);
}

} // namespace gmrfsim
