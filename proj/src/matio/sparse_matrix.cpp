#include "precsel/matio/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "precsel/error.hpp"

namespace precsel {

SparseMatrix::SparseMatrix(index_t n, std::vector<index_t> row_ptr, std::vector<index_t> col_idx,
                           std::vector<double> values)
    : n_(n), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {
    if (n_ < 0 || row_ptr_.size() != static_cast<std::size_t>(n_) + 1 || row_ptr_.front() != 0 ||
        static_cast<std::size_t>(row_ptr_.back()) != col_idx_.size() || col_idx_.size() != values_.size()) {
        throw ContractError("CSR arrays have inconsistent lengths");
    }
    for (index_t i = 0; i < n_; ++i) {
        if (row_ptr_[i + 1] < row_ptr_[i]) throw ContractError("CSR row_ptr must be non-decreasing");
        for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            if (col_idx_[k] < 0 || col_idx_[k] >= n_) throw ContractError("CSR column index out of range");
            if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1])
                throw ContractError("CSR columns must be strictly increasing within a row");
        }
    }
}

double SparseMatrix::at(index_t i, index_t j) const {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values_[row_ptr_[i] + (it - cols.begin())];
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(n_, 0.0);
    for (index_t i = 0; i < n_; ++i) d[i] = at(i, i);
    return d;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (index_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
        y[i] = s;
    }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(n_);
    multiply(x, y);
    return y;
}

double SparseMatrix::norm1() const {
    std::vector<double> colsum(n_, 0.0);
    for (std::size_t k = 0; k < values_.size(); ++k) colsum[col_idx_[k]] += std::abs(values_[k]);
    return colsum.empty() ? 0.0 : *std::max_element(colsum.begin(), colsum.end());
}

SparseMatrix SparseMatrix::transpose() const {
    std::vector<index_t> rp(n_ + 1, 0);
    for (index_t c : col_idx_) ++rp[c + 1];
    std::partial_sum(rp.begin(), rp.end(), rp.begin());
    std::vector<index_t> ci(col_idx_.size());
    std::vector<double> v(values_.size());
    std::vector<index_t> next(rp.begin(), rp.end() - 1);
    for (index_t i = 0; i < n_; ++i) {
        for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            index_t dst = next[col_idx_[k]]++;
            ci[dst] = i;
            v[dst] = values_[k];
        }
    }
    return SparseMatrix(n_, std::move(rp), std::move(ci), std::move(v));
}

bool SparseMatrix::is_symmetric() const { return *this == transpose(); }

SparseMatrix SparseMatrix::scaled(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= c;
    return SparseMatrix(n_, row_ptr_, col_idx_, std::move(v));
}

SparseMatrix SparseMatrix::permuted(std::span<const index_t> perm) const {
    if (perm.size() != static_cast<std::size_t>(n_)) throw ContractError("permutation length mismatch");
    std::vector<index_t> inv(n_);
    for (index_t i = 0; i < n_; ++i) inv[perm[i]] = i;
    CooEntries coo{n_, n_, {}, Symmetry::general};
    coo.entries.reserve(values_.size());
    for (index_t i = 0; i < n_; ++i)
        for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            coo.entries.push_back({inv[i], inv[col_idx_[k]], values_[k]});
    return assemble_csr(coo);
}

SparseMatrix assemble_csr(const CooEntries& coo) {
    if (coo.n_rows != coo.n_cols)
        throw ShapeError("matrix must be square, got " + std::to_string(coo.n_rows) + "x" +
                         std::to_string(coo.n_cols));
    if (coo.n_rows <= 0) throw ShapeError("matrix is empty");
    const index_t n = coo.n_rows;

    std::vector<Triplet> t;
    t.reserve(coo.symmetry == Symmetry::symmetric ? 2 * coo.entries.size() : coo.entries.size());
    for (const Triplet& e : coo.entries) {
        if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n) throw ParseError("entry index out of bounds");
        t.push_back(e);
        if (coo.symmetry == Symmetry::symmetric && e.row != e.col) t.push_back({e.col, e.row, e.value});
    }
    // Stable sort keeps duplicate summation order tied to input order within a
    // coordinate; sums of duplicates are the only order-sensitive step.
    std::stable_sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    std::vector<index_t> row_ptr(n + 1, 0);
    std::vector<index_t> col_idx;
    std::vector<double> values;
    col_idx.reserve(t.size());
    values.reserve(t.size());
    for (std::size_t k = 0; k < t.size();) {
        std::size_t e = k;
        double sum = 0.0;
        while (e < t.size() && t[e].row == t[k].row && t[e].col == t[k].col) sum += t[e++].value;
        if (sum != 0.0) {
            col_idx.push_back(t[k].col);
            values.push_back(sum);
            ++row_ptr[t[k].row + 1];
        }
        k = e;
    }
    std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
    return SparseMatrix(n, std::move(row_ptr), std::move(col_idx), std::move(values));
}

}  // namespace precsel
