#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace precsel {

using index_t = std::int32_t;

enum class Symmetry { general, symmetric };

struct Triplet {
    index_t row;
    index_t col;
    double value;
};

/// Coordinate-format entries as read from disk, 0-based.
struct CooEntries {
    index_t n_rows = 0;
    index_t n_cols = 0;
    std::vector<Triplet> entries;
    Symmetry symmetry = Symmetry::general;
};

/// Square real matrix in compressed sparse row storage.
///
/// Column indices are strictly increasing within each row and no explicit
/// zeros are stored. Symmetric inputs are held fully expanded.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Adopts raw CSR arrays; throws ContractError if they violate the
    /// storage invariants.
    SparseMatrix(index_t n, std::vector<index_t> row_ptr, std::vector<index_t> col_idx,
                 std::vector<double> values);

    index_t n() const { return n_; }
    index_t nnz() const { return static_cast<index_t>(values_.size()); }

    std::span<const index_t> row_ptr() const { return row_ptr_; }
    std::span<const index_t> col_idx() const { return col_idx_; }
    std::span<const double> values() const { return values_; }

    std::span<const index_t> row_cols(index_t i) const {
        return {col_idx_.data() + row_ptr_[i], static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
    }
    std::span<const double> row_values(index_t i) const {
        return {values_.data() + row_ptr_[i], static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
    }

    /// Stored value at (i, j), 0 if not stored.
    double at(index_t i, index_t j) const;

    /// Diagonal entries (0 where absent).
    std::vector<double> diagonal() const;

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> multiply(std::span<const double> x) const;

    /// Maximum absolute column sum.
    double norm1() const;

    SparseMatrix transpose() const;

    /// Exact entrywise symmetry check (structure and values).
    bool is_symmetric() const;

    /// Returns c * A.
    SparseMatrix scaled(double c) const;

    /// Returns P A P^T where perm[new] = old.
    SparseMatrix permuted(std::span<const index_t> perm) const;

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    index_t n_ = 0;
    std::vector<index_t> row_ptr_{0};
    std::vector<index_t> col_idx_;
    std::vector<double> values_;
};

/// Builds a CSR matrix: mirrors symmetric-tagged entries (diagonal once),
/// sums duplicate coordinates and drops explicit zeros.
SparseMatrix assemble_csr(const CooEntries& coo);

}  // namespace precsel
