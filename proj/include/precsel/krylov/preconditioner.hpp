#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "precsel/error.hpp"
#include "precsel/matio/sparse_matrix.hpp"

namespace precsel {

enum class PrecondKind { NONE, JACOBI, PBJACOBI, BJACOBI, SOR, EISENSTAT, ILU0, ILU1, ICC0, MG, GAMG };

inline constexpr PrecondKind kAllPrecondKinds[] = {
    PrecondKind::NONE, PrecondKind::JACOBI, PrecondKind::PBJACOBI, PrecondKind::BJACOBI,
    PrecondKind::SOR,  PrecondKind::EISENSTAT, PrecondKind::ILU0, PrecondKind::ILU1,
    PrecondKind::ICC0, PrecondKind::MG,     PrecondKind::GAMG};

/// The ten kinds a labeling run considers by default (NONE excluded).
inline constexpr PrecondKind kLabelingKinds[] = {
    PrecondKind::ILU0, PrecondKind::ILU1, PrecondKind::BJACOBI, PrecondKind::SOR, PrecondKind::PBJACOBI,
    PrecondKind::MG,   PrecondKind::JACOBI, PrecondKind::ICC0, PrecondKind::GAMG, PrecondKind::EISENSTAT};

std::string_view to_string(PrecondKind kind);
/// Case-insensitive; throws DataError on unknown names.
PrecondKind parse_precond_kind(std::string_view name);

/// Factorization hit a zero (or, for Cholesky, non-positive) pivot.
class SetupFailure : public DataError {
public:
    using DataError::DataError;
};

/// Kind is registered but has no implementation (MG, GAMG).
class UnavailableError : public DataError {
public:
    using DataError::DataError;
};

struct PrecondOptions {
    index_t pbjacobi_block_size = 1;
    index_t bjacobi_blocks = 1;
    double omega = 1.0;
};

/// z = M^{-1} r for some fixed operator M approximating A.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    virtual PrecondKind kind() const = 0;
    virtual index_t size() const = 0;
    virtual void apply(std::span<const double> r, std::span<double> z) const = 0;

    std::vector<double> apply(std::span<const double> r) const {
        std::vector<double> z(r.size());
        apply(r, z);
        return z;
    }
};

/// Sparsity structure of a factor: sorted column lists per row.
struct FactorPattern {
    index_t n = 0;
    std::vector<index_t> row_ptr;
    std::vector<index_t> col_idx;

    std::size_t nnz() const { return col_idx.size(); }
    bool contains(index_t i, index_t j) const;
};

/// Row-wise symbolic ILU(k): pattern of the level-k incomplete factors (L and U
/// combined, including the diagonal).
FactorPattern ilu_level_pattern(const SparseMatrix& a, int level);

/// Incomplete LU on a prescribed pattern; L unit lower and U stored together.
class IncompleteLU final : public Preconditioner {
public:
    /// Throws SetupFailure on a zero pivot.
    IncompleteLU(const SparseMatrix& a, FactorPattern pattern, PrecondKind kind);

    PrecondKind kind() const override { return kind_; }
    index_t size() const override { return pattern_.n; }
    void apply(std::span<const double> r, std::span<double> z) const override;

    const FactorPattern& pattern() const { return pattern_; }
    /// Factor values aligned with pattern().col_idx (strict lower part is L, the rest U).
    std::span<const double> factors() const { return lu_; }

private:
    PrecondKind kind_;
    FactorPattern pattern_;
    std::vector<double> lu_;
    std::vector<index_t> diag_;
};

/// SSOR operator used by both SOR and EISENSTAT kinds; exposed so the
/// solver can run Eisenstat's reformulation on the unit-diagonal scaling.
class SsorPreconditioner final : public Preconditioner {
public:
    SsorPreconditioner(const SparseMatrix& a, double omega, PrecondKind kind);

    PrecondKind kind() const override { return kind_; }
    index_t size() const override { return a_.n(); }
    void apply(std::span<const double> r, std::span<double> z) const override;

    const SparseMatrix& matrix() const { return a_; }
    double omega() const { return omega_; }

    // Pieces of the scaled system D^{-1/2} A D^{-1/2} = I + L + U.
    std::span<const double> inv_sqrt_diag() const { return inv_sqrt_d_; }
    /// Solves (I + L) y = x in place.
    void scaled_lower_solve(std::span<double> x) const;
    /// Solves (I + U) y = x in place.
    void scaled_upper_solve(std::span<double> x) const;
    /// y = (I + L) x
    void scaled_lower_multiply(std::span<const double> x, std::span<double> y) const;

private:
    PrecondKind kind_;
    SparseMatrix a_;
    double omega_;
    std::vector<double> diag_;
    std::vector<index_t> diag_pos_;
    std::vector<double> inv_sqrt_d_;
    SparseMatrix scaled_;  // D^{-1/2} A D^{-1/2}, only built for EISENSTAT
    std::vector<index_t> scaled_diag_pos_;
};

/// Throws SetupFailure or UnavailableError.
std::unique_ptr<Preconditioner> build_preconditioner(const SparseMatrix& a, PrecondKind kind,
                                                     const PrecondOptions& opts = {});

inline std::vector<double> apply_preconditioner(const Preconditioner& m, std::span<const double> r) {
    if (r.size() != static_cast<std::size_t>(m.size())) throw ShapeError("preconditioner dimension mismatch");
    return m.apply(r);
}

}  // namespace precsel
