#include "precsel/krylov/preconditioner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace precsel {
namespace {

constexpr index_t kNoColumn = -1;

class IdentityPreconditioner final : public Preconditioner {
public:
    explicit IdentityPreconditioner(index_t n) : n_(n) {}
    PrecondKind kind() const override { return PrecondKind::NONE; }
    index_t size() const override { return n_; }
    void apply(std::span<const double> r, std::span<double> z) const override { std::copy(r.begin(), r.end(), z.begin()); }

private:
    index_t n_;
};

class JacobiPreconditioner final : public Preconditioner {
public:
    explicit JacobiPreconditioner(const SparseMatrix& a) : inv_d_(a.diagonal()) {
        for (index_t i = 0; i < a.n(); ++i) {
            if (inv_d_[i] == 0.0) throw SetupFailure("JACOBI: zero diagonal at row " + std::to_string(i));
            inv_d_[i] = 1.0 / inv_d_[i];
        }
    }
    PrecondKind kind() const override { return PrecondKind::JACOBI; }
    index_t size() const override { return static_cast<index_t>(inv_d_.size()); }
    void apply(std::span<const double> r, std::span<double> z) const override {
        for (std::size_t i = 0; i < inv_d_.size(); ++i) z[i] = inv_d_[i] * r[i];
    }

private:
    std::vector<double> inv_d_;
};

/// Point-block Jacobi: explicit inverses of the bs x bs diagonal blocks.
class PointBlockJacobi final : public Preconditioner {
public:
    PointBlockJacobi(const SparseMatrix& a, index_t bs) : n_(a.n()), bs_(bs) {
        if (bs_ < 1) throw ContractError("PBJACOBI block size must be >= 1");
        for (index_t start = 0; start < n_; start += bs_) {
            const index_t len = std::min(bs_, n_ - start);
            std::vector<double> blk(len * len, 0.0), inv(len * len, 0.0);
            for (index_t r = 0; r < len; ++r) {
                for (index_t c = 0; c < len; ++c) blk[r * len + c] = a.at(start + r, start + c);
                inv[r * len + r] = 1.0;
            }
            invert(blk, inv, len, start);
            inverses_.insert(inverses_.end(), inv.begin(), inv.end());
        }
    }
    PrecondKind kind() const override { return PrecondKind::PBJACOBI; }
    index_t size() const override { return n_; }
    void apply(std::span<const double> r, std::span<double> z) const override {
        std::size_t off = 0;
        for (index_t start = 0; start < n_; start += bs_) {
            const index_t len = std::min(bs_, n_ - start);
            for (index_t i = 0; i < len; ++i) {
                double s = 0.0;
                for (index_t j = 0; j < len; ++j) s += inverses_[off + i * len + j] * r[start + j];
                z[start + i] = s;
            }
            off += static_cast<std::size_t>(len) * len;
        }
    }

private:
    // Gauss-Jordan with partial pivoting; a 1x1 block yields exactly 1/d.
    static void invert(std::vector<double>& m, std::vector<double>& inv, index_t len, index_t start) {
        for (index_t c = 0; c < len; ++c) {
            index_t piv = c;
            for (index_t r = c + 1; r < len; ++r)
                if (std::abs(m[r * len + c]) > std::abs(m[piv * len + c])) piv = r;
            if (m[piv * len + c] == 0.0)
                throw SetupFailure("PBJACOBI: singular diagonal block at row " + std::to_string(start));
            if (piv != c) {
                for (index_t k = 0; k < len; ++k) {
                    std::swap(m[c * len + k], m[piv * len + k]);
                    std::swap(inv[c * len + k], inv[piv * len + k]);
                }
            }
            if (len == 1) {
                inv[0] = 1.0 / m[0];
                return;
            }
            const double p = m[c * len + c];
            for (index_t k = 0; k < len; ++k) {
                m[c * len + k] /= p;
                inv[c * len + k] /= p;
            }
            for (index_t r = 0; r < len; ++r) {
                if (r == c) continue;
                const double f = m[r * len + c];
                if (f == 0.0) continue;
                for (index_t k = 0; k < len; ++k) {
                    m[r * len + k] -= f * m[c * len + k];
                    inv[r * len + k] -= f * inv[c * len + k];
                }
            }
        }
    }

    index_t n_;
    index_t bs_;
    std::vector<double> inverses_;
};

/// Incomplete Cholesky on the lower-triangular pattern of A.
class IncompleteCholesky final : public Preconditioner {
public:
    explicit IncompleteCholesky(const SparseMatrix& a) : n_(a.n()) {
        row_ptr_.assign(n_ + 1, 0);
        for (index_t i = 0; i < n_; ++i) {
            auto cols = a.row_cols(i);
            auto vals = a.row_values(i);
            for (std::size_t k = 0; k < cols.size() && cols[k] < i; ++k) {
                col_idx_.push_back(cols[k]);
                l_.push_back(vals[k]);
            }
            col_idx_.push_back(i);
            l_.push_back(a.at(i, i));
            row_ptr_[i + 1] = static_cast<index_t>(col_idx_.size());
        }

        std::vector<double> work(n_, 0.0);
        for (index_t i = 0; i < n_; ++i) {
            const index_t begin = row_ptr_[i], diag = row_ptr_[i + 1] - 1;
            for (index_t p = begin; p < diag; ++p) work[col_idx_[p]] = l_[p];
            for (index_t p = begin; p < diag; ++p) {
                const index_t k = col_idx_[p];
                double s = work[k];
                const index_t kdiag = row_ptr_[k + 1] - 1;
                for (index_t q = row_ptr_[k]; q < kdiag; ++q) s -= work[col_idx_[q]] * l_[q];
                s /= l_[kdiag];
                work[k] = s;
                l_[p] = s;
            }
            double d = l_[diag];
            for (index_t p = begin; p < diag; ++p) d -= l_[p] * l_[p];
            if (!(d > 0.0)) throw SetupFailure("ICC0: non-positive pivot at row " + std::to_string(i));
            l_[diag] = std::sqrt(d);
            for (index_t p = begin; p < diag; ++p) work[col_idx_[p]] = 0.0;
        }
    }

    PrecondKind kind() const override { return PrecondKind::ICC0; }
    index_t size() const override { return n_; }

    void apply(std::span<const double> r, std::span<double> z) const override {
        for (index_t i = 0; i < n_; ++i) {
            double s = r[i];
            const index_t diag = row_ptr_[i + 1] - 1;
            for (index_t p = row_ptr_[i]; p < diag; ++p) s -= l_[p] * z[col_idx_[p]];
            z[i] = s / l_[diag];
        }
        for (index_t i = n_ - 1; i >= 0; --i) {
            const index_t diag = row_ptr_[i + 1] - 1;
            const double xi = z[i] / l_[diag];
            z[i] = xi;
            for (index_t p = row_ptr_[i]; p < diag; ++p) z[col_idx_[p]] -= l_[p] * xi;
        }
    }

private:
    index_t n_;
    std::vector<index_t> row_ptr_;
    std::vector<index_t> col_idx_;
    std::vector<double> l_;
};

FactorPattern pattern_of(const SparseMatrix& a) {
    FactorPattern p;
    p.n = a.n();
    p.row_ptr.assign(a.n() + 1, 0);
    for (index_t i = 0; i < a.n(); ++i) {
        auto cols = a.row_cols(i);
        bool diag_done = false;
        for (index_t c : cols) {
            if (!diag_done && c >= i) {
                if (c != i) p.col_idx.push_back(i);
                diag_done = true;
            }
            p.col_idx.push_back(c);
        }
        if (!diag_done) p.col_idx.push_back(i);
        p.row_ptr[i + 1] = static_cast<index_t>(p.col_idx.size());
    }
    return p;
}

SparseMatrix block_diagonal_part(const SparseMatrix& a, index_t blocks) {
    if (blocks < 1) throw ContractError("BJACOBI block count must be >= 1");
    if (blocks == 1) return a;
    const index_t n = a.n();
    const index_t len = (n + blocks - 1) / blocks;
    CooEntries coo{n, n, {}, Symmetry::general};
    for (index_t i = 0; i < n; ++i) {
        auto cols = a.row_cols(i);
        auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k)
            if (cols[k] / len == i / len) coo.entries.push_back({i, cols[k], vals[k]});
    }
    return assemble_csr(coo);
}

}  // namespace

std::string_view to_string(PrecondKind kind) {
    switch (kind) {
        case PrecondKind::NONE: return "NONE";
        case PrecondKind::JACOBI: return "JACOBI";
        case PrecondKind::PBJACOBI: return "PBJACOBI";
        case PrecondKind::BJACOBI: return "BJACOBI";
        case PrecondKind::SOR: return "SOR";
        case PrecondKind::EISENSTAT: return "EISENSTAT";
        case PrecondKind::ILU0: return "ILU0";
        case PrecondKind::ILU1: return "ILU1";
        case PrecondKind::ICC0: return "ICC0";
        case PrecondKind::MG: return "MG";
        case PrecondKind::GAMG: return "GAMG";
    }
    return "?";
}

PrecondKind parse_precond_kind(std::string_view name) {
    std::string up(name);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
    up.erase(std::remove(up.begin(), up.end(), '-'), up.end());
    if (up == "ICC") up = "ICC0";
    for (PrecondKind k : kAllPrecondKinds)
        if (to_string(k) == up) return k;
    throw DataError("unknown preconditioner kind '" + std::string(name) + "'");
}

bool FactorPattern::contains(index_t i, index_t j) const {
    auto b = col_idx.begin() + row_ptr[i], e = col_idx.begin() + row_ptr[i + 1];
    return std::binary_search(b, e, j);
}

FactorPattern ilu_level_pattern(const SparseMatrix& a, int level) {
    const index_t n = a.n();
    if (level <= 0) return pattern_of(a);

    constexpr int kInf = std::numeric_limits<int>::max();
    FactorPattern p;
    p.n = n;
    p.row_ptr.assign(n + 1, 0);
    std::vector<int> levels;  // aligned with p.col_idx
    std::vector<int> lev(n, kInf);
    std::vector<index_t> next(n + 1, kNoColumn);

    for (index_t i = 0; i < n; ++i) {
        // Sorted singly linked list of the row's columns, head stored at next[n].
        index_t tail = n;
        auto push_back = [&](index_t c) {
            next[tail] = c;
            next[c] = kNoColumn;
            tail = c;
        };
        bool diag_done = false;
        for (index_t c : a.row_cols(i)) {
            if (!diag_done && c >= i) {
                if (c != i) {
                    push_back(i);
                    lev[i] = 0;
                }
                diag_done = true;
            }
            push_back(c);
            lev[c] = 0;
        }
        if (!diag_done) {
            push_back(i);
            lev[i] = 0;
        }

        for (index_t k = next[n]; k != kNoColumn && k < i; k = next[k]) {
            const int lik = lev[k];
            for (index_t q = p.row_ptr[k]; q < p.row_ptr[k + 1]; ++q) {
                const index_t j = p.col_idx[q];
                if (j <= k) continue;
                const int nl = lik + levels[q] + 1;
                if (nl > level) continue;
                if (lev[j] == kInf) {
                    index_t prev = k;
                    while (next[prev] != kNoColumn && next[prev] < j) prev = next[prev];
                    next[j] = next[prev];
                    next[prev] = j;
                    lev[j] = nl;
                } else if (nl < lev[j]) {
                    lev[j] = nl;
                }
            }
        }

        for (index_t c = next[n]; c != kNoColumn;) {
            p.col_idx.push_back(c);
            levels.push_back(lev[c]);
            lev[c] = kInf;
            index_t nc = next[c];
            next[c] = kNoColumn;
            c = nc;
        }
        next[n] = kNoColumn;
        p.row_ptr[i + 1] = static_cast<index_t>(p.col_idx.size());
    }
    return p;
}

IncompleteLU::IncompleteLU(const SparseMatrix& a, FactorPattern pattern, PrecondKind kind)
    : kind_(kind), pattern_(std::move(pattern)), lu_(pattern_.col_idx.size(), 0.0), diag_(pattern_.n) {
    const index_t n = pattern_.n;
    if (n != a.n()) throw ContractError("ILU pattern dimension mismatch");
    std::vector<index_t> pos(n, kNoColumn);
    const auto& rp = pattern_.row_ptr;
    const auto& ci = pattern_.col_idx;

    for (index_t i = 0; i < n; ++i) {
        for (index_t q = rp[i]; q < rp[i + 1]; ++q) {
            pos[ci[q]] = q;
            if (ci[q] == i) diag_[i] = q;
        }
        auto cols = a.row_cols(i);
        auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (pos[cols[k]] == kNoColumn) throw ContractError("ILU pattern must contain the pattern of A");
            lu_[pos[cols[k]]] = vals[k];
        }
        for (index_t q = rp[i]; q < rp[i + 1] && ci[q] < i; ++q) {
            const index_t k = ci[q];
            const double lik = lu_[q] / lu_[diag_[k]];
            lu_[q] = lik;
            for (index_t s = diag_[k] + 1; s < rp[k + 1]; ++s) {
                const index_t t = pos[ci[s]];
                if (t != kNoColumn) lu_[t] -= lik * lu_[s];
            }
        }
        const double pivot = lu_[diag_[i]];
        if (!(pivot > 0.0))
            throw SetupFailure(std::string(to_string(kind_)) + ": non-positive pivot at row " + std::to_string(i));
        for (index_t q = rp[i]; q < rp[i + 1]; ++q) pos[ci[q]] = kNoColumn;
    }
}

void IncompleteLU::apply(std::span<const double> r, std::span<double> z) const {
    const index_t n = pattern_.n;
    const auto& rp = pattern_.row_ptr;
    const auto& ci = pattern_.col_idx;
    for (index_t i = 0; i < n; ++i) {
        double s = r[i];
        for (index_t q = rp[i]; q < diag_[i]; ++q) s -= lu_[q] * z[ci[q]];
        z[i] = s;
    }
    for (index_t i = n - 1; i >= 0; --i) {
        double s = z[i];
        for (index_t q = diag_[i] + 1; q < rp[i + 1]; ++q) s -= lu_[q] * z[ci[q]];
        z[i] = s / lu_[diag_[i]];
    }
}

SsorPreconditioner::SsorPreconditioner(const SparseMatrix& a, double omega, PrecondKind kind)
    : kind_(kind), a_(a), omega_(omega), diag_(a.n()), diag_pos_(a.n(), kNoColumn), inv_sqrt_d_(a.n()) {
    if (!(omega > 0.0 && omega < 2.0)) throw ContractError("SSOR relaxation factor must lie in (0, 2)");
    const auto rp = a_.row_ptr();
    const auto ci = a_.col_idx();
    const auto v = a_.values();
    for (index_t i = 0; i < a_.n(); ++i) {
        for (index_t q = rp[i]; q < rp[i + 1]; ++q)
            if (ci[q] == i) diag_pos_[i] = q;
        if (diag_pos_[i] == kNoColumn || !(v[diag_pos_[i]] > 0.0))
            throw SetupFailure(std::string(to_string(kind_)) + ": non-positive diagonal at row " + std::to_string(i));
        diag_[i] = v[diag_pos_[i]];
        inv_sqrt_d_[i] = 1.0 / std::sqrt(diag_[i]);
    }
    if (kind_ == PrecondKind::EISENSTAT) {
        // Unit-diagonal scaling with the relaxation folded into the off-diagonals.
        std::vector<double> sv(v.begin(), v.end());
        for (index_t i = 0; i < a_.n(); ++i)
            for (index_t q = rp[i]; q < rp[i + 1]; ++q)
                sv[q] = ci[q] == i ? 1.0 : omega_ * v[q] * inv_sqrt_d_[i] * inv_sqrt_d_[ci[q]];
        scaled_ = SparseMatrix(a_.n(), {rp.begin(), rp.end()}, {ci.begin(), ci.end()}, std::move(sv));
        scaled_diag_pos_ = diag_pos_;
    }
}

void SsorPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
    const index_t n = a_.n();
    if (kind_ == PrecondKind::EISENSTAT) {
        for (index_t i = 0; i < n; ++i) z[i] = r[i] * inv_sqrt_d_[i];
        scaled_lower_solve(z);
        scaled_upper_solve(z);
        const double scale = omega_ * (2.0 - omega_);
        for (index_t i = 0; i < n; ++i) z[i] *= scale * inv_sqrt_d_[i];
        return;
    }
    const auto rp = a_.row_ptr();
    const auto ci = a_.col_idx();
    const auto v = a_.values();
    // Forward sweep from a zero guess, then a backward sweep.
    for (index_t i = 0; i < n; ++i) {
        double s = r[i];
        for (index_t q = rp[i]; q < diag_pos_[i]; ++q) s -= v[q] * z[ci[q]];
        z[i] = omega_ * s / diag_[i];
    }
    for (index_t i = n - 1; i >= 0; --i) {
        double s = r[i];
        for (index_t q = rp[i]; q < rp[i + 1]; ++q)
            if (q != diag_pos_[i]) s -= v[q] * z[ci[q]];
        z[i] = (1.0 - omega_) * z[i] + omega_ * s / diag_[i];
    }
}

void SsorPreconditioner::scaled_lower_solve(std::span<double> x) const {
    const auto rp = scaled_.row_ptr();
    const auto ci = scaled_.col_idx();
    const auto v = scaled_.values();
    for (index_t i = 0; i < scaled_.n(); ++i) {
        double s = x[i];
        for (index_t q = rp[i]; q < scaled_diag_pos_[i]; ++q) s -= v[q] * x[ci[q]];
        x[i] = s;
    }
}

void SsorPreconditioner::scaled_upper_solve(std::span<double> x) const {
    const auto rp = scaled_.row_ptr();
    const auto ci = scaled_.col_idx();
    const auto v = scaled_.values();
    for (index_t i = scaled_.n() - 1; i >= 0; --i) {
        double s = x[i];
        for (index_t q = scaled_diag_pos_[i] + 1; q < rp[i + 1]; ++q) s -= v[q] * x[ci[q]];
        x[i] = s;
    }
}

void SsorPreconditioner::scaled_lower_multiply(std::span<const double> x, std::span<double> y) const {
    const auto rp = scaled_.row_ptr();
    const auto ci = scaled_.col_idx();
    const auto v = scaled_.values();
    for (index_t i = 0; i < scaled_.n(); ++i) {
        double s = x[i];
        for (index_t q = rp[i]; q < scaled_diag_pos_[i]; ++q) s += v[q] * x[ci[q]];
        y[i] = s;
    }
}

std::unique_ptr<Preconditioner> build_preconditioner(const SparseMatrix& a, PrecondKind kind,
                                                     const PrecondOptions& opts) {
    switch (kind) {
        case PrecondKind::NONE: return std::make_unique<IdentityPreconditioner>(a.n());
        case PrecondKind::JACOBI: return std::make_unique<JacobiPreconditioner>(a);
        case PrecondKind::PBJACOBI: return std::make_unique<PointBlockJacobi>(a, opts.pbjacobi_block_size);
        case PrecondKind::BJACOBI: {
            SparseMatrix blocks = block_diagonal_part(a, opts.bjacobi_blocks);
            return std::make_unique<IncompleteLU>(blocks, pattern_of(blocks), PrecondKind::BJACOBI);
        }
        case PrecondKind::SOR: return std::make_unique<SsorPreconditioner>(a, opts.omega, PrecondKind::SOR);
        case PrecondKind::EISENSTAT: return std::make_unique<SsorPreconditioner>(a, opts.omega, PrecondKind::EISENSTAT);
        case PrecondKind::ILU0: return std::make_unique<IncompleteLU>(a, pattern_of(a), PrecondKind::ILU0);
        case PrecondKind::ILU1: return std::make_unique<IncompleteLU>(a, ilu_level_pattern(a, 1), PrecondKind::ILU1);
        case PrecondKind::ICC0: return std::make_unique<IncompleteCholesky>(a);
        case PrecondKind::MG:
        case PrecondKind::GAMG:
            throw UnavailableError(std::string(to_string(kind)) + " preconditioner is not available in this build");
    }
    throw ContractError("unhandled preconditioner kind");
}

}  // namespace precsel
