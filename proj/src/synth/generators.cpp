#include "precsel/synth/generators.hpp"

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <random>

#include "precsel/error.hpp"

namespace precsel::synth {

SparseMatrix identity(index_t n) { return diagonal(std::vector<double>(n, 1.0)); }

SparseMatrix diagonal(const std::vector<double>& d) {
    CooEntries coo{static_cast<index_t>(d.size()), static_cast<index_t>(d.size()), {}, Symmetry::general};
    for (std::size_t i = 0; i < d.size(); ++i)
        coo.entries.push_back({static_cast<index_t>(i), static_cast<index_t>(i), d[i]});
    return assemble_csr(coo);
}

SparseMatrix tridiagonal(index_t n, double lower, double diag, double upper) {
    CooEntries coo{n, n, {}, Symmetry::general};
    for (index_t i = 0; i < n; ++i) {
        if (i > 0) coo.entries.push_back({i, i - 1, lower});
        coo.entries.push_back({i, i, diag});
        if (i + 1 < n) coo.entries.push_back({i, i + 1, upper});
    }
    return assemble_csr(coo);
}

SparseMatrix poisson2d(index_t k) { return poisson2d(k, k, 1.0, 1.0, 0.0); }

SparseMatrix poisson2d(index_t kx, index_t ky, double wx, double wy, double shift) {
    const index_t n = kx * ky;
    CooEntries coo{n, n, {}, Symmetry::general};
    for (index_t y = 0; y < ky; ++y) {
        for (index_t x = 0; x < kx; ++x) {
            const index_t i = y * kx + x;
            if (y > 0) coo.entries.push_back({i, i - kx, -wy});
            if (x > 0) coo.entries.push_back({i, i - 1, -wx});
            coo.entries.push_back({i, i, 2.0 * wx + 2.0 * wy + shift});
            if (x + 1 < kx) coo.entries.push_back({i, i + 1, -wx});
            if (y + 1 < ky) coo.entries.push_back({i, i + kx, -wy});
        }
    }
    return assemble_csr(coo);
}

SparseMatrix random_sparse(index_t n, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<index_t> pick(0, n - 1);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    const auto target = static_cast<std::size_t>(std::max(1.0, std::round(density * n * n)));
    CooEntries coo{n, n, {}, Symmetry::general};
    coo.entries.reserve(target);
    for (std::size_t k = 0; k < target; ++k) {
        double v = val(rng);
        if (v == 0.0) v = 0.5;
        coo.entries.push_back({pick(rng), pick(rng), v});
    }
    // Duplicate positions are merged by assembly; keep the first value to avoid cancellation.
    std::vector<Triplet> uniq;
    {
        std::vector<char> seen;
        const bool dense_mark = static_cast<long long>(n) * n <= (1LL << 26);
        if (dense_mark) seen.assign(static_cast<std::size_t>(n) * n, 0);
        for (const auto& t : coo.entries) {
            if (dense_mark) {
                char& s = seen[static_cast<std::size_t>(t.row) * n + t.col];
                if (s) continue;
                s = 1;
            }
            uniq.push_back(t);
        }
    }
    coo.entries = std::move(uniq);
    return assemble_csr(coo);
}

SparseMatrix random_symmetric(index_t n, double density, std::uint64_t seed) {
    SparseMatrix r = random_sparse(n, density / 2.0, seed);
    CooEntries coo{n, n, {}, Symmetry::symmetric};
    for (index_t i = 0; i < n; ++i) {
        auto cols = r.row_cols(i);
        auto vals = r.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            // Fold onto the lower triangle; a position hit from both sides keeps one value.
            const index_t a = std::max(i, cols[k]), b = std::min(i, cols[k]);
            coo.entries.push_back({a, b, vals[k]});
        }
    }
    std::stable_sort(coo.entries.begin(), coo.entries.end(), [](const Triplet& x, const Triplet& y) {
        return x.row != y.row ? x.row < y.row : x.col < y.col;
    });
    coo.entries.erase(std::unique(coo.entries.begin(), coo.entries.end(),
                                  [](const Triplet& x, const Triplet& y) { return x.row == y.row && x.col == y.col; }),
                      coo.entries.end());
    return assemble_csr(coo);
}

SparseMatrix random_spd(index_t n, double density, double dominance, std::uint64_t seed) {
    SparseMatrix s = random_symmetric(n, density, seed);
    CooEntries coo{n, n, {}, Symmetry::general};
    for (index_t i = 0; i < n; ++i) {
        auto cols = s.row_cols(i);
        auto vals = s.row_values(i);
        double off = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] == i) continue;
            off += std::abs(vals[k]);
            coo.entries.push_back({i, cols[k], vals[k]});
        }
        coo.entries.push_back({i, i, dominance * off + 1.0});
    }
    return assemble_csr(coo);
}

std::vector<PlantedMatrix> planted_corpus(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<index_t> side(26, 36);
    std::uniform_real_distribution<double> aniso(0.5, 2.0);
    std::uniform_real_distribution<double> dom(1.5, 3.0);
    std::vector<PlantedMatrix> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const bool dd = i % 2 == 0;
        char id[32];
        std::snprintf(id, sizeof id, "%s_%03d", dd ? "dd" : "pois", i);
        if (dd) {
            const index_t k = side(rng);
            const index_t n = k * k;
            const double d = dom(rng);
            out.push_back({id, Family::diag_dominant, random_spd(n, 10.0 / n, d, rng())});
        } else {
            const index_t kx = side(rng), ky = side(rng);
            out.push_back({id, Family::poisson_like, poisson2d(kx, ky, 1.0, aniso(rng), 1e-3)});
        }
    }
    return out;
}

}  // namespace precsel::synth
