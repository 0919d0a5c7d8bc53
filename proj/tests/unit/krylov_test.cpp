#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "precsel/krylov/pcg.hpp"
#include "precsel/synth/generators.hpp"
#include "support/oracles.hpp"

namespace precsel {
namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

double norm(const std::vector<double>& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return norm(d) / std::max(norm(b), 1e-300);
}

TEST(PrecondKind, NamesRoundTrip) {
    for (PrecondKind k : kAllPrecondKinds) EXPECT_EQ(parse_precond_kind(to_string(k)), k);
    EXPECT_EQ(parse_precond_kind("ilu-1"), PrecondKind::ILU1);
    EXPECT_EQ(parse_precond_kind("icc"), PrecondKind::ICC0);
    EXPECT_THROW(parse_precond_kind("bogus"), DataError);
    EXPECT_EQ(std::size(kLabelingKinds), 10u);
}

TEST(BuildPreconditioner, UnavailableKinds) {
    SparseMatrix a = synth::poisson2d(3);
    EXPECT_THROW(build_preconditioner(a, PrecondKind::MG), UnavailableError);
    EXPECT_THROW(build_preconditioner(a, PrecondKind::GAMG), UnavailableError);
}

TEST(BuildPreconditioner, ZeroPivotIsSetupFailure) {
    SparseMatrix a = assemble_csr({2, 2, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}}, Symmetry::general});
    EXPECT_THROW(build_preconditioner(a, PrecondKind::ILU0), SetupFailure);
    EXPECT_THROW(build_preconditioner(a, PrecondKind::ICC0), SetupFailure);
    SparseMatrix indef = synth::diagonal({1.0, -2.0});
    EXPECT_THROW(build_preconditioner(indef, PrecondKind::ICC0), SetupFailure);
}

TEST(ApplyPreconditioner, JacobiExamples) {
    auto m = build_preconditioner(synth::diagonal({2, 4}), PrecondKind::JACOBI);
    EXPECT_EQ(m->apply(std::vector<double>{2, 4}), (std::vector<double>{1, 1}));
    auto id = build_preconditioner(synth::identity(6), PrecondKind::JACOBI);
    auto r = random_vector(6, 1);
    EXPECT_EQ(id->apply(r), r);
    EXPECT_THROW(apply_preconditioner(*id, std::vector<double>(5, 1.0)), ShapeError);
}

TEST(ApplyPreconditioner, Ilu0OnTridiagonalIsExactInverse) {
    SparseMatrix a = synth::tridiagonal(3, -1, 2, -1);
    auto m = build_preconditioner(a, PrecondKind::ILU0);
    auto z = m->apply(std::vector<double>{1, 0, 0});
    auto expected = oracle::dense_solve(oracle::to_dense(a), {1, 0, 0});
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(z[i], expected[i], 1e-15);
        EXPECT_NEAR(z[i], (std::vector<double>{0.75, 0.5, 0.25})[i], 1e-15);
    }
}

TEST(ApplyPreconditioner, Ilu0FactorsEqualExactLu) {
    SparseMatrix a = synth::tridiagonal(6, -1, 2, -1);
    auto built = build_preconditioner(a, PrecondKind::ILU0);
    const auto& lu = dynamic_cast<const IncompleteLU&>(*built);
    // Doolittle by hand on the dense copy.
    auto d = oracle::to_dense(a);
    for (int k = 0; k < 6; ++k)
        for (int i = k + 1; i < 6; ++i) {
            d[i][k] /= d[k][k];
            for (int j = k + 1; j < 6; ++j) d[i][j] -= d[i][k] * d[k][j];
        }
    const auto& p = lu.pattern();
    for (index_t i = 0; i < 6; ++i)
        for (index_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k)
            EXPECT_NEAR(lu.factors()[k], d[i][p.col_idx[k]], 1e-14);
}

TEST(ApplyPreconditioner, PbjacobiBlockOneEqualsJacobi) {
    SparseMatrix a = synth::random_spd(40, 0.1, 1.5, 3);
    auto r = random_vector(40, 2);
    EXPECT_EQ(build_preconditioner(a, PrecondKind::PBJACOBI)->apply(r),
              build_preconditioner(a, PrecondKind::JACOBI)->apply(r));
    PrecondOptions opts;
    opts.pbjacobi_block_size = 4;
    auto z = build_preconditioner(a, PrecondKind::PBJACOBI, opts)->apply(r);
    // Check block solves against the dense oracle on one 4x4 block.
    auto d = oracle::to_dense(a);
    oracle::Dense blk(4, std::vector<double>(4));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) blk[i][j] = d[4 + i][4 + j];
    auto expected = oracle::dense_solve(blk, {r[4], r[5], r[6], r[7]});
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(z[4 + i], expected[i], 1e-12);
}

TEST(ApplyPreconditioner, BjacobiSingleBlockEqualsIlu0Bitwise) {
    for (int trial = 0; trial < 5; ++trial) {
        SparseMatrix a = synth::random_spd(70, 0.06, 1.2, 40 + trial);
        auto r = random_vector(70, trial);
        EXPECT_EQ(build_preconditioner(a, PrecondKind::BJACOBI)->apply(r),
                  build_preconditioner(a, PrecondKind::ILU0)->apply(r));
    }
}

TEST(ApplyPreconditioner, EisenstatMatchesSor) {
    for (int trial = 0; trial < 5; ++trial) {
        SparseMatrix a = synth::random_spd(90, 0.05, 1.1, 60 + trial);
        auto r = random_vector(90, 7 + trial);
        auto zs = build_preconditioner(a, PrecondKind::SOR)->apply(r);
        auto ze = build_preconditioner(a, PrecondKind::EISENSTAT)->apply(r);
        EXPECT_LE(max_rel_diff(ze, zs), 1e-10);
    }
}

TEST(ApplyPreconditioner, SsorMatchesDenseDefinition) {
    SparseMatrix a = synth::random_spd(30, 0.15, 1.3, 77);
    for (double omega : {1.0, 1.4}) {
        PrecondOptions opts;
        opts.omega = omega;
        auto r = random_vector(30, 3);
        auto z = build_preconditioner(a, PrecondKind::SOR, opts)->apply(r);
        // M = w / (2 - w) (D/w + L) D^{-1} (D/w + U), solved densely for z.
        auto d = oracle::to_dense(a);
        const int n = 30;
        oracle::Dense lo(n, std::vector<double>(n, 0.0)), up = lo, m = lo;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) lo[i][j] = up[i][j] = d[i][i] / omega;
                if (j < i) lo[i][j] = d[i][j];
                if (j > i) up[i][j] = d[i][j];
            }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0;
                for (int k = 0; k < n; ++k) s += lo[i][k] / d[k][k] * up[k][j];
                m[i][j] = s * omega / (2 - omega);
            }
        auto expected = oracle::dense_solve(m, r);
        EXPECT_LE(max_rel_diff(z, expected), 1e-11);
    }
}

TEST(PreconditionerProperties, LinearityAndPositivity) {
    SparseMatrix a = synth::random_spd(80, 0.05, 1.2, 91);
    for (PrecondKind k : {PrecondKind::NONE, PrecondKind::JACOBI, PrecondKind::PBJACOBI, PrecondKind::BJACOBI,
                          PrecondKind::SOR, PrecondKind::EISENSTAT, PrecondKind::ILU0, PrecondKind::ILU1,
                          PrecondKind::ICC0}) {
        auto m = build_preconditioner(a, k);
        for (int trial = 0; trial < 5; ++trial) {
            auto r1 = random_vector(80, 100 + trial), r2 = random_vector(80, 200 + trial);
            const double alpha = 0.3 + trial;
            std::vector<double> comb(80);
            for (int i = 0; i < 80; ++i) comb[i] = alpha * r1[i] + r2[i];
            auto z1 = m->apply(r1), z2 = m->apply(r2), zc = m->apply(comb);
            std::vector<double> expect(80);
            for (int i = 0; i < 80; ++i) expect[i] = alpha * z1[i] + z2[i];
            EXPECT_LE(max_rel_diff(zc, expect), 1e-12) << to_string(k);
            EXPECT_GT(std::inner_product(r1.begin(), r1.end(), z1.begin(), 0.0), 0.0) << to_string(k);
        }
    }
}

TEST(IluPattern, Ilu1MatchesBruteForceOnPoissonGrids) {
    for (index_t k : {2, 3, 4, 7, 10, 16}) {
        SparseMatrix a = synth::poisson2d(k);
        FactorPattern p0 = ilu_level_pattern(a, 0), p1 = ilu_level_pattern(a, 1);
        auto keep = oracle::level_of_fill_pattern(a, 1);
        std::size_t count = 0;
        for (index_t i = 0; i < a.n(); ++i)
            for (index_t j = 0; j < a.n(); ++j) {
                EXPECT_EQ(p1.contains(i, j), keep[i][j]) << "k=" << k << " (" << i << "," << j << ")";
                if (p0.contains(i, j)) EXPECT_TRUE(p1.contains(i, j));
                count += keep[i][j];
            }
        EXPECT_EQ(p1.nnz(), count);
        EXPECT_GE(p1.nnz(), p0.nnz());
        if (k >= 3) EXPECT_GT(p1.nnz(), p0.nnz());
    }
}

TEST(IluPattern, Level0IsPatternOfA) {
    SparseMatrix a = synth::poisson2d(4);
    FactorPattern p0 = ilu_level_pattern(a, 0);
    EXPECT_EQ(p0.row_ptr, std::vector<index_t>(a.row_ptr().begin(), a.row_ptr().end()));
    EXPECT_EQ(p0.col_idx, std::vector<index_t>(a.col_idx().begin(), a.col_idx().end()));
}

TEST(IluPattern, HigherLevelsMatchBruteForce) {
    SparseMatrix a = synth::random_symmetric(40, 0.08, 5);
    for (int level : {2, 3}) {
        FactorPattern p = ilu_level_pattern(a, level);
        auto keep = oracle::level_of_fill_pattern(a, level);
        for (index_t i = 0; i < 40; ++i)
            for (index_t j = 0; j < 40; ++j) EXPECT_EQ(p.contains(i, j), keep[i][j]);
    }
}

TEST(Pcg, IdentityOneIteration) {
    SparseMatrix a = synth::identity(10);
    auto b = random_vector(10, 3);
    auto none = build_preconditioner(a, PrecondKind::NONE);
    SolveResult r = pcg_solve(a, b, *none);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1);
    for (int i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(r.x[i], b[i]);
}

TEST(Pcg, JacobiOnDiagonalOneIteration) {
    std::vector<double> d(10);
    std::iota(d.begin(), d.end(), 1.0);
    SparseMatrix a = synth::diagonal(d);
    auto m = build_preconditioner(a, PrecondKind::JACOBI);
    SolveResult r = pcg_solve(a, std::vector<double>(10, 1.0), *m);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1);
}

TEST(Pcg, ExactFactorizationConvergesFast) {
    for (index_t n : {10, 100, 1000}) {
        SparseMatrix a = synth::tridiagonal(n, -1, 2, -1);
        auto b = random_vector(n, 9);
        PcgOptions o;
        o.rtol = 1e-10;
        for (PrecondKind k : {PrecondKind::ILU0, PrecondKind::ICC0}) {
            SolveResult r = pcg_solve(a, b, *build_preconditioner(a, k), o);
            EXPECT_TRUE(r.converged);
            EXPECT_LE(r.iterations, 3);
            auto expected = oracle::dense_solve(oracle::to_dense(synth::tridiagonal(std::min<index_t>(n, 100), -1, 2, -1)),
                                                std::vector<double>(b.begin(), b.begin() + std::min<index_t>(n, 100)));
            if (n <= 100) EXPECT_LE(max_rel_diff(r.x, expected), 1e-8);
        }
        // Unpreconditioned CG needs all n steps when n is small, so the contrast is n-bounded.
        SolveResult plain = pcg_solve(a, b, *build_preconditioner(a, PrecondKind::NONE), o);
        EXPECT_GE(plain.iterations, std::min<index_t>(n, 11));
    }
}

TEST(Pcg, StopsOnIterationCapAndTime) {
    SparseMatrix a = synth::poisson2d(20);
    auto b = random_vector(a.n(), 1);
    auto none = build_preconditioner(a, PrecondKind::NONE);
    PcgOptions o;
    o.max_iter = 5;
    SolveResult r = pcg_solve(a, b, *none, o);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.status, SolveStatus::max_iterations);
    EXPECT_EQ(r.iterations, 5);
    o.max_iter = -1;
    o.time_limit = 0.0;
    r = pcg_solve(a, b, *none, o);
    EXPECT_EQ(r.status, SolveStatus::time_limit);
}

TEST(Pcg, IndefiniteAndNonFinite) {
    SparseMatrix a = synth::diagonal({1.0, -1.0});
    auto none = build_preconditioner(a, PrecondKind::NONE);
    SolveResult r = pcg_solve(a, std::vector<double>{1.0, 1.0}, *none);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.status, SolveStatus::indefinite);

    SparseMatrix i2 = synth::identity(2);
    r = pcg_solve(i2, std::vector<double>{std::nan(""), 1.0}, *build_preconditioner(i2, PrecondKind::NONE));
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.status, SolveStatus::diverged);
}

TEST(Pcg, ConvergedImpliesTolerance) {
    SparseMatrix a = synth::random_spd(150, 0.03, 1.05, 8);
    auto b = random_vector(150, 4);
    for (PrecondKind k : {PrecondKind::NONE, PrecondKind::JACOBI, PrecondKind::SOR, PrecondKind::EISENSTAT,
                          PrecondKind::ILU0, PrecondKind::ILU1, PrecondKind::ICC0}) {
        SolveResult r = pcg_solve(a, b, *build_preconditioner(a, k));
        ASSERT_TRUE(r.converged) << to_string(k);
        EXPECT_LE(r.rel_residual, 1e-8);
        EXPECT_DOUBLE_EQ(r.rel_residual, relative_residual(a, r.x, b));
    }
}

TEST(Pcg, EnergyNormErrorIsMonotone) {
    // CG minimizes the A-norm error over growing Krylov spaces, so it never increases.
    SparseMatrix a = synth::poisson2d(12);
    auto xs = random_vector(a.n(), 5);
    std::vector<double> b(a.n());
    a.multiply(xs, b);
    for (PrecondKind k : {PrecondKind::NONE, PrecondKind::JACOBI, PrecondKind::SOR, PrecondKind::ICC0}) {
        std::vector<double> errs;
        PcgOptions o;
        o.rtol = 1e-12;
        o.observer = [&](const IterationInfo& info) {
            std::vector<double> e(a.n()), ae(a.n());
            for (index_t i = 0; i < a.n(); ++i) e[i] = info.x[i] - xs[i];
            a.multiply(e, ae);
            errs.push_back(std::inner_product(e.begin(), e.end(), ae.begin(), 0.0));
            EXPECT_GE(info.precond_residual_norm, 0.0);
        };
        pcg_solve(a, b, *build_preconditioner(a, k), o);
        ASSERT_GT(errs.size(), 2u);
        for (std::size_t i = 1; i < errs.size(); ++i) EXPECT_LE(errs[i], errs[i - 1] * (1 + 1e-10)) << to_string(k);
    }
}

TEST(Pcg, EisenstatIteratesMatchSor) {
    for (int trial = 0; trial < 4; ++trial) {
        SparseMatrix a = synth::random_spd(60 + 40 * trial, 0.04, 1.02, 300 + trial);
        auto b = random_vector(a.n(), trial);
        auto collect = [&](PrecondKind k) {
            std::vector<std::vector<double>> it;
            PcgOptions o;
            o.rtol = 1e-300;
            o.max_iter = 50;
            o.observer = [&](const IterationInfo& info) { it.emplace_back(info.x.begin(), info.x.end()); };
            pcg_solve(a, b, *build_preconditioner(a, k), o);
            return it;
        };
        auto s = collect(PrecondKind::SOR), e = collect(PrecondKind::EISENSTAT);
        const std::size_t common = std::min(s.size(), e.size());
        ASSERT_GT(common, 5u);
        for (std::size_t i = 0; i < common; ++i) EXPECT_LE(max_rel_diff(e[i], s[i]), 1e-8) << "iteration " << i;
    }
}

TEST(Pcg, ZeroRhs) {
    SparseMatrix a = synth::poisson2d(3);
    SolveResult r = pcg_solve(a, std::vector<double>(9, 0.0), *build_preconditioner(a, PrecondKind::JACOBI));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 0);
    EXPECT_EQ(r.x, std::vector<double>(9, 0.0));
}

TEST(Measures, Examples) {
    SparseMatrix i2 = synth::identity(2);
    EXPECT_DOUBLE_EQ(relative_residual(i2, std::vector<double>{0, 0}, std::vector<double>{1, 0}), 1.0);
    SparseMatrix d = synth::diagonal({2, 2});
    std::vector<double> xbar{1.1, 1.1}, xs{1, 1}, b{2, 2};
    // Direct arithmetic: ||(0.1,0.1)|| / ||(1,1)|| and ||(0.2,0.2)|| / ||(2,2)||.
    EXPECT_NEAR(relative_error(xbar, xs), 0.1, 1e-15);
    EXPECT_NEAR(relative_residual(d, xbar, b), 0.1, 1e-15);
    EXPECT_DOUBLE_EQ(relative_error(xs, xs), 0.0);
    EXPECT_DOUBLE_EQ(relative_residual(d, xs, b), 0.0);
    EXPECT_THROW(relative_residual(d, xs, std::vector<double>{0, 0}), UndefinedMeasure);
    EXPECT_THROW(relative_error(xs, std::vector<double>{0, 0}), UndefinedMeasure);
}

}  // namespace
}  // namespace precsel
