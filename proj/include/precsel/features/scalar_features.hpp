#pragma once

#include <array>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "precsel/error.hpp"
#include "precsel/matio/sparse_matrix.hpp"

namespace precsel {

/// Value recorded for DDeg when no row has off-diagonal entries.
inline constexpr double kDdegCap = 1e12;

/// The nine scalar matrix features. Missing estimator outputs are NaN.
struct ScalarFeatures {
    double density = 0.0;
    index_t n = 0;
    index_t nnz = 0;
    double row_nnz = 0.0;
    double condest = std::numeric_limits<double>::quiet_NaN();
    double min_eig = std::numeric_limits<double>::quiet_NaN();
    double max_eig = std::numeric_limits<double>::quiet_NaN();
    double ddom = 0.0;
    double ddeg = 0.0;
    bool condest_converged = false;
    bool eigs_converged = false;

    static constexpr std::size_t kCount = 9;
    /// Column order: density, n, nnz, row_nnz, condest, min_eig, max_eig, ddom, ddeg.
    std::array<double, kCount> as_array() const;
    static const std::array<const char*, kCount>& names();
};

/// Density, N, NNZ, RowNNZ, DDom and DDeg; estimator fields are left unset.
ScalarFeatures basic_features(const SparseMatrix& a);

class ConditionUnavailable : public DataError {
public:
    using DataError::DataError;
};

/// 1-norm condition estimate ||A||_1 * est(||A^{-1}||_1) using Hager's power
/// method with Higham's safeguards (at most five sweeps plus the
/// alternating-sign test vector). Each A^{-1} application is a Jacobi-PCG
/// solve to `solver_tol`. Assumes A is symmetric, so A^{-T} = A^{-1}.
/// Throws ConditionUnavailable if an inner solve fails.
double estimate_condest(const SparseMatrix& a, double solver_tol = 1e-10);

struct EigenEstimate {
    double min_eig = std::numeric_limits<double>::quiet_NaN();
    double max_eig = std::numeric_limits<double>::quiet_NaN();
    bool min_converged = false;
    bool max_converged = false;
    int min_iterations = 0;
    int max_iterations = 0;

    bool converged() const { return min_converged && max_converged; }
};

/// Largest-magnitude eigenvalue by power iteration, smallest-magnitude by
/// inverse iteration (CG inner solves). Both report the Rayleigh quotient and
/// stop on relative change <= tol; on hitting max_iter the last iterate is
/// returned with its converged flag cleared.
EigenEstimate estimate_extreme_eigs(const SparseMatrix& a, double tol = 1e-6, int max_iter = 1000,
                                    double solver_tol = 1e-10);

struct FeatureOptions {
    double eig_tol = 1e-6;
    int eig_max_iter = 1000;
    double solver_tol = 1e-10;
};

/// All nine features; estimator failures are recorded, never thrown.
ScalarFeatures compute_features(const SparseMatrix& a, const FeatureOptions& opts = {});

/// CSV: matrix_id, nine feature columns, condest_converged, eigs_converged.
void write_feature_table(const std::filesystem::path& path, const std::map<std::string, ScalarFeatures>& table);
std::map<std::string, ScalarFeatures> read_feature_table(const std::filesystem::path& path);

}  // namespace precsel
