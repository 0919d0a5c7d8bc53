#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "precsel/krylov/preconditioner.hpp"
#include "precsel/matio/sparse_matrix.hpp"

namespace precsel {

enum class SolveStatus { converged, max_iterations, time_limit, indefinite, diverged };

struct SolveResult {
    std::vector<double> x;
    int iterations = 0;
    double rel_residual = std::numeric_limits<double>::infinity();  // true ||Ax - b|| / ||b||
    bool converged = false;
    SolveStatus status = SolveStatus::max_iterations;
    double wall_time = 0.0;  // seconds
};

/// State handed to an observer after every iteration.
struct IterationInfo {
    int iteration;
    std::span<const double> x;
    double residual_norm;          // ||r_k||_2 of the recursively updated residual
    double precond_residual_norm;  // <r_k, M^{-1} r_k>^(1/2)
};

struct PcgOptions {
    double rtol = 1e-8;
    int max_iter = -1;  // <0 means 10 * n
    double time_limit = std::numeric_limits<double>::infinity();
    double indefinite_threshold = 1e-300;
    /// Optional per-iteration hook; recovering x costs extra work for EISENSTAT.
    std::function<void(const IterationInfo&)> observer;
};

/// Preconditioned conjugate gradient from x0 = 0.
///
/// Stops when the true relative residual reaches rtol, or on the iteration
/// cap, time limit, p^T A p <= threshold, or non-finite values. EISENSTAT
/// preconditioners are run through Eisenstat's split formulation, which
/// produces the same iterates as SSOR(omega) preconditioning.
SolveResult pcg_solve(const SparseMatrix& a, std::span<const double> b, const Preconditioner& m,
                      const PcgOptions& opts = {});

/// ||A x - b||_2 / ||b||_2; throws UndefinedMeasure when b = 0.
double relative_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b);

/// ||x - x_star||_2 / ||x_star||_2; throws UndefinedMeasure when x_star = 0.
double relative_error(std::span<const double> x, std::span<const double> x_star);

}  // namespace precsel
