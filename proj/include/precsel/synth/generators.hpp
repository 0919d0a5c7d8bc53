#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "precsel/matio/sparse_matrix.hpp"

namespace precsel::synth {

SparseMatrix identity(index_t n);
SparseMatrix diagonal(const std::vector<double>& d);
/// Constant-coefficient tridiagonal matrix tridiag(lower, diag, upper).
SparseMatrix tridiagonal(index_t n, double lower, double diag, double upper);
/// 5-point Laplacian on a k x k grid (order k^2), lexicographic ordering.
SparseMatrix poisson2d(index_t k);
/// 5-point operator on a kx x ky grid with anisotropy weights and a diagonal shift.
SparseMatrix poisson2d(index_t kx, index_t ky, double wx, double wy, double shift);

/// Random sparse matrix with roughly `density * n^2` stored entries in
/// uniformly spread positions and values in [-1, 1]. Not symmetric.
SparseMatrix random_sparse(index_t n, double density, std::uint64_t seed);
/// Symmetric random pattern with values in [-1, 1].
SparseMatrix random_symmetric(index_t n, double density, std::uint64_t seed);
/// Symmetric random pattern made SPD by diagonal dominance:
/// a_ii = dominance * sum_j |a_ij| + 1.
SparseMatrix random_spd(index_t n, double density, double dominance, std::uint64_t seed);

/// The two planted families used by the end-to-end experiment.
enum class Family { diag_dominant, poisson_like };

struct PlantedMatrix {
    std::string id;
    Family family;
    SparseMatrix matrix;
};

/// `count` matrices alternating between the families, deterministic under seed.
std::vector<PlantedMatrix> planted_corpus(int count, std::uint64_t seed);

}  // namespace precsel::synth
