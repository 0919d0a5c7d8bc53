#pragma once

#include <filesystem>
#include <iosfwd>

#include "precsel/matio/sparse_matrix.hpp"

namespace precsel {

/// Parses a `%%MatrixMarket matrix coordinate real <general|symmetric>` stream.
/// Throws UnsupportedFormat for other qualifiers and ParseError for malformed
/// content.
CooEntries parse_matrix_market(std::istream& in);

CooEntries read_matrix_market(const std::filesystem::path& path);

/// Parse + assemble in one step.
SparseMatrix load_matrix(const std::filesystem::path& path);

/// Writes the full matrix as a `general` coordinate file with round-trip exact values.
void write_matrix_market(const SparseMatrix& a, std::ostream& out);
void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path);

}  // namespace precsel
