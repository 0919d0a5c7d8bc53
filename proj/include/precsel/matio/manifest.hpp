#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "precsel/matio/sparse_matrix.hpp"

namespace precsel {

struct ManifestEntry {
    std::string matrix_id;
    std::string source;  // local path or collection name
    index_t n = 0;
    index_t nnz = 0;
    std::string checksum;
};

/// Matrix list persisted as CSV `matrix_id,source,n,nnz,checksum`.
class MatrixManifest {
public:
    const std::vector<ManifestEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    /// Adds or replaces the entry with the same matrix_id.
    void upsert(ManifestEntry entry);
    const ManifestEntry* find(const std::string& matrix_id) const;

    static MatrixManifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    /// Resolves `source` relative to the manifest's directory when it is a
    /// relative local path.
    std::filesystem::path resolve(const ManifestEntry& e) const;

private:
    std::vector<ManifestEntry> entries_;
    std::filesystem::path base_dir_;
};

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_bytes(const std::string& bytes);

}  // namespace precsel
