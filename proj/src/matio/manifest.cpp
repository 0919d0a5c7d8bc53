#include "precsel/matio/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <sstream>

#include "precsel/error.hpp"

namespace precsel {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const char* data, std::size_t len) { EVP_DigestUpdate(ctx_, data, len); }

    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_, md.data(), &len);
        static const char* digits = "0123456789abcdef";
        std::string s;
        for (unsigned i = 0; i < len; ++i) {
            s.push_back(digits[md[i] >> 4]);
            s.push_back(digits[md[i] & 15]);
        }
        return s;
    }

private:
    EVP_MD_CTX* ctx_;
};

}  // namespace

void MatrixManifest::upsert(ManifestEntry entry) {
    for (auto& e : entries_) {
        if (e.matrix_id == entry.matrix_id) {
            e = std::move(entry);
            return;
        }
    }
    entries_.push_back(std::move(entry));
}

const ManifestEntry* MatrixManifest::find(const std::string& matrix_id) const {
    for (const auto& e : entries_)
        if (e.matrix_id == matrix_id) return &e;
    return nullptr;
}

MatrixManifest MatrixManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    MatrixManifest m;
    m.base_dir_ = path.parent_path();
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"matrix_id", "source", "n", "nnz", "checksum"})
        throw ParseError("manifest header must be matrix_id,source,n,nnz,checksum");
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_line(line);
        if (f.size() != 5) throw ParseError("manifest row must have 5 fields: '" + line + "'");
        if (m.find(f[0])) throw ParseError("duplicate matrix_id in manifest: " + f[0]);
        ManifestEntry e{f[0], f[1], 0, 0, f[4]};
        try {
            e.n = static_cast<index_t>(std::stol(f[2]));
            e.nnz = static_cast<index_t>(std::stol(f[3]));
        } catch (const std::exception&) {
            throw ParseError("manifest row has non-integer n/nnz: '" + line + "'");
        }
        m.entries_.push_back(std::move(e));
    }
    return m;
}

void MatrixManifest::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest " + path.string());
    out << "matrix_id,source,n,nnz,checksum\n";
    for (const auto& e : entries_)
        out << e.matrix_id << ',' << e.source << ',' << e.n << ',' << e.nnz << ',' << e.checksum << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

std::filesystem::path MatrixManifest::resolve(const ManifestEntry& e) const {
    std::filesystem::path p(e.source);
    if (p.is_relative() && !base_dir_.empty()) return base_dir_ / p;
    return p;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in.read(buf.data(), buf.size()) || in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    return h.hex();
}

std::string sha256_bytes(const std::string& bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

}  // namespace precsel
