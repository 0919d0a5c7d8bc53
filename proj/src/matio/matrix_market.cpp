#include "precsel/matio/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "precsel/error.hpp"

namespace precsel {
namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

CooEntries parse_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty Matrix Market stream");

    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket" || object.empty() || format.empty() || field.empty() || symmetry.empty())
        throw ParseError("malformed Matrix Market banner: '" + line + "'");
    object = lower(object);
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (object != "matrix") throw ParseError("unsupported Matrix Market object '" + object + "'");
    if (format != "coordinate") throw UnsupportedFormat("unsupported Matrix Market format '" + format + "'");
    if (field != "real" && field != "double")
        throw UnsupportedFormat("unsupported Matrix Market field qualifier '" + field + "'");

    CooEntries coo;
    if (symmetry == "general") {
        coo.symmetry = Symmetry::general;
    } else if (symmetry == "symmetric") {
        coo.symmetry = Symmetry::symmetric;
    } else {
        throw UnsupportedFormat("unsupported Matrix Market symmetry qualifier '" + symmetry + "'");
    }

    long long rows = -1, cols = -1, count = -1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%' || blank(line)) continue;
        std::istringstream size(line);
        if (!(size >> rows >> cols >> count) || rows <= 0 || cols <= 0 || count < 0)
            throw ParseError("malformed size line: '" + line + "'");
        break;
    }
    if (rows < 0) throw ParseError("missing size line");
    coo.n_rows = static_cast<index_t>(rows);
    coo.n_cols = static_cast<index_t>(cols);
    coo.entries.reserve(static_cast<std::size_t>(count));

    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%' || blank(line)) continue;
        if (static_cast<long long>(coo.entries.size()) == count)
            throw ParseError("entry count mismatch: more than the declared " + std::to_string(count) + " entries");
        const char* p = line.data();
        const char* end = p + line.size();
        auto skip = [&] {
            while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
        };
        long long i = 0, j = 0;
        double v = 0.0;
        skip();
        auto r1 = std::from_chars(p, end, i);
        p = r1.ptr;
        skip();
        auto r2 = std::from_chars(p, end, j);
        p = r2.ptr;
        skip();
        auto r3 = std::from_chars(p, end, v);
        if (r1.ec != std::errc{} || r2.ec != std::errc{} || r3.ec != std::errc{})
            throw ParseError("malformed entry line: '" + line + "'");
        if (i < 1 || i > rows || j < 1 || j > cols)
            throw ParseError("entry index out of declared bounds: '" + line + "'");
        coo.entries.push_back({static_cast<index_t>(i - 1), static_cast<index_t>(j - 1), v});
    }
    if (static_cast<long long>(coo.entries.size()) != count)
        throw ParseError("entry count mismatch: declared " + std::to_string(count) + ", found " +
                         std::to_string(coo.entries.size()));
    return coo;
}

CooEntries read_matrix_market(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_matrix_market(in);
}

SparseMatrix load_matrix(const std::filesystem::path& path) { return assemble_csr(read_matrix_market(path)); }

void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.n() << ' ' << a.n() << ' ' << a.nnz() << '\n';
    char buf[64];
    for (index_t i = 0; i < a.n(); ++i) {
        auto cols = a.row_cols(i);
        auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            auto res = std::to_chars(buf, buf + sizeof buf, vals[k]);
            out << i + 1 << ' ' << cols[k] + 1 << ' ' << std::string_view(buf, res.ptr - buf) << '\n';
        }
    }
}

void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    write_matrix_market(a, out);
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace precsel
