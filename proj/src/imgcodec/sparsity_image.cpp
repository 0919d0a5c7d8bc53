#include "precsel/imgcodec/sparsity_image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "precsel/error.hpp"

namespace precsel {
namespace {

std::uint8_t to_byte(double v) {
    const double f = std::floor(v);
    if (!(f > 0.0)) return 0;
    return static_cast<std::uint8_t>(std::min(f, 255.0));
}

}  // namespace

std::vector<Interval> block_partition(index_t n, index_t m) {
    if (n < 1 || m < 1) throw ContractError("block_partition requires n >= 1 and m >= 1");
    const index_t b = (n + m - 1) / m;
    std::vector<Interval> out(m);
    for (index_t k = 0; k < m; ++k) {
        const long long lo = std::min<long long>(static_cast<long long>(k) * b, n);
        const long long hi = std::min<long long>(static_cast<long long>(k + 1) * b, n);
        out[k] = {static_cast<index_t>(lo), static_cast<index_t>(hi)};
    }
    return out;
}

SparsityImage::SparsityImage(index_t m, index_t block_order)
    : m_(m), block_order_(block_order), pixels_(static_cast<std::size_t>(m) * m * 3, 0) {}

SparsityImage::SparsityImage(index_t m, index_t block_order, std::vector<std::uint8_t> pixels)
    : m_(m), block_order_(block_order), pixels_(std::move(pixels)) {
    if (pixels_.size() != static_cast<std::size_t>(m) * m * 3) throw ShapeError("pixel buffer must hold 3*m*m bytes");
}

SparsityImage encode_image(const SparseMatrix& a, index_t m, const EncodingContext& ctx) {
    const index_t n = a.n();
    if (ctx.n_min > ctx.n_max || n < ctx.n_min || n > ctx.n_max)
        throw ContractError("matrix order outside the encoding context range");
    const auto parts = block_partition(n, m);
    const index_t b = parts.front().length();
    SparsityImage img(m, b);

    const std::uint8_t blue =
        ctx.n_max == ctx.n_min
            ? 0
            : static_cast<std::uint8_t>(std::min<long long>(
                  255, static_cast<long long>(n - ctx.n_min) * 255 / (ctx.n_max - ctx.n_min)));

    const auto vals = a.values();
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    for (double v : vals) {
        amin = std::min(amin, v);
        amax = std::max(amax, v);
    }
    const bool use_log = vals.size() > 0 && amax - amin > 255.0;

    const std::size_t cells = static_cast<std::size_t>(m) * m;
    std::vector<long long> count(cells, 0);
    auto cell_of = [&](index_t i, index_t j) {
        return static_cast<std::size_t>(i / b) * m + static_cast<std::size_t>(j / b);
    };
    for (index_t i = 0; i < n; ++i)
        for (index_t j : a.row_cols(i)) ++count[cell_of(i, j)];

    // Bucket the biased values per block and sum each bucket in ascending
    // order, so the mean depends only on the block's multiset of values.
    // Mirrored blocks of a symmetric matrix then get bit-identical means.
    std::vector<std::size_t> start(cells + 1, 0);
    for (std::size_t c = 0; c < cells; ++c) start[c + 1] = start[c] + static_cast<std::size_t>(count[c]);
    std::vector<double> bucket(start.back());
    {
        std::vector<std::size_t> fill(start.begin(), start.end() - 1);
        for (index_t i = 0; i < n; ++i) {
            auto cols = a.row_cols(i);
            auto rv = a.row_values(i);
            for (std::size_t k = 0; k < cols.size(); ++k) {
                const double biased = rv[k] - amin + 1.0;
                bucket[fill[cell_of(i, cols[k])]++] = use_log ? std::log2(biased) : biased;
            }
        }
    }
    std::vector<double> sum(cells, 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
        std::sort(bucket.begin() + start[c], bucket.begin() + start[c + 1]);
        for (std::size_t k = start[c]; k < start[c + 1]; ++k) sum[c] += bucket[k];
    }

    std::vector<double> gamma(cells, 0.0);
    double gmin = std::numeric_limits<double>::infinity(), gmax = -gmin;
    for (std::size_t c = 0; c < cells; ++c) {
        if (count[c] == 0) continue;
        gamma[c] = sum[c] / static_cast<double>(count[c]);
        gmin = std::min(gmin, gamma[c]);
        gmax = std::max(gmax, gamma[c]);
    }

    for (index_t r = 0; r < m; ++r) {
        for (index_t c = 0; c < m; ++c) {
            const std::size_t cell = static_cast<std::size_t>(r) * m + c;
            const long long area = static_cast<long long>(parts[r].length()) * parts[c].length();
            std::uint8_t red = 0, green = 0;
            if (count[cell] > 0 && area > 0) {
                green = static_cast<std::uint8_t>(std::min<long long>(255, count[cell] * 255 / area));
                if (gmax > gmin) red = to_byte((gamma[cell] - gmin) / (gmax - gmin) * 255.0);
            }
            img.at(r, c, 0) = red;
            img.at(r, c, 1) = green;
            img.at(r, c, 2) = blue;
        }
    }
    return img;
}

std::vector<double> flatten(const SparsityImage& img) {
    const auto& p = img.pixels();
    return {p.begin(), p.end()};
}

}  // namespace precsel
