#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "precsel/matio/sparse_matrix.hpp"

namespace precsel {

/// Half-open index interval [begin, end).
struct Interval {
    index_t begin;
    index_t end;
    index_t length() const { return end - begin; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// m contiguous intervals of length b = ceil(n/m) covering [0, n); trailing
/// intervals are shorter or empty when n < m*b.
std::vector<Interval> block_partition(index_t n, index_t m);

/// Order extremes over the whole data set, used by the blue channel.
struct EncodingContext {
    index_t n_min;
    index_t n_max;
};

/// m x m RGB image, row-major pixels, channels interleaved (R, G, B).
class SparsityImage {
public:
    SparsityImage() = default;
    SparsityImage(index_t m, index_t block_order);
    SparsityImage(index_t m, index_t block_order, std::vector<std::uint8_t> pixels);

    index_t m() const { return m_; }
    index_t block_order() const { return block_order_; }

    std::uint8_t& at(index_t row, index_t col, int channel) { return pixels_[(static_cast<std::size_t>(row) * m_ + col) * 3 + channel]; }
    std::uint8_t at(index_t row, index_t col, int channel) const {
        return pixels_[(static_cast<std::size_t>(row) * m_ + col) * 3 + channel];
    }
    std::uint8_t red(index_t r, index_t c) const { return at(r, c, 0); }
    std::uint8_t green(index_t r, index_t c) const { return at(r, c, 1); }
    std::uint8_t blue(index_t r, index_t c) const { return at(r, c, 2); }

    const std::vector<std::uint8_t>& pixels() const { return pixels_; }

    friend bool operator==(const SparsityImage&, const SparsityImage&) = default;

private:
    index_t m_ = 0;
    index_t block_order_ = 0;
    std::vector<std::uint8_t> pixels_;
};

/// Block-wise RGB encoding of a sparse matrix:
///   B = floor((N - N_min) / (N_max - N_min) * 255), constant over the image;
///   G = floor(NNZ_ij / area_ij * 255) with the block's true area;
///   R = block mean of biased values v(a) = a - min(A) + 1 (log2 v(a) when
///       max(A) - min(A) > 255), min-max normalized over nonempty blocks.
/// min(A)/max(A) range over stored values; empty blocks and degenerate
/// ranges map to 0; 256 clamps to 255.
SparsityImage encode_image(const SparseMatrix& a, index_t m, const EncodingContext& ctx);

/// Row-major, (R, G, B) within a pixel, as reals in [0, 255]; length 3 m^2.
std::vector<double> flatten(const SparsityImage& img);

/// 8-bit RGB PNG, no alpha, no interlacing. Throws IoError.
void write_png(const SparsityImage& img, const std::filesystem::path& path);
SparsityImage read_png(const std::filesystem::path& path);

}  // namespace precsel
