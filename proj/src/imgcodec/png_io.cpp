#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

#include "precsel/error.hpp"
#include "precsel/imgcodec/sparsity_image.hpp"

namespace precsel {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png(const SparsityImage& img, const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open " + path.string() + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed for " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.m()), static_cast<png_uint_32>(img.m()), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const auto& px = img.pixels();
    for (index_t r = 0; r < img.m(); ++r)
        png_write_row(png, const_cast<png_bytep>(px.data() + static_cast<std::size_t>(r) * img.m() * 3));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(fp.get()) != 0) throw IoError("write failed for " + path.string());
}

SparsityImage read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialization failed");
    }
    std::vector<std::uint8_t> pixels;
    png_uint_32 w = 0, h = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("PNG decoding failed for " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    w = png_get_image_width(png, info);
    h = png_get_image_height(png, info);
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);
    if (w != h || color != PNG_COLOR_TYPE_RGB || depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("expected a square 8-bit RGB PNG: " + path.string());
    }
    pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (png_uint_32 r = 0; r < h; ++r) png_read_row(png, pixels.data() + static_cast<std::size_t>(r) * w * 3, nullptr);
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return SparsityImage(static_cast<index_t>(w), 0, std::move(pixels));
}

}  // namespace precsel
