#include "roadkit/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace roadkit {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f) {
        throw std::runtime_error("cannot open " + path.string() +
                                 (mode[0] == 'w' ? " for writing" : " for reading"));
    }
    return f;
}

[[noreturn]] void on_png_error(png_structp png, png_const_charp msg) {
    (void)png;
    throw std::runtime_error(std::string("libpng: ") + (msg ? msg : "error"));
}

void on_png_warning(png_structp, png_const_charp) {}

bool host_is_little_endian() {
    const std::uint16_t probe = 1;
    return *reinterpret_cast<const std::uint8_t*>(&probe) == 1;
}

void write_gray_or_rgb(const std::filesystem::path& path, int width, int height,
                       int bit_depth, int color_type, const png_bytep* rows) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              on_png_error, on_png_warning);
    if (!png) throw std::runtime_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    try {
        png_init_io(png, f.get());
        // fixed settings: bytes depend only on the pixels
        png_set_compression_level(png, 1);
        png_set_filter(png, 0, PNG_FILTER_NONE);
        png_set_IHDR(png, info, width, height, bit_depth, color_type,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        if (bit_depth == 16 && host_is_little_endian()) png_set_swap(png);
        for (int y = 0; y < height; ++y) {
            png_write_row(png, rows[y]);
        }
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
}

struct Decoded {
    int width = 0;
    int height = 0;
    int channels = 0;   // 1 or 3
    int bit_depth = 0;  // 8 or 16
    std::vector<std::uint8_t> bytes;  // host-endian for 16-bit
};

Decoded read_any(const std::filesystem::path& path) {
    FilePtr f = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             on_png_error, on_png_warning);
    if (!png) throw std::runtime_error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    Decoded out;
    try {
        png_init_io(png, f.get());
        png_read_info(png, info);

        const int color_type = png_get_color_type(png, info);
        int bit_depth = png_get_bit_depth(png, info);
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
        if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        if (bit_depth == 16 && host_is_little_endian()) png_set_swap(png);
        png_read_update_info(png, info);

        out.width = static_cast<int>(png_get_image_width(png, info));
        out.height = static_cast<int>(png_get_image_height(png, info));
        out.bit_depth = png_get_bit_depth(png, info);
        out.channels = png_get_channels(png, info);
        const std::size_t row_bytes = png_get_rowbytes(png, info);
        out.bytes.resize(row_bytes * out.height);
        std::vector<png_bytep> rows(out.height);
        for (int y = 0; y < out.height; ++y) {
            rows[y] = out.bytes.data() + row_bytes * y;
        }
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("failed to decode " + path.string());
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

}  // namespace

void write_png_rgb8(const std::filesystem::path& path, const ImageTensor& img) {
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y) {
        rows[y] = const_cast<png_bytep>(img.data.data() + static_cast<std::size_t>(y) * img.width * 3);
    }
    write_gray_or_rgb(path, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, rows.data());
}

void write_png_mask(const std::filesystem::path& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> bytes(mask.values.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        bytes[i] = mask.values[i] ? 255 : 0;
    }
    std::vector<png_bytep> rows(mask.height);
    for (int y = 0; y < mask.height; ++y) {
        rows[y] = bytes.data() + static_cast<std::size_t>(y) * mask.width;
    }
    write_gray_or_rgb(path, mask.width, mask.height, 8, PNG_COLOR_TYPE_GRAY, rows.data());
}

void write_png_confidence(const std::filesystem::path& path, const ConfidenceMap& map) {
    std::vector<std::uint16_t> samples(map.values.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double v = std::min(1.0, std::max(0.0, static_cast<double>(map.values[i])));
        samples[i] = static_cast<std::uint16_t>(std::lround(v * 65535.0));
    }
    std::vector<png_bytep> rows(map.height);
    for (int y = 0; y < map.height; ++y) {
        rows[y] = reinterpret_cast<png_bytep>(samples.data() + static_cast<std::size_t>(y) * map.width);
    }
    write_gray_or_rgb(path, map.width, map.height, 16, PNG_COLOR_TYPE_GRAY, rows.data());
}

ImageTensor read_png_rgb8(const std::filesystem::path& path) {
    Decoded d = read_any(path);
    if (d.channels != 3 || d.bit_depth != 8) {
        throw std::runtime_error(path.string() + ": expected 8-bit RGB PNG");
    }
    ImageTensor img(d.width, d.height);
    img.data = std::move(d.bytes);
    return img;
}

BinaryMask read_png_mask(const std::filesystem::path& path) {
    Decoded d = read_any(path);
    if (d.channels != 1 || d.bit_depth != 8) {
        throw std::runtime_error(path.string() + ": expected 8-bit grayscale mask PNG");
    }
    BinaryMask mask(d.width, d.height);
    for (std::size_t i = 0; i < mask.values.size(); ++i) {
        mask.values[i] = d.bytes[i] >= 128 ? 1 : 0;
    }
    return mask;
}

ConfidenceMap read_png_confidence(const std::filesystem::path& path) {
    Decoded d = read_any(path);
    if (d.channels != 1) {
        throw std::runtime_error(path.string() + ": expected grayscale confidence PNG");
    }
    ConfidenceMap map(d.width, d.height);
    if (d.bit_depth == 16) {
        const auto* samples = reinterpret_cast<const std::uint16_t*>(d.bytes.data());
        for (std::size_t i = 0; i < map.values.size(); ++i) {
            map.values[i] = static_cast<float>(samples[i] / 65535.0);
        }
    } else if (d.bit_depth == 8) {
        for (std::size_t i = 0; i < map.values.size(); ++i) {
            map.values[i] = static_cast<float>(d.bytes[i] / 255.0);
        }
    } else {
        throw std::runtime_error(path.string() + ": unsupported bit depth");
    }
    return map;
}

}  // namespace roadkit
