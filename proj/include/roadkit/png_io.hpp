#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "roadkit/imageops.hpp"
#include "roadkit/raster.hpp"

namespace roadkit {

// PNG codecs for the three payload kinds the pipeline persists:
//   images          8-bit RGB
//   binary masks    8-bit grayscale, values {0, 255}
//   confidence maps 16-bit grayscale, value = round(c * 65535)
// Writers use fixed encoder settings so identical pixels give identical bytes.

void write_png_rgb8(const std::filesystem::path& path, const ImageTensor& img);
void write_png_mask(const std::filesystem::path& path, const BinaryMask& mask);
void write_png_confidence(const std::filesystem::path& path, const ConfidenceMap& map);

ImageTensor read_png_rgb8(const std::filesystem::path& path);

/// Reads an 8-bit grayscale PNG; samples >= 128 count as set.
BinaryMask read_png_mask(const std::filesystem::path& path);

/// Reads a 16-bit grayscale PNG as confidences in [0, 1]. An 8-bit
/// grayscale file is accepted and scaled by 255 instead.
ConfidenceMap read_png_confidence(const std::filesystem::path& path);

}  // namespace roadkit
