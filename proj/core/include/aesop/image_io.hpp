#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "aesop/image.hpp"

namespace aesop {

/// Reads an 8-bit PNG as an RGB image with values k/255. Gray and palette
/// files are expanded to RGB; alpha is composited away by libpng.
ImageTensor read_png(const std::filesystem::path& path);

/// Writes an unbatched image as 8-bit PNG (RGB or gray) after quantize8.
void write_png(const std::filesystem::path& path, const ImageTensor& img);

/// Interleaved 8-bit samples of an unbatched image, as written to PNG.
std::vector<std::uint8_t> to_bytes8(const ImageTensor& img);

bool is_image_file(const std::filesystem::path& path);

}  // namespace aesop
