#include "aesop/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <png.h>

#include <fmt/format.h>

#include "aesop/errors.hpp"

namespace aesop {

namespace {

// png_image must be released on every exit path.
struct PngImage {
  png_image image{};
  PngImage() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

}  // namespace

ImageTensor read_png(const std::filesystem::path& path) {
  PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
    throw IoError(fmt::format("cannot read PNG {}: {}", path.string(), png.image.message));
  }
  png.image.format = PNG_FORMAT_RGB;
  const int w = static_cast<int>(png.image.width);
  const int h = static_cast<int>(png.image.height);
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, buf.data(), 0, nullptr)) {
    throw IoError(fmt::format("cannot decode PNG {}: {}", path.string(), png.image.message));
  }
  Tensor t({3, h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        t.at(c, y, x) = buf[(static_cast<std::size_t>(y) * w + x) * 3 + c] / 255.0;
      }
  return ImageTensor(std::move(t), ColorSpace::kRGB);
}

std::vector<std::uint8_t> to_bytes8(const ImageTensor& img) {
  if (img.batched()) throw DimensionError("to_bytes8 expects an unbatched image");
  const int c = img.channels(), h = img.height(), w = img.width();
  std::vector<std::uint8_t> out(static_cast<std::size_t>(c) * h * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) {
        const double v = std::round(std::clamp(img.at(ch, y, x), 0.0, 1.0) * 255.0);
        out[(static_cast<std::size_t>(y) * w + x) * c + ch] = static_cast<std::uint8_t>(v);
      }
  return out;
}

void write_png(const std::filesystem::path& path, const ImageTensor& img) {
  const auto bytes = to_bytes8(img);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  PngImage png;
  png.image.width = static_cast<png_uint_32>(img.width());
  png.image.height = static_cast<png_uint_32>(img.height());
  png.image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png.image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw IoError(fmt::format("cannot write PNG {}: {}", path.string(), png.image.message));
  }
}

bool is_image_file(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext == ".png";
}

}  // namespace aesop
