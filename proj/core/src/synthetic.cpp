#include "aesop/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "aesop/image_io.hpp"

namespace aesop {

namespace {

constexpr int kSupersample = 4;

struct Shape2d {
  bool disc;
  double cy, cx, ry, rx;
  double color[3];
  double alpha;
};

struct Texture {
  double fy, fx, phase, amplitude;
  double tint[3];
  // Active inside a soft horizontal band.
  double band_center, band_width;
};

bool inside(const Shape2d& s, double y, double x) {
  if (s.disc) {
    const double dy = (y - s.cy) / s.ry;
    const double dx = (x - s.cx) / s.rx;
    return dy * dy + dx * dx <= 1.0;
  }
  return std::abs(y - s.cy) <= s.ry && std::abs(x - s.cx) <= s.rx;
}

}  // namespace

ImageTensor synthetic_image(int height, int width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double corner[4][3];
  for (auto& c : corner)
    for (double& v : c) v = 0.15 + 0.7 * u(rng);

  std::vector<Shape2d> shapes(2 + static_cast<int>(u(rng) * 4));
  for (auto& s : shapes) {
    s.disc = u(rng) < 0.5;
    s.cy = u(rng) * height;
    s.cx = u(rng) * width;
    s.ry = (0.08 + 0.25 * u(rng)) * height;
    s.rx = (0.08 + 0.25 * u(rng)) * width;
    for (double& v : s.color) v = u(rng);
    s.alpha = 0.6 + 0.4 * u(rng);
  }
  std::vector<Texture> textures(1 + static_cast<int>(u(rng) * 3));
  for (auto& t : textures) {
    const double freq = 0.08 + 0.3 * u(rng);  // cycles per pixel
    const double angle = u(rng) * std::numbers::pi;
    t.fy = freq * std::sin(angle);
    t.fx = freq * std::cos(angle);
    t.phase = 2.0 * std::numbers::pi * u(rng);
    t.amplitude = 0.05 + 0.12 * u(rng);
    for (double& v : t.tint) v = 0.5 + 0.5 * u(rng);
    t.band_center = u(rng) * height;
    t.band_width = (0.2 + 0.4 * u(rng)) * height;
  }
  std::normal_distribution<double> grain(0.0, 0.015);

  ImageTensor img = ImageTensor::rgb(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double fy = (y + 0.5) / height;
      const double fx = (x + 0.5) / width;
      double px[3];
      for (int c = 0; c < 3; ++c) {
        px[c] = (1 - fy) * ((1 - fx) * corner[0][c] + fx * corner[1][c]) +
                fy * ((1 - fx) * corner[2][c] + fx * corner[3][c]);
      }
      for (const auto& s : shapes) {
        int hits = 0;
        for (int sy = 0; sy < kSupersample; ++sy)
          for (int sx = 0; sx < kSupersample; ++sx) {
            hits += inside(s, y + (sy + 0.5) / kSupersample, x + (sx + 0.5) / kSupersample);
          }
        const double cover = s.alpha * hits / double(kSupersample * kSupersample);
        for (int c = 0; c < 3; ++c) px[c] = (1 - cover) * px[c] + cover * s.color[c];
      }
      for (const auto& t : textures) {
        const double d = (y - t.band_center) / t.band_width;
        const double weight = std::exp(-d * d);
        const double wave =
            t.amplitude * weight * std::sin(2.0 * std::numbers::pi * (t.fy * y + t.fx * x) + t.phase);
        for (int c = 0; c < 3; ++c) px[c] += wave * t.tint[c];
      }
      const double g = grain(rng);
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = std::clamp(px[c] + g, 0.0, 1.0);
    }
  return img;
}

std::vector<std::filesystem::path> write_synthetic_corpus(const std::filesystem::path& dir,
                                                          const SyntheticCorpusOptions& options) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  for (int i = 0; i < options.count; ++i) {
    const auto path = dir / fmt::format("img_{:04d}.png", i);
    write_png(path, synthetic_image(options.height, options.width, options.seed * 1000003u + i));
    out.push_back(path);
  }
  return out;
}

ImageTensor step_edge_image(int height, int width, double low, double high) {
  ImageTensor img = ImageTensor::rgb(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double v = x < width / 2 ? low : high;
      if (y >= height * 3 / 4) v = x < width / 2 ? high : low;
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = v;
    }
  return img;
}

}  // namespace aesop
