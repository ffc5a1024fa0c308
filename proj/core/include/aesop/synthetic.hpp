#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "aesop/image.hpp"

namespace aesop {

/// Procedural RGB images standing in for a natural-image folder: a smooth
/// color gradient, antialiased discs and rectangles, and oriented sinusoidal
/// textures with random phase. Deterministic given the seed.
ImageTensor synthetic_image(int height, int width, std::uint64_t seed);

struct SyntheticCorpusOptions {
  int count = 40;
  int height = 96;
  int width = 96;
  std::uint64_t seed = 7;
};

/// Writes img_0000.png ... into `dir` and returns the paths.
std::vector<std::filesystem::path> write_synthetic_corpus(const std::filesystem::path& dir,
                                                          const SyntheticCorpusOptions& options);

/// Gray image with a sharp vertical step from `low` to `high` at the center
/// column; polarity flips in the bottom quarter, adding a horizontal edge.
ImageTensor step_edge_image(int height, int width, double low = 0.2, double high = 0.8);

}  // namespace aesop
