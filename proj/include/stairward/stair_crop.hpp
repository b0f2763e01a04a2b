#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "stairward/core.hpp"

namespace stairward {

/// Box lengths L1..LK as fractions of the image side.
struct StairSpec {
  std::vector<double> lengths;
};

/// L_k = 1/2 + (k-1) / (2(K-1)). A single morpheme gets the full image.
inline StairSpec stair_lengths(long long morpheme_count) {
  if (morpheme_count <= 0) {
    data_error("invalid morpheme count " + std::to_string(morpheme_count));
  }
  StairSpec spec;
  if (morpheme_count == 1) {
    spec.lengths = {1.0};
    return spec;
  }
  const auto denom = 2.0 * static_cast<double>(morpheme_count - 1);
  spec.lengths.reserve(static_cast<std::size_t>(morpheme_count));
  for (long long k = 1; k <= morpheme_count; ++k) {
    spec.lengths.push_back(0.5 + static_cast<double>(k - 1) / denom);
  }
  return spec;
}

struct CropBox {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t width = 0;
  std::size_t height = 0;
};

// side = round(L * dim) clamped to [1, dim]; offset = floor((dim - side) / 2).
inline CropBox center_box(std::size_t width, std::size_t height, double length) {
  if (!(length > 0.0) || length > 1.0) {
    data_error("box length out of range: " + format_double(length));
  }
  auto side = [length](std::size_t dim) {
    const auto s = static_cast<std::size_t>(std::llround(length * static_cast<double>(dim)));
    return std::clamp<std::size_t>(s, 1, dim);
  };
  CropBox box;
  box.width = side(width);
  box.height = side(height);
  box.x = (width - box.width) / 2;
  box.y = (height - box.height) / 2;
  return box;
}

inline Raster crop_center_box(const Raster& image, double length) {
  const auto box = center_box(image.width(), image.height(), length);
  if (box.width == image.width() && box.height == image.height()) return image;

  const auto src = image.pixels();
  std::vector<std::uint8_t> out;
  out.reserve(box.width * box.height * 3);
  for (std::size_t row = 0; row < box.height; ++row) {
    const auto begin = ((box.y + row) * image.width() + box.x) * 3;
    out.insert(out.end(), src.begin() + static_cast<std::ptrdiff_t>(begin),
               src.begin() + static_cast<std::ptrdiff_t>(begin + box.width * 3));
  }
  return Raster(box.width, box.height, std::move(out));
}

/// One centered crop per morpheme, smallest first; the last is the full image.
inline std::vector<Raster> stairs_for(const Raster& image, const PromptDecomposition& decomposition) {
  const auto spec = stair_lengths(static_cast<long long>(decomposition.count()));
  std::vector<Raster> stairs;
  stairs.reserve(spec.lengths.size());
  for (double length : spec.lengths) stairs.push_back(crop_center_box(image, length));
  return stairs;
}

}  // namespace stairward
