#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "multires/errors.hpp"

namespace multires {

// 8-bit image held as separate planes: 1 plane (gray) or 3 planes (RGB),
// each row-major with height*width entries. Pixel values live in [0, 255]
// by construction of the element type.
struct PlanarImage {
  int width = 0;
  int height = 0;
  std::vector<std::vector<std::uint8_t>> planes;

  int channels() const { return static_cast<int>(planes.size()); }

  std::uint8_t& at(int plane, int row, int col) {
    return planes[static_cast<std::size_t>(plane)]
                 [static_cast<std::size_t>(row) * width + col];
  }
  std::uint8_t at(int plane, int row, int col) const {
    return planes[static_cast<std::size_t>(plane)]
                 [static_cast<std::size_t>(row) * width + col];
  }

  bool operator==(const PlanarImage&) const = default;
};

// Zero-filled image; channels must be 1 or 3.
inline PlanarImage make_planar_image(int width, int height, int channels) {
  if (width < 1 || height < 1)
    throw InvalidInputError("image dimensions must be >= 1");
  if (channels != 1 && channels != 3)
    throw InvalidInputError("image must have 1 or 3 channels");
  PlanarImage img;
  img.width = width;
  img.height = height;
  img.planes.assign(static_cast<std::size_t>(channels),
                    std::vector<std::uint8_t>(
                        static_cast<std::size_t>(width) * height, 0));
  return img;
}

inline void validate(const PlanarImage& img) {
  if (img.width < 1 || img.height < 1)
    throw InvalidInputError("image dimensions must be >= 1");
  if (img.channels() != 1 && img.channels() != 3)
    throw InvalidInputError("image must have 1 or 3 channels");
  const std::size_t expected =
      static_cast<std::size_t>(img.width) * img.height;
  for (const auto& plane : img.planes)
    if (plane.size() != expected)
      throw InvalidInputError("image plane size does not match dimensions");
}

inline double mean_pixel_value(const PlanarImage& img) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& plane : img.planes) {
    for (std::uint8_t v : plane) sum += v;
    count += plane.size();
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace multires
