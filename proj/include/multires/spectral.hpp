#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "multires/errors.hpp"
#include "multires/fft.hpp"
#include "multires/image.hpp"

namespace multires {

inline constexpr int kNumCutoffLevels = 20;

// A band-limit level: R(1)..R(20) or the unfiltered full-spectrum original.
// Ordinals 1..20 map to the cutoff index; the full-spectrum level sits one
// past R(20) at ordinal 21 (R(20) still attenuates the highest frequencies,
// so the two are distinct).
class ResolutionLevel {
 public:
  static constexpr int kFullOrdinal = kNumCutoffLevels + 1;

  static ResolutionLevel full() { return ResolutionLevel(kFullOrdinal); }

  static ResolutionLevel r(int c) {
    if (c < 1 || c > kNumCutoffLevels)
      throw InvalidInputError("resolution level index must be in [1, 20]");
    return ResolutionLevel(c);
  }

  static ResolutionLevel from_ordinal(int ordinal) {
    if (ordinal < 1 || ordinal > kFullOrdinal)
      throw InvalidInputError("resolution ordinal must be in [1, 21]");
    return ResolutionLevel(ordinal);
  }

  // Accepts "full" (any case), "R5"/"r5", or a bare integer "5".
  static std::optional<ResolutionLevel> parse(std::string_view text) {
    if (text.empty()) return std::nullopt;
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == "full") return full();
    std::string_view digits = lower;
    if (digits.front() == 'r') digits.remove_prefix(1);
    if (digits.empty()) return std::nullopt;
    int value = 0;
    for (char ch : digits) {
      if (ch < '0' || ch > '9') return std::nullopt;
      value = value * 10 + (ch - '0');
      if (value > kNumCutoffLevels) return std::nullopt;
    }
    if (value < 1) return std::nullopt;
    return r(value);
  }

  bool is_full() const { return ordinal_ == kFullOrdinal; }

  // Cutoff index c for R(c); only meaningful when !is_full().
  int cutoff_index() const { return ordinal_; }

  int ordinal() const { return ordinal_; }

  std::string name() const {
    return is_full() ? "full" : "R" + std::to_string(ordinal_);
  }

  auto operator<=>(const ResolutionLevel&) const = default;

 private:
  explicit ResolutionLevel(int ordinal) : ordinal_(ordinal) {}
  int ordinal_;
};

// R(1)..R(20) followed by full-spectrum: the 21-member level set.
inline std::vector<ResolutionLevel> all_levels() {
  std::vector<ResolutionLevel> levels;
  levels.reserve(ResolutionLevel::kFullOrdinal);
  for (int c = 1; c <= kNumCutoffLevels; ++c)
    levels.push_back(ResolutionLevel::r(c));
  levels.push_back(ResolutionLevel::full());
  return levels;
}

// Cutoff schedule: f_c = c * S / 20 cycles per image, S the longer side.
// Full-spectrum means no filtering at all, hence no cutoff.
inline std::optional<double> cutoff_for_level(ResolutionLevel level, int width,
                                              int height) {
  if (width < 1 || height < 1)
    throw InvalidInputError("cutoff_for_level: dimensions must be >= 1");
  if (level.is_full()) return std::nullopt;
  const double longer_side = static_cast<double>(std::max(width, height));
  return static_cast<double>(level.cutoff_index()) * longer_side /
         static_cast<double>(kNumCutoffLevels);
}

// Gaussian low-pass gain surface, stored aligned with the unshifted DFT grid:
// gains[(u mod h) * w + (v mod w)] = exp(-(u^2 + v^2) / (2 fc^2)) for centered
// integer frequencies u in [-floor(h/2), ceil(h/2)-1], v likewise over w.
// No shift pass is ever applied; multiplication happens in unshifted layout.
struct SpectralFilter {
  int width = 0;
  int height = 0;
  double cutoff = 0.0;
  std::vector<double> gains;

  double gain_at_centered(int u, int v) const {
    const int r = ((u % height) + height) % height;
    const int c = ((v % width) + width) % width;
    return gains[static_cast<std::size_t>(r) * width + c];
  }
};

inline SpectralFilter build_filter(int width, int height, double cutoff) {
  if (width < 1 || height < 1)
    throw InvalidInputError("build_filter: dimensions must be >= 1");
  if (!(cutoff > 0.0))
    throw InvalidCutoffError("build_filter: cutoff must be > 0");
  SpectralFilter filter;
  filter.width = width;
  filter.height = height;
  filter.cutoff = cutoff;
  filter.gains.resize(static_cast<std::size_t>(width) * height);
  const double denom = 2.0 * cutoff * cutoff;
  for (int r = 0; r < height; ++r) {
    const int u = r <= (height - 1) / 2 ? r : r - height;
    for (int c = 0; c < width; ++c) {
      const int v = c <= (width - 1) / 2 ? c : c - width;
      const double radius_sq = static_cast<double>(u) * u + static_cast<double>(v) * v;
      filter.gains[static_cast<std::size_t>(r) * width + c] =
          std::exp(-radius_sq / denom);
    }
  }
  return filter;
}

namespace spectral_detail {

inline std::uint8_t quantize_pixel(double value) {
  // round half away from zero, then clamp to the 8-bit range
  const double rounded = std::round(value);
  return static_cast<std::uint8_t>(std::clamp(rounded, 0.0, 255.0));
}

}  // namespace spectral_detail

// Band-limit an image at the given level: per channel, forward FFT, multiply
// by the Gaussian gains, inverse FFT, quantize. Full-spectrum returns a copy.
// Dimensions never change; "resolution" here means frequency content only.
inline PlanarImage apply_lowpass(const PlanarImage& img, ResolutionLevel level) {
  validate(img);
  if (level.is_full()) return img;
  const std::optional<double> cutoff =
      cutoff_for_level(level, img.width, img.height);
  const SpectralFilter filter = build_filter(img.width, img.height, *cutoff);
  PlanarImage out = img;
  std::vector<double> buffer(static_cast<std::size_t>(img.width) * img.height);
  for (auto& plane : out.planes) {
    buffer.assign(plane.begin(), plane.end());
    ComplexGrid spectrum = fft2d_forward(buffer, img.width, img.height);
    for (std::size_t i = 0; i < spectrum.values.size(); ++i)
      spectrum.values[i] *= filter.gains[i];
    const std::vector<double> restored = fft2d_inverse(spectrum);
    for (std::size_t i = 0; i < plane.size(); ++i)
      plane[i] = spectral_detail::quantize_pixel(restored[i]);
  }
  return out;
}

// One filtered image per requested level, input order preserved.
inline std::vector<std::pair<ResolutionLevel, PlanarImage>> generate_pyramid(
    const PlanarImage& img, const std::vector<ResolutionLevel>& levels) {
  if (levels.empty())
    throw InvalidInputError("generate_pyramid: level list must be non-empty");
  std::set<int> seen;
  for (const auto& level : levels)
    if (!seen.insert(level.ordinal()).second)
      throw InvalidInputError("generate_pyramid: duplicate level " + level.name());
  std::vector<std::pair<ResolutionLevel, PlanarImage>> pyramid;
  pyramid.reserve(levels.size());
  for (const auto& level : levels)
    pyramid.emplace_back(level, apply_lowpass(img, level));
  return pyramid;
}

}  // namespace multires
