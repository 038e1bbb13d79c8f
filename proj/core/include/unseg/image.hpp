#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace unseg {

inline constexpr std::uint8_t kBackgroundLabel = 0;
inline constexpr std::uint8_t kIgnoreLabel = 255;
inline constexpr int kMaxClasses = 254;

// Per-pixel 8-bit class index. 0 is background, 255 is ignore.
struct LabelMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;

  LabelMask() = default;
  LabelMask(int w, int h, std::uint8_t fill = kBackgroundLabel);

  std::uint8_t at(int x, int y) const { return labels[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return labels[index(x, y)]; }
  std::size_t pixel_count() const { return labels.size(); }

  friend bool operator==(const LabelMask&, const LabelMask&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
};

// Saliency intensity per pixel, 0 least salient to 255 most salient.
struct SaliencyMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  std::uint8_t at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // interleaved RGB
};

struct ImageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

// Single-channel 8-bit PNG (grayscale or palette indices) or binary PGM (P5).
// Multi-channel input raises Errc::channels, any other depth Errc::bit_depth.
LabelMask read_mask(const std::filesystem::path& path);
// Format follows the extension: .png or .pgm.
void write_mask(const LabelMask& mask, const std::filesystem::path& path);

SaliencyMap read_saliency(const std::filesystem::path& path);
void write_saliency(const SaliencyMap& map, const std::filesystem::path& path);

// RGB PNG or binary PPM (P6). Grayscale inputs are expanded to RGB.
RgbImage read_rgb(const std::filesystem::path& path);
void write_rgb_png(const RgbImage& image, const std::filesystem::path& path);

// Reads only the header of a PNG / PGM / PPM.
ImageSize read_image_size(const std::filesystem::path& path);

// Nearest-neighbour resampling; source index = floor((i + 0.5) * src / dst).
LabelMask resize_nearest(const LabelMask& mask, int width, int height);

}  // namespace unseg
