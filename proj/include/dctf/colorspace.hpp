#pragma once

#include <cstdint>
#include <vector>

namespace dctf {

// Interleaved 8-bit RGB, row-major.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, 0) {}

  std::uint8_t* pixel(int row, int col) { return &data[(static_cast<std::size_t>(row) * width + col) * 3]; }
  const std::uint8_t* pixel(int row, int col) const {
    return &data[(static_cast<std::size_t>(row) * width + col) * 3];
  }

  bool operator==(const RgbImage&) const = default;
};

// Single 8-bit channel, row-major.
struct Plane {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  Plane() = default;
  Plane(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  std::uint8_t& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }

  bool operator==(const Plane&) const = default;
};

// Full-range YCbCr. Chroma planes are ceil(luma/2) per axis when downsampled.
struct YuvPlanes {
  Plane y;
  Plane u;
  Plane v;
  bool chroma_downsampled = false;

  bool operator==(const YuvPlanes&) const = default;
};

// Full-range BT.601 (JFIF) forward conversion. Chroma downsampling is a 2x2
// box average over the rounded full-resolution chroma; edge cells average the
// pixels that exist.
YuvPlanes rgb_to_yuv(const RgbImage& img, bool downsample);

// Inverse conversion; downsampled chroma is nearest-neighbour upsampled first.
RgbImage yuv_to_rgb(const YuvPlanes& planes);

Plane downsample_2x(const Plane& plane);
Plane upsample_2x(const Plane& plane, int height, int width);

}  // namespace dctf
