#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dctf/colorspace.hpp"

namespace dctf {

// PNG (any bit depth / colour type libpng can expand to 8-bit RGB) or binary
// PPM (P6, maxval 255), chosen by file signature.
RgbImage read_image(const std::filesystem::path& path);

// Format chosen by extension: ".ppm" writes P6, anything else PNG.
void write_image(const std::filesystem::path& path, const RgbImage& img);
void write_ppm(const std::filesystem::path& path, const RgbImage& img);
void write_png(const std::filesystem::path& path, const RgbImage& img);
void write_png_gray16(const std::filesystem::path& path, int height, int width,
                      std::span<const std::uint16_t> samples);

RgbImage decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const RgbImage& img);

// Largest centred square.
RgbImage center_crop_square(const RgbImage& img);
// Area-weighted resampling.
RgbImage resize_area(const RgbImage& img, int height, int width);

}  // namespace dctf
