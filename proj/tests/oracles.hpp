// Reference implementations written straight from the textbook formulas,
// plus synthetic data. Slow on purpose; nothing here shares code with src/.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "dctf/colorspace.hpp"

namespace oracle {

// Independent copy of ITU T.81 Annex K, tables K.1 and K.2.
inline constexpr int kLuma[64] = {16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
                           14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
                           18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
                           49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};
inline constexpr int kChroma[64] = {17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
                             24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
                             99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
                             99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};


// O(B^4) orthonormal DCT-II of a level-shifted block.
inline std::vector<double> dct2(const std::vector<double>& block, int n) {
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  const double pi = std::numbers::pi;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      const double au = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      const double av = v == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      double s = 0.0;
      for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
          s += (block[x * n + y] - 128.0) * std::cos((2 * x + 1) * u * pi / (2.0 * n)) *
               std::cos((2 * y + 1) * v * pi / (2.0 * n));
        }
      }
      out[u * n + v] = au * av * s;
    }
  }
  return out;
}

// Zigzag by walking anti-diagonals: even diagonals run bottom-left to
// top-right, odd ones top-right to bottom-left.
inline std::vector<std::pair<int, int>> zigzag_walk(int n) {
  std::vector<std::pair<int, int>> order;
  for (int d = 0; d < 2 * n - 1; ++d) {
    std::vector<std::pair<int, int>> diag;
    for (int r = 0; r < n; ++r) {
      const int c = d - r;
      if (c >= 0 && c < n) diag.push_back({r, c});
    }
    if (d % 2 == 0) std::reverse(diag.begin(), diag.end());
    order.insert(order.end(), diag.begin(), diag.end());
  }
  return order;
}

inline double psnr(const dctf::RgbImage& a, const dctf::RgbImage& b) {
  double se = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = double(a.data[i]) - double(b.data[i]);
    se += d * d;
  }
  if (se == 0.0) return INFINITY;
  return 10.0 * std::log10(255.0 * 255.0 / (se / double(a.data.size())));
}

// Window-by-window SSIM with an explicit 11x11 Gaussian.
inline double ssim(const dctf::RgbImage& a, const dctf::RgbImage& b) {
  auto luma = [](const dctf::RgbImage& im, int r, int c) {
    const auto* p = im.pixel(r, c);
    return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  };
  double w[11][11];
  double wsum = 0.0;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      wsum += w[i][j];
    }
  }
  const double c1 = (0.01 * 255) * (0.01 * 255), c2 = (0.03 * 255) * (0.03 * 255);
  double total = 0.0;
  int count = 0;
  for (int r = 0; r + 11 <= a.height; ++r) {
    for (int c = 0; c + 11 <= a.width; ++c) {
      double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
      for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
          const double k = w[i][j] / wsum, x = luma(a, r + i, c + j), y = luma(b, r + i, c + j);
          mx += k * x;
          my += k * y;
          xx += k * x * x;
          yy += k * y * y;
          xy += k * x * y;
        }
      }
      const double vx = xx - mx * mx, vy = yy - my * my, cxy = xy - mx * my;
      total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return total / count;
}

inline dctf::RgbImage random_image(int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  dctf::RgbImage img(h, w);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng() & 0xFF);
  return img;
}

inline dctf::RgbImage constant_image(int h, int w, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  dctf::RgbImage img(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto* p = img.pixel(y, x);
      p[0] = r;
      p[1] = g;
      p[2] = b;
    }
  }
  return img;
}

// Smooth gradients, stripes and a disc: natural-ish content with edges.
inline dctf::RgbImage structured_image(int h, int w, int variant) {
  dctf::RgbImage img(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto* p = img.pixel(y, x);
      const double fx = double(x) / w, fy = double(y) / h;
      const double dx = fx - 0.5, dy = fy - 0.5;
      const bool disc = dx * dx + dy * dy < 0.09;
      const int stripe = ((x + variant * 3) / (2 + variant % 5)) % 2;
      p[0] = static_cast<std::uint8_t>(std::clamp(255 * fx + (disc ? 40 : 0), 0.0, 255.0));
      p[1] = static_cast<std::uint8_t>(std::clamp(255 * fy * (0.5 + 0.1 * (variant % 5)), 0.0, 255.0));
      p[2] = static_cast<std::uint8_t>(stripe ? 200 - variant : 30 + variant);
    }
  }
  return img;
}

// Textured background, with a bright square (8px, smaller on tiny frames)
// moving 2px right per frame.
inline std::vector<dctf::RgbImage> moving_square_clip(int n, int size = 64, std::uint64_t seed = 7) {
  const dctf::RgbImage bg = random_image(size, size, seed);
  std::vector<dctf::RgbImage> out;
  for (int f = 0; f < n; ++f) {
    dctf::RgbImage img = bg;
    const int side = std::min(8, size / 2);
    const int x0 = (4 + 2 * f) % (size - side + 1), y0 = size / 3;
    for (int y = y0; y < y0 + side; ++y) {
      for (int x = x0; x < x0 + side; ++x) {
        auto* p = img.pixel(y, x);
        p[0] = 250;
        p[1] = 240;
        p[2] = 20;
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

// The whole frame slides one pixel per frame over a larger random texture.
inline std::vector<dctf::RgbImage> pan_clip(int n, int size = 64, std::uint64_t seed = 11) {
  const dctf::RgbImage world = random_image(size, size + n, seed);
  std::vector<dctf::RgbImage> out;
  for (int f = 0; f < n; ++f) {
    dctf::RgbImage img(size, size);
    for (int y = 0; y < size; ++y) {
      std::copy_n(world.pixel(y, f), size * 3, img.pixel(y, 0));
    }
    out.push_back(std::move(img));
  }
  return out;
}

}  // namespace oracle
