#include "dctf/blockdct.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dctf/error.hpp"

namespace dctf {

const std::array<int, 64> kAnnexKLuma = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99};

const std::array<int, 64> kAnnexKChroma = {
    17, 18, 24, 47, 99, 99, 99, 99,  //
    18, 21, 26, 66, 99, 99, 99, 99,  //
    24, 26, 56, 99, 99, 99, 99, 99,  //
    47, 66, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99};

namespace {

void check_block(std::size_t n, int block_size, const char* what) {
  if (block_size <= 0 || n != static_cast<std::size_t>(block_size) * block_size) {
    throw Error(std::string(what) + ": expected a " + std::to_string(block_size) + "x" +
                std::to_string(block_size) + " block");
  }
}

// basis[u * B + x] = alpha(u) * cos(pi * (2x + 1) * u / 2B)
std::vector<double> dct_basis(int block_size) {
  const int n = block_size;
  std::vector<double> basis(static_cast<std::size_t>(n) * n);
  for (int u = 0; u < n; ++u) {
    const double alpha = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int x = 0; x < n; ++x) {
      basis[u * n + x] = alpha * std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * n));
    }
  }
  return basis;
}

const std::vector<double>& cached_basis(int block_size) {
  static const std::vector<double> b4 = dct_basis(4);
  static const std::vector<double> b8 = dct_basis(8);
  if (block_size == 4) return b4;
  if (block_size == 8) return b8;
  thread_local std::vector<double> other;
  thread_local int other_size = 0;
  if (other_size != block_size) {
    other = dct_basis(block_size);
    other_size = block_size;
  }
  return other;
}

std::vector<std::pair<int, int>> zigzag_walk(int block_size) {
  std::vector<std::pair<int, int>> order;
  order.reserve(static_cast<std::size_t>(block_size) * block_size);
  for (int s = 0; s <= 2 * (block_size - 1); ++s) {
    const int lo = std::max(0, s - (block_size - 1));
    const int hi = std::min(s, block_size - 1);
    if (s % 2 == 0) {
      for (int r = hi; r >= lo; --r) order.emplace_back(r, s - r);
    } else {
      for (int r = lo; r <= hi; ++r) order.emplace_back(r, s - r);
    }
  }
  return order;
}

const std::vector<std::pair<int, int>>& cached_zigzag(int block_size) {
  static const auto z4 = zigzag_walk(4);
  static const auto z8 = zigzag_walk(8);
  if (block_size == 4) return z4;
  if (block_size == 8) return z8;
  thread_local std::vector<std::pair<int, int>> other;
  thread_local int other_size = 0;
  if (other_size != block_size) {
    other = zigzag_walk(block_size);
    other_size = block_size;
  }
  return other;
}

// out = M * in * M^T (or M^T * in * M when transpose is set), all row-major n x n.
void separable(const std::vector<double>& m, std::span<const double> in, std::span<double> out, int n,
               bool transpose) {
  std::vector<double> tmp(static_cast<std::size_t>(n) * n, 0.0);
  auto coef = [&](int i, int j) { return transpose ? m[j * n + i] : m[i * n + j]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += coef(i, k) * in[k * n + j];
      tmp[i * n + j] = acc;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += tmp[i * n + k] * coef(j, k);
      out[i * n + j] = acc;
    }
  }
}

std::int32_t clamp_coefficient(int q, std::size_t& saturated) {
  if (q > kMaxCoefficient) {
    ++saturated;
    return kMaxCoefficient;
  }
  if (q < -kMaxCoefficient) {
    ++saturated;
    return -kMaxCoefficient;
  }
  return q;
}

std::uint8_t to_u8(double x) { return static_cast<std::uint8_t>(std::clamp(std::round(x), 0.0, 255.0)); }

}  // namespace

void CodecConfig::validate() const {
  if (block_size != 4 && block_size != 8) {
    throw Error("codec: block size must be 4 or 8, got " + std::to_string(block_size));
  }
  if (quality < 1 || quality > 100) {
    throw Error("codec: quality must be in 1..100, got " + std::to_string(quality));
  }
}

void check_geometry(const CodecConfig& config, int height, int width) {
  config.validate();
  const int tile = config.block_size * (config.chroma_downsampled ? 2 : 1);
  if (height <= 0 || width <= 0) throw Error("codec: image dimensions must be positive");
  if (height > 65535 || width > 65535) throw Error("codec: image dimensions must fit in 16 bits");
  if (height % tile != 0 || width % tile != 0) {
    throw Error("codec: " + std::to_string(height) + "x" + std::to_string(width) +
                " is not divisible by " + std::to_string(tile));
  }
}

QuantMatrix quant_matrix_for(int quality, int block_size, PlaneKind kind) {
  if (quality < 1 || quality > 100) {
    throw Error("quant_matrix_for: quality must be in 1..100, got " + std::to_string(quality));
  }
  if (block_size != 4 && block_size != 8) {
    throw Error("quant_matrix_for: block size must be 4 or 8");
  }
  const auto& base = kind == PlaneKind::Luma ? kAnnexKLuma : kAnnexKChroma;
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<int, 64> scaled{};
  for (int i = 0; i < 64; ++i) scaled[i] = std::clamp((base[i] * scale + 50) / 100, 1, 255);

  QuantMatrix qm;
  qm.block_size = block_size;
  qm.steps.resize(static_cast<std::size_t>(block_size) * block_size);
  const int stride = 8 / block_size;
  for (int r = 0; r < block_size; ++r) {
    for (int c = 0; c < block_size; ++c) {
      qm.steps[r * block_size + c] = scaled[(r * stride) * 8 + c * stride];
    }
  }
  return qm;
}

std::vector<double> dct2_forward(std::span<const double> block, int block_size) {
  check_block(block.size(), block_size, "dct2_forward");
  std::vector<double> shifted(block.begin(), block.end());
  for (double& x : shifted) x -= 128.0;
  std::vector<double> out(shifted.size());
  separable(cached_basis(block_size), shifted, out, block_size, false);
  return out;
}

std::vector<double> dct2_inverse(std::span<const double> coeffs, int block_size) {
  check_block(coeffs.size(), block_size, "dct2_inverse");
  std::vector<double> out(coeffs.size());
  separable(cached_basis(block_size), coeffs, out, block_size, true);
  for (double& x : out) x += 128.0;
  return out;
}

std::vector<int> quantize(std::span<const double> coeffs, const QuantMatrix& qm) {
  if (coeffs.size() != qm.steps.size()) throw Error("quantize: block and matrix sizes differ");
  std::vector<int> out(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    out[i] = static_cast<int>(std::round(coeffs[i] / qm.steps[i]));
  }
  return out;
}

std::vector<double> dequantize(std::span<const int> qblock, const QuantMatrix& qm) {
  if (qblock.size() != qm.steps.size()) throw Error("dequantize: block and matrix sizes differ");
  std::vector<double> out(qblock.size());
  for (std::size_t i = 0; i < qblock.size(); ++i) out[i] = static_cast<double>(qblock[i]) * qm.steps[i];
  return out;
}

int zigzag_index(int row, int col, int block_size) {
  if (block_size <= 0 || row < 0 || col < 0 || row >= block_size || col >= block_size) {
    throw Error("zigzag_index: position out of range");
  }
  const auto& order = cached_zigzag(block_size);
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (order[k].first == row && order[k].second == col) return static_cast<int>(k);
  }
  throw Error("zigzag_index: unreachable");
}

std::pair<int, int> zigzag_position(int k, int block_size) {
  if (block_size <= 0 || k < 0 || k >= block_size * block_size) {
    throw Error("zigzag_position: index out of range");
  }
  return cached_zigzag(block_size)[k];
}

QuantizedPlanes zero_planes(const CodecConfig& config, int height, int width) {
  check_geometry(config, height, width);
  const int b = config.block_size;
  const int div = config.chroma_downsampled ? 2 : 1;
  QuantizedPlanes qp;
  qp.config = config;
  qp.height = height;
  qp.width = width;
  qp.plane(PlaneId::Y) = CoeffPlane(height / b, width / b, b);
  qp.plane(PlaneId::U) = CoeffPlane(height / div / b, width / div / b, b);
  qp.plane(PlaneId::V) = CoeffPlane(height / div / b, width / div / b, b);
  return qp;
}

QuantizedPlanes encode_planes(const YuvPlanes& planes, const CodecConfig& config) {
  if (planes.chroma_downsampled != config.chroma_downsampled) {
    throw Error("encode_planes: chroma downsampling of planes and config differ");
  }
  QuantizedPlanes qp = zero_planes(config, planes.y.height, planes.y.width);
  const int b = config.block_size;
  const auto& basis = cached_basis(b);
  const auto& zz = cached_zigzag(b);
  std::vector<double> samples(static_cast<std::size_t>(b) * b);
  std::vector<double> coeffs(samples.size());

  for (int pi = 0; pi < 3; ++pi) {
    const PlaneId id = static_cast<PlaneId>(pi);
    const Plane& src = pi == 0 ? planes.y : (pi == 1 ? planes.u : planes.v);
    CoeffPlane& dst = qp.plane(id);
    if (src.height != dst.blocks_h * b || src.width != dst.blocks_w * b) {
      throw Error("encode_planes: plane dimensions do not match the codec geometry");
    }
    const QuantMatrix qm = quant_matrix_for(config.quality, b, kind_of(id));
    for (int by = 0; by < dst.blocks_h; ++by) {
      for (int bx = 0; bx < dst.blocks_w; ++bx) {
        for (int r = 0; r < b; ++r) {
          for (int c = 0; c < b; ++c) samples[r * b + c] = src.at(by * b + r, bx * b + c) - 128.0;
        }
        separable(basis, samples, coeffs, b, false);
        const int block = by * dst.blocks_w + bx;
        for (int k = 0; k < b * b; ++k) {
          const auto [r, c] = zz[k];
          const int q = static_cast<int>(std::round(coeffs[r * b + c] / qm.at(r, c)));
          dst.at(block, k) = clamp_coefficient(q, qp.saturated);
        }
      }
    }
  }
  return qp;
}

YuvPlanes decode_planes(const QuantizedPlanes& qp) {
  check_geometry(qp.config, qp.height, qp.width);
  const int b = qp.config.block_size;
  const auto& basis = cached_basis(b);
  const auto& zz = cached_zigzag(b);
  std::vector<double> coeffs(static_cast<std::size_t>(b) * b);
  std::vector<double> samples(coeffs.size());

  YuvPlanes out;
  out.chroma_downsampled = qp.config.chroma_downsampled;
  for (int pi = 0; pi < 3; ++pi) {
    const PlaneId id = static_cast<PlaneId>(pi);
    const CoeffPlane& src = qp.plane(id);
    const int expect_div = (pi == 0 || !qp.config.chroma_downsampled) ? 1 : 2;
    if (src.block_size != b || src.blocks_h * b * expect_div != qp.height ||
        src.blocks_w * b * expect_div != qp.width ||
        src.coeffs.size() != static_cast<std::size_t>(src.block_count()) * b * b) {
      throw Error("decode_planes: coefficient grid does not match the codec geometry");
    }
    const QuantMatrix qm = quant_matrix_for(qp.config.quality, b, kind_of(id));
    Plane dst(src.blocks_h * b, src.blocks_w * b);
    for (int by = 0; by < src.blocks_h; ++by) {
      for (int bx = 0; bx < src.blocks_w; ++bx) {
        const int block = by * src.blocks_w + bx;
        for (int k = 0; k < b * b; ++k) {
          const auto [r, c] = zz[k];
          coeffs[r * b + c] = static_cast<double>(src.at(block, k)) * qm.at(r, c);
        }
        separable(basis, coeffs, samples, b, true);
        for (int r = 0; r < b; ++r) {
          for (int c = 0; c < b; ++c) dst.at(by * b + r, bx * b + c) = to_u8(samples[r * b + c] + 128.0);
        }
      }
    }
    (pi == 0 ? out.y : (pi == 1 ? out.u : out.v)) = std::move(dst);
  }
  return out;
}

QuantizedPlanes encode_image(const RgbImage& img, const CodecConfig& config) {
  check_geometry(config, img.height, img.width);
  return encode_planes(rgb_to_yuv(img, config.chroma_downsampled), config);
}

RgbImage decode_image(const QuantizedPlanes& qp) { return yuv_to_rgb(decode_planes(qp)); }

}  // namespace dctf
