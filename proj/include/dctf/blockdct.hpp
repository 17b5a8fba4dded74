#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dctf/colorspace.hpp"

namespace dctf {

// Largest quantized coefficient magnitude the token vocabulary can carry.
inline constexpr int kMaxCoefficient = 1023;

enum class PlaneKind { Luma, Chroma };

// Plane index doubles as the interleave offset inside a frequency band.
enum class PlaneId : int { Y = 0, U = 1, V = 2 };

inline PlaneKind kind_of(PlaneId p) { return p == PlaneId::Y ? PlaneKind::Luma : PlaneKind::Chroma; }

struct CodecConfig {
  int block_size = 8;
  int quality = 75;
  bool chroma_downsampled = false;

  // Throws on B outside {4, 8} or quality outside 1..100.
  void validate() const;
  int coeffs_per_block() const { return block_size * block_size; }

  bool operator==(const CodecConfig&) const = default;
};

// Rejects frames the codec cannot tile exactly: both sides must be positive
// multiples of B (2B with chroma downsampling) and fit in 16 bits.
void check_geometry(const CodecConfig& config, int height, int width);

// B x B quantizer step sizes in natural (row-major) order.
struct QuantMatrix {
  int block_size = 0;
  std::vector<int> steps;

  int at(int row, int col) const { return steps[static_cast<std::size_t>(row) * block_size + col]; }
  bool operator==(const QuantMatrix&) const = default;
};

// JPEG Annex K base tables, natural order.
extern const std::array<int, 64> kAnnexKLuma;
extern const std::array<int, 64> kAnnexKChroma;

QuantMatrix quant_matrix_for(int quality, int block_size, PlaneKind kind);

// Orthonormal 2-D DCT-II of a square block of raw samples; the -128 level
// shift is applied inside. Both directions are row-major B*B.
std::vector<double> dct2_forward(std::span<const double> block, int block_size);
std::vector<double> dct2_inverse(std::span<const double> coeffs, int block_size);

// Round half away from zero.
std::vector<int> quantize(std::span<const double> coeffs, const QuantMatrix& qm);
std::vector<double> dequantize(std::span<const int> qblock, const QuantMatrix& qm);

// JPEG zigzag walk; k = 0 is DC.
int zigzag_index(int row, int col, int block_size);
std::pair<int, int> zigzag_position(int k, int block_size);

// One plane of quantized blocks. Blocks are raster ordered and each block
// stores its B*B coefficients in zigzag order, so coeffs[block * B*B + k].
struct CoeffPlane {
  int blocks_h = 0;
  int blocks_w = 0;
  int block_size = 0;
  std::vector<std::int32_t> coeffs;

  CoeffPlane() = default;
  CoeffPlane(int bh, int bw, int b)
      : blocks_h(bh), blocks_w(bw), block_size(b),
        coeffs(static_cast<std::size_t>(bh) * bw * b * b, 0) {}

  int block_count() const { return blocks_h * blocks_w; }
  std::int32_t& at(int block, int k) {
    return coeffs[static_cast<std::size_t>(block) * block_size * block_size + k];
  }
  std::int32_t at(int block, int k) const {
    return coeffs[static_cast<std::size_t>(block) * block_size * block_size + k];
  }

  bool operator==(const CoeffPlane&) const = default;
};

struct QuantizedPlanes {
  CodecConfig config;
  int height = 0;  // luma pixels
  int width = 0;
  std::array<CoeffPlane, 3> planes;
  // Coefficients clipped to +-kMaxCoefficient while encoding. Not part of
  // equality; it describes how the planes were produced, not what they hold.
  std::size_t saturated = 0;

  const CoeffPlane& plane(PlaneId p) const { return planes[static_cast<int>(p)]; }
  CoeffPlane& plane(PlaneId p) { return planes[static_cast<int>(p)]; }

  bool operator==(const QuantizedPlanes& o) const {
    return config == o.config && height == o.height && width == o.width && planes == o.planes;
  }
};

// All-zero planes (the code of a constant mid-gray frame).
QuantizedPlanes zero_planes(const CodecConfig& config, int height, int width);

QuantizedPlanes encode_planes(const YuvPlanes& planes, const CodecConfig& config);
YuvPlanes decode_planes(const QuantizedPlanes& qp);

// Convenience wrappers over colorspace + encode/decode.
QuantizedPlanes encode_image(const RgbImage& img, const CodecConfig& config);
RgbImage decode_image(const QuantizedPlanes& qp);

}  // namespace dctf
