#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dctf/blockdct.hpp"

namespace dctf {

struct SparseElement {
  std::uint32_t channel = 0;
  std::uint32_t position = 0;
  std::int32_t value = 0;

  bool operator==(const SparseElement&) const = default;
};

// Ordering key of the token stream: channel first, then raster position.
inline bool key_less(const SparseElement& a, const SparseElement& b) {
  return a.channel != b.channel ? a.channel < b.channel : a.position < b.position;
}

// Frame size plus codec config; answers every "how big is channel c" question.
class Geometry {
 public:
  Geometry() = default;
  Geometry(const CodecConfig& config, int height, int width);

  const CodecConfig& config() const { return config_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int block_size() const { return config_.block_size; }

  // 3B^2 data channels; the EOS symbol is channel number channels().
  int channels() const { return 3 * config_.block_size * config_.block_size; }
  std::uint32_t eos_channel() const { return static_cast<std::uint32_t>(channels()); }
  int channel_vocab() const { return channels() + 1; }

  int grid_h(PlaneId p) const;
  int grid_w(PlaneId p) const;
  // Number of raster positions of the plane carrying channel c (< channels()).
  int grid_size(std::uint32_t channel) const;

  bool operator==(const Geometry&) const = default;

 private:
  CodecConfig config_;
  int height_ = 0;
  int width_ = 0;
};

// c = 3k + plane, so all three planes of one frequency come before the next.
std::uint32_t channel_of(PlaneId plane, int zigzag_k);
PlaneId plane_of_channel(std::uint32_t channel);
int zigzag_of_channel(std::uint32_t channel);

struct SparseSequence {
  CodecConfig config;
  int height = 0;
  int width = 0;
  bool residual = false;
  std::vector<SparseElement> elements;  // ends with exactly one EOS
  // Values clipped to +-kMaxCoefficient while building this sequence.
  std::size_t saturated = 0;

  Geometry geometry() const { return Geometry(config, height, width); }
  std::size_t length() const { return elements.size(); }

  bool operator==(const SparseSequence& o) const {
    return config == o.config && height == o.height && width == o.width && residual == o.residual &&
           elements == o.elements;
  }
};

SparseElement eos_element(const Geometry& g);

// Checks the canonical form: strictly increasing keys, valid channel,
// position and value ranges, nonzero values, exactly one trailing EOS.
void validate_sequence(const SparseSequence& seq);

SparseSequence to_sparse(const QuantizedPlanes& qp);

// Absolute sequences scatter into zero planes. Residual sequences require
// `previous` and add their deltas onto a copy of it.
QuantizedPlanes from_sparse(const SparseSequence& seq, const QuantizedPlanes* previous = nullptr);

SparseSequence residual_encode(const QuantizedPlanes& current, const QuantizedPlanes& previous);
QuantizedPlanes residual_decode(const SparseSequence& seq, const QuantizedPlanes& previous);

// Dense (grid_h x grid_w x 3B^2) view of a possibly partial sequence. Chroma
// channels of a downsampled config occupy the top-left sub-grid.
struct DctImage {
  int grid_h = 0;
  int grid_w = 0;
  int channels = 0;
  std::vector<std::int32_t> values;
  std::vector<std::uint8_t> occupancy;

  DctImage() = default;
  explicit DctImage(const Geometry& g);

  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * grid_w + x) * channels + c;
  }
  std::int32_t value(int y, int x, int c) const { return values[index(y, x, c)]; }
  bool occupied(int y, int x, int c) const { return occupancy[index(y, x, c)] != 0; }

  bool operator==(const DctImage&) const = default;
};

// Writes one element into the dense image. Throws on EOS, out-of-range
// slots, or a slot that is already occupied.
void scatter_element(DctImage& img, const Geometry& g, const SparseElement& e);

DctImage scatter_partial(std::span<const SparseElement> prefix, const Geometry& g);

// Dense image of fully decoded coefficients (every nonzero slot occupied).
DctImage dct_image_of(const QuantizedPlanes& qp);

}  // namespace dctf
