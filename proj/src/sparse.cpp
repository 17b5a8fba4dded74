#include "dctf/sparse.hpp"

#include <algorithm>
#include <string>

#include "dctf/error.hpp"

namespace dctf {
namespace {

std::int32_t clamp_value(std::int64_t v, std::size_t& saturated) {
  if (v > kMaxCoefficient) {
    ++saturated;
    return kMaxCoefficient;
  }
  if (v < -kMaxCoefficient) {
    ++saturated;
    return -kMaxCoefficient;
  }
  return static_cast<std::int32_t>(v);
}

std::string describe(std::size_t index, const SparseElement& e) {
  return "element " + std::to_string(index) + " (c=" + std::to_string(e.channel) +
         ", p=" + std::to_string(e.position) + ", v=" + std::to_string(e.value) + ")";
}

void check_same_layout(const QuantizedPlanes& a, const QuantizedPlanes& b, const char* what) {
  if (!(a.config == b.config) || a.height != b.height || a.width != b.width) {
    throw Error(std::string(what) + ": frames have different codec configs or dimensions");
  }
  for (int pi = 0; pi < 3; ++pi) {
    if (a.planes[pi].coeffs.size() != b.planes[pi].coeffs.size()) {
      throw Error(std::string(what) + ": coefficient grids differ in size");
    }
  }
}

// Emits (channel, raster position, value) for every nonzero entry of
// `value_at`, already in canonical order.
template <typename ValueAt>
void emit_sorted(const Geometry& g, ValueAt value_at, SparseSequence& out) {
  const int bb = g.block_size() * g.block_size();
  for (int k = 0; k < bb; ++k) {
    for (int pi = 0; pi < 3; ++pi) {
      const PlaneId id = static_cast<PlaneId>(pi);
      const std::uint32_t c = channel_of(id, k);
      const int n = g.grid_size(c);
      for (int p = 0; p < n; ++p) {
        const std::int64_t v = value_at(id, p, k);
        if (v == 0) continue;
        out.elements.push_back({c, static_cast<std::uint32_t>(p), clamp_value(v, out.saturated)});
      }
    }
  }
  out.elements.push_back(eos_element(g));
}

}  // namespace

Geometry::Geometry(const CodecConfig& config, int height, int width)
    : config_(config), height_(height), width_(width) {
  check_geometry(config, height, width);
}

int Geometry::grid_h(PlaneId p) const {
  const int div = (p != PlaneId::Y && config_.chroma_downsampled) ? 2 : 1;
  return height_ / div / config_.block_size;
}

int Geometry::grid_w(PlaneId p) const {
  const int div = (p != PlaneId::Y && config_.chroma_downsampled) ? 2 : 1;
  return width_ / div / config_.block_size;
}

int Geometry::grid_size(std::uint32_t channel) const {
  if (channel >= static_cast<std::uint32_t>(channels())) {
    throw Error("grid_size: channel " + std::to_string(channel) + " has no grid");
  }
  const PlaneId p = plane_of_channel(channel);
  return grid_h(p) * grid_w(p);
}

std::uint32_t channel_of(PlaneId plane, int zigzag_k) {
  return static_cast<std::uint32_t>(3 * zigzag_k + static_cast<int>(plane));
}

PlaneId plane_of_channel(std::uint32_t channel) { return static_cast<PlaneId>(channel % 3); }

int zigzag_of_channel(std::uint32_t channel) { return static_cast<int>(channel / 3); }

SparseElement eos_element(const Geometry& g) { return {g.eos_channel(), 0, 0}; }

void validate_sequence(const SparseSequence& seq) {
  const Geometry g = seq.geometry();
  if (seq.elements.empty()) throw Error("sequence is empty; it must end with EOS");
  const std::uint32_t eos = g.eos_channel();
  const std::size_t last = seq.elements.size() - 1;
  for (std::size_t i = 0; i < seq.elements.size(); ++i) {
    const SparseElement& e = seq.elements[i];
    if (e.channel == eos) {
      if (i != last) throw Error("EOS before the end of the sequence at " + describe(i, e));
      if (e.position != 0 || e.value != 0) throw Error("EOS must carry p=0, v=0 at " + describe(i, e));
      continue;
    }
    if (e.channel > eos) throw Error("channel out of range at " + describe(i, e));
    if (i == last) throw Error("sequence does not end with EOS");
    if (e.position >= static_cast<std::uint32_t>(g.grid_size(e.channel))) {
      throw Error("position out of range at " + describe(i, e));
    }
    if (e.value == 0 || e.value > kMaxCoefficient || e.value < -kMaxCoefficient) {
      throw Error("value out of range at " + describe(i, e));
    }
    if (i > 0 && !key_less(seq.elements[i - 1], e)) {
      if (seq.elements[i - 1].channel == e.channel && seq.elements[i - 1].position == e.position) {
        throw Error("duplicate (c,p) at " + describe(i, e));
      }
      throw Error("elements out of order at " + describe(i, e));
    }
  }
}

SparseSequence to_sparse(const QuantizedPlanes& qp) {
  SparseSequence out;
  out.config = qp.config;
  out.height = qp.height;
  out.width = qp.width;
  const Geometry g = out.geometry();
  emit_sorted(g, [&](PlaneId id, int p, int k) -> std::int64_t { return qp.plane(id).at(p, k); }, out);
  return out;
}

QuantizedPlanes from_sparse(const SparseSequence& seq, const QuantizedPlanes* previous) {
  validate_sequence(seq);
  QuantizedPlanes out;
  if (seq.residual) {
    if (previous == nullptr) throw Error("from_sparse: residual sequence needs the previous frame");
    check_same_layout(zero_planes(seq.config, seq.height, seq.width), *previous, "from_sparse");
    out = *previous;
    out.saturated = 0;
  } else {
    out = zero_planes(seq.config, seq.height, seq.width);
  }
  const std::uint32_t eos = seq.geometry().eos_channel();
  for (const SparseElement& e : seq.elements) {
    if (e.channel == eos) break;
    CoeffPlane& plane = out.plane(plane_of_channel(e.channel));
    std::int32_t& slot = plane.at(static_cast<int>(e.position), zigzag_of_channel(e.channel));
    slot = seq.residual ? clamp_value(static_cast<std::int64_t>(slot) + e.value, out.saturated) : e.value;
  }
  return out;
}

SparseSequence residual_encode(const QuantizedPlanes& current, const QuantizedPlanes& previous) {
  check_same_layout(current, previous, "residual_encode");
  SparseSequence out;
  out.config = current.config;
  out.height = current.height;
  out.width = current.width;
  out.residual = true;
  const Geometry g = out.geometry();
  emit_sorted(
      g,
      [&](PlaneId id, int p, int k) -> std::int64_t {
        return static_cast<std::int64_t>(current.plane(id).at(p, k)) - previous.plane(id).at(p, k);
      },
      out);
  return out;
}

QuantizedPlanes residual_decode(const SparseSequence& seq, const QuantizedPlanes& previous) {
  if (!seq.residual) throw Error("residual_decode: sequence is not residual");
  return from_sparse(seq, &previous);
}

DctImage::DctImage(const Geometry& g)
    : grid_h(g.grid_h(PlaneId::Y)),
      grid_w(g.grid_w(PlaneId::Y)),
      channels(g.channels()),
      values(static_cast<std::size_t>(grid_h) * grid_w * channels, 0),
      occupancy(values.size(), 0) {}

void scatter_element(DctImage& img, const Geometry& g, const SparseElement& e) {
  if (e.channel >= g.eos_channel()) throw Error("scatter: EOS or invalid channel inside a prefix");
  const PlaneId plane = plane_of_channel(e.channel);
  const int w = g.grid_w(plane);
  if (e.position >= static_cast<std::uint32_t>(g.grid_size(e.channel))) {
    throw Error("scatter: position " + std::to_string(e.position) + " out of range");
  }
  const std::size_t idx = img.index(static_cast<int>(e.position) / w, static_cast<int>(e.position) % w,
                                    static_cast<int>(e.channel));
  if (img.occupancy[idx]) {
    throw Error("scatter: duplicate slot (c=" + std::to_string(e.channel) +
                ", p=" + std::to_string(e.position) + ")");
  }
  img.values[idx] = e.value;
  img.occupancy[idx] = 1;
}

DctImage scatter_partial(std::span<const SparseElement> prefix, const Geometry& g) {
  DctImage img(g);
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (i > 0 && !key_less(prefix[i - 1], prefix[i])) {
      if (prefix[i - 1].channel == prefix[i].channel && prefix[i - 1].position == prefix[i].position) {
        throw Error("scatter: duplicate slot at " + describe(i, prefix[i]));
      }
      throw Error("scatter: unordered prefix at " + describe(i, prefix[i]));
    }
    scatter_element(img, g, prefix[i]);
  }
  return img;
}

DctImage dct_image_of(const QuantizedPlanes& qp) {
  const Geometry g(qp.config, qp.height, qp.width);
  DctImage img(g);
  const int bb = g.block_size() * g.block_size();
  for (int pi = 0; pi < 3; ++pi) {
    const PlaneId id = static_cast<PlaneId>(pi);
    const CoeffPlane& plane = qp.plane(id);
    const int w = g.grid_w(id);
    for (int p = 0; p < plane.block_count(); ++p) {
      for (int k = 0; k < bb; ++k) {
        const std::int32_t v = plane.at(p, k);
        if (v == 0) continue;
        const std::size_t idx = img.index(p / w, p % w, static_cast<int>(channel_of(id, k)));
        img.values[idx] = v;
        img.occupancy[idx] = 1;
      }
    }
  }
  return img;
}

}  // namespace dctf
