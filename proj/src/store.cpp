#include "dctf/store.hpp"

#include <fstream>
#include <iterator>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "dctf/error.hpp"
#include "dctf/image_io.hpp"
#include "dctf/parallel.hpp"
#include "dctf/varint.hpp"

namespace dctf {
namespace {

constexpr char kMagic[4] = {'D', 'C', 'T', 'S'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kFlagChroma = 1;
constexpr std::uint8_t kFlagResidual = 2;
// Smallest possible element: three one-byte varints.
constexpr std::size_t kMinElementBytes = 3;

}  // namespace

std::vector<std::uint8_t> encode_sequence(const SparseSequence& seq) {
  validate_sequence(seq);
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(kVersion);
  varint::put_u16le(out, static_cast<std::uint16_t>(seq.height));
  varint::put_u16le(out, static_cast<std::uint16_t>(seq.width));
  out.push_back(static_cast<std::uint8_t>(seq.config.block_size));
  out.push_back(static_cast<std::uint8_t>(seq.config.quality));
  out.push_back(static_cast<std::uint8_t>((seq.config.chroma_downsampled ? kFlagChroma : 0) |
                                          (seq.residual ? kFlagResidual : 0)));
  out.push_back(0);
  varint::put_u32le(out, static_cast<std::uint32_t>(seq.elements.size()));
  for (const SparseElement& e : seq.elements) {
    varint::put_u64(out, e.channel);
    varint::put_u64(out, e.position);
    varint::put_u64(out, varint::zigzag_encode(e.value));
  }
  return out;
}

SparseSequence decode_sequence(std::span<const std::uint8_t> bytes) {
  varint::Reader in(bytes);
  const auto magic = in.take(4);
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) throw FormatError("bad magic: not a sequence file");
  const std::uint8_t version = in.u8();
  if (version != kVersion) throw FormatError("unsupported sequence file version " + std::to_string(version));

  SparseSequence seq;
  seq.height = in.u16le();
  seq.width = in.u16le();
  seq.config.block_size = in.u8();
  seq.config.quality = in.u8();
  const std::uint8_t flags = in.u8();
  if (flags & ~(kFlagChroma | kFlagResidual)) throw FormatError("unknown flag bits in sequence header");
  seq.config.chroma_downsampled = flags & kFlagChroma;
  seq.residual = flags & kFlagResidual;
  if (in.u8() != 0) throw FormatError("reserved header byte must be zero");
  const std::uint32_t count = in.u32le();
  Geometry g;
  try {
    g = seq.geometry();
  } catch (const Error& e) {
    throw FormatError(std::string("invalid sequence header: ") + e.what());
  }
  if (count == 0) throw FormatError("element count is zero; a sequence ends with EOS");
  if (count > in.remaining() / kMinElementBytes) {
    throw FormatError("truncated input: header declares " + std::to_string(count) + " elements");
  }
  seq.elements.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    SparseElement e;
    e.channel = static_cast<std::uint32_t>(in.uvarint(g.eos_channel()));
    e.position = static_cast<std::uint32_t>(in.uvarint(UINT32_MAX));
    e.value = static_cast<std::int32_t>(varint::zigzag_decode(in.uvarint(2 * kMaxCoefficient)));
    seq.elements.push_back(e);
  }
  if (in.remaining() != 0) throw FormatError("trailing bytes after the last element");
  try {
    validate_sequence(seq);
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("non-canonical sequence: ") + e.what());
  }
  return seq;
}

void write_sequence(const std::filesystem::path& path, const SparseSequence& seq) {
  write_file_atomic(path, encode_sequence(seq));
}

SparseSequence read_sequence(const std::filesystem::path& path) { return decode_sequence(read_file(path)); }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error("error reading " + path.string());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("error writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot rename into " + path.string());
  }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<ClipRecord> parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  std::vector<ClipRecord> out;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "manifest line " + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(where + e.what());
    }
    if (!j.is_object() || !j.contains("clip_id") || !j["clip_id"].is_string() || !j.contains("frames") ||
        !j["frames"].is_array()) {
      throw FormatError(where + "expected an object with string clip_id and array frames");
    }
    ClipRecord rec;
    rec.clip_id = j["clip_id"].get<std::string>();
    for (const auto& f : j["frames"]) {
      if (!f.is_string()) throw FormatError(where + "frame paths must be strings");
      std::filesystem::path p = f.get<std::string>();
      rec.frames.push_back(p.is_absolute() ? p : base_dir / p);
    }
    if (j.contains("annotations")) rec.annotation_json = j["annotations"].dump();
    if (j.contains("config")) {
      if (!j["config"].is_string()) throw FormatError(where + "config must be a string");
      rec.config_id = j["config"].get<std::string>();
    }
    for (const auto& prev : out) {
      if (prev.clip_id == rec.clip_id) throw FormatError(where + "duplicate clip_id " + rec.clip_id);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<ClipRecord> read_manifest(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_manifest(std::string(bytes.begin(), bytes.end()), path.parent_path());
}

std::vector<std::size_t> strided_indices(std::size_t n, int stride) {
  if (stride < 1) throw Error("stride must be at least 1");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; i += static_cast<std::size_t>(stride)) out.push_back(i);
  return out;
}

std::vector<ClipSequences> ingest(std::span<const ClipRecord> clips, const IngestOptions& options) {
  check_geometry(options.config, options.resolution, options.resolution);
  std::vector<ClipSequences> out(clips.size());
  parallel_for(clips.size(), [&](std::size_t ci) {
    const ClipRecord& clip = clips[ci];
    ClipSequences& result = out[ci];
    result.clip_id = clip.clip_id;
    result.frame_indices = strided_indices(clip.frames.size(), options.stride);
    QuantizedPlanes previous;
    for (std::size_t n = 0; n < result.frame_indices.size(); ++n) {
      const auto& path = clip.frames[result.frame_indices[n]];
      RgbImage img;
      try {
        img = read_image(path);
      } catch (const Error& e) {
        throw Error("clip " + clip.clip_id + ": unreadable frame " + path.string() + ": " + e.what());
      }
      img = resize_area(center_crop_square(img), options.resolution, options.resolution);
      QuantizedPlanes q = encode_image(img, options.config);
      if (options.absolute) result.absolute.push_back(to_sparse(q));
      if (options.residual) result.residual.push_back(n == 0 ? to_sparse(q) : residual_encode(q, previous));
      previous = std::move(q);
    }
  });
  return out;
}

}  // namespace dctf
