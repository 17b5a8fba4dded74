#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dctf/sparse.hpp"

namespace dctf {

// Sequence file layout (little-endian):
//   "DCTS" | version u8 = 1
//   height u16 | width u16 | block u8 | quality u8 | flags u8 | reserved u8 | count u32
//   count x (channel uvarint, position uvarint, value zigzag varint)
// flags: bit0 chroma downsampled, bit1 residual. The 12 bytes after the
// version are the header proper.
inline constexpr std::size_t kSequencePreambleBytes = 5;
inline constexpr std::size_t kSequenceHeaderBytes = 12;

std::vector<std::uint8_t> encode_sequence(const SparseSequence& seq);
// Validates magic, version, header, canonical element order, the single
// trailing EOS, and that no bytes follow. Throws FormatError.
SparseSequence decode_sequence(std::span<const std::uint8_t> bytes);

void write_sequence(const std::filesystem::path& path, const SparseSequence& seq);
SparseSequence read_sequence(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
// Writes to a sibling temp file and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

// One JSON-lines manifest record per clip.
struct ClipRecord {
  std::string clip_id;
  std::vector<std::filesystem::path> frames;  // resolved against the manifest's directory
  std::string annotation_json = "null";
  std::string config_id;
};

std::vector<ClipRecord> parse_manifest(const std::string& text, const std::filesystem::path& base_dir);
std::vector<ClipRecord> read_manifest(const std::filesystem::path& path);

struct IngestOptions {
  CodecConfig config;
  int resolution = 64;  // square side after central crop + resize
  int stride = 1;
  bool absolute = true;
  bool residual = true;  // first frame of a clip stays absolute
};

struct ClipSequences {
  std::string clip_id;
  std::vector<std::size_t> frame_indices;  // source indices kept by the stride
  std::vector<SparseSequence> absolute;
  std::vector<SparseSequence> residual;  // residual[i] is frame i against frame i-1; residual[0] is absolute
};

// Indices 0, stride, 2*stride, ... below n.
std::vector<std::size_t> strided_indices(std::size_t n, int stride);

std::vector<ClipSequences> ingest(std::span<const ClipRecord> clips, const IngestOptions& options);

}  // namespace dctf
