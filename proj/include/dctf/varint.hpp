#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dctf::varint {

// LEB128, least significant group first.
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);

inline std::uint64_t zigzag_encode(std::int64_t v) {
  return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}
inline std::int64_t zigzag_decode(std::uint64_t v) {
  return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
}

void put_u16le(std::vector<std::uint8_t>& out, std::uint16_t v);
void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_f64le(std::vector<std::uint8_t>& out, double v);

std::size_t encoded_size(std::uint64_t v);

// Bounds-checked little-endian reader. Every failure throws FormatError, and
// varints must be minimal so any byte string has at most one meaning.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8();
  std::uint16_t u16le();
  std::uint32_t u32le();
  double f64le();
  std::uint64_t uvarint(std::uint64_t max = UINT64_MAX);
  std::span<const std::uint8_t> take(std::size_t n);

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t offset() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace dctf::varint
