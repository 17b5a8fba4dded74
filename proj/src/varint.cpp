#include "dctf/varint.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "dctf/error.hpp"

namespace dctf::varint {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64le(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::size_t encoded_size(std::uint64_t v) {
  std::size_t n = 1;
  while (v >= 0x80) {
    v >>= 7;
    ++n;
  }
  return n;
}

std::span<const std::uint8_t> Reader::take(std::size_t n) {
  if (remaining() < n) {
    throw FormatError("truncated input: need " + std::to_string(n) + " bytes at offset " +
                      std::to_string(pos_) + ", have " + std::to_string(remaining()));
  }
  auto s = bytes_.subspan(pos_, n);
  pos_ += n;
  return s;
}

std::uint8_t Reader::u8() { return take(1)[0]; }

std::uint16_t Reader::u16le() {
  auto s = take(2);
  return static_cast<std::uint16_t>(s[0] | (s[1] << 8));
}

std::uint32_t Reader::u32le() {
  auto s = take(4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | s[i];
  return v;
}

double Reader::f64le() {
  auto s = take(8);
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | s[i];
  return std::bit_cast<double>(bits);
}

std::uint64_t Reader::uvarint(std::uint64_t max) {
  const std::size_t start = pos_;
  std::uint64_t v = 0;
  for (int shift = 0;; shift += 7) {
    if (shift > 63) throw FormatError("varint too long at offset " + std::to_string(start));
    const std::uint8_t byte = u8();
    const std::uint64_t group = byte & 0x7F;
    if (shift == 63 && group > 1) throw FormatError("varint overflows 64 bits at offset " + std::to_string(start));
    v |= group << shift;
    if ((byte & 0x80) == 0) {
      if (byte == 0 && shift > 0) {
        throw FormatError("non-minimal varint at offset " + std::to_string(start));
      }
      break;
    }
  }
  if (v > max) {
    throw FormatError("varint value " + std::to_string(v) + " exceeds " + std::to_string(max) + " at offset " +
                      std::to_string(start));
  }
  return v;
}

}  // namespace dctf::varint
