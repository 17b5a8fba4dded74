#include "dctf/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include "dctf/error.hpp"
#include "dctf/store.hpp"

namespace dctf {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

RgbImage read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw FormatError("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out(static_cast<int>(image.height), static_cast<int>(image.width));
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return out;
}

// Raw libpng writer; used for the 16-bit grayscale path the simplified API
// cannot produce.
void write_png_rows(const std::filesystem::path& path, int height, int width, int bit_depth, int color_type,
                    std::span<const std::uint8_t> packed, std::size_t row_bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp.png";
  {
    FilePtr fp(std::fopen(tmp.c_str(), "wb"));
    if (!fp) throw Error("cannot write " + tmp.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
      png_destroy_write_struct(&png, &info);
      throw Error("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw Error("libpng failed writing " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < height; ++r) {
      png_write_row(png, const_cast<png_bytep>(packed.data() + static_cast<std::size_t>(r) * row_bytes));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename into " + path.string());
}

std::size_t skip_ppm_space(std::span<const std::uint8_t> b, std::size_t i) {
  while (i < b.size()) {
    if (b[i] == '#') {
      while (i < b.size() && b[i] != '\n') ++i;
    } else if (std::isspace(b[i])) {
      ++i;
    } else {
      break;
    }
  }
  return i;
}

int read_ppm_int(std::span<const std::uint8_t> b, std::size_t& i) {
  i = skip_ppm_space(b, i);
  if (i >= b.size() || !std::isdigit(b[i])) throw FormatError("PPM: expected a number in the header");
  long v = 0;
  while (i < b.size() && std::isdigit(b[i])) {
    v = v * 10 + (b[i] - '0');
    if (v > 1 << 20) throw FormatError("PPM: header value too large");
    ++i;
  }
  return static_cast<int>(v);
}

}  // namespace

RgbImage decode_ppm(std::span<const std::uint8_t> b) {
  if (b.size() < 2 || b[0] != 'P' || b[1] != '6') throw FormatError("PPM: not a binary P6 file");
  std::size_t i = 2;
  const int w = read_ppm_int(b, i);
  const int h = read_ppm_int(b, i);
  const int maxval = read_ppm_int(b, i);
  if (w <= 0 || h <= 0) throw FormatError("PPM: zero dimension");
  if (maxval != 255) throw FormatError("PPM: only maxval 255 is supported");
  if (i >= b.size() || !std::isspace(b[i])) throw FormatError("PPM: missing whitespace after header");
  ++i;
  const std::size_t need = static_cast<std::size_t>(w) * h * 3;
  if (b.size() - i < need) throw FormatError("PPM: truncated pixel data");
  RgbImage img(h, w);
  std::copy_n(b.begin() + static_cast<std::ptrdiff_t>(i), need, img.data.begin());
  return img;
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
  const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

RgbImage read_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) return read_png(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes);
  throw FormatError(path.string() + ": not a PNG or binary PPM image");
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) { write_file_atomic(path, encode_ppm(img)); }

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  write_png_rows(path, img.height, img.width, 8, PNG_COLOR_TYPE_RGB, img.data, static_cast<std::size_t>(img.width) * 3);
}

void write_png_gray16(const std::filesystem::path& path, int height, int width,
                      std::span<const std::uint16_t> samples) {
  if (samples.size() != static_cast<std::size_t>(height) * width) throw Error("write_png_gray16: size mismatch");
  std::vector<std::uint8_t> packed(samples.size() * 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    packed[2 * i] = static_cast<std::uint8_t>(samples[i] >> 8);  // PNG is big-endian
    packed[2 * i + 1] = static_cast<std::uint8_t>(samples[i]);
  }
  write_png_rows(path, height, width, 16, PNG_COLOR_TYPE_GRAY, packed, static_cast<std::size_t>(width) * 2);
}

void write_image(const std::filesystem::path& path, const RgbImage& img) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".ppm") {
    write_ppm(path, img);
  } else {
    write_png(path, img);
  }
}

RgbImage center_crop_square(const RgbImage& img) {
  const int side = std::min(img.height, img.width);
  const int top = (img.height - side) / 2;
  const int left = (img.width - side) / 2;
  RgbImage out(side, side);
  for (int r = 0; r < side; ++r) {
    std::copy_n(img.pixel(top + r, left), static_cast<std::size_t>(side) * 3, out.pixel(r, 0));
  }
  return out;
}

RgbImage resize_area(const RgbImage& img, int height, int width) {
  if (height <= 0 || width <= 0) throw Error("resize_area: target dimensions must be positive");
  if (img.height == height && img.width == width) return img;
  const double sy = static_cast<double>(img.height) / height;
  const double sx = static_cast<double>(img.width) / width;
  RgbImage out(height, width);
  for (int r = 0; r < height; ++r) {
    const double y0 = r * sy, y1 = (r + 1) * sy;
    for (int c = 0; c < width; ++c) {
      const double x0 = c * sx, x1 = (c + 1) * sx;
      double acc[3] = {0, 0, 0};
      double weight = 0.0;
      for (int yy = static_cast<int>(y0); yy < std::min<int>(img.height, static_cast<int>(std::ceil(y1))); ++yy) {
        const double wy = std::min<double>(yy + 1, y1) - std::max<double>(yy, y0);
        if (wy <= 0) continue;
        for (int xx = static_cast<int>(x0); xx < std::min<int>(img.width, static_cast<int>(std::ceil(x1))); ++xx) {
          const double wx = std::min<double>(xx + 1, x1) - std::max<double>(xx, x0);
          if (wx <= 0) continue;
          const std::uint8_t* px = img.pixel(yy, xx);
          for (int ch = 0; ch < 3; ++ch) acc[ch] += wy * wx * px[ch];
          weight += wy * wx;
        }
      }
      std::uint8_t* dst = out.pixel(r, c);
      for (int ch = 0; ch < 3; ++ch) {
        dst[ch] = static_cast<std::uint8_t>(std::clamp(std::round(acc[ch] / weight), 0.0, 255.0));
      }
    }
  }
  return out;
}

}  // namespace dctf
