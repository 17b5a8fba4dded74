#include "dctf/colorspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dctf/error.hpp"

namespace dctf {
namespace {

std::uint8_t to_u8(double x) {
  return static_cast<std::uint8_t>(std::clamp(std::round(x), 0.0, 255.0));
}

void check_dims(int height, int width, const char* what) {
  if (height <= 0 || width <= 0) {
    throw Error(std::string(what) + ": image dimensions must be positive");
  }
}

}  // namespace

Plane downsample_2x(const Plane& plane) {
  Plane out((plane.height + 1) / 2, (plane.width + 1) / 2);
  for (int r = 0; r < out.height; ++r) {
    for (int c = 0; c < out.width; ++c) {
      int sum = 0;
      int n = 0;
      for (int dr = 0; dr < 2; ++dr) {
        for (int dc = 0; dc < 2; ++dc) {
          const int rr = 2 * r + dr;
          const int cc = 2 * c + dc;
          if (rr < plane.height && cc < plane.width) {
            sum += plane.at(rr, cc);
            ++n;
          }
        }
      }
      out.at(r, c) = static_cast<std::uint8_t>((sum + n / 2) / n);
    }
  }
  return out;
}

Plane upsample_2x(const Plane& plane, int height, int width) {
  if (plane.height != (height + 1) / 2 || plane.width != (width + 1) / 2) {
    throw Error("upsample_2x: chroma plane does not match half the luma size");
  }
  Plane out(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) out.at(r, c) = plane.at(r / 2, c / 2);
  }
  return out;
}

YuvPlanes rgb_to_yuv(const RgbImage& img, bool downsample) {
  check_dims(img.height, img.width, "rgb_to_yuv");
  if (img.data.size() != static_cast<std::size_t>(img.height) * img.width * 3) {
    throw Error("rgb_to_yuv: data length does not match dimensions");
  }
  YuvPlanes out;
  out.y = Plane(img.height, img.width);
  Plane cb(img.height, img.width);
  Plane cr(img.height, img.width);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const std::uint8_t* px = img.pixel(r, c);
      const double R = px[0], G = px[1], B = px[2];
      out.y.at(r, c) = to_u8(0.299 * R + 0.587 * G + 0.114 * B);
      cb.at(r, c) = to_u8(-0.168736 * R - 0.331264 * G + 0.5 * B + 128.0);
      cr.at(r, c) = to_u8(0.5 * R - 0.418688 * G - 0.081312 * B + 128.0);
    }
  }
  out.chroma_downsampled = downsample;
  if (downsample) {
    out.u = downsample_2x(cb);
    out.v = downsample_2x(cr);
  } else {
    out.u = std::move(cb);
    out.v = std::move(cr);
  }
  return out;
}

RgbImage yuv_to_rgb(const YuvPlanes& planes) {
  const int h = planes.y.height;
  const int w = planes.y.width;
  check_dims(h, w, "yuv_to_rgb");
  Plane cb_full;
  Plane cr_full;
  const Plane* cb = &planes.u;
  const Plane* cr = &planes.v;
  if (planes.chroma_downsampled) {
    cb_full = upsample_2x(planes.u, h, w);
    cr_full = upsample_2x(planes.v, h, w);
    cb = &cb_full;
    cr = &cr_full;
  } else if (planes.u.height != h || planes.u.width != w || planes.v.height != h || planes.v.width != w) {
    throw Error("yuv_to_rgb: chroma planes do not match luma dimensions");
  }
  RgbImage out(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double Y = planes.y.at(r, c);
      const double U = cb->at(r, c) - 128.0;
      const double V = cr->at(r, c) - 128.0;
      std::uint8_t* px = out.pixel(r, c);
      px[0] = to_u8(Y + 1.402 * V);
      px[1] = to_u8(Y - 0.344136 * U - 0.714136 * V);
      px[2] = to_u8(Y + 1.772 * U);
    }
  }
  return out;
}

}  // namespace dctf
