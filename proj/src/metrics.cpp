#include "dctf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dctf/error.hpp"
#include "dctf/image_io.hpp"
#include "dctf/parallel.hpp"
#include "dctf/store.hpp"

namespace dctf {
namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

void check_same_size(const RgbImage& a, const RgbImage& b, const char* what) {
  if (a.height != b.height || a.width != b.width || a.data.size() != b.data.size()) {
    throw Error(std::string(what) + ": images differ in size");
  }
}

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> taps{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    taps[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable "valid" filter: output is (h - 10) x (w - 10).
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w) {
  static const auto taps = gaussian_taps();
  const int oh = h - kWindow + 1;
  const int ow = w - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * src[static_cast<std::size_t>(r) * w + c + k];
      rows[static_cast<std::size_t>(r) * ow + c] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * rows[static_cast<std::size_t>(r + k) * ow + c];
      out[static_cast<std::size_t>(r) * ow + c] = acc;
    }
  }
  return out;
}

void accumulate_heatmap(const QuantizedPlanes& q, const Geometry& g, std::vector<std::uint64_t>& heat,
                        std::vector<double>& channel_counts) {
  const int bb = g.block_size() * g.block_size();
  const int gw = g.grid_w(PlaneId::Y);
  for (int pi = 0; pi < 3; ++pi) {
    const PlaneId id = static_cast<PlaneId>(pi);
    const CoeffPlane& plane = q.plane(id);
    const int pw = g.grid_w(id);
    const int scale = g.grid_w(PlaneId::Y) / pw;
    for (int p = 0; p < plane.block_count(); ++p) {
      int nonzero = 0;
      for (int k = 0; k < bb; ++k) {
        if (plane.at(p, k) != 0) {
          ++nonzero;
          channel_counts[channel_of(id, k)] += 1.0;
        }
      }
      if (nonzero == 0) continue;
      const int y = p / pw, x = p % pw;
      for (int dy = 0; dy < scale; ++dy) {
        for (int dx = 0; dx < scale; ++dx) heat[static_cast<std::size_t>(y * scale + dy) * gw + x * scale + dx] += nonzero;
      }
    }
  }
}

QuantizedPlanes difference(const QuantizedPlanes& cur, const QuantizedPlanes& prev) {
  QuantizedPlanes d = cur;
  for (int pi = 0; pi < 3; ++pi) {
    for (std::size_t i = 0; i < d.planes[pi].coeffs.size(); ++i) d.planes[pi].coeffs[i] -= prev.planes[pi].coeffs[i];
  }
  return d;
}

std::vector<std::uint16_t> scale_heatmap(const std::vector<std::uint64_t>& heat) {
  const std::uint64_t peak = heat.empty() ? 0 : *std::max_element(heat.begin(), heat.end());
  std::vector<std::uint16_t> out(heat.size(), 0);
  if (peak == 0) return out;
  for (std::size_t i = 0; i < heat.size(); ++i) {
    out[i] = static_cast<std::uint16_t>(std::llround(65535.0 * static_cast<double>(heat[i]) / static_cast<double>(peak)));
  }
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

double psnr(const RgbImage& a, const RgbImage& b) {
  check_same_size(a, b, "psnr");
  if (a.data.empty()) throw Error("psnr: empty images");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    sse += d * d;
  }
  if (sse == 0.0) return kPsnrIdentical;
  const double mse = sse / static_cast<double>(a.data.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

std::vector<double> luma_of(const RgbImage& img) {
  std::vector<double> y(static_cast<std::size_t>(img.height) * img.width);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::uint8_t* px = &img.data[3 * i];
    y[i] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
  }
  return y;
}

double ssim(const RgbImage& a, const RgbImage& b) {
  check_same_size(a, b, "ssim");
  if (a.height < kWindow || a.width < kWindow) throw Error("ssim: images must be at least 11x11");
  const int h = a.height, w = a.width;
  const auto x = luma_of(a);
  const auto y = luma_of(b);
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter_valid(x, h, w);
  const auto my = filter_valid(y, h, w);
  const auto sxx = filter_valid(xx, h, w);
  const auto syy = filter_valid(yy, h, w);
  const auto sxy = filter_valid(xy, h, w);
  constexpr double c1 = (0.01 * 255) * (0.01 * 255);
  constexpr double c2 = (0.03 * 255) * (0.03 * 255);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    total += ((2 * mx[i] * my[i] + c1) * (2 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

BestOfN best_of_n(const RgbImage& truth, std::span<const RgbImage> candidates, Metric select_by) {
  if (candidates.empty()) throw Error("best_of_n: no candidates");
  std::vector<double> score(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t i) {
    score[i] = select_by == Metric::Psnr ? psnr(truth, candidates[i]) : ssim(truth, candidates[i]);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < score.size(); ++i) {
    if (score[i] > score[best]) best = i;
  }
  BestOfN out;
  out.index = best;
  out.psnr = select_by == Metric::Psnr ? score[best] : psnr(truth, candidates[best]);
  const bool ssim_ok = truth.height >= kWindow && truth.width >= kWindow;
  out.ssim = select_by == Metric::Ssim ? score[best]
                                       : (ssim_ok ? ssim(truth, candidates[best]) : std::nan(""));
  return out;
}

FiniteMean mean_skipping_infinite(std::span<const double> values) {
  FiniteMean m;
  double sum = 0.0;
  for (double v : values) {
    if (std::isinf(v)) {
      ++m.skipped;
      continue;
    }
    sum += v;
    ++m.count;
  }
  m.mean = m.count ? sum / static_cast<double>(m.count) : std::nan("");
  return m;
}

SparsityReport sparsity_report(std::span<const QuantizedPlanes> frames) {
  if (frames.size() < 2) throw Error("sparsity_report: need at least two frames for residual statistics");
  SparsityReport rep;
  rep.geometry = Geometry(frames[0].config, frames[0].height, frames[0].width);
  const Geometry& g = rep.geometry;
  const std::size_t cells = static_cast<std::size_t>(g.grid_h(PlaneId::Y)) * g.grid_w(PlaneId::Y);
  rep.abs_heatmap.assign(cells, 0);
  rep.resid_heatmap.assign(cells, 0);
  std::vector<double> abs_counts(static_cast<std::size_t>(g.channels()), 0.0);
  std::vector<double> resid_counts(abs_counts.size(), 0.0);

  double abs_sum = 0.0, resid_sum = 0.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!(Geometry(frames[i].config, frames[i].height, frames[i].width) == g)) {
      throw Error("sparsity_report: frames have different geometries");
    }
    FrameRow row;
    row.frame_index = i;
    row.abs_length = to_sparse(frames[i]).length();
    row.resid_length = i == 0 ? row.abs_length : residual_encode(frames[i], frames[i - 1]).length();
    row.ratio = static_cast<double>(row.resid_length) / static_cast<double>(row.abs_length);
    if (i > 0) {
      abs_sum += static_cast<double>(row.abs_length);
      resid_sum += static_cast<double>(row.resid_length);
      accumulate_heatmap(frames[i], g, rep.abs_heatmap, abs_counts);
      accumulate_heatmap(difference(frames[i], frames[i - 1]), g, rep.resid_heatmap, resid_counts);
    }
    rep.rows.push_back(row);
  }
  const double n = static_cast<double>(frames.size() - 1);
  rep.mean_abs_length = abs_sum / n;
  rep.mean_resid_length = resid_sum / n;
  rep.ratio = rep.mean_resid_length / rep.mean_abs_length;
  rep.abs_channel_fraction.resize(abs_counts.size());
  rep.resid_channel_fraction.resize(abs_counts.size());
  for (std::size_t c = 0; c < abs_counts.size(); ++c) {
    const double slots = n * g.grid_size(static_cast<std::uint32_t>(c));
    rep.abs_channel_fraction[c] = abs_counts[c] / slots;
    rep.resid_channel_fraction[c] = resid_counts[c] / slots;
  }
  return rep;
}

SparsityReport sparsity_report(std::span<const RgbImage> frames, const CodecConfig& config) {
  std::vector<QuantizedPlanes> coded(frames.size());
  parallel_for(frames.size(), [&](std::size_t i) { coded[i] = encode_image(frames[i], config); });
  SparsityReport rep = sparsity_report(coded);
  parallel_for(frames.size(), [&](std::size_t i) {
    const RgbImage rec = decode_image(coded[i]);
    rep.rows[i].psnr_db = psnr(frames[i], rec);
    if (rec.height >= kWindow && rec.width >= kWindow) rep.rows[i].ssim = ssim(frames[i], rec);
  });
  return rep;
}

std::string format_db(double psnr_db) {
  if (std::isinf(psnr_db)) return "inf";
  return format_number(psnr_db);
}

std::string sparsity_csv(const SparsityReport& report) {
  std::string out = "frame_index,psnr_db,ssim,L_abs,L_resid,ratio\n";
  for (const FrameRow& r : report.rows) {
    out += std::to_string(r.frame_index) + "," + format_db(r.psnr_db) + "," + format_number(r.ssim) + "," +
           std::to_string(r.abs_length) + "," + std::to_string(r.resid_length) + "," + format_number(r.ratio) + "\n";
  }
  return out;
}

void write_sparsity_outputs(const SparsityReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_atomic(dir / "sparsity.csv", sparsity_csv(report));
  const int gh = report.geometry.grid_h(PlaneId::Y);
  const int gw = report.geometry.grid_w(PlaneId::Y);
  write_png_gray16(dir / "heatmap_abs.png", gh, gw, scale_heatmap(report.abs_heatmap));
  write_png_gray16(dir / "heatmap_resid.png", gh, gw, scale_heatmap(report.resid_heatmap));
}

}  // namespace dctf
