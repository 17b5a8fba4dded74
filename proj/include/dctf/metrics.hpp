#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dctf/blockdct.hpp"
#include "dctf/colorspace.hpp"
#include "dctf/sparse.hpp"

namespace dctf {

// Returned by psnr for identical images.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

// 10 log10(255^2 / MSE) over all three channels.
double psnr(const RgbImage& a, const RgbImage& b);

// Mean SSIM over all valid 11x11 Gaussian (sigma 1.5) windows of the luma
// plane; K1 = 0.01, K2 = 0.03, L = 255. Needs both sides >= 11.
double ssim(const RgbImage& a, const RgbImage& b);

// Unrounded BT.601 luma, row-major.
std::vector<double> luma_of(const RgbImage& img);

enum class Metric { Psnr, Ssim };

struct BestOfN {
  std::size_t index = 0;
  double psnr = 0.0;
  double ssim = 0.0;
};

// Picks the candidate with the highest score under `select_by` (PSNR by
// default); ties go to the lowest index. Reports every metric for it.
BestOfN best_of_n(const RgbImage& truth, std::span<const RgbImage> candidates, Metric select_by = Metric::Psnr);

// Mean over finite entries; infinite PSNRs are skipped and counted.
struct FiniteMean {
  double mean = 0.0;
  std::size_t count = 0;
  std::size_t skipped = 0;
};
FiniteMean mean_skipping_infinite(std::span<const double> values);

struct FrameRow {
  std::size_t frame_index = 0;
  double psnr_db = std::numeric_limits<double>::quiet_NaN();
  double ssim = std::numeric_limits<double>::quiet_NaN();
  std::size_t abs_length = 0;
  std::size_t resid_length = 0;  // frame 0 has no predecessor and is coded absolute
  double ratio = 1.0;
};

// Absolute vs residual sparsity of a clip. Means, ratio, channel fractions
// and heatmaps cover frames 1..n-1, the frames that have a residual.
struct SparsityReport {
  Geometry geometry;
  std::vector<FrameRow> rows;
  double mean_abs_length = 0.0;
  double mean_resid_length = 0.0;
  double ratio = 0.0;  // mean_resid_length / mean_abs_length
  std::vector<double> abs_channel_fraction;    // per channel, in [0, 1]
  std::vector<double> resid_channel_fraction;
  // Nonzero counts per luma block position (grid_h x grid_w); downsampled
  // chroma counts land on the 2x2 luma blocks they cover.
  std::vector<std::uint64_t> abs_heatmap;
  std::vector<std::uint64_t> resid_heatmap;
};

SparsityReport sparsity_report(std::span<const QuantizedPlanes> frames);
// Encodes the frames first and fills per-frame reconstruction PSNR/SSIM.
SparsityReport sparsity_report(std::span<const RgbImage> frames, const CodecConfig& config);

std::string sparsity_csv(const SparsityReport& report);

// Writes sparsity.csv, heatmap_abs.png and heatmap_resid.png (16-bit
// grayscale, scaled so the busiest block is 65535) into `dir`.
void write_sparsity_outputs(const SparsityReport& report, const std::filesystem::path& dir);

std::string format_db(double psnr_db);

}  // namespace dctf
