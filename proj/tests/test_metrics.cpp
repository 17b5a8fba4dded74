#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <unistd.h>

#include "dctf/error.hpp"
#include "dctf/metrics.hpp"
#include "oracles.hpp"

using namespace dctf;
namespace fs = std::filesystem;

namespace {

RgbImage noisy(const RgbImage& img, int amp, std::uint64_t seed) {
  RgbImage out = img;
  std::uint64_t s = seed * 2654435761u + 1;
  for (auto& v : out.data) {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    const int d = static_cast<int>((s >> 33) % (2 * amp + 1)) - amp;
    v = static_cast<std::uint8_t>(std::clamp(int(v) + d, 0, 255));
  }
  return out;
}

}  // namespace

TEST(Psnr, Examples) {
  const auto a = oracle::constant_image(4, 4, 10, 10, 10);
  EXPECT_EQ(psnr(a, a), kPsnrIdentical);
  const auto b = oracle::constant_image(4, 4, 11, 11, 11);
  EXPECT_NEAR(psnr(a, b), 20 * std::log10(255.0), 1e-12);
  EXPECT_THROW(psnr(a, oracle::constant_image(4, 5, 0, 0, 0)), Error);
  EXPECT_EQ(format_db(kPsnrIdentical), "inf");
}

TEST(Metrics, MatchOraclesOnRandomPairs) {
  for (int i = 0; i < 100; ++i) {
    const int h = 11 + i % 13, w = 11 + (i * 7) % 17;
    const auto a = i % 2 ? oracle::random_image(h, w, i) : oracle::structured_image(h, w, i);
    const auto b = noisy(a, 1 + i % 40, i);
    EXPECT_NEAR(psnr(a, b), oracle::psnr(a, b), 1e-6);
    EXPECT_NEAR(ssim(a, b), oracle::ssim(a, b), 1e-6);
  }
}

TEST(Ssim, Properties) {
  const auto a = oracle::structured_image(32, 32, 2);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  EXPECT_LT(ssim(a, noisy(a, 30, 1)), ssim(a, noisy(a, 5, 1)));
  EXPECT_THROW(ssim(oracle::constant_image(10, 20, 0, 0, 0), oracle::constant_image(10, 20, 0, 0, 0)), Error);
}

TEST(BestOfN, PicksMaximumLowestIndexOnTies) {
  const auto truth = oracle::structured_image(24, 24, 1);
  const std::vector<RgbImage> cands = {noisy(truth, 20, 1), noisy(truth, 3, 2), noisy(truth, 3, 2), noisy(truth, 9, 3)};
  const auto best = best_of_n(truth, cands);
  EXPECT_EQ(best.index, 1u);
  EXPECT_DOUBLE_EQ(best.psnr, psnr(truth, cands[1]));
  EXPECT_DOUBLE_EQ(best.ssim, ssim(truth, cands[1]));
  EXPECT_EQ(best_of_n(truth, cands, Metric::Ssim).index, 1u);
  const std::vector<RgbImage> with_exact = {cands[0], truth, truth};
  EXPECT_EQ(best_of_n(truth, with_exact).index, 1u);
  EXPECT_THROW(best_of_n(truth, std::span<const RgbImage>{}), Error);
}

TEST(FiniteMeanTest, SkipsInfinities) {
  const std::vector<double> v = {10, kPsnrIdentical, 20};
  const auto m = mean_skipping_infinite(v);
  EXPECT_DOUBLE_EQ(m.mean, 15);
  EXPECT_EQ(m.count, 2u);
  EXPECT_EQ(m.skipped, 1u);
}

TEST(Sparsity, StaticClipHasTinyResiduals) {
  std::vector<RgbImage> still(5, oracle::structured_image(32, 32, 4));
  const auto r = sparsity_report(still, {8, 75, false});
  EXPECT_EQ(r.mean_resid_length, 1.0);
  EXPECT_LT(r.ratio, 0.1);
  ASSERT_EQ(r.rows.size(), 5u);
  EXPECT_EQ(r.rows[0].resid_length, r.rows[0].abs_length);
}

TEST(Sparsity, PanningClipGainsLittle) {
  const auto r = sparsity_report(oracle::pan_clip(6, 64), {8, 75, false});
  EXPECT_GT(r.ratio, 0.8);
}

TEST(Sparsity, MovingSquareBetweenExtremes) {
  const auto r = sparsity_report(oracle::moving_square_clip(6, 64), {8, 75, false});
  EXPECT_LT(r.ratio, 0.5);
  EXPECT_GT(r.ratio, 0.0);
}

TEST(Sparsity, CsvAndHeatmaps) {
  const auto r = sparsity_report(oracle::moving_square_clip(4, 32), {4, 75, true});
  const auto csv = sparsity_csv(r);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "frame_index,psnr_db,ssim,L_abs,L_resid,ratio");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(r.abs_heatmap.size(), 64u);
  ASSERT_EQ(r.abs_channel_fraction.size(), 48u);
  for (double f : r.abs_channel_fraction) {
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
  const fs::path dir = fs::temp_directory_path() / ("dctf_metrics_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  write_sparsity_outputs(r, dir);
  EXPECT_TRUE(fs::exists(dir / "sparsity.csv"));
  EXPECT_TRUE(fs::exists(dir / "heatmap_abs.png"));
  EXPECT_TRUE(fs::exists(dir / "heatmap_resid.png"));
  fs::remove_all(dir);
}
