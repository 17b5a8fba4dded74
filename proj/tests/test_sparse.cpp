#include <gtest/gtest.h>

#include <random>

#include "dctf/error.hpp"
#include "dctf/sparse.hpp"
#include "oracles.hpp"

using namespace dctf;

namespace {

QuantizedPlanes random_planes(const CodecConfig& cfg, int h, int w, std::uint64_t seed, double density = 0.2) {
  QuantizedPlanes q = zero_planes(cfg, h, w);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(density);
  std::uniform_int_distribution<int> val(-kMaxCoefficient, kMaxCoefficient);
  for (auto& p : q.planes)
    for (auto& v : p.coeffs)
      if (keep(rng)) v = val(rng);
  return q;
}

}  // namespace

TEST(Channels, Interleave) {
  EXPECT_EQ(channel_of(PlaneId::Y, 0), 0u);
  EXPECT_EQ(channel_of(PlaneId::V, 0), 2u);
  EXPECT_EQ(channel_of(PlaneId::Y, 1), 3u);
  EXPECT_EQ(channel_of(PlaneId::V, 15), 47u);
  const Geometry g({4, 75, false}, 16, 16);
  EXPECT_EQ(g.eos_channel(), 48u);
  EXPECT_EQ(g.channel_vocab(), 49);
  for (std::uint32_t c = 0; c < 48; ++c) {
    EXPECT_EQ(channel_of(plane_of_channel(c), zigzag_of_channel(c)), c);
  }
}

TEST(ToSparse, ZeroPlanesGiveEos) {
  const auto seq = to_sparse(zero_planes({8, 50, true}, 16, 16));
  ASSERT_EQ(seq.length(), 1u);
  EXPECT_EQ(seq.elements[0], eos_element(seq.geometry()));
  EXPECT_EQ(seq.elements[0].position, 0u);
  EXPECT_EQ(seq.elements[0].value, 0);
}

TEST(ToSparse, ConstantLumaOnlyDc) {
  const auto qp = encode_image(oracle::constant_image(32, 32, 200, 200, 200), {4, 95, false});
  const auto seq = to_sparse(qp);
  ASSERT_EQ(seq.length(), 65u);
  for (std::uint32_t p = 0; p < 64; ++p) {
    EXPECT_EQ(seq.elements[p].channel, 0u);
    EXPECT_EQ(seq.elements[p].position, p);
    EXPECT_EQ(seq.elements[p].value, qp.plane(PlaneId::Y).at(static_cast<int>(p), 0));
  }
}

TEST(ToSparse, OrderedAndLengthCountsNonzeros) {
  for (int t = 0; t < 20; ++t) {
    const CodecConfig cfg{t % 2 ? 4 : 8, 75, t % 3 == 0};
    const auto qp = random_planes(cfg, 32, 48, t);
    const auto seq = to_sparse(qp);
    std::size_t nz = 0;
    for (const auto& p : qp.planes)
      for (auto v : p.coeffs) nz += v != 0;
    EXPECT_EQ(seq.length(), nz + 1);
    for (std::size_t i = 1; i + 1 < seq.elements.size(); ++i) {
      ASSERT_TRUE(key_less(seq.elements[i - 1], seq.elements[i]));
    }
    EXPECT_NO_THROW(validate_sequence(seq));
    EXPECT_EQ(from_sparse(seq), qp);
  }
}

TEST(FromSparse, SingleDcAndEos) {
  const CodecConfig cfg{4, 75, false};
  SparseSequence seq{cfg, 8, 8, false, {{0, 0, 5}}};
  seq.elements.push_back(eos_element(seq.geometry()));
  const auto q = from_sparse(seq);
  EXPECT_EQ(q.plane(PlaneId::Y).at(0, 0), 5);
  std::size_t nz = 0;
  for (const auto& p : q.planes)
    for (auto v : p.coeffs) nz += v != 0;
  EXPECT_EQ(nz, 1u);

  SparseSequence eos{cfg, 8, 8, false, {}};
  eos.elements.push_back(eos_element(eos.geometry()));
  const RgbImage gray = decode_image(from_sparse(eos));
  for (auto v : gray.data) EXPECT_EQ(v, 128);
}

TEST(FromSparse, Errors) {
  const CodecConfig cfg{4, 75, false};
  const Geometry g(cfg, 8, 8);
  SparseSequence dup{cfg, 8, 8, false, {{0, 1, 5}, {0, 1, 6}, eos_element(g)}};
  EXPECT_THROW(from_sparse(dup), Error);
  SparseSequence far{cfg, 8, 8, false, {{0, 4, 5}, eos_element(g)}};
  EXPECT_THROW(from_sparse(far), Error);
  SparseSequence zero{cfg, 8, 8, false, {{0, 1, 0}, eos_element(g)}};
  EXPECT_THROW(from_sparse(zero), Error);
  SparseSequence no_eos{cfg, 8, 8, false, {{0, 1, 3}}};
  EXPECT_THROW(from_sparse(no_eos), Error);
  SparseSequence resid{cfg, 8, 8, true, {eos_element(g)}};
  EXPECT_THROW(from_sparse(resid), Error);
  const auto other = zero_planes({8, 75, false}, 8, 8);
  EXPECT_THROW(from_sparse(resid, &other), Error);
}

TEST(Residual, IdenticalFramesGiveEos) {
  const auto q = encode_image(oracle::structured_image(32, 32, 1), {8, 75, true});
  const auto r = residual_encode(q, q);
  EXPECT_EQ(r.length(), 1u);
  EXPECT_TRUE(r.residual);
  EXPECT_EQ(residual_decode(r, q), q);
}

TEST(Residual, AgainstZeroMatchesAbsolute) {
  const auto q = random_planes({4, 75, false}, 16, 16, 3);
  auto r = residual_encode(q, zero_planes(q.config, 16, 16));
  EXPECT_EQ(r.elements, to_sparse(q).elements);
}

TEST(Residual, RoundTripAndSaturation) {
  for (int t = 0; t < 20; ++t) {
    const CodecConfig cfg{4, 60, t % 2 == 0};
    const auto a = random_planes(cfg, 16, 32, 100 + t, 0.1);
    const auto b = random_planes(cfg, 16, 32, 200 + t, 0.1);
    const auto r = residual_encode(b, a);
    if (r.saturated == 0) {
      EXPECT_EQ(residual_decode(r, a), b);
    } else {
      // Clamped deltas land within range, never wrap.
      const auto back = residual_decode(r, a);
      for (std::size_t p = 0; p < 3; ++p)
        for (auto v : back.planes[p].coeffs) EXPECT_LE(std::abs(v), kMaxCoefficient);
    }
  }
  // Small deltas are exact.
  const CodecConfig cfg{8, 75, false};
  const auto a = encode_image(oracle::structured_image(16, 16, 0), cfg);
  const auto b = encode_image(oracle::structured_image(16, 16, 3), cfg);
  const auto r = residual_encode(b, a);
  EXPECT_EQ(r.saturated, 0u);
  EXPECT_EQ(residual_decode(r, a), b);
  EXPECT_THROW(residual_encode(b, zero_planes({4, 75, false}, 16, 16)), Error);
}

TEST(Residual, StaticBackgroundIsSparser) {
  const auto clip = oracle::moving_square_clip(6);
  const CodecConfig cfg{8, 75, false};
  double abs_len = 0, res_len = 0;
  for (std::size_t i = 1; i < clip.size(); ++i) {
    const auto cur = encode_image(clip[i], cfg), prev = encode_image(clip[i - 1], cfg);
    abs_len += double(to_sparse(cur).length());
    res_len += double(residual_encode(cur, prev).length());
  }
  EXPECT_LT(res_len, abs_len);
}

TEST(Scatter, EmptyAndFull) {
  const CodecConfig cfg{4, 75, true};
  const Geometry g(cfg, 16, 24);
  const DctImage empty = scatter_partial({}, g);
  EXPECT_EQ(empty.grid_h, 4);
  EXPECT_EQ(empty.grid_w, 6);
  EXPECT_EQ(empty.channels, 48);
  for (auto v : empty.values) EXPECT_EQ(v, 0);
  for (auto o : empty.occupancy) EXPECT_EQ(o, 0);

  const auto qp = random_planes(cfg, 16, 24, 9, 0.5);
  const auto seq = to_sparse(qp);
  const DctImage full = scatter_partial(std::span(seq.elements).first(seq.length() - 1), g);
  EXPECT_EQ(full, dct_image_of(qp));
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 6; ++x) {
      for (int c = 0; c < 48; ++c) {
        const PlaneId pl = plane_of_channel(c);
        const int gh = g.grid_h(pl), gw = g.grid_w(pl);
        const bool inside = y < gh && x < gw;
        const int v = inside ? qp.plane(pl).at(y * gw + x, zigzag_of_channel(c)) : 0;
        EXPECT_EQ(full.value(y, x, c), v);
        EXPECT_EQ(full.occupied(y, x, c), v != 0);
        if (!inside) EXPECT_FALSE(full.occupied(y, x, c));
      }
    }
  }
}

TEST(Scatter, IncrementalDiffersInOneSlot) {
  const CodecConfig cfg{4, 75, false};
  const auto seq = to_sparse(random_planes(cfg, 16, 16, 4));
  const Geometry g = seq.geometry();
  for (std::size_t t = 0; t + 1 < seq.length(); t += 7) {
    const auto a = scatter_partial(std::span(seq.elements).first(t), g);
    const auto b = scatter_partial(std::span(seq.elements).first(t + 1), g);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.occupancy.size(); ++i) diff += a.occupancy[i] != b.occupancy[i];
    EXPECT_EQ(diff, 1u);
  }
}

TEST(Scatter, RejectsBadPrefixes) {
  const Geometry g({4, 75, false}, 8, 8);
  const std::vector<SparseElement> unordered = {{3, 0, 1}, {0, 0, 1}};
  EXPECT_THROW(scatter_partial(unordered, g), Error);
  const std::vector<SparseElement> dup = {{0, 1, 1}, {0, 1, 2}};
  EXPECT_THROW(scatter_partial(dup, g), Error);
  const std::vector<SparseElement> eos = {eos_element(g)};
  EXPECT_THROW(scatter_partial(eos, g), Error);
}

TEST(Sparse, QualityRaisesLengthOnCorpus) {
  int violations = 0, total = 0;
  for (int i = 0; i < 40; ++i) {
    const RgbImage img = i % 2 ? oracle::random_image(32, 32, i) : oracle::structured_image(32, 32, i);
    const auto lo = to_sparse(encode_image(img, {8, 50, false})).length();
    const auto hi = to_sparse(encode_image(img, {8, 100, false})).length();
    violations += hi < lo;
    ++total;
  }
  EXPECT_LT(violations * 100, total);
}
