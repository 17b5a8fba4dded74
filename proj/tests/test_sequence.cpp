#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "dctf/error.hpp"
#include "dctf/sequence.hpp"
#include "oracles.hpp"
#include "toy_predictor.hpp"

using namespace dctf;

namespace {

SparseSequence luma_only(int h, int w, std::uint64_t seed, double density) {
  const CodecConfig cfg{4, 75, false};
  QuantizedPlanes q = zero_planes(cfg, h, w);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(density);
  std::uniform_int_distribution<int> val(-50, 50);
  for (auto& v : q.plane(PlaneId::Y).coeffs)
    if (keep(rng)) v = val(rng) | 1;
  return to_sparse(q);
}

// Puts all mass on the true next symbol of a fixed sequence.
class OraclePredictor final : public Predictor {
 public:
  explicit OraclePredictor(SparseSequence s) : s_(std::move(s)) {}
  std::vector<double> channel_probs(const PredictorContext& ctx, std::span<const SparseElement> prefix) const override {
    std::vector<double> p(ctx.geometry.channel_vocab(), 0.0);
    p[s_.elements[prefix.size()].channel] = 1.0;
    return p;
  }
  std::vector<double> position_probs(const PredictorContext& ctx, std::span<const SparseElement> prefix,
                                     std::uint32_t c) const override {
    std::vector<double> p(ctx.geometry.grid_size(c), 0.0);
    p[s_.elements[prefix.size()].position] = 1.0;
    return p;
  }
  std::vector<double> value_probs(const PredictorContext&, std::span<const SparseElement> prefix, std::uint32_t,
                                  std::uint32_t) const override {
    std::vector<double> p(kValueBins, 0.0);
    p[value_bin(s_.elements[prefix.size()].value)] = 1.0;
    return p;
  }

 private:
  SparseSequence s_;
};

class EosPredictor final : public Predictor {
 public:
  std::vector<double> channel_probs(const PredictorContext& ctx, std::span<const SparseElement>) const override {
    std::vector<double> p(ctx.geometry.channel_vocab(), 0.0);
    p.back() = 1.0;
    return p;
  }
  std::vector<double> position_probs(const PredictorContext& ctx, std::span<const SparseElement>,
                                     std::uint32_t c) const override {
    return std::vector<double>(ctx.geometry.grid_size(c), 1.0 / ctx.geometry.grid_size(c));
  }
  std::vector<double> value_probs(const PredictorContext&, std::span<const SparseElement>, std::uint32_t,
                                  std::uint32_t) const override {
    std::vector<double> p(kValueBins, 0.0);
    p[value_bin(1)] = 1.0;
    return p;
  }
};

double nats_for(const Predictor& p, const SparseSequence& s, std::size_t c) { return nll(s, p, c).total; }

}  // namespace

TEST(Distributions, UniformSumsToOne) {
  const Geometry g({8, 75, true}, 32, 32);
  const Conditioning cond;
  const DctImage partial(g);
  const PredictorContext ctx{g, false, cond, partial, 0};
  UniformPredictor u;
  EXPECT_NO_THROW(check_distribution(u.channel_probs(ctx, {}), g.channel_vocab(), "channel"));
  EXPECT_NO_THROW(check_distribution(u.position_probs(ctx, {}, 1), g.grid_size(1), "position"));
  const auto v = u.value_probs(ctx, {}, 0, 0);
  EXPECT_NO_THROW(check_distribution(v, kValueBins, "value"));
  EXPECT_EQ(v[value_bin(0)], 0.0);
  EXPECT_THROW(check_distribution(std::vector<double>{0.5, 0.4}, 2, "x"), Error);
  EXPECT_THROW(check_distribution(std::vector<double>{1.5, -0.5}, 2, "x"), Error);
  EXPECT_THROW(check_distribution(std::vector<double>{1.0}, 2, "x"), Error);
}

TEST(Chunk, Examples) {
  const Geometry g({4, 75, false}, 8, 8);
  SparseSequence eos{g.config(), 8, 8, false, {eos_element(g)}};
  const Chunk c = select_chunk(eos, 4, 123);
  EXPECT_EQ(c.start, 0u);
  ASSERT_EQ(c.elements.size(), 4u);
  for (const auto& e : c.elements) EXPECT_EQ(e, eos_element(g));

  const SparseSequence s = luma_only(16, 16, 1, 0.5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(select_chunk(s, s.length(), seed).start, 0u);
    const Chunk a = select_chunk(s, 4, seed), b = select_chunk(s, 4, seed);
    EXPECT_EQ(a.start, b.start);
    EXPECT_EQ(a.elements, b.elements);
    EXPECT_LE(a.start + 4, s.length());
  }
  EXPECT_THROW(select_chunk(s, 0, 1), Error);
}

TEST(Nll, UniformClosedForm) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SparseSequence s = luma_only(16, 16, seed, 0.05 * seed);
    const double l = double(s.length());
    const double p = s.geometry().grid_size(0);  // luma-only support: every channel has 16 positions
    const double bits = l * std::log2(49.0) + (l - 1) * (std::log2(p) + std::log2(2046.0));
    const NllResult r = nll(s, UniformPredictor{}, 256);
    EXPECT_NEAR(r.total / std::log(2.0), bits, 1e-9);
    EXPECT_NEAR(r.channel + r.position + r.value, r.total, 1e-9);
    EXPECT_EQ(r.elements, s.length());
  }
}

TEST(Nll, ChunkInvariance) {
  const SparseSequence s = to_sparse(encode_image(oracle::structured_image(32, 32, 2), {4, 90, true}));
  const double ref = nats_for(UniformPredictor{}, s, s.length());
  for (std::size_t c : {1, 4, 16, 64, 256}) EXPECT_NEAR(nats_for(UniformPredictor{}, s, c), ref, 1e-6);
}

TEST(Nll, OracleIsZeroAndZeroMassIsReported) {
  const SparseSequence s = luma_only(16, 16, 3, 0.3);
  EXPECT_NEAR(nll(s, OraclePredictor(s), 8).total, 0.0, 1e-12);
  SparseSequence other = s;
  other.elements[2].value = other.elements[2].value == 7 ? 9 : 7;
  try {
    nll(other, OraclePredictor(s), 8);
    FAIL() << "expected ZeroProbabilityError";
  } catch (const ZeroProbabilityError& e) {
    EXPECT_EQ(e.element_index(), 2u);
    EXPECT_EQ(e.factor(), "value");
  }
}

TEST(Bpd, Definition) {
  EXPECT_EQ(bits_per_dimension(0.0, 64, 64), 0.0);
  EXPECT_NEAR(bits_per_dimension(12288 * std::log(2.0), 64, 64), 1.0, 1e-12);
}

TEST(Sample, EosPredictorStopsImmediately) {
  const Geometry g({4, 75, false}, 16, 16);
  const auto s = sample_sequence(EosPredictor{}, g, false, {}, {});
  ASSERT_EQ(s.length(), 1u);
  EXPECT_EQ(s.elements[0], eos_element(g));
}

TEST(Sample, DeterministicValidAndBounded) {
  const Geometry g({4, 75, true}, 16, 16);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SampleOptions o;
    o.seed = seed;
    o.max_len = 40;
    const auto a = sample_sequence(UniformPredictor{}, g, false, {}, o);
    const auto b = sample_sequence(UniformPredictor{}, g, false, {}, o);
    EXPECT_EQ(a, b);
    EXPECT_LE(a.length(), 40u);
    EXPECT_NO_THROW(validate_sequence(a));
    EXPECT_NO_THROW(from_sparse(a));
    EXPECT_TRUE(std::isfinite(sample_log_prob(UniformPredictor{}, a, {}, o)));
  }
  SampleOptions bad;
  bad.temperature = -1;
  EXPECT_THROW(sample_sequence(UniformPredictor{}, g, false, {}, bad), Error);
  bad = {};
  bad.max_len = 0;
  EXPECT_THROW(sample_sequence(UniformPredictor{}, g, false, {}, bad), Error);
}

TEST(Sample, GreedyFollowsPeakedPredictor) {
  const SparseSequence s = luma_only(16, 16, 5, 0.3);
  SampleOptions o;
  o.temperature = 0.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    o.seed = seed;
    EXPECT_EQ(sample_sequence(OraclePredictor(s), s.geometry(), false, {}, o), s);
  }
}

// Sum of the sampler's probability over every sequence it could emit with
// max_len 3: empty, one element, or two elements, each closed by EOS.
TEST(Sample, ToyMassSumsToOne) {
  const Geometry g({4, 75, false}, 8, 4);  // two blocks: positions {0, 1}
  const std::uint32_t eos = g.eos_channel();
  for (double temperature : {1.0, 0.6, 2.5}) {
    SampleOptions o;
    o.max_len = 3;
    o.temperature = temperature;
    std::vector<SparseElement> alphabet;
    for (std::uint32_t c : {0u, 3u})
      for (std::uint32_t p : {0u, 1u})
        for (int v : {-1, 1}) alphabet.push_back({c, p, v});
    double total = 0.0;
    auto add = [&](std::vector<SparseElement> elems) {
      elems.push_back({eos, 0, 0});
      SparseSequence s{g.config(), 8, 4, false, elems};
      total += std::exp(sample_log_prob(oracle::ToyPredictor{}, s, {}, o));
    };
    add({});
    for (const auto& a : alphabet) {
      add({a});
      for (const auto& b : alphabet) add({a, b});
    }
    EXPECT_NEAR(total, 1.0, 1e-6) << "temperature " << temperature;
  }
}

TEST(Sample, EmpiricalFrequenciesMatchLogProb) {
  const Geometry g({4, 75, false}, 8, 4);
  SampleOptions o;
  o.max_len = 2;
  std::map<std::vector<std::uint32_t>, int> seen;
  const int n = 4000;
  SparseSequence first;
  for (int i = 0; i < n; ++i) {
    o.seed = static_cast<std::uint64_t>(i);
    const auto s = sample_sequence(oracle::ToyPredictor{}, g, false, {}, o);
    if (i == 0) first = s;
    std::vector<std::uint32_t> key;
    for (const auto& e : s.elements) {
      key.push_back(e.channel);
      key.push_back(e.position);
      key.push_back(static_cast<std::uint32_t>(e.value + 2));
    }
    ++seen[key];
  }
  o.seed = 0;
  const double p = std::exp(sample_log_prob(oracle::ToyPredictor{}, first, {}, o));
  std::vector<std::uint32_t> key;
  for (const auto& e : first.elements) {
    key.push_back(e.channel);
    key.push_back(e.position);
    key.push_back(static_cast<std::uint32_t>(e.value + 2));
  }
  const double freq = double(seen[key]) / n;
  EXPECT_NEAR(freq, p, 4 * std::sqrt(p * (1 - p) / n) + 1e-3);
}
