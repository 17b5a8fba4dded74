#pragma once

#include <cmath>

#include "dctf/sequence.hpp"

namespace oracle {

using namespace dctf;

// Two-symbol toy: mass only on channels {0, 3} and EOS, values {-1, +1};
// every distribution depends on the prefix so masking matters.
class ToyPredictor final : public Predictor {
 public:
  std::vector<double> channel_probs(const PredictorContext& ctx, std::span<const SparseElement> prefix) const override {
    std::vector<double> p(ctx.geometry.channel_vocab(), 0.0);
    const double shift = 0.1 * static_cast<double>(prefix.size());
    p[0] = 0.5 - shift;
    p[3] = 0.3;
    p.back() = 0.2 + shift;
    return p;
  }
  std::vector<double> position_probs(const PredictorContext& ctx, std::span<const SparseElement> prefix,
                                     std::uint32_t c) const override {
    const int n = ctx.geometry.grid_size(c);
    std::vector<double> p(n, 0.0);
    p[0] = prefix.empty() ? 0.7 : 0.4;
    p[1] = 1.0 - p[0];
    return p;
  }
  std::vector<double> value_probs(const PredictorContext&, std::span<const SparseElement> prefix, std::uint32_t c,
                                  std::uint32_t pos) const override {
    std::vector<double> p(kValueBins, 0.0);
    const double a = 0.25 + 0.1 * c / 3 + 0.05 * pos + 0.02 * prefix.size();
    p[value_bin(-1)] = a;
    p[value_bin(1)] = 1.0 - a;
    return p;
  }
};

// Sampler probability summed over every sequence it could emit with
// max_len 3 on an 8x4, B=4 luma grid (positions {0, 1}).
inline double toy_total_mass(double temperature) {
  const Geometry g({4, 75, false}, 8, 4);
  SampleOptions o;
  o.max_len = 3;
  o.temperature = temperature;
  std::vector<SparseElement> alphabet;
  for (std::uint32_t c : {0u, 3u})
    for (std::uint32_t p : {0u, 1u})
      for (int v : {-1, 1}) alphabet.push_back({c, p, v});
  double total = 0.0;
  auto add = [&](std::vector<SparseElement> elems) {
    elems.push_back(eos_element(g));
    const SparseSequence s{g.config(), 8, 4, false, elems};
    total += std::exp(sample_log_prob(ToyPredictor{}, s, {}, o));
  };
  add({});
  for (const auto& a : alphabet) {
    add({a});
    for (const auto& b : alphabet) add({a, b});
  }
  return total;
}

}  // namespace oracle
