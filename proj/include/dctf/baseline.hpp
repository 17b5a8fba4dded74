#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dctf/sequence.hpp"

namespace dctf {

// Token counts gathered from a corpus of sequences sharing one geometry.
//   channel: previous channel (or start) -> channel, plus channel unigrams
//   position: per channel, signed delta to the next free position; the
//             delta is measured from the previous position when the
//             channel repeats and from 0 otherwise. Per-plane back-off.
//   value: per channel, plus value unigrams.
struct BaselineCounts {
  Geometry geometry;
  std::vector<std::uint64_t> channel_bigram;   // (channels + 1 prev) x vocab
  std::vector<std::uint64_t> channel_unigram;  // vocab
  std::vector<std::vector<std::uint64_t>> position_delta;  // [channel][2P - 1]
  std::vector<std::vector<std::uint64_t>> plane_delta;     // [plane][2P - 1]
  std::vector<std::uint64_t> value_by_channel;             // channels x kValueBins
  std::vector<std::uint64_t> value_unigram;                // kValueBins

  BaselineCounts() = default;
  explicit BaselineCounts(const Geometry& g);

  void add(const SparseSequence& seq);
  // Associative, commutative; both sides must share a geometry.
  void merge(const BaselineCounts& other);

  bool operator==(const BaselineCounts&) const = default;
};

// Back-off n-gram over the token stream. Every conditional is a Dirichlet
// smoothed count with the (itself Laplace smoothed) lower order as prior:
//   p(x | h) = (n(h, x) + alpha * u(x)) / (n(h) + alpha),
//   u(x)     = (n(x) + alpha) / (N + alpha * |X|).
// Large alpha tends to the uniform predictor.
class BaselinePredictor final : public Predictor {
 public:
  BaselinePredictor(BaselineCounts counts, double alpha);

  std::vector<double> channel_probs(const PredictorContext& ctx,
                                    std::span<const SparseElement> prefix) const override;
  std::vector<double> position_probs(const PredictorContext& ctx, std::span<const SparseElement> prefix,
                                     std::uint32_t channel) const override;
  std::vector<double> value_probs(const PredictorContext& ctx, std::span<const SparseElement> prefix,
                                  std::uint32_t channel, std::uint32_t position) const override;

  const BaselineCounts& counts() const { return counts_; }
  double alpha() const { return alpha_; }
  const Geometry& geometry() const { return counts_.geometry; }

 private:
  void check_geometry_matches(const PredictorContext& ctx) const;

  BaselineCounts counts_;
  double alpha_;
};

// Counts in parallel per sequence and merges.
BaselinePredictor train_baseline(std::span<const SparseSequence> corpus, double alpha);

// Versioned binary model file: "DCTP", version, geometry, alpha, varint tables.
std::vector<std::uint8_t> serialize_baseline(const BaselinePredictor& model);
BaselinePredictor deserialize_baseline(std::span<const std::uint8_t> bytes);
void save_baseline(const BaselinePredictor& model, const std::filesystem::path& path);
BaselinePredictor load_baseline(const std::filesystem::path& path);

}  // namespace dctf
