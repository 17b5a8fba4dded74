#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dctf/sparse.hpp"

namespace dctf {

// Value categoricals index v + kMaxCoefficient; the bin for v = 0 must be 0.
inline constexpr int kValueBins = 2 * kMaxCoefficient + 1;
inline int value_bin(std::int32_t v) { return v + kMaxCoefficient; }

// An annotated, fully decoded frame the prediction is conditioned on.
struct ContextFrame {
  DctImage image;
  std::vector<double> annotation;
  bool padding = false;
};

struct Conditioning {
  std::vector<ContextFrame> frames;
  std::vector<double> target_annotation;
};

// What a predictor sees for one query. `partial_target` is the encoder view:
// the target scattered from elements [0, chunk_start). The `prefix` passed
// alongside runs up to the element being predicted.
struct PredictorContext {
  const Geometry& geometry;
  bool residual;
  const Conditioning& conditioning;
  const DctImage& partial_target;
  std::size_t chunk_start;
};

// The three factors of p(d_l | d_<l) = p(v | c, p, .) p(p | c, .) p(c | .).
// channel_probs has geometry.channel_vocab() entries (EOS last),
// position_probs has grid_size(channel) entries, value_probs kValueBins.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual std::vector<double> channel_probs(const PredictorContext& ctx,
                                            std::span<const SparseElement> prefix) const = 0;
  virtual std::vector<double> position_probs(const PredictorContext& ctx, std::span<const SparseElement> prefix,
                                             std::uint32_t channel) const = 0;
  virtual std::vector<double> value_probs(const PredictorContext& ctx, std::span<const SparseElement> prefix,
                                          std::uint32_t channel, std::uint32_t position) const = 0;
};

// Uniform over channels, over the channel's grid, and over nonzero values.
class UniformPredictor final : public Predictor {
 public:
  std::vector<double> channel_probs(const PredictorContext& ctx,
                                    std::span<const SparseElement> prefix) const override;
  std::vector<double> position_probs(const PredictorContext& ctx, std::span<const SparseElement> prefix,
                                     std::uint32_t channel) const override;
  std::vector<double> value_probs(const PredictorContext& ctx, std::span<const SparseElement> prefix,
                                  std::uint32_t channel, std::uint32_t position) const override;
};

// Throws unless probs has `size` entries, none negative or non-finite, and
// sums to 1 within 1e-9.
void check_distribution(std::span<const double> probs, std::size_t size, const char* what);

struct Chunk {
  std::size_t start = 0;
  std::vector<SparseElement> elements;  // padded with EOS past the end
};

// Start drawn uniformly from [0, max(1, L - C + 1)).
Chunk select_chunk(const SparseSequence& seq, std::size_t chunk_len, std::uint64_t seed);

struct NllResult {
  double total = 0.0;  // nats
  double channel = 0.0;
  double position = 0.0;
  double value = 0.0;
  std::size_t elements = 0;

  NllResult& operator+=(const NllResult& o) {
    total += o.total;
    channel += o.channel;
    position += o.position;
    value += o.value;
    elements += o.elements;
    return *this;
  }
};

// Teacher-forced negative log-likelihood, evaluated chunk by chunk. EOS
// contributes only its channel term.
NllResult nll(const SparseSequence& seq, const Predictor& predictor, std::size_t chunk_len,
              const Conditioning& conditioning = {});

// Sums nll over a corpus, in parallel across sequences.
NllResult corpus_nll(std::span<const SparseSequence> corpus, const Predictor& predictor, std::size_t chunk_len);

double bits_per_dimension(double total_nats, int height, int width);

struct SampleOptions {
  double temperature = 1.0;  // 0 decodes greedily
  std::size_t max_len = 1 << 16;  // including the final EOS
  std::uint64_t seed = 0;
  std::size_t chunk_len = 256;
};

// Ancestral sampling channel -> position -> value. Candidates that would break
// the (c, p) ordering or reuse a slot are masked and the remainder
// renormalized, so every output decodes.
SparseSequence sample_sequence(const Predictor& predictor, const Geometry& geometry, bool residual,
                               const Conditioning& conditioning, const SampleOptions& options);

// Log-probability that sample_sequence emits exactly `seq` (same masking,
// temperature and forced EOS); -inf when it cannot.
double sample_log_prob(const Predictor& predictor, const SparseSequence& seq, const Conditioning& conditioning,
                       const SampleOptions& options);

}  // namespace dctf
