#include "dctf/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "dctf/error.hpp"
#include "dctf/parallel.hpp"

namespace dctf {
namespace {

bool channel_allowed(const Geometry& g, std::span<const SparseElement> prefix, std::uint32_t c) {
  if (c == g.eos_channel()) return true;
  if (c > g.eos_channel()) return false;
  if (prefix.empty()) return true;
  const SparseElement& last = prefix.back();
  if (c > last.channel) return true;
  if (c == last.channel) return last.position + 1 < static_cast<std::uint32_t>(g.grid_size(c));
  return false;
}

std::uint32_t first_allowed_position(std::span<const SparseElement> prefix, std::uint32_t c) {
  return (!prefix.empty() && prefix.back().channel == c) ? prefix.back().position + 1 : 0;
}

// Restricts probs to indices where allowed(i) holds, applies the temperature,
// and renormalizes. Temperature 0 is greedy: all mass on the first argmax.
// Returns false when no allowed index has mass.
template <typename Allowed>
bool temper(std::span<const double> probs, double temperature, Allowed allowed, std::vector<double>& out) {
  out.assign(probs.size(), 0.0);
  if (temperature == 0.0) {
    std::size_t best = probs.size();
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] > 0.0 && allowed(i) && (best == probs.size() || probs[i] > probs[best])) best = i;
    }
    if (best == probs.size()) return false;
    out[best] = 1.0;
    return true;
  }
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0 && allowed(i)) max_logit = std::max(max_logit, std::log(probs[i]) / temperature);
  }
  if (!std::isfinite(max_logit)) return false;
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0 && allowed(i)) {
      out[i] = std::exp(std::log(probs[i]) / temperature - max_logit);
      sum += out[i];
    }
  }
  for (double& q : out) q /= sum;
  return true;
}

std::size_t draw(std::span<const double> probs, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cum += probs[i];
    last_positive = i;
    if (u < cum) return i;
  }
  return last_positive;
}

// Keeps the encoder view in step with chunk boundaries: elements before the
// current chunk start are scattered, later ones are not.
class PartialTarget {
 public:
  PartialTarget(const Geometry& g, std::size_t chunk_len) : g_(g), chunk_len_(chunk_len), image_(g) {}

  void advance_to(std::span<const SparseElement> elements, std::size_t l) {
    if (l % chunk_len_ != 0 || l == scattered_) return;
    for (std::size_t i = scattered_; i < l; ++i) scatter_element(image_, g_, elements[i]);
    scattered_ = l;
  }

  const DctImage& image() const { return image_; }
  std::size_t chunk_start() const { return scattered_; }

 private:
  const Geometry& g_;
  std::size_t chunk_len_;
  DctImage image_;
  std::size_t scattered_ = 0;
};

void check_options(const SampleOptions& o) {
  if (!(o.temperature >= 0.0) || !std::isfinite(o.temperature)) {
    throw Error("sampling: temperature must be finite and non-negative");
  }
  if (o.max_len < 1) throw Error("sampling: max_len must be at least 1");
  if (o.chunk_len < 1) throw Error("sampling: chunk length must be at least 1");
}

}  // namespace

void check_distribution(std::span<const double> probs, std::size_t size, const char* what) {
  if (probs.size() != size) {
    throw Error(std::string(what) + ": expected " + std::to_string(size) + " entries, got " +
                std::to_string(probs.size()));
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(std::string(what) + ": negative or non-finite entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(std::string(what) + ": probabilities sum to " + std::to_string(sum));
  }
}

std::vector<double> UniformPredictor::channel_probs(const PredictorContext& ctx,
                                                    std::span<const SparseElement>) const {
  const int n = ctx.geometry.channel_vocab();
  return std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
}

std::vector<double> UniformPredictor::position_probs(const PredictorContext& ctx, std::span<const SparseElement>,
                                                     std::uint32_t channel) const {
  const int n = ctx.geometry.grid_size(channel);
  return std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
}

std::vector<double> UniformPredictor::value_probs(const PredictorContext&, std::span<const SparseElement>,
                                                  std::uint32_t, std::uint32_t) const {
  std::vector<double> p(kValueBins, 1.0 / (kValueBins - 1));
  p[value_bin(0)] = 0.0;
  return p;
}

Chunk select_chunk(const SparseSequence& seq, std::size_t chunk_len, std::uint64_t seed) {
  if (chunk_len < 1) throw Error("select_chunk: chunk length must be at least 1");
  if (seq.elements.empty()) throw Error("select_chunk: empty sequence");
  const std::size_t len = seq.elements.size();
  const std::size_t starts = len >= chunk_len ? len - chunk_len + 1 : 1;
  std::mt19937_64 rng(seed);
  Chunk chunk;
  chunk.start = std::uniform_int_distribution<std::size_t>(0, starts - 1)(rng);
  const SparseElement eos = eos_element(seq.geometry());
  chunk.elements.reserve(chunk_len);
  for (std::size_t l = chunk.start; l < chunk.start + chunk_len; ++l) {
    chunk.elements.push_back(l < len ? seq.elements[l] : eos);
  }
  return chunk;
}

NllResult nll(const SparseSequence& seq, const Predictor& predictor, std::size_t chunk_len,
              const Conditioning& conditioning) {
  if (chunk_len < 1) throw Error("nll: chunk length must be at least 1");
  validate_sequence(seq);
  const Geometry g = seq.geometry();
  const std::span<const SparseElement> elements(seq.elements);
  PartialTarget partial(g, chunk_len);
  NllResult out;
  for (std::size_t l = 0; l < elements.size(); ++l) {
    partial.advance_to(elements, l);
    const PredictorContext ctx{g, seq.residual, conditioning, partial.image(), partial.chunk_start()};
    const auto prefix = elements.first(l);
    const SparseElement& e = elements[l];

    const auto pc = predictor.channel_probs(ctx, prefix);
    check_distribution(pc, static_cast<std::size_t>(g.channel_vocab()), "channel distribution");
    if (pc[e.channel] <= 0.0) throw ZeroProbabilityError(l, "channel");
    const double lc = -std::log(pc[e.channel]);
    out.channel += lc;
    out.total += lc;
    ++out.elements;
    if (e.channel == g.eos_channel()) continue;

    const auto pp = predictor.position_probs(ctx, prefix, e.channel);
    check_distribution(pp, static_cast<std::size_t>(g.grid_size(e.channel)), "position distribution");
    if (pp[e.position] <= 0.0) throw ZeroProbabilityError(l, "position");
    const double lp = -std::log(pp[e.position]);

    const auto pv = predictor.value_probs(ctx, prefix, e.channel, e.position);
    check_distribution(pv, kValueBins, "value distribution");
    if (pv[value_bin(0)] != 0.0) throw Error("value distribution: v = 0 must have zero mass");
    if (pv[value_bin(e.value)] <= 0.0) throw ZeroProbabilityError(l, "value");
    const double lv = -std::log(pv[value_bin(e.value)]);

    out.position += lp;
    out.value += lv;
    out.total += lp + lv;
  }
  return out;
}

NllResult corpus_nll(std::span<const SparseSequence> corpus, const Predictor& predictor, std::size_t chunk_len) {
  std::vector<NllResult> parts(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t i) { parts[i] = nll(corpus[i], predictor, chunk_len); });
  NllResult out;
  for (const auto& p : parts) out += p;
  return out;
}

double bits_per_dimension(double total_nats, int height, int width) {
  if (height <= 0 || width <= 0) throw Error("bits_per_dimension: dimensions must be positive");
  return total_nats / std::numbers::ln2 / (static_cast<double>(height) * width * 3.0);
}

SparseSequence sample_sequence(const Predictor& predictor, const Geometry& geometry, bool residual,
                               const Conditioning& conditioning, const SampleOptions& options) {
  check_options(options);
  SparseSequence out;
  out.config = geometry.config();
  out.height = geometry.height();
  out.width = geometry.width();
  out.residual = residual;
  std::mt19937_64 rng(options.seed);
  PartialTarget partial(geometry, options.chunk_len);
  std::vector<double> q;
  const std::uint32_t eos = geometry.eos_channel();

  while (true) {
    const std::size_t l = out.elements.size();
    if (l + 1 >= options.max_len) break;
    partial.advance_to(out.elements, l);
    const PredictorContext ctx{geometry, residual, conditioning, partial.image(), partial.chunk_start()};
    const std::span<const SparseElement> prefix(out.elements);

    const auto pc = predictor.channel_probs(ctx, prefix);
    check_distribution(pc, static_cast<std::size_t>(geometry.channel_vocab()), "channel distribution");
    if (!temper(pc, options.temperature,
                [&](std::size_t c) { return channel_allowed(geometry, prefix, static_cast<std::uint32_t>(c)); },
                q)) {
      throw Error("sampling: no channel mass left after masking at element " + std::to_string(l));
    }
    const auto c = static_cast<std::uint32_t>(draw(q, rng));
    if (c == eos) break;

    const auto pp = predictor.position_probs(ctx, prefix, c);
    check_distribution(pp, static_cast<std::size_t>(geometry.grid_size(c)), "position distribution");
    const std::uint32_t min_p = first_allowed_position(prefix, c);
    if (!temper(pp, options.temperature, [&](std::size_t p) { return p >= min_p; }, q)) {
      throw Error("sampling: no position mass left after masking at element " + std::to_string(l));
    }
    const auto p = static_cast<std::uint32_t>(draw(q, rng));

    const auto pv = predictor.value_probs(ctx, prefix, c, p);
    check_distribution(pv, kValueBins, "value distribution");
    if (!temper(pv, options.temperature, [](std::size_t b) { return b != static_cast<std::size_t>(value_bin(0)); },
                q)) {
      throw Error("sampling: no value mass left after masking at element " + std::to_string(l));
    }
    const auto v = static_cast<std::int32_t>(draw(q, rng)) - kMaxCoefficient;
    out.elements.push_back({c, p, v});
  }
  out.elements.push_back(eos_element(geometry));
  return out;
}

double sample_log_prob(const Predictor& predictor, const SparseSequence& seq, const Conditioning& conditioning,
                       const SampleOptions& options) {
  check_options(options);
  constexpr double kImpossible = -std::numeric_limits<double>::infinity();
  const Geometry g = seq.geometry();
  const std::uint32_t eos = g.eos_channel();
  const std::span<const SparseElement> elements(seq.elements);
  if (elements.empty() || elements.size() > options.max_len) return kImpossible;
  PartialTarget partial(g, options.chunk_len);
  std::vector<double> q;
  double logp = 0.0;

  for (std::size_t l = 0; l < elements.size(); ++l) {
    const SparseElement& e = elements[l];
    const bool is_last = l + 1 == elements.size();
    if (l + 1 >= options.max_len) return (is_last && e == eos_element(g)) ? logp : kImpossible;
    if (e.channel == eos) {
      if (!is_last || e.position != 0 || e.value != 0) return kImpossible;
    } else if (is_last) {
      return kImpossible;
    }
    const auto prefix = elements.first(l);
    if (!channel_allowed(g, prefix, e.channel)) return kImpossible;
    partial.advance_to(elements, l);
    const PredictorContext ctx{g, seq.residual, conditioning, partial.image(), partial.chunk_start()};

    const auto pc = predictor.channel_probs(ctx, prefix);
    check_distribution(pc, static_cast<std::size_t>(g.channel_vocab()), "channel distribution");
    if (!temper(pc, options.temperature,
                [&](std::size_t c) { return channel_allowed(g, prefix, static_cast<std::uint32_t>(c)); }, q) ||
        q[e.channel] <= 0.0) {
      return kImpossible;
    }
    logp += std::log(q[e.channel]);
    if (e.channel == eos) break;

    const std::uint32_t min_p = first_allowed_position(prefix, e.channel);
    if (e.position >= static_cast<std::uint32_t>(g.grid_size(e.channel)) || e.position < min_p) return kImpossible;
    const auto pp = predictor.position_probs(ctx, prefix, e.channel);
    check_distribution(pp, static_cast<std::size_t>(g.grid_size(e.channel)), "position distribution");
    if (!temper(pp, options.temperature, [&](std::size_t p) { return p >= min_p; }, q) || q[e.position] <= 0.0) {
      return kImpossible;
    }
    logp += std::log(q[e.position]);

    if (e.value == 0 || e.value > kMaxCoefficient || e.value < -kMaxCoefficient) return kImpossible;
    const auto pv = predictor.value_probs(ctx, prefix, e.channel, e.position);
    check_distribution(pv, kValueBins, "value distribution");
    if (!temper(pv, options.temperature, [](std::size_t b) { return b != static_cast<std::size_t>(value_bin(0)); },
                q) ||
        q[value_bin(e.value)] <= 0.0) {
      return kImpossible;
    }
    logp += std::log(q[value_bin(e.value)]);
  }
  return logp;
}

}  // namespace dctf
