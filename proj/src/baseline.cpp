#include "dctf/baseline.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "dctf/error.hpp"
#include "dctf/parallel.hpp"
#include "dctf/store.hpp"
#include "dctf/varint.hpp"

namespace dctf {
namespace {

constexpr std::uint8_t kModelVersion = 1;
constexpr char kModelMagic[4] = {'D', 'C', 'T', 'P'};

std::uint64_t total(std::span<const std::uint64_t> xs) { return std::accumulate(xs.begin(), xs.end(), std::uint64_t{0}); }

void add_into(std::vector<std::uint64_t>& dst, const std::vector<std::uint64_t>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// Dirichlet smoothing toward a Laplace-smoothed back-off distribution.
struct Smoother {
  double alpha;
  double backoff(std::uint64_t n_x, std::uint64_t n_all, std::size_t support) const {
    return (static_cast<double>(n_x) + alpha) / (static_cast<double>(n_all) + alpha * static_cast<double>(support));
  }
  double mix(std::uint64_t n_hx, std::uint64_t n_h, double prior) const {
    return (static_cast<double>(n_hx) + alpha * prior) / (static_cast<double>(n_h) + alpha);
  }
};

void normalize(std::vector<double>& p) {
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= sum;
}

}  // namespace

BaselineCounts::BaselineCounts(const Geometry& g)
    : geometry(g),
      channel_bigram(static_cast<std::size_t>(g.channels() + 1) * g.channel_vocab(), 0),
      channel_unigram(static_cast<std::size_t>(g.channel_vocab()), 0),
      value_by_channel(static_cast<std::size_t>(g.channels()) * kValueBins, 0),
      value_unigram(kValueBins, 0) {
  for (int c = 0; c < g.channels(); ++c) {
    position_delta.emplace_back(static_cast<std::size_t>(2 * g.grid_size(static_cast<std::uint32_t>(c)) - 1), 0);
  }
  for (int p = 0; p < 3; ++p) {
    plane_delta.emplace_back(static_cast<std::size_t>(2 * g.grid_size(static_cast<std::uint32_t>(p)) - 1), 0);
  }
}

void BaselineCounts::add(const SparseSequence& seq) {
  if (!(seq.geometry() == geometry)) throw Error("baseline: sequence geometry differs from the model's");
  validate_sequence(seq);
  const std::uint32_t start = geometry.eos_channel();
  const std::size_t vocab = static_cast<std::size_t>(geometry.channel_vocab());
  std::uint32_t prev_channel = start;
  std::uint32_t prev_position = 0;
  for (const SparseElement& e : seq.elements) {
    ++channel_bigram[prev_channel * vocab + e.channel];
    ++channel_unigram[e.channel];
    if (e.channel == geometry.eos_channel()) break;
    const int grid = geometry.grid_size(e.channel);
    const std::uint32_t base = prev_channel == e.channel ? prev_position + 1 : 0;
    const auto delta_bin = static_cast<std::size_t>(static_cast<long>(e.position) - base + grid - 1);
    ++position_delta[e.channel][delta_bin];
    ++plane_delta[static_cast<int>(plane_of_channel(e.channel))][delta_bin];
    ++value_by_channel[e.channel * kValueBins + value_bin(e.value)];
    ++value_unigram[value_bin(e.value)];
    prev_channel = e.channel;
    prev_position = e.position;
  }
}

void BaselineCounts::merge(const BaselineCounts& other) {
  if (!(other.geometry == geometry)) throw Error("baseline: cannot merge counts of different geometries");
  add_into(channel_bigram, other.channel_bigram);
  add_into(channel_unigram, other.channel_unigram);
  for (std::size_t c = 0; c < position_delta.size(); ++c) add_into(position_delta[c], other.position_delta[c]);
  for (std::size_t p = 0; p < plane_delta.size(); ++p) add_into(plane_delta[p], other.plane_delta[p]);
  add_into(value_by_channel, other.value_by_channel);
  add_into(value_unigram, other.value_unigram);
}

BaselinePredictor::BaselinePredictor(BaselineCounts counts, double alpha) : counts_(std::move(counts)), alpha_(alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("baseline: smoothing alpha must be positive and finite");
}

void BaselinePredictor::check_geometry_matches(const PredictorContext& ctx) const {
  if (!(ctx.geometry == counts_.geometry)) {
    throw Error("baseline: model was trained for a different frame geometry");
  }
}

std::vector<double> BaselinePredictor::channel_probs(const PredictorContext& ctx,
                                                     std::span<const SparseElement> prefix) const {
  check_geometry_matches(ctx);
  const std::size_t vocab = static_cast<std::size_t>(counts_.geometry.channel_vocab());
  const std::uint32_t prev = prefix.empty() ? counts_.geometry.eos_channel() : prefix.back().channel;
  const std::span<const std::uint64_t> row(counts_.channel_bigram.data() + prev * vocab, vocab);
  const std::uint64_t n_row = total(row);
  const std::uint64_t n_all = total(counts_.channel_unigram);
  const Smoother s{alpha_};
  std::vector<double> p(vocab);
  for (std::size_t c = 0; c < vocab; ++c) {
    p[c] = s.mix(row[c], n_row, s.backoff(counts_.channel_unigram[c], n_all, vocab));
  }
  normalize(p);
  return p;
}

std::vector<double> BaselinePredictor::position_probs(const PredictorContext& ctx,
                                                      std::span<const SparseElement> prefix,
                                                      std::uint32_t channel) const {
  check_geometry_matches(ctx);
  const int grid = counts_.geometry.grid_size(channel);
  const auto& by_channel = counts_.position_delta[channel];
  const auto& by_plane = counts_.plane_delta[static_cast<int>(plane_of_channel(channel))];
  const std::uint64_t n_channel = total(by_channel);
  const std::uint64_t n_plane = total(by_plane);
  const std::uint32_t base = (!prefix.empty() && prefix.back().channel == channel) ? prefix.back().position + 1 : 0;
  const Smoother s{alpha_};
  std::vector<double> p(static_cast<std::size_t>(grid));
  for (int pos = 0; pos < grid; ++pos) {
    const auto bin = static_cast<std::size_t>(pos - static_cast<long>(base) + grid - 1);
    p[pos] = s.mix(by_channel[bin], n_channel, s.backoff(by_plane[bin], n_plane, by_plane.size()));
  }
  normalize(p);
  return p;
}

std::vector<double> BaselinePredictor::value_probs(const PredictorContext& ctx, std::span<const SparseElement>,
                                                   std::uint32_t channel, std::uint32_t) const {
  check_geometry_matches(ctx);
  const std::span<const std::uint64_t> row(counts_.value_by_channel.data() + channel * kValueBins, kValueBins);
  const std::uint64_t n_row = total(row);
  const std::uint64_t n_all = total(counts_.value_unigram);
  const Smoother s{alpha_};
  std::vector<double> p(kValueBins);
  for (int b = 0; b < kValueBins; ++b) {
    if (b == value_bin(0)) continue;
    p[b] = s.mix(row[b], n_row, s.backoff(counts_.value_unigram[b], n_all, kValueBins - 1));
  }
  normalize(p);
  return p;
}

BaselinePredictor train_baseline(std::span<const SparseSequence> corpus, double alpha) {
  if (corpus.empty()) throw Error("train_baseline: corpus is empty");
  if (!(alpha > 0.0)) throw Error("train_baseline: smoothing alpha must be positive");
  const Geometry g = corpus.front().geometry();
  const std::size_t shards = std::min<std::size_t>(corpus.size(), static_cast<std::size_t>(thread_count()));
  std::vector<BaselineCounts> partial(shards, BaselineCounts(g));
  parallel_for(shards, [&](std::size_t s) {
    for (std::size_t i = s; i < corpus.size(); i += shards) partial[s].add(corpus[i]);
  });
  BaselineCounts counts = std::move(partial.front());
  for (std::size_t s = 1; s < shards; ++s) counts.merge(partial[s]);
  return BaselinePredictor(std::move(counts), alpha);
}

std::vector<std::uint8_t> serialize_baseline(const BaselinePredictor& model) {
  const auto& c = model.counts();
  const Geometry& g = c.geometry;
  std::vector<std::uint8_t> out(std::begin(kModelMagic), std::end(kModelMagic));
  out.push_back(kModelVersion);
  varint::put_u16le(out, static_cast<std::uint16_t>(g.height()));
  varint::put_u16le(out, static_cast<std::uint16_t>(g.width()));
  out.push_back(static_cast<std::uint8_t>(g.block_size()));
  out.push_back(static_cast<std::uint8_t>(g.config().quality));
  out.push_back(g.config().chroma_downsampled ? 1 : 0);
  out.push_back(0);
  varint::put_f64le(out, model.alpha());
  auto table = [&](const std::vector<std::uint64_t>& t) {
    varint::put_u64(out, t.size());
    for (std::uint64_t x : t) varint::put_u64(out, x);
  };
  table(c.channel_bigram);
  table(c.channel_unigram);
  for (const auto& t : c.position_delta) table(t);
  for (const auto& t : c.plane_delta) table(t);
  table(c.value_by_channel);
  table(c.value_unigram);
  return out;
}

BaselinePredictor deserialize_baseline(std::span<const std::uint8_t> bytes) {
  varint::Reader in(bytes);
  const auto magic = in.take(4);
  if (!std::equal(magic.begin(), magic.end(), std::begin(kModelMagic))) throw FormatError("not a predictor file");
  const std::uint8_t version = in.u8();
  if (version != kModelVersion) throw FormatError("unsupported predictor version " + std::to_string(version));
  const int height = in.u16le();
  const int width = in.u16le();
  CodecConfig config;
  config.block_size = in.u8();
  config.quality = in.u8();
  const std::uint8_t flags = in.u8();
  if (flags & ~1u) throw FormatError("predictor file: unknown flag bits");
  config.chroma_downsampled = flags & 1;
  if (in.u8() != 0) throw FormatError("predictor file: reserved byte must be zero");
  const double alpha = in.f64le();
  Geometry g;
  try {
    g = Geometry(config, height, width);
  } catch (const Error& e) {
    throw FormatError(std::string("predictor file: ") + e.what());
  }
  BaselineCounts c(g);
  auto table = [&](std::vector<std::uint64_t>& t) {
    const std::uint64_t n = in.uvarint();
    if (n != t.size()) throw FormatError("predictor file: table size mismatch");
    for (auto& x : t) x = in.uvarint();
  };
  table(c.channel_bigram);
  table(c.channel_unigram);
  for (auto& t : c.position_delta) table(t);
  for (auto& t : c.plane_delta) table(t);
  table(c.value_by_channel);
  table(c.value_unigram);
  if (in.remaining() != 0) throw FormatError("predictor file: trailing bytes");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw FormatError("predictor file: invalid alpha");
  return BaselinePredictor(std::move(c), alpha);
}

void save_baseline(const BaselinePredictor& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_baseline(model));
}

BaselinePredictor load_baseline(const std::filesystem::path& path) { return deserialize_baseline(read_file(path)); }

}  // namespace dctf
