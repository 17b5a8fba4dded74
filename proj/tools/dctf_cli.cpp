// dctf: encode/decode frames as sparse DCT sequences, measure sparsity, build
// datasets, train and evaluate the baseline predictor and run generation plans.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dctf/baseline.hpp"
#include "dctf/error.hpp"
#include "dctf/image_io.hpp"
#include "dctf/metrics.hpp"
#include "dctf/presets.hpp"
#include "dctf/store.hpp"
#include "dctf/tasks.hpp"

namespace fs = std::filesystem;
using namespace dctf;

namespace {

struct CodecFlags {
  std::string preset;
  int quality = 75;
  int block = 8;
  bool chroma = false;
  CLI::Option* quality_opt = nullptr;
  CLI::Option* block_opt = nullptr;
  CLI::Option* chroma_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--preset", preset, "Domain preset (sets resolution and codec)");
    quality_opt = app->add_option("--quality", quality, "JPEG quality 1..100")->check(CLI::Range(1, 100));
    block_opt = app->add_option("--block", block, "DCT block size (4 or 8)")->check(CLI::IsMember({4, 8}));
    chroma_opt = app->add_flag("--chroma", chroma, "Downsample chroma 2x2");
  }

  // Preset values first; explicit flags override them.
  CodecConfig config() const {
    CodecConfig c;
    c.quality = quality;
    c.block_size = block;
    c.chroma_downsampled = chroma;
    if (!preset.empty()) {
      c = preset_by_name(preset).codec;
      if (quality_opt->count()) c.quality = quality;
      if (block_opt->count()) c.block_size = block;
      if (chroma_opt->count()) c.chroma_downsampled = chroma;
    }
    c.validate();
    return c;
  }

  std::optional<int> resolution() const {
    if (preset.empty()) return std::nullopt;
    return preset_by_name(preset).resolution;
  }
};

RgbImage load_for(const fs::path& path, const CodecFlags& flags) {
  RgbImage img = read_image(path);
  if (auto res = flags.resolution()) img = resize_area(center_crop_square(img), *res, *res);
  return img;
}

bool is_sequence_file(const fs::path& path) {
  const auto bytes = read_file(path);
  return bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "DCTS");
}

std::vector<SparseSequence> load_corpus(const fs::path& dir, const std::string& kind) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".dcts") continue;
    const auto stem = e.path().filename().string();
    if (kind == "abs" && stem.rfind("abs_", 0) != 0) continue;
    if (kind == "res" && stem.rfind("res_", 0) != 0) continue;
    files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no .dcts sequence files under " + dir.string());
  std::vector<SparseSequence> out;
  out.reserve(files.size());
  for (const auto& f : files) {
    try {
      out.push_back(read_sequence(f));
    } catch (const Error& e) {
      throw Error(f.string() + ": " + e.what());
    }
  }
  return out;
}

std::string frame_name(std::size_t i, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%05zu%s", i, ext);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse block-DCT frame toolkit"};
  app.set_config("--config", "", "Read flags from a TOML/INI file");
  app.require_subcommand(1);

  // encode
  auto* enc = app.add_subcommand("encode", "Encode an image into a sequence file");
  CodecFlags enc_codec;
  enc_codec.attach(enc);
  fs::path enc_in, enc_prev, enc_out;
  enc->add_option("image", enc_in, "Input PNG/PPM")->required();
  enc->add_option("--residual-against", enc_prev, "Previous frame; store the quantized difference");
  enc->add_option("-o,--output", enc_out, "Output .dcts file")->required();

  // decode
  auto* dec = app.add_subcommand("decode", "Decode a sequence file into an image");
  fs::path dec_in, dec_prev, dec_out;
  dec->add_option("file", dec_in, "Input .dcts")->required();
  dec->add_option("--previous", dec_prev, "Previous frame (image or absolute .dcts) for residual files");
  dec->add_option("-o,--output", dec_out, "Output image (.png or .ppm)")->required();

  // stats
  auto* st = app.add_subcommand("stats", "Absolute vs residual sparsity of a frame sequence");
  CodecFlags st_codec;
  st_codec.attach(st);
  std::vector<fs::path> st_frames;
  fs::path st_out = ".";
  st->add_option("frames", st_frames, "Frames in temporal order")->required();
  st->add_option("-o,--output", st_out, "Directory for sparsity.csv and heatmaps");

  // dataset build
  auto* ds = app.add_subcommand("dataset", "Dataset tools");
  ds->require_subcommand(1);
  auto* dsb = ds->add_subcommand("build", "Ingest a clip manifest into sequence files");
  CodecFlags ds_codec;
  ds_codec.attach(dsb);
  fs::path ds_manifest, ds_out;
  int ds_stride = 1, ds_resolution = 64;
  bool ds_no_abs = false, ds_no_res = false;
  dsb->add_option("manifest", ds_manifest, "JSON-lines clip manifest")->required();
  dsb->add_option("--stride", ds_stride, "Keep every n-th frame")->check(CLI::PositiveNumber);
  dsb->add_option("--resolution", ds_resolution, "Square side when no preset is given")->check(CLI::PositiveNumber);
  dsb->add_flag("--no-absolute", ds_no_abs, "Skip absolute sequences");
  dsb->add_flag("--no-residual", ds_no_res, "Skip residual sequences");
  dsb->add_option("-o,--output", ds_out, "Output directory")->required();

  // predictor train / eval
  auto* pr = app.add_subcommand("predictor", "Baseline predictor");
  pr->require_subcommand(1);
  auto* prt = pr->add_subcommand("train", "Count a corpus into a model file");
  fs::path prt_dir, prt_out;
  double prt_alpha = 1.0;
  std::string prt_kind = "all";
  prt->add_option("dir", prt_dir, "Directory of .dcts files")->required();
  prt->add_option("--alpha", prt_alpha, "Smoothing strength")->check(CLI::PositiveNumber);
  prt->add_option("--kind", prt_kind, "abs, res or all")->check(CLI::IsMember({"abs", "res", "all"}));
  prt->add_option("-o,--output", prt_out, "Model file")->required();
  auto* pre = pr->add_subcommand("eval", "Teacher-forced NLL of a corpus");
  fs::path pre_model, pre_dir;
  std::size_t pre_chunk = 256;
  std::string pre_kind = "all";
  pre->add_option("model", pre_model, "Model file")->required();
  pre->add_option("dir", pre_dir, "Directory of .dcts files")->required();
  pre->add_option("--chunk", pre_chunk, "Chunk length C")->check(CLI::PositiveNumber);
  pre->add_option("--kind", pre_kind, "abs, res or all")->check(CLI::IsMember({"abs", "res", "all"}));

  // plan
  auto* pl = app.add_subcommand("plan", "Write a generation plan file");
  std::string pl_task;
  int pl_context = 1, pl_generate = 0, pl_min = 1, pl_max = 1 << 30, pl_seconds = 1, pl_low = 1, pl_high = 1;
  std::int64_t pl_t0 = 0, pl_first = 1, pl_last = 1, pl_anchor = 2;
  int pl_views = 1, pl_targets = 1;
  std::string pl_format = "rgb";
  bool pl_parallel = false;
  std::uint64_t pl_seed = 0;
  fs::path pl_out;
  pl->add_option("task", pl_task, "video, interpolation, view, translation or two-stage")
      ->required()
      ->check(CLI::IsMember({"video", "interpolation", "view", "translation", "two-stage"}));
  pl->add_option("--context", pl_context, "Context frames (video)");
  pl->add_option("--generate", pl_generate, "Frames to generate (video)");
  pl->add_option("--t0", pl_t0, "First context time (interpolation)");
  pl->add_option("--first", pl_first, "First target time (interpolation)");
  pl->add_option("--last", pl_last, "Last target time (interpolation)");
  pl->add_option("--anchor", pl_anchor, "Future anchor time (interpolation)");
  pl->add_option("--views", pl_views, "Input views (view)");
  pl->add_option("--targets", pl_targets, "Target views (view)");
  pl->add_option("--format", pl_format, "Target format (translation)");
  pl->add_option("--seconds", pl_seconds, "Clip length (two-stage)");
  pl->add_option("--low-fps", pl_low, "Anchor frame rate (two-stage)");
  pl->add_option("--high-fps", pl_high, "Output frame rate (two-stage)");
  pl->add_option("--min-frames", pl_min, "Context minimum");
  pl->add_option("--max-frames", pl_max, "Context maximum");
  pl->add_flag("--parallel", pl_parallel, "Condition every target on the inputs only");
  pl->add_option("--seed", pl_seed, "Seed recorded per step");
  pl->add_option("-o,--output", pl_out, "Plan file")->required();

  // sample
  auto* sa = app.add_subcommand("sample", "Execute a generation plan");
  std::vector<fs::path> sa_models, sa_inputs;
  fs::path sa_plan, sa_out;
  double sa_temp = 1.0;
  std::uint64_t sa_seed = 0;
  std::size_t sa_max_len = 1 << 16;
  bool sa_residual = false;
  sa->add_option("--model", sa_models, "Model file, once or once per stage")->required();
  sa->add_option("--plan", sa_plan, "Plan file")->required();
  sa->add_option("--inputs", sa_inputs, "Input frames (images) in the plan's input order");
  sa->add_option("--temperature", sa_temp, "Sampling temperature (0 = greedy)")->check(CLI::NonNegativeNumber);
  sa->add_option("--seed", sa_seed, "Random seed");
  sa->add_option("--max-len", sa_max_len, "Longest sequence, EOS included")->check(CLI::PositiveNumber);
  sa->add_flag("--residual", sa_residual, "Sample residuals against the previous frame");
  sa->add_option("-o,--output", sa_out, "Output directory")->required();

  // metrics
  auto* me = app.add_subcommand("metrics", "Image quality metrics");
  me->require_subcommand(1);
  fs::path me_truth, me_csv;
  std::vector<fs::path> me_preds;
  std::string me_by = "psnr";
  std::map<std::string, CLI::App*> me_cmds;
  for (const char* name : {"psnr", "ssim", "best-of-n"}) {
    auto* c = me->add_subcommand(name, std::string("Compute ") + name);
    c->add_option("truth", me_truth, "Reference image")->required();
    c->add_option("pred", me_preds, "Candidate images")->required();
    c->add_option("--csv", me_csv, "Write per-candidate scores");
    if (std::string(name) == "best-of-n") {
      c->add_option("--by", me_by, "Selection metric")->check(CLI::IsMember({"psnr", "ssim"}));
    }
    me_cmds[name] = c;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*enc) {
      const CodecConfig cfg = enc_codec.config();
      const QuantizedPlanes cur = encode_image(load_for(enc_in, enc_codec), cfg);
      SparseSequence seq;
      if (!enc_prev.empty()) {
        const QuantizedPlanes prev = encode_image(load_for(enc_prev, enc_codec), cfg);
        seq = residual_encode(cur, prev);
      } else {
        seq = to_sparse(cur);
      }
      const auto bytes = encode_sequence(seq);
      write_file_atomic(enc_out, bytes);
      std::cout << "L=" << seq.length() << " bytes=" << bytes.size();
      if (cur.saturated) std::cout << " saturated=" << cur.saturated;
      std::cout << '\n';
    } else if (*dec) {
      const SparseSequence seq = read_sequence(dec_in);
      QuantizedPlanes q;
      if (seq.residual) {
        if (dec_prev.empty()) throw Error("residual sequence needs --previous");
        QuantizedPlanes prev;
        if (is_sequence_file(dec_prev)) {
          const SparseSequence p = read_sequence(dec_prev);
          if (p.residual) throw Error("--previous must be an absolute sequence or an image");
          prev = from_sparse(p);
        } else {
          prev = encode_image(read_image(dec_prev), seq.config);
        }
        q = residual_decode(seq, prev);
      } else {
        q = from_sparse(seq);
      }
      write_image(dec_out, decode_image(q));
      std::cout << "decoded " << q.height << "x" << q.width << " from L=" << seq.length() << '\n';
    } else if (*st) {
      const CodecConfig cfg = st_codec.config();
      std::vector<RgbImage> frames;
      for (const auto& f : st_frames) frames.push_back(load_for(f, st_codec));
      const SparsityReport rep = sparsity_report(frames, cfg);
      fs::create_directories(st_out);
      write_sparsity_outputs(rep, st_out);
      std::cout << "frames=" << rep.rows.size() << " mean_L_abs=" << rep.mean_abs_length
                << " mean_L_resid=" << rep.mean_resid_length << " ratio=" << rep.ratio << '\n';
    } else if (*dsb) {
      IngestOptions opt;
      opt.config = ds_codec.config();
      opt.resolution = ds_codec.resolution().value_or(ds_resolution);
      opt.stride = ds_stride;
      opt.absolute = !ds_no_abs;
      opt.residual = !ds_no_res;
      const auto clips = read_manifest(ds_manifest);
      const auto result = ingest(clips, opt);
      std::size_t files = 0;
      std::string index;
      for (const auto& clip : result) {
        const fs::path dir = ds_out / clip.clip_id;
        fs::create_directories(dir);
        for (std::size_t i = 0; i < clip.absolute.size(); ++i) {
          write_sequence(dir / ("abs_" + frame_name(i, ".dcts")), clip.absolute[i]);
          ++files;
        }
        for (std::size_t i = 0; i < clip.residual.size(); ++i) {
          write_sequence(dir / ("res_" + frame_name(i, ".dcts")), clip.residual[i]);
          ++files;
        }
        index += nlohmann::json{{"clip_id", clip.clip_id}, {"frame_indices", clip.frame_indices}}.dump() + "\n";
      }
      write_text_atomic(ds_out / "index.jsonl", index);
      std::cout << "clips=" << result.size() << " files=" << files << '\n';
    } else if (*prt) {
      const auto corpus = load_corpus(prt_dir, prt_kind);
      const BaselinePredictor model = train_baseline(corpus, prt_alpha);
      save_baseline(model, prt_out);
      std::cout << "trained on " << corpus.size() << " sequences\n";
    } else if (*pre) {
      const BaselinePredictor model = load_baseline(pre_model);
      const auto corpus = load_corpus(pre_dir, pre_kind);
      const NllResult r = corpus_nll(corpus, model, pre_chunk);
      const NllResult u = corpus_nll(corpus, UniformPredictor{}, pre_chunk);
      const auto& g = model.geometry();
      const double dims = static_cast<double>(corpus.size());
      std::cout.precision(10);
      std::cout << "sequences=" << corpus.size() << " nats=" << r.total
                << " bpd=" << bits_per_dimension(r.total / dims, g.height(), g.width())
                << " uniform_bpd=" << bits_per_dimension(u.total / dims, g.height(), g.width()) << '\n';
    } else if (*pl) {
      const GenerationMode mode = pl_parallel ? GenerationMode::Parallel : GenerationMode::Sequential;
      const ContextLimits lim{pl_min, pl_max};
      std::vector<GenerationPlan> stages;
      if (pl_task == "video") {
        stages.push_back(build_video_plan(pl_context, pl_generate, mode, lim));
      } else if (pl_task == "interpolation") {
        stages.push_back(build_interpolation_plan(pl_t0, pl_first, pl_last, pl_anchor, lim, mode));
      } else if (pl_task == "view") {
        // Identity cameras; real poses come from a hand-written plan file.
        std::array<double, 9> eye{1, 0, 0, 0, 1, 0, 0, 0, 1};
        std::vector<std::array<double, 9>> in(static_cast<std::size_t>(pl_views), eye);
        std::vector<std::array<double, 9>> out(static_cast<std::size_t>(pl_targets), eye);
        stages.push_back(build_view_plan(in, out, mode, lim));
      } else if (pl_task == "translation") {
        stages.push_back(build_translation_plan(pl_format));
      } else {
        const TwoStagePlan two = build_two_stage_plan(pl_seconds, pl_low, pl_high);
        stages.push_back(two.anchors);
        stages.push_back(two.fill);
      }
      write_text_atomic(pl_out, plan_manifest(stages, pl_seed));
      std::size_t steps = 0;
      for (const auto& s : stages) steps += s.steps.size();
      std::cout << "stages=" << stages.size() << " steps=" << steps << '\n';
    } else if (*sa) {
      const auto plan_bytes = read_file(sa_plan);
      const auto stages = parse_plan_manifest(std::string(plan_bytes.begin(), plan_bytes.end()));
      if (stages.empty()) throw Error("plan file has no stages");
      if (sa_models.size() != 1 && sa_models.size() != stages.size()) {
        throw Error("give one --model or one per stage");
      }
      std::vector<BaselinePredictor> models;
      for (const auto& m : sa_models) models.push_back(load_baseline(m));
      const Geometry& g = models.front().geometry();
      std::vector<QuantizedPlanes> frames;
      for (const auto& f : sa_inputs) {
        RgbImage img = read_image(f);
        if (img.height != g.height() || img.width != g.width()) img = resize_area(center_crop_square(img), g.height(), g.width());
        frames.push_back(encode_image(img, g.config()));
      }
      ExecuteOptions opt;
      opt.residual = sa_residual;
      opt.temperature = sa_temp;
      opt.max_len = sa_max_len;
      opt.seed = sa_seed;
      for (std::size_t s = 0; s < stages.size(); ++s) {
        opt.seed = stage_seed(sa_seed, s);
        const auto& model = models[models.size() == 1 ? 0 : s];
        const auto generated = execute_plan(stages[s], model, frames, opt);
        frames = chain_stage_frames(stages[s], frames, generated);
      }
      fs::create_directories(sa_out);
      for (std::size_t i = 0; i < frames.size(); ++i) write_png(sa_out / frame_name(i, ".png"), decode_image(frames[i]));
      std::cout << "frames=" << frames.size() << '\n';
    } else if (*me) {
      const RgbImage truth = read_image(me_truth);
      std::vector<RgbImage> preds;
      for (const auto& p : me_preds) preds.push_back(read_image(p));
      std::string csv = "candidate,psnr_db,ssim\n";
      std::vector<double> ps, ss;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        ps.push_back(psnr(truth, preds[i]));
        ss.push_back(ssim(truth, preds[i]));
        csv += me_preds[i].string() + "," + format_db(ps.back()) + "," + std::to_string(ss.back()) + "\n";
      }
      if (!me_csv.empty()) write_text_atomic(me_csv, csv);
      std::cout.precision(8);
      if (*me_cmds["best-of-n"]) {
        const BestOfN b = best_of_n(truth, preds, me_by == "ssim" ? Metric::Ssim : Metric::Psnr);
        std::cout << "best=" << me_preds[b.index].string() << " psnr=" << format_db(b.psnr) << " ssim=" << b.ssim
                  << '\n';
      } else if (*me_cmds["psnr"]) {
        const FiniteMean m = mean_skipping_infinite(ps);
        for (std::size_t i = 0; i < preds.size(); ++i) std::cout << me_preds[i].string() << " " << format_db(ps[i]) << '\n';
        std::cout << "mean_psnr=" << m.mean << " identical=" << m.skipped << '\n';
      } else {
        double sum = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
          std::cout << me_preds[i].string() << " " << ss[i] << '\n';
          sum += ss[i];
        }
        std::cout << "mean_ssim=" << sum / static_cast<double>(preds.size()) << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "dctf: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
