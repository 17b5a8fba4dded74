#include "dctf/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "dctf/error.hpp"
#include "dctf/parallel.hpp"

namespace dctf {
namespace {

constexpr std::string_view kFormats[] = {"rgb",         "depth",        "optical_flow",  "semantic_cityscapes",
                                         "semantic_pascal", "detection", "scene_parsing", "classification"};

std::size_t expected_size(AnnotationKind kind) {
  switch (kind) {
    case AnnotationKind::Camera:
      return 9;
    case AnnotationKind::Format:
      return std::size(kFormats);
    case AnnotationKind::Action:
      return 5;
    case AnnotationKind::Timestamp:
      break;
  }
  return 0;
}

void check_limits(const ContextLimits& l) {
  if (l.min_frames < 1 || l.max_frames < l.min_frames) {
    throw Error("context limits need 1 <= min_frames <= max_frames");
  }
}

struct Timed {
  FrameRef ref;
  std::int64_t time = 0;
  bool padding = false;
};

// Copies of the earliest frame, flagged, until the context reaches min_frames.
void pad_front(std::vector<Timed>& ctx, int min_frames) {
  if (ctx.empty()) return;
  Timed pad = ctx.front();
  pad.padding = true;
  while (static_cast<int>(ctx.size()) < min_frames) ctx.insert(ctx.begin(), pad);
}

// Shared builder for every time-indexed plan. Targets are listed in
// generation order. A step sees the frames before its target (inputs, plus
// earlier outputs in sequential mode), most recent first kept; with
// `use_future` the nearest later input also joins and takes one slot.
GenerationPlan build_temporal(const std::vector<std::int64_t>& input_times, const std::vector<std::int64_t>& targets,
                              GenerationMode mode, ContextLimits limits, bool use_future) {
  check_limits(limits);
  GenerationPlan plan;
  plan.mode = mode;
  plan.limits = limits;
  plan.input_count = static_cast<int>(input_times.size());
  for (auto t : input_times) plan.input_times.push_back(t);

  std::vector<Timed> known;
  for (std::size_t i = 0; i < input_times.size(); ++i) known.push_back({FrameRef::input(static_cast<int>(i)), input_times[i]});

  std::vector<std::vector<Timed>> contexts;
  std::int64_t max_offset = 1;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const std::int64_t t = targets[k];
    std::vector<Timed> past;
    const Timed* future = nullptr;
    for (const Timed& f : known) {
      if (f.time == t) throw Error("plan targets time " + std::to_string(t) + " which is already known");
      if (f.time < t) {
        past.push_back(f);
      } else if (use_future && f.ref.source == FrameRef::Source::Input && (!future || f.time < future->time)) {
        future = &f;
      }
    }
    std::stable_sort(past.begin(), past.end(), [](const Timed& a, const Timed& b) { return a.time < b.time; });
    const std::size_t room = static_cast<std::size_t>(limits.max_frames) - (future ? 1 : 0);
    if (future && room == 0) throw Error("max_frames must leave room for a preceding frame and the anchor");
    if (past.size() > room) past.erase(past.begin(), past.end() - static_cast<std::ptrdiff_t>(room));
    if (future) past.push_back(*future);
    pad_front(past, limits.min_frames);
    for (const Timed& f : past) max_offset = std::max<std::int64_t>(max_offset, std::llabs(t - f.time));
    contexts.push_back(std::move(past));
    if (mode == GenerationMode::Sequential) known.push_back({FrameRef::generated(static_cast<int>(k)), t});
  }
  if (max_offset > (1 << 20)) throw Error("timestamp offsets too large for a one-hot");

  const int m = static_cast<int>(max_offset);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const std::int64_t t = targets[k];
    PlanStep step;
    step.target = timestamp_annotation(0, m);
    step.target_time = t;
    const Timed* base = nullptr;
    for (const Timed& f : contexts[k]) {
      step.context.push_back({f.ref, timestamp_annotation(static_cast<int>(t - f.time), m), f.padding});
      if (!f.padding && f.time < t && (!base || f.time >= base->time)) base = &f;
    }
    if (base) step.residual_base = base->ref;
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

void validate_plan(const GenerationPlan& plan) {
  check_limits(plan.limits);
  if (plan.input_count < 0) throw Error("negative input count");
  if (!plan.input_times.empty() && plan.input_times.size() != static_cast<std::size_t>(plan.input_count)) {
    throw Error("input_times must list one entry per input");
  }
  auto check_ref = [&](const FrameRef& r, std::size_t k) {
    if (r.index < 0) throw Error("negative frame index in step " + std::to_string(k));
    if (r.source == FrameRef::Source::Input) {
      if (r.index >= plan.input_count) throw Error("step " + std::to_string(k) + " references missing " + r.str());
    } else {
      if (plan.mode == GenerationMode::Parallel) {
        throw Error("parallel plan step " + std::to_string(k) + " references generated frame " + r.str());
      }
      if (static_cast<std::size_t>(r.index) >= k) {
        throw Error("step " + std::to_string(k) + " references " + r.str() + " before it exists");
      }
    }
  };
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const PlanStep& s = plan.steps[k];
    validate_annotation(s.target);
    for (const ContextEntry& e : s.context) {
      check_ref(e.frame, k);
      validate_annotation(e.annotation);
    }
    if (s.residual_base) check_ref(*s.residual_base, k);
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

const QuantizedPlanes& resolve(const FrameRef& r, std::span<const QuantizedPlanes> inputs,
                               std::span<const QuantizedPlanes> generated) {
  const auto i = static_cast<std::size_t>(r.index);
  if (r.source == FrameRef::Source::Input) {
    if (i >= inputs.size()) throw Error("missing input frame " + r.str());
    return inputs[i];
  }
  if (i >= generated.size()) throw Error("generated frame " + r.str() + " is not available yet");
  return generated[i];
}

nlohmann::json annotation_json(const Annotation& a) {
  return {{"kind", std::string(kind_name(a.kind))}, {"values", a.values}};
}

Annotation annotation_from(const nlohmann::json& j) {
  Annotation a;
  a.kind = kind_from_name(j.at("kind").get<std::string>());
  a.values = j.at("values").get<std::vector<double>>();
  validate_annotation(a);
  return a;
}

std::string_view mode_name(GenerationMode m) { return m == GenerationMode::Parallel ? "parallel" : "sequential"; }

}  // namespace

Annotation timestamp_annotation(int offset, int max_offset) {
  if (max_offset < 0 || offset < -max_offset || offset > max_offset) {
    throw Error("timestamp offset " + std::to_string(offset) + " outside [-" + std::to_string(max_offset) + ", " +
                std::to_string(max_offset) + "]");
  }
  Annotation a{AnnotationKind::Timestamp, std::vector<double>(2 * static_cast<std::size_t>(max_offset) + 1, 0.0)};
  a.values[static_cast<std::size_t>(offset + max_offset)] = 1.0;
  return a;
}

Annotation camera_annotation(const std::array<double, 9>& camera) {
  return {AnnotationKind::Camera, std::vector<double>(camera.begin(), camera.end())};
}

Annotation format_annotation(std::string_view format_id) {
  const auto ids = format_ids();
  const auto it = std::find(ids.begin(), ids.end(), format_id);
  if (it == ids.end()) {
    std::string known;
    for (auto id : ids) known += (known.empty() ? "" : ", ") + std::string(id);
    throw Error("unknown format '" + std::string(format_id) + "' (known: " + known + ")");
  }
  Annotation a{AnnotationKind::Format, std::vector<double>(ids.size(), 0.0)};
  a.values[static_cast<std::size_t>(it - ids.begin())] = 1.0;
  return a;
}

Annotation action_annotation(const std::array<double, 5>& action) {
  return {AnnotationKind::Action, std::vector<double>(action.begin(), action.end())};
}

void validate_annotation(const Annotation& a) {
  for (double v : a.values) {
    if (!std::isfinite(v)) throw Error("annotation values must be finite");
  }
  if (a.kind == AnnotationKind::Timestamp || a.kind == AnnotationKind::Format) {
    if (a.kind == AnnotationKind::Timestamp && a.values.size() % 2 == 0) {
      throw Error("timestamp one-hot must have odd length");
    }
    if (a.kind == AnnotationKind::Format && a.values.size() != expected_size(a.kind)) {
      throw Error("format one-hot must have " + std::to_string(expected_size(a.kind)) + " entries");
    }
    const auto ones = std::count(a.values.begin(), a.values.end(), 1.0);
    const auto zeros = std::count(a.values.begin(), a.values.end(), 0.0);
    if (ones != 1 || ones + zeros != static_cast<std::ptrdiff_t>(a.values.size())) {
      throw Error(std::string(kind_name(a.kind)) + " annotation is not one-hot");
    }
    return;
  }
  if (a.values.size() != expected_size(a.kind)) {
    throw Error(std::string(kind_name(a.kind)) + " annotation needs " + std::to_string(expected_size(a.kind)) +
                " values, got " + std::to_string(a.values.size()));
  }
}

std::span<const std::string_view> format_ids() { return kFormats; }

std::string_view kind_name(AnnotationKind kind) {
  switch (kind) {
    case AnnotationKind::Timestamp:
      return "timestamp";
    case AnnotationKind::Camera:
      return "camera";
    case AnnotationKind::Format:
      return "format";
    case AnnotationKind::Action:
      return "action";
  }
  return "?";
}

AnnotationKind kind_from_name(std::string_view name) {
  for (auto k : {AnnotationKind::Timestamp, AnnotationKind::Camera, AnnotationKind::Format, AnnotationKind::Action}) {
    if (kind_name(k) == name) return k;
  }
  throw Error("unknown annotation kind '" + std::string(name) + "'");
}

std::string FrameRef::str() const { return (source == Source::Input ? "i" : "g") + std::to_string(index); }

FrameRef FrameRef::parse(std::string_view s) {
  if (s.size() < 2 || (s[0] != 'i' && s[0] != 'g')) throw Error("bad frame id '" + std::string(s) + "'");
  int v = 0;
  for (char c : s.substr(1)) {
    if (c < '0' || c > '9' || v > (1 << 26)) throw Error("bad frame id '" + std::string(s) + "'");
    v = v * 10 + (c - '0');
  }
  return {s[0] == 'i' ? Source::Input : Source::Generated, v};
}

GenerationPlan build_video_plan(int n_context, int n_generate, GenerationMode mode, ContextLimits limits,
                                std::int64_t start_time) {
  if (n_context < 1) throw Error("video prediction needs at least one context frame");
  if (n_generate < 0) throw Error("negative number of frames to generate");
  std::vector<std::int64_t> inputs, targets;
  for (int i = 0; i < n_context; ++i) inputs.push_back(start_time + i);
  for (int k = 0; k < n_generate; ++k) targets.push_back(start_time + n_context + k);
  return build_temporal(inputs, targets, mode, limits, false);
}

GenerationPlan build_interpolation_plan(std::int64_t t0, std::int64_t first_target, std::int64_t last_target,
                                        std::int64_t anchor_time, ContextLimits limits, GenerationMode mode) {
  if (!(t0 < first_target && first_target <= last_target && last_target < anchor_time)) {
    throw Error("interpolation needs t0 < first target <= last target < anchor time");
  }
  if (limits.max_frames < 2) throw Error("interpolation needs max_frames >= 2");
  std::vector<std::int64_t> inputs, targets;
  for (std::int64_t t = t0; t < first_target; ++t) inputs.push_back(t);
  inputs.push_back(anchor_time);
  for (std::int64_t t = first_target; t <= last_target; ++t) targets.push_back(t);
  return build_temporal(inputs, targets, mode, limits, true);
}

GenerationPlan build_view_plan(std::span<const std::array<double, 9>> context_views,
                               std::span<const std::array<double, 9>> target_views, GenerationMode mode,
                               ContextLimits limits) {
  check_limits(limits);
  if (target_views.empty()) throw Error("view synthesis needs at least one target view");
  if (context_views.empty()) throw Error("view synthesis needs at least one context view");
  GenerationPlan plan;
  plan.mode = mode;
  plan.limits = limits;
  plan.input_count = static_cast<int>(context_views.size());
  plan.input_times.assign(context_views.size(), std::nullopt);

  std::vector<ContextEntry> known;
  for (std::size_t i = 0; i < context_views.size(); ++i) {
    known.push_back({FrameRef::input(static_cast<int>(i)), camera_annotation(context_views[i])});
  }
  for (std::size_t k = 0; k < target_views.size(); ++k) {
    PlanStep step;
    step.target = camera_annotation(target_views[k]);
    const std::size_t keep = std::min<std::size_t>(known.size(), static_cast<std::size_t>(limits.max_frames));
    step.context.assign(known.end() - static_cast<std::ptrdiff_t>(keep), known.end());
    ContextEntry pad = step.context.front();
    pad.padding = true;
    while (static_cast<int>(step.context.size()) < limits.min_frames) step.context.insert(step.context.begin(), pad);
    plan.steps.push_back(std::move(step));
    if (mode == GenerationMode::Sequential) {
      known.push_back({FrameRef::generated(static_cast<int>(k)), camera_annotation(target_views[k])});
    }
  }
  return plan;
}

GenerationPlan build_translation_plan(std::string_view format_id) {
  GenerationPlan plan;
  plan.mode = GenerationMode::Parallel;
  plan.input_count = 1;
  plan.input_times = {std::nullopt};
  PlanStep step;
  step.target = format_annotation(format_id);
  step.context.push_back({FrameRef::input(0), format_annotation("rgb")});
  plan.steps.push_back(std::move(step));
  return plan;
}

TwoStagePlan build_two_stage_plan(int n_seconds, int low_fps, int high_fps) {
  if (n_seconds < 1 || low_fps < 1 || high_fps < 1) throw Error("two-stage plan needs positive duration and rates");
  if (high_fps < low_fps || high_fps % low_fps != 0) {
    throw Error("high frame rate must be a multiple of the low frame rate");
  }
  TwoStagePlan out;
  out.frames_per_anchor = high_fps / low_fps;
  const int n_anchors = n_seconds * low_fps;
  out.anchors = build_video_plan(1, n_anchors - 1, GenerationMode::Sequential, {1, kAnchorContextCap});

  const std::int64_t r = out.frames_per_anchor;
  std::vector<std::int64_t> inputs, targets;
  for (int j = 0; j < n_anchors; ++j) inputs.push_back(j * r);
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(n_anchors) * r; ++t) {
    if (t % r != 0) targets.push_back(t);
  }
  // Previous frame plus the next anchor; past the last anchor only the two
  // most recent frames.
  out.fill = build_temporal(inputs, targets, GenerationMode::Sequential, {1, 2}, true);
  return out;
}

std::uint64_t step_seed(std::uint64_t plan_seed, std::size_t step) {
  return splitmix64(plan_seed ^ splitmix64(static_cast<std::uint64_t>(step) + 1));
}

std::uint64_t stage_seed(std::uint64_t run_seed, std::size_t stage) {
  return stage == 0 ? run_seed : splitmix64(run_seed ^ (0x5354414745ull + stage - 1));
}

QuantizedPlanes execute_step(const GenerationPlan& plan, std::size_t k, const Predictor& predictor,
                             std::span<const QuantizedPlanes> inputs, std::span<const QuantizedPlanes> generated,
                             const ExecuteOptions& options) {
  if (k >= plan.steps.size()) throw Error("step index out of range");
  if (inputs.empty()) throw Error("a plan needs at least one input frame to fix the geometry");
  const PlanStep& step = plan.steps[k];
  const QuantizedPlanes& ref = inputs.front();
  const Geometry geometry(ref.config, ref.height, ref.width);

  Conditioning cond;
  cond.target_annotation = step.target.values;
  for (const ContextEntry& e : step.context) {
    cond.frames.push_back({dct_image_of(resolve(e.frame, inputs, generated)), e.annotation.values, e.padding});
  }

  SampleOptions so;
  so.temperature = options.temperature;
  so.max_len = options.max_len;
  so.chunk_len = options.chunk_len;
  so.seed = step_seed(options.seed, k);

  const bool residual = options.residual && step.residual_base.has_value();
  SparseSequence seq = sample_sequence(predictor, geometry, residual, cond, so);
  if (residual) return residual_decode(seq, resolve(*step.residual_base, inputs, generated));
  return from_sparse(seq);
}

std::vector<QuantizedPlanes> execute_plan(const GenerationPlan& plan, const Predictor& predictor,
                                          std::span<const QuantizedPlanes> inputs, const ExecuteOptions& options) {
  validate_plan(plan);
  if (inputs.size() != static_cast<std::size_t>(plan.input_count)) {
    throw Error("plan expects " + std::to_string(plan.input_count) + " input frames, got " +
                std::to_string(inputs.size()));
  }
  for (const QuantizedPlanes& q : inputs) {
    if (q.config.block_size != inputs.front().config.block_size || q.config.quality != inputs.front().config.quality ||
        q.config.chroma_downsampled != inputs.front().config.chroma_downsampled || q.height != inputs.front().height ||
        q.width != inputs.front().width) {
      throw Error("input frames disagree on geometry");
    }
  }
  std::vector<QuantizedPlanes> out(plan.steps.size());
  if (plan.mode == GenerationMode::Parallel) {
    parallel_for(plan.steps.size(),
                 [&](std::size_t k) { out[k] = execute_step(plan, k, predictor, inputs, {}, options); });
  } else {
    for (std::size_t k = 0; k < plan.steps.size(); ++k) {
      out[k] = execute_step(plan, k, predictor, inputs, std::span(out.data(), k), options);
    }
  }
  return out;
}

std::vector<QuantizedPlanes> chain_stage_frames(const GenerationPlan& plan, std::span<const QuantizedPlanes> inputs,
                                                std::span<const QuantizedPlanes> generated) {
  struct Item {
    std::optional<std::int64_t> time;
    const QuantizedPlanes* frame;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    items.push_back({i < plan.input_times.size() ? plan.input_times[i] : std::nullopt, &inputs[i]});
  }
  for (std::size_t k = 0; k < generated.size(); ++k) {
    items.push_back({k < plan.steps.size() ? plan.steps[k].target_time : std::nullopt, &generated[k]});
  }
  if (std::all_of(items.begin(), items.end(), [](const Item& it) { return it.time.has_value(); })) {
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return *a.time < *b.time; });
  }
  std::vector<QuantizedPlanes> out;
  out.reserve(items.size());
  for (const Item& it : items) out.push_back(*it.frame);
  return out;
}

std::vector<QuantizedPlanes> execute_two_stage(const TwoStagePlan& plan, const Predictor& anchor_predictor,
                                               const Predictor& fill_predictor, const QuantizedPlanes& first_frame,
                                               const ExecuteOptions& options) {
  const std::vector<QuantizedPlanes> first{first_frame};
  const auto anchors = execute_plan(plan.anchors, anchor_predictor, first, options);
  const auto fill_inputs = chain_stage_frames(plan.anchors, first, anchors);
  ExecuteOptions fill_options = options;
  fill_options.seed = stage_seed(options.seed, 1);
  const auto filled = execute_plan(plan.fill, fill_predictor, fill_inputs, fill_options);
  return chain_stage_frames(plan.fill, fill_inputs, filled);
}

std::string plan_manifest(std::span<const GenerationPlan> stages, std::uint64_t seed) {
  std::ostringstream out;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const GenerationPlan& plan = stages[s];
    validate_plan(plan);
    nlohmann::json times = nlohmann::json::array();
    for (const auto& t : plan.input_times) times.push_back(t ? nlohmann::json(*t) : nlohmann::json(nullptr));
    const std::uint64_t seed_s = stage_seed(seed, s);
    nlohmann::json header = {{"plan",
                              {{"stage", s},
                               {"mode", std::string(mode_name(plan.mode))},
                               {"inputs", plan.input_count},
                               {"min_frames", plan.limits.min_frames},
                               {"max_frames", plan.limits.max_frames},
                               {"input_times", times},
                               {"steps", plan.steps.size()}}}};
    out << header.dump() << '\n';
    for (std::size_t k = 0; k < plan.steps.size(); ++k) {
      const PlanStep& st = plan.steps[k];
      nlohmann::json ctx = nlohmann::json::array();
      for (const ContextEntry& e : st.context) {
        ctx.push_back({{"frame", e.frame.str()}, {"annotation", annotation_json(e.annotation)}, {"padding", e.padding}});
      }
      nlohmann::json line = {{"step", k},
                             {"target", annotation_json(st.target)},
                             {"target_time", st.target_time ? nlohmann::json(*st.target_time) : nlohmann::json(nullptr)},
                             {"context", ctx},
                             {"residual_base", st.residual_base ? nlohmann::json(st.residual_base->str())
                                                                : nlohmann::json(nullptr)},
                             {"seed", step_seed(seed_s, k)}};
      out << line.dump() << '\n';
    }
  }
  return out.str();
}

std::vector<GenerationPlan> parse_plan_manifest(const std::string& text) {
  std::vector<GenerationPlan> plans;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::size_t pending = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "plan line " + std::to_string(line_no) + ": ";
    try {
      const auto j = nlohmann::json::parse(line);
      if (pending == 0) {
        const auto& h = j.at("plan");
        GenerationPlan p;
        const auto mode = h.at("mode").get<std::string>();
        if (mode == "parallel") {
          p.mode = GenerationMode::Parallel;
        } else if (mode == "sequential") {
          p.mode = GenerationMode::Sequential;
        } else {
          throw Error("unknown mode '" + mode + "'");
        }
        p.input_count = h.at("inputs").get<int>();
        p.limits = {h.at("min_frames").get<int>(), h.at("max_frames").get<int>()};
        for (const auto& t : h.at("input_times")) {
          p.input_times.push_back(t.is_null() ? std::nullopt : std::optional<std::int64_t>(t.get<std::int64_t>()));
        }
        pending = h.at("steps").get<std::size_t>();
        plans.push_back(std::move(p));
        continue;
      }
      GenerationPlan& p = plans.back();
      if (j.at("step").get<std::size_t>() != p.steps.size()) throw Error("steps out of order");
      PlanStep st;
      st.target = annotation_from(j.at("target"));
      if (!j.at("target_time").is_null()) st.target_time = j["target_time"].get<std::int64_t>();
      for (const auto& c : j.at("context")) {
        st.context.push_back({FrameRef::parse(c.at("frame").get<std::string>()), annotation_from(c.at("annotation")),
                              c.value("padding", false)});
      }
      if (!j.at("residual_base").is_null()) st.residual_base = FrameRef::parse(j["residual_base"].get<std::string>());
      p.steps.push_back(std::move(st));
      --pending;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + e.what());
    } catch (const FormatError&) {
      throw;
    } catch (const Error& e) {
      throw FormatError(where + e.what());
    }
  }
  if (pending != 0) throw FormatError("plan file ends before its last step");
  for (const auto& p : plans) {
    try {
      validate_plan(p);
    } catch (const Error& e) {
      throw FormatError(std::string("invalid plan: ") + e.what());
    }
  }
  return plans;
}

}  // namespace dctf
