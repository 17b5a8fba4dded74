#pragma once

#include <array>
#include <climits>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dctf/sequence.hpp"

namespace dctf {

enum class AnnotationKind { Timestamp, Camera, Format, Action };

struct Annotation {
  AnnotationKind kind = AnnotationKind::Timestamp;
  std::vector<double> values;

  bool operator==(const Annotation&) const = default;
};

// Signed offset (target time minus frame time) as a one-hot of length
// 2 * max_offset + 1; index max_offset is the target itself.
Annotation timestamp_annotation(int offset, int max_offset);
// Row-major flattened 3x3 camera matrix.
Annotation camera_annotation(const std::array<double, 9>& camera);
Annotation format_annotation(std::string_view format_id);
Annotation action_annotation(const std::array<double, 5>& action);
void validate_annotation(const Annotation& a);

// The registered image formats, in one-hot order.
std::span<const std::string_view> format_ids();

std::string_view kind_name(AnnotationKind kind);
AnnotationKind kind_from_name(std::string_view name);

struct FrameRef {
  enum class Source { Input, Generated };
  Source source = Source::Input;
  int index = 0;

  static FrameRef input(int i) { return {Source::Input, i}; }
  static FrameRef generated(int i) { return {Source::Generated, i}; }
  // "i3" / "g5"
  std::string str() const;
  static FrameRef parse(std::string_view s);

  bool operator==(const FrameRef&) const = default;
};

struct ContextEntry {
  FrameRef frame;
  Annotation annotation;
  bool padding = false;

  bool operator==(const ContextEntry&) const = default;
};

enum class GenerationMode { Parallel, Sequential };

struct ContextLimits {
  int min_frames = 1;
  int max_frames = INT_MAX;
};

struct PlanStep {
  Annotation target;
  std::vector<ContextEntry> context;
  std::optional<std::int64_t> target_time;
  // Most recent preceding context frame; residual codes decode against it.
  std::optional<FrameRef> residual_base;

  bool operator==(const PlanStep&) const = default;
};

struct GenerationPlan {
  GenerationMode mode = GenerationMode::Parallel;
  int input_count = 0;
  ContextLimits limits;
  std::vector<std::optional<std::int64_t>> input_times;
  std::vector<PlanStep> steps;

  bool operator==(const GenerationPlan& o) const {
    return mode == o.mode && input_count == o.input_count && limits.min_frames == o.limits.min_frames &&
           limits.max_frames == o.limits.max_frames && input_times == o.input_times && steps == o.steps;
  }
};

// Inputs at times start..start+n_context-1; step k targets start+n_context+k.
// Sequential contexts hold the most recent max_frames frames, generated ones
// included; parallel contexts hold the inputs only.
GenerationPlan build_video_plan(int n_context, int n_generate, GenerationMode mode, ContextLimits limits = {},
                                std::int64_t start_time = 0);

// Inputs are the frames t0..first_target-1 followed by the future anchor at
// `anchor_time`. Each step sees the preceding frames (up to max_frames - 1 of
// them) plus the anchor.
GenerationPlan build_interpolation_plan(std::int64_t t0, std::int64_t first_target, std::int64_t last_target,
                                        std::int64_t anchor_time, ContextLimits limits = {},
                                        GenerationMode mode = GenerationMode::Sequential);

GenerationPlan build_view_plan(std::span<const std::array<double, 9>> context_views,
                               std::span<const std::array<double, 9>> target_views, GenerationMode mode,
                               ContextLimits limits = {});

// One step: a single RGB input annotated "rgb", target one-hot `format_id`.
GenerationPlan build_translation_plan(std::string_view format_id);

struct TwoStagePlan {
  GenerationPlan anchors;  // low frame rate, one context frame
  GenerationPlan fill;     // high frame rate; inputs are the anchors in time order
  int frames_per_anchor = 1;

  // Frames in the final timeline: inputs of `fill` plus everything generated.
  std::size_t total_frames() const { return anchors.input_count + anchors.steps.size() + fill.steps.size(); }
};

inline constexpr int kAnchorContextCap = 15;

// Anchors: sequential video plan from one frame, n_seconds * low_fps - 1
// steps, context capped at 15. Fill: interpolation between consecutive
// anchors (previous frame + next anchor), then forward prediction for the
// frames after the last anchor, so the timeline has n_seconds * high_fps frames.
TwoStagePlan build_two_stage_plan(int n_seconds, int low_fps, int high_fps);

// Per-step seed, a pure function of (plan seed, step index).
std::uint64_t step_seed(std::uint64_t plan_seed, std::size_t step);
// Seed of stage s of a multi-stage run; stage 0 uses the run seed itself.
std::uint64_t stage_seed(std::uint64_t run_seed, std::size_t stage);

struct ExecuteOptions {
  bool residual = false;
  double temperature = 1.0;
  std::size_t max_len = 1 << 16;
  std::size_t chunk_len = 256;
  std::uint64_t seed = 0;
};

// Samples and decodes step k. `generated` must hold at least every frame the
// step's context references.
QuantizedPlanes execute_step(const GenerationPlan& plan, std::size_t k, const Predictor& predictor,
                             std::span<const QuantizedPlanes> inputs, std::span<const QuantizedPlanes> generated,
                             const ExecuteOptions& options);

// Runs every step; parallel plans fan out across threads. Returns the
// generated frames in step order.
std::vector<QuantizedPlanes> execute_plan(const GenerationPlan& plan, const Predictor& predictor,
                                          std::span<const QuantizedPlanes> inputs, const ExecuteOptions& options);

// Runs both stages and returns the full timeline ordered by time.
std::vector<QuantizedPlanes> execute_two_stage(const TwoStagePlan& plan, const Predictor& anchor_predictor,
                                               const Predictor& fill_predictor, const QuantizedPlanes& first_frame,
                                               const ExecuteOptions& options);

// Inputs for a follow-up stage: the previous stage's inputs and generated
// frames, sorted by time when every frame has one.
std::vector<QuantizedPlanes> chain_stage_frames(const GenerationPlan& plan, std::span<const QuantizedPlanes> inputs,
                                                std::span<const QuantizedPlanes> generated);

// JSON-lines manifest: a {"plan": ...} header line, then one line per step
// with target annotation, context frame ids and the step seed. Several plans
// may follow each other; each later plan's inputs are the previous stage's
// frames as given by chain_stage_frames.
std::string plan_manifest(std::span<const GenerationPlan> stages, std::uint64_t seed);
std::vector<GenerationPlan> parse_plan_manifest(const std::string& text);

}  // namespace dctf
