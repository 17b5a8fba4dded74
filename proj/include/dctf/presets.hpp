#pragma once

#include <span>
#include <string>
#include <string_view>

#include "dctf/blockdct.hpp"

namespace dctf {

// Per-domain data settings: resolution, codec and context-frame range.
struct Preset {
  std::string_view name;
  int resolution;
  CodecConfig codec;
  int min_context;
  int max_context;
};

std::span<const Preset> presets();
// Throws Error listing the registered names when `name` is unknown.
const Preset& preset_by_name(std::string_view name);

}  // namespace dctf
