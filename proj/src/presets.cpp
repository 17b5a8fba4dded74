#include "dctf/presets.hpp"

#include <array>

#include "dctf/error.hpp"

namespace dctf {
namespace {

//                                name          res  {B, q, chroma}   min max
constexpr std::array<Preset, 8> kPresets = {{
    {"bair", 64, {4, 99, false}, 1, 4},
    {"k600", 64, {4, 85, true}, 5, 5},
    {"robonet64", 64, {4, 95, false}, 2, 4},
    {"robonet128", 128, {4, 95, true}, 2, 4},
    {"kitti", 64, {4, 95, false}, 5, 5},
    {"shapenet", 128, {4, 95, true}, 1, 3},
    {"objectron", 192, {8, 65, true}, 1, 3},
    {"multitask", 256, {8, 72, false}, 1, 1},
}};

}  // namespace

std::span<const Preset> presets() { return kPresets; }

const Preset& preset_by_name(std::string_view name) {
  for (const Preset& p : kPresets) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const Preset& p : kPresets) {
    if (!known.empty()) known += ", ";
    known += p.name;
  }
  throw Error("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

}  // namespace dctf
