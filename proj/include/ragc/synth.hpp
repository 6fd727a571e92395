#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ragc/io.hpp"
#include "ragc/pointcloud.hpp"

namespace ragc {

// Synthetic indoor-like scenes, one class per layout:
//   0 floor    a single horizontal plane
//   1 boxes    a plane with 1-3 large axis-aligned boxes standing on it
//   2 spheres  a plane with 3-5 small spheres resting on it
//   3 walls    two perpendicular vertical walls
// Every scene gets a random yaw, scale and offset; points are jittered
// uniformly within `jitter` along each axis.

/// Radius multiplier that adapts the default graph/pooling schedule to the
/// point spacing of the synthetic scenes (~500 points over ~3 m).
inline constexpr double kSyntheticRadiusScale = 2.5;

struct SynthConfig {
  std::size_t points = 500;
  /// Point count varies uniformly by ± this amount.
  std::size_t point_spread = 20;
  /// Half extent of the floor / wall span in meters.
  double half_extent = 1.5;
  double jitter = 0.01;
};

inline const std::vector<std::string>& synthetic_class_names() {
  static const std::vector<std::string> names{"floor", "boxes", "spheres", "walls"};
  return names;
}

PointCloud synthesize_scene(int label, std::uint64_t seed, const SynthConfig& cfg = {});

/// `per_class` scenes of every class, interleaved by class, deterministic in
/// `seed`. File names are scene_00000.pc and so on.
Dataset generate_synthetic_dataset(std::size_t per_class, std::uint64_t seed,
                                   const SynthConfig& cfg = {});

}  // namespace ragc
