#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ragc/graph.hpp"

namespace ragc {

enum class PoolMode { kMax, kAvg };

std::string to_string(PoolMode mode);

/// Result of binning nodes into voxels of edge r_p, per sample.
struct VoxelAssignment {
  /// Output node of every input node.
  std::vector<std::size_t> cluster_of_node;
  std::vector<Vec3> centroids;
  std::vector<std::size_t> batch_id;
  std::size_t cluster_count() const { return centroids.size(); }
};

/// Floor binning anchored at the world origin. Clusters are numbered in
/// order of their first member, so samples stay contiguous.
VoxelAssignment voxel_assign(std::span<const Vec3> positions,
                             std::span<const std::size_t> batch_id, double r_p);

/// Replaces the nodes of every occupied voxel by their centroid, pools the
/// member features (max or mean; differentiable), and rebuilds edges over the
/// centroids with `next_policy`.
GeometricGraph voxel_downsample(Tape& tape, const GeometricGraph& g, double r_p,
                                PoolMode mode, const EdgePolicy& next_policy,
                                EdgeAttrMode attr_mode);

inline GeometricGraph voxel_downsample(Tape& tape, const GeometricGraph& g, double r_p,
                                       PoolMode mode, double r_g_next,
                                       EdgeAttrMode attr_mode) {
  return voxel_downsample(tape, g, r_p, mode, EdgePolicy::with_radius(r_g_next), attr_mode);
}

/// Per-sample mean of the node features: [sample_count × d].
Tensor global_average_readout(Tape& tape, const GeometricGraph& g);

}  // namespace ragc
