#include "ragc/pool.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "ragc/error.hpp"
#include "ragc/ops.hpp"

namespace ragc {

std::string to_string(PoolMode mode) { return mode == PoolMode::kMax ? "max" : "avg"; }

namespace {
struct VoxelKey {
  std::size_t batch;
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};
struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = k.batch * 0x9E3779B97F4A7C15ull;
    for (auto c : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(c) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};
}  // namespace

VoxelAssignment voxel_assign(std::span<const Vec3> positions,
                             std::span<const std::size_t> batch_id, double r_p) {
  if (!(r_p > 0.0) || !std::isfinite(r_p)) {
    throw ConfigError("pooling radius must be positive, got " + std::to_string(r_p));
  }
  if (positions.size() != batch_id.size()) {
    throw DimensionError("voxel_assign: positions and batch ids differ in length");
  }
  VoxelAssignment out;
  out.cluster_of_node.resize(positions.size());
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot;
  std::vector<Vec3> sums;
  std::vector<double> counts;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Vec3& p = positions[i];
    const VoxelKey key{batch_id[i], static_cast<std::int64_t>(std::floor(p.x / r_p)),
                       static_cast<std::int64_t>(std::floor(p.y / r_p)),
                       static_cast<std::int64_t>(std::floor(p.z / r_p))};
    auto [it, inserted] = slot.try_emplace(key, sums.size());
    if (inserted) {
      sums.push_back({});
      counts.push_back(0.0);
      out.batch_id.push_back(batch_id[i]);
    }
    sums[it->second] = sums[it->second] + p;
    counts[it->second] += 1.0;
    out.cluster_of_node[i] = it->second;
  }
  out.centroids.resize(sums.size());
  for (std::size_t c = 0; c < sums.size(); ++c) {
    out.centroids[c] = {sums[c].x / counts[c], sums[c].y / counts[c], sums[c].z / counts[c]};
  }
  return out;
}

GeometricGraph voxel_downsample(Tape& tape, const GeometricGraph& g, double r_p,
                                PoolMode mode, const EdgePolicy& next_policy,
                                EdgeAttrMode attr_mode) {
  VoxelAssignment va = voxel_assign(g.positions, g.batch_id, r_p);
  const std::size_t clusters = va.cluster_count();
  Tensor pooled = mode == PoolMode::kMax
                      ? segment_max(tape, g.node_features, va.cluster_of_node, clusters)
                      : segment_mean(tape, g.node_features, va.cluster_of_node, clusters);
  GeometricGraph out = connect_nodes(std::move(va.centroids), std::move(va.batch_id),
                                     g.sample_count, next_policy, attr_mode);
  out.node_features = std::move(pooled);
  return out;
}

Tensor global_average_readout(Tape& tape, const GeometricGraph& g) {
  return segment_mean(tape, g.node_features, g.batch_id, g.sample_count);
}

}  // namespace ragc
