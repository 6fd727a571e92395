#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ragc/pointcloud.hpp"
#include "ragc/tensor.hpp"

namespace ragc {

enum class EdgeAttrMode { kCartesian, kSpherical, kBoth };

std::size_t attr_width(EdgeAttrMode mode);
std::string to_string(EdgeAttrMode mode);
EdgeAttrMode parse_attr_mode(const std::string& name);

/// Rule producing the directed neighbor edges of every node.
struct EdgePolicy {
  enum class Kind { kRadius, kKnn };
  Kind kind = Kind::kRadius;
  double radius = 0.0;
  std::size_t k = 0;

  static EdgePolicy with_radius(double r) { return {Kind::kRadius, r, 0}; }
  static EdgePolicy with_knn(std::size_t k) { return {Kind::kKnn, 0.0, k}; }
  void validate() const;
};

/// Disjoint union of per-sample graphs.
///
/// Edges are stored per destination: the sources of node i are
/// sources[in_offsets[i] .. in_offsets[i+1]), ascending, and row e of
/// edge_attrs describes edge (sources[e] -> destination). Nodes of one sample
/// are contiguous and batch_id is non-decreasing.
struct GeometricGraph {
  std::vector<Vec3> positions;
  Tensor node_features;
  std::vector<std::size_t> in_offsets;
  std::vector<std::size_t> sources;
  std::vector<std::size_t> destinations;
  Tensor edge_attrs;
  std::vector<std::size_t> batch_id;
  std::size_t sample_count = 0;

  std::size_t node_count() const { return positions.size(); }
  std::size_t edge_count() const { return sources.size(); }
  std::size_t in_degree(std::size_t i) const { return in_offsets[i + 1] - in_offsets[i]; }

  /// Throws StructuralError when an invariant is broken.
  void validate() const;
};

/// Attribute vector of an edge with offset delta = source - destination.
/// cartesian: (dx, dy, dz); spherical: (rho, atan2(dy, dx), acos(dz / rho))
/// with rho = 0 mapped to zeros; both: cartesian followed by spherical.
std::vector<double> edge_attributes(const Vec3& delta, EdgeAttrMode mode);

/// Connects nodes of each sample under `policy` (self-loop always included)
/// and computes edge attributes. Node features are left undefined.
GeometricGraph connect_nodes(std::vector<Vec3> positions,
                             std::vector<std::size_t> batch_id,
                             std::size_t sample_count, const EdgePolicy& policy,
                             EdgeAttrMode mode);

/// Single-cloud graph with constant node feature 1 (width 1).
GeometricGraph construct_graph(const PointCloud& pc, const EdgePolicy& policy,
                               EdgeAttrMode mode);

/// Batched form: one disjoint-union graph, sample b gets batch_id b.
GeometricGraph construct_graph(std::span<const PointCloud> clouds,
                               const EdgePolicy& policy, EdgeAttrMode mode);

}  // namespace ragc
