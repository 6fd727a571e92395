#include "ragc/graph.hpp"

#include <algorithm>
#include <cmath>

#include "ragc/error.hpp"
#include "ragc/parallel.hpp"
#include "ragc/spatial_index.hpp"

namespace ragc {

std::size_t attr_width(EdgeAttrMode mode) {
  return mode == EdgeAttrMode::kBoth ? 6 : 3;
}

std::string to_string(EdgeAttrMode mode) {
  switch (mode) {
    case EdgeAttrMode::kCartesian:
      return "cartesian";
    case EdgeAttrMode::kSpherical:
      return "spherical";
    case EdgeAttrMode::kBoth:
      return "both";
  }
  return "?";
}

EdgeAttrMode parse_attr_mode(const std::string& name) {
  if (name == "cartesian") return EdgeAttrMode::kCartesian;
  if (name == "spherical") return EdgeAttrMode::kSpherical;
  if (name == "both") return EdgeAttrMode::kBoth;
  throw ConfigError("unknown edge attribute mode '" + name +
                    "' (expected cartesian, spherical or both)");
}

void EdgePolicy::validate() const {
  if (kind == Kind::kRadius && !(radius > 0.0 && std::isfinite(radius))) {
    throw ConfigError("radius edge policy needs r_g > 0");
  }
  if (kind == Kind::kKnn && k == 0) throw ConfigError("knn edge policy needs k >= 1");
}

void GeometricGraph::validate() const {
  const std::size_t n = node_count();
  if (in_offsets.size() != n + 1 || batch_id.size() != n ||
      destinations.size() != sources.size()) {
    throw StructuralError("graph arrays have inconsistent sizes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (in_degree(i) == 0) {
      throw StructuralError("node " + std::to_string(i) + " has no incoming edge");
    }
    if (i > 0 && batch_id[i] < batch_id[i - 1]) {
      throw StructuralError("batch ids must be non-decreasing");
    }
    for (auto e = in_offsets[i]; e < in_offsets[i + 1]; ++e) {
      if (sources[e] >= n || batch_id[sources[e]] != batch_id[i]) {
        throw StructuralError("edge " + std::to_string(e) + " crosses samples");
      }
    }
  }
}

std::vector<double> edge_attributes(const Vec3& delta, EdgeAttrMode mode) {
  std::vector<double> out;
  out.reserve(6);
  if (mode != EdgeAttrMode::kSpherical) {
    out.insert(out.end(), {delta.x, delta.y, delta.z});
  }
  if (mode != EdgeAttrMode::kCartesian) {
    const double rho = delta.norm();
    if (rho == 0.0) {
      out.insert(out.end(), {0.0, 0.0, 0.0});
    } else {
      const double c = std::clamp(delta.z / rho, -1.0, 1.0);
      out.insert(out.end(), {rho, std::atan2(delta.y, delta.x), std::acos(c)});
    }
  }
  return out;
}

namespace {

double knn_cell_size(std::span<const Vec3> pts, std::size_t k) {
  Vec3 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  if (!(extent > 0.0)) return 1.0;
  // Surface-like clouds: about k points per cell on a sqrt(N) grid.
  const double cells = std::max(1.0, std::ceil(std::sqrt(static_cast<double>(pts.size()) /
                                                         static_cast<double>(k))));
  return extent / cells;
}

}  // namespace

GeometricGraph connect_nodes(std::vector<Vec3> positions,
                             std::vector<std::size_t> batch_id,
                             std::size_t sample_count, const EdgePolicy& policy,
                             EdgeAttrMode mode) {
  policy.validate();
  const std::size_t n = positions.size();
  if (n == 0) throw DataError("cannot build a graph over an empty point set");
  if (batch_id.size() != n) throw DimensionError("batch_id size differs from node count");

  // Neighbor lists per node, computed sample by sample.
  std::vector<std::vector<std::size_t>> neigh(n);
  std::size_t begin = 0;
  while (begin < n) {
    std::size_t end = begin + 1;
    while (end < n && batch_id[end] == batch_id[begin]) ++end;
    if (end < n && batch_id[end] < batch_id[begin]) {
      throw StructuralError("nodes of one sample must be contiguous");
    }
    if (batch_id[begin] >= sample_count) {
      throw StructuralError("batch id " + std::to_string(batch_id[begin]) +
                            " exceeds sample count");
    }
    const std::span<const Vec3> pts(positions.data() + begin, end - begin);
    const double cell = policy.kind == EdgePolicy::Kind::kRadius
                            ? policy.radius
                            : knn_cell_size(pts, policy.k);
    const GridIndex index(pts, cell);
    parallel_for(pts.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t local = lo; local < hi; ++local) {
        auto list = policy.kind == EdgePolicy::Kind::kRadius
                        ? index.radius_neighbors(local, policy.radius)
                        : index.knn_neighbors(local, policy.k);
        std::sort(list.begin(), list.end());
        for (auto& j : list) j += begin;
        neigh[begin + local] = std::move(list);
      }
    }, 16);
    begin = end;
  }

  GeometricGraph g;
  g.in_offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.in_offsets[i + 1] = g.in_offsets[i] + neigh[i].size();
  const std::size_t edges = g.in_offsets[n];
  g.sources.reserve(edges);
  g.destinations.reserve(edges);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : neigh[i]) {
      g.sources.push_back(j);
      g.destinations.push_back(i);
    }
  }
  const std::size_t a = attr_width(mode);
  std::vector<double> attrs(edges * a);
  parallel_for(edges, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t e = lo; e < hi; ++e) {
      const auto v = edge_attributes(positions[g.sources[e]] - positions[g.destinations[e]], mode);
      std::copy(v.begin(), v.end(), attrs.begin() + static_cast<std::ptrdiff_t>(e * a));
    }
  });
  g.edge_attrs = Tensor({edges, a}, std::move(attrs));
  g.positions = std::move(positions);
  g.batch_id = std::move(batch_id);
  g.sample_count = sample_count;
  return g;
}

GeometricGraph construct_graph(const PointCloud& pc, const EdgePolicy& policy,
                               EdgeAttrMode mode) {
  return construct_graph(std::span<const PointCloud>(&pc, 1), policy, mode);
}

GeometricGraph construct_graph(std::span<const PointCloud> clouds,
                               const EdgePolicy& policy, EdgeAttrMode mode) {
  if (clouds.empty()) throw DataError("cannot build a graph from an empty batch");
  std::vector<Vec3> positions;
  std::vector<std::size_t> batch;
  for (std::size_t b = 0; b < clouds.size(); ++b) {
    if (clouds[b].empty()) {
      throw DataError("point cloud " + std::to_string(b) + " of the batch is empty");
    }
    positions.insert(positions.end(), clouds[b].points.begin(), clouds[b].points.end());
    batch.insert(batch.end(), clouds[b].size(), b);
  }
  const std::size_t n = positions.size();
  GeometricGraph g = connect_nodes(std::move(positions), std::move(batch), clouds.size(),
                                   policy, mode);
  g.node_features = Tensor::filled({n, 1}, 1.0);
  return g;
}

}  // namespace ragc
