#include "ragc/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "ragc/error.hpp"

namespace ragc {

namespace {
// Slack so that a radius that is an exact multiple of the cell size never
// loses a ring to rounding in p / cell_size.
constexpr double kRingSlack = 1e-9;
}  // namespace

GridIndex::GridIndex(std::span<const Vec3> points, double cell_size)
    : points_(points), cell_size_(cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw ConfigError("grid cell size must be positive and finite, got " +
                      std::to_string(cell_size));
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].finite()) {
      throw DataError("non-finite point at index " + std::to_string(i));
    }
    const CellKey key = cell_of(points[i]);
    if (i == 0) {
      min_cell_ = max_cell_ = key;
    } else {
      for (int a = 0; a < 3; ++a) {
        min_cell_[a] = std::min(min_cell_[a], key[a]);
        max_cell_[a] = std::max(max_cell_[a], key[a]);
      }
    }
    cells_[key].push_back(i);
  }
}

CellKey GridIndex::cell_of(const Vec3& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x / cell_size_)),
          static_cast<std::int64_t>(std::floor(p.y / cell_size_)),
          static_cast<std::int64_t>(std::floor(p.z / cell_size_))};
}

std::span<const std::size_t> GridIndex::cell(const CellKey& key) const {
  const auto it = cells_.find(key);
  if (it == cells_.end()) return {};
  return it->second;
}

std::vector<std::size_t> GridIndex::radius_neighbors(std::size_t i, double r) const {
  if (!(r > 0.0)) throw ConfigError("query radius must be positive");
  const Vec3& q = points_[i];
  const CellKey qc = cell_of(q);
  const auto ring = static_cast<std::int64_t>(std::ceil(r / cell_size_ * (1.0 + kRingSlack)));
  const double r2 = r * r;

  CellKey lo, hi;
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max(qc[a] - ring, min_cell_[a]);
    hi[a] = std::min(qc[a] + ring, max_cell_[a]);
  }
  std::vector<std::size_t> out;
  for (auto x = lo[0]; x <= hi[0]; ++x) {
    for (auto y = lo[1]; y <= hi[1]; ++y) {
      for (auto z = lo[2]; z <= hi[2]; ++z) {
        for (auto j : cell({x, y, z})) {
          if (squared_distance(points_[j], q) <= r2) out.push_back(j);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> GridIndex::knn_neighbors(std::size_t i, std::size_t k,
                                                  bool* truncated) const {
  if (k == 0) throw ConfigError("k must be positive");
  const Vec3& q = points_[i];
  const CellKey qc = cell_of(q);
  std::int64_t max_ring = 0;
  for (int a = 0; a < 3; ++a) {
    max_ring = std::max({max_ring, qc[a] - min_cell_[a], max_cell_[a] - qc[a]});
  }

  std::vector<std::pair<double, std::size_t>> cand;
  const auto visit = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
    if (x < min_cell_[0] || x > max_cell_[0] || y < min_cell_[1] || y > max_cell_[1] ||
        z < min_cell_[2] || z > max_cell_[2]) {
      return;
    }
    for (auto j : cell({x, y, z})) {
      if (j != i) cand.emplace_back(squared_distance(points_[j], q), j);
    }
  };

  for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
    for (auto dx = -ring; dx <= ring; ++dx) {
      for (auto dy = -ring; dy <= ring; ++dy) {
        const bool on_face = std::abs(dx) == ring || std::abs(dy) == ring;
        if (on_face) {
          for (auto dz = -ring; dz <= ring; ++dz) visit(qc[0] + dx, qc[1] + dy, qc[2] + dz);
        } else {
          visit(qc[0] + dx, qc[1] + dy, qc[2] - ring);
          if (ring != 0) visit(qc[0] + dx, qc[1] + dy, qc[2] + ring);
        }
      }
    }
    if (cand.size() >= k) {
      std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1),
                       cand.end());
      // Every point closer than ring * cell_size has been visited by now.
      const double reach = static_cast<double>(ring) * cell_size_ * (1.0 - kRingSlack);
      if (cand[k - 1].first < reach * reach) break;
    }
  }

  std::sort(cand.begin(), cand.end());
  const bool short_cloud = cand.size() < k;
  if (truncated) *truncated = short_cloud;
  const std::size_t take = std::min(k, cand.size());
  std::vector<std::size_t> out;
  out.reserve(take + 1);
  for (std::size_t n = 0; n < take; ++n) out.push_back(cand[n].second);
  out.push_back(i);
  return out;
}

}  // namespace ragc
