#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "ragc/pointcloud.hpp"

namespace ragc {

using CellKey = std::array<std::int64_t, 3>;

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = 0x9E3779B97F4A7C15ull;
    for (auto c : k) {
      h ^= static_cast<std::uint64_t>(c) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

/// Uniform hash grid over a point array. The indexed points must outlive the
/// index; the index itself is immutable after construction.
class GridIndex {
 public:
  GridIndex(std::span<const Vec3> points, double cell_size);

  double cell_size() const { return cell_size_; }
  std::size_t size() const { return points_.size(); }
  std::size_t occupied_cells() const { return cells_.size(); }
  std::span<const Vec3> points() const { return points_; }

  CellKey cell_of(const Vec3& p) const;
  /// Point indices binned into `key`, ascending; empty when unoccupied.
  std::span<const std::size_t> cell(const CellKey& key) const;

  /// Every j with |p_j - p_i| <= r (i included), ascending.
  std::vector<std::size_t> radius_neighbors(std::size_t i, double r) const;

  /// The k nearest other points ordered by (distance, index), followed by i
  /// itself. With fewer than k other points every point is returned and
  /// `truncated` (when given) is set.
  std::vector<std::size_t> knn_neighbors(std::size_t i, std::size_t k,
                                         bool* truncated = nullptr) const;

 private:
  std::span<const Vec3> points_;
  double cell_size_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> cells_;
  CellKey min_cell_{};
  CellKey max_cell_{};
};

/// build_grid_index(points, cell_size)
inline GridIndex build_grid_index(std::span<const Vec3> points, double cell_size) {
  return GridIndex(points, cell_size);
}

}  // namespace ragc
