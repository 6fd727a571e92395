#include <gtest/gtest.h>

#include <random>

#include "ragc/error.hpp"
#include "ragc/gradcheck.hpp"
#include "ragc/ops.hpp"
#include "ragc/pool.hpp"
#include "test_util.hpp"

using namespace ragc;

namespace {

GeometricGraph graph_with_features(std::vector<Vec3> pts, Tensor features, double r = 0.5) {
  PointCloud pc;
  pc.points = std::move(pts);
  auto g = construct_graph(pc, EdgePolicy::with_radius(r), EdgeAttrMode::kSpherical);
  g.node_features = std::move(features);
  return g;
}

}  // namespace

TEST(VoxelPool, CentroidExample) {
  Tape tape(false);
  auto g = graph_with_features({{0.01, 0.02, 0.03}, {0.05, 0.06, 0.07}},
                               Tensor({2, 2}, {1, 5, 3, 2}));
  const auto out = voxel_downsample(tape, g, 0.1, PoolMode::kMax, 0.2, EdgeAttrMode::kSpherical);
  ASSERT_EQ(out.node_count(), 1u);
  EXPECT_NEAR(out.positions[0].x, 0.03, 1e-15);
  EXPECT_NEAR(out.positions[0].y, 0.04, 1e-15);
  EXPECT_NEAR(out.positions[0].z, 0.05, 1e-15);
  EXPECT_EQ(out.node_features[0], 3.0);
  EXPECT_EQ(out.node_features[1], 5.0);
  EXPECT_EQ(out.edge_count(), 1u);
}

TEST(VoxelPool, IsolatedPointSurvives) {
  Tape tape(false);
  auto g = graph_with_features({{0.05, 0.05, 0.05}, {0.95, 0.95, 0.95}},
                               Tensor({2, 1}, {7, 9}));
  const auto out = voxel_downsample(tape, g, 0.1, PoolMode::kAvg, 0.2, EdgeAttrMode::kSpherical);
  ASSERT_EQ(out.node_count(), 2u);
  EXPECT_EQ(out.positions[1], (Vec3{0.95, 0.95, 0.95}));
  EXPECT_EQ(out.node_features[1], 9.0);
}

TEST(VoxelPool, AvgOfIdenticalFeaturesIsIdentity) {
  std::mt19937_64 rng(1);
  Tape tape(false);
  const auto pts = oracle::random_points(80, 1.0, rng);
  std::vector<double> f;
  for (std::size_t i = 0; i < pts.size(); ++i) f.insert(f.end(), {0.25, -1.5});
  auto g = graph_with_features(pts, Tensor({80, 2}, f), 0.2);
  const auto out = voxel_downsample(tape, g, 0.3, PoolMode::kAvg, 0.4, EdgeAttrMode::kSpherical);
  for (std::size_t i = 0; i < out.node_count(); ++i) {
    EXPECT_EQ(out.node_features[i * 2], 0.25);
    EXPECT_EQ(out.node_features[i * 2 + 1], -1.5);
  }
}

TEST(VoxelPool, MatchesBruteForce) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PointCloud> clouds{oracle::random_cloud(20 + rng() % 100, 2.0, rng),
                                   oracle::random_cloud(20 + rng() % 100, 2.0, rng)};
    auto g = construct_graph(clouds, EdgePolicy::with_radius(0.3), EdgeAttrMode::kSpherical);
    g.node_features = oracle::random_tensor({g.node_count(), 3}, rng);
    const double rp = 0.2 + 0.1 * (trial % 4);
    const auto oracle = oracle::brute_voxels(g.positions, g.batch_id, rp);
    for (auto mode : {PoolMode::kMax, PoolMode::kAvg}) {
      Tape tape(false);
      const auto out = voxel_downsample(tape, g, rp, mode, 0.5, EdgeAttrMode::kSpherical);
      ASSERT_EQ(out.node_count(), oracle.centroids.size());
      EXPECT_LE(out.node_count(), g.node_count());
      for (std::size_t c = 0; c < out.node_count(); ++c) {
        EXPECT_NEAR(out.positions[c].x, oracle.centroids[c].x, 1e-12);
        EXPECT_NEAR(out.positions[c].y, oracle.centroids[c].y, 1e-12);
        EXPECT_NEAR(out.positions[c].z, oracle.centroids[c].z, 1e-12);
        EXPECT_EQ(out.batch_id[c], g.batch_id[oracle.members[c][0]]);
        for (std::size_t f = 0; f < 3; ++f) {
          double expect = mode == PoolMode::kMax ? -1e300 : 0.0;
          for (auto m : oracle.members[c]) {
            const double v = g.node_features[m * 3 + f];
            expect = mode == PoolMode::kMax ? std::max(expect, v) : expect + v;
          }
          if (mode == PoolMode::kAvg) expect /= static_cast<double>(oracle.members[c].size());
          EXPECT_NEAR(out.node_features[c * 3 + f], expect, 1e-12);
        }
        // centroid inside the voxel of its members
        const auto& p = g.positions[oracle.members[c][0]];
        EXPECT_GE(out.positions[c].x, std::floor(p.x / rp) * rp - 1e-12);
        EXPECT_LE(out.positions[c].x, (std::floor(p.x / rp) + 1) * rp + 1e-12);
      }
      EXPECT_NO_THROW(out.validate());
    }
  }
}

TEST(VoxelPool, NodeCountEqualWhenVoxelsDistinct) {
  Tape tape(false);
  auto g = graph_with_features({{0.05, 0, 0}, {0.15, 0, 0}, {0.25, 0, 0}},
                               Tensor::filled({3, 1}, 1.0));
  EXPECT_EQ(voxel_downsample(tape, g, 0.1, PoolMode::kMax, 0.2, EdgeAttrMode::kSpherical)
                .node_count(),
            3u);
}

TEST(VoxelPool, MaxGradientRoutesToLowestArgmax) {
  // two nodes in one voxel with tied feature values
  auto g = graph_with_features({{0.01, 0.01, 0.01}, {0.02, 0.02, 0.02}},
                               Tensor({2, 1}, {4, 4}, true));
  Tape tape;
  const auto out = voxel_downsample(tape, g, 0.1, PoolMode::kMax, 0.2, EdgeAttrMode::kSpherical);
  tape.backward(sum(tape, out.node_features));
  EXPECT_EQ(g.node_features.grad()[0], 1.0);
  EXPECT_EQ(g.node_features.grad()[1], 0.0);
}

TEST(VoxelPool, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  const auto pts = oracle::random_points(30, 1.0, rng);
  Tensor x = oracle::random_tensor({30, 2}, rng, 1.0, true);
  const Tensor w = oracle::random_tensor({1, 2}, rng);
  for (auto mode : {PoolMode::kMax, PoolMode::kAvg}) {
    const auto r = gradient_check(
        [&](Tape& t) {
          auto g = graph_with_features(pts, x, 0.3);
          const auto out = voxel_downsample(t, g, 0.4, mode, 0.5, EdgeAttrMode::kSpherical);
          Tensor ww(out.node_features.shape(), std::vector<double>(out.node_features.numel(), 0.0));
          for (std::size_t i = 0; i < ww.numel(); ++i) ww.mutable_values()[i] = w[i % 2] + 0.1 * i;
          return sum(t, mul(t, out.node_features, ww));
        },
        {x});
    EXPECT_TRUE(r.ok(1e-4)) << r.max_rel_error << " " << r.max_abs_error;
  }
}

TEST(GlobalAverage, Examples) {
  Tape tape(false);
  auto g = graph_with_features({{0, 0, 0}, {0.1, 0, 0}}, Tensor({2, 1}, {2, 4}));
  EXPECT_EQ(global_average_readout(tape, g)[0], 3.0);

  auto single = graph_with_features({{0, 0, 0}}, Tensor({1, 3}, {1, -2, 5}));
  const Tensor s = global_average_readout(tape, single);
  EXPECT_EQ(s[0], 1.0);
  EXPECT_EQ(s[1], -2.0);
  EXPECT_EQ(s[2], 5.0);
}

TEST(GlobalAverage, GradientCheck) {
  std::mt19937_64 rng(4);
  std::vector<PointCloud> clouds{oracle::random_cloud(5, 1.0, rng),
                                 oracle::random_cloud(7, 1.0, rng)};
  auto g = construct_graph(clouds, EdgePolicy::with_radius(0.3), EdgeAttrMode::kSpherical);
  Tensor x = oracle::random_tensor({12, 3}, rng, 1.0, true);
  const Tensor w = oracle::random_tensor({2, 3}, rng);
  const auto r = gradient_check(
      [&](Tape& t) {
        g.node_features = x;
        return sum(t, mul(t, global_average_readout(t, g), w));
      },
      {x});
  EXPECT_TRUE(r.ok(1e-4));
}
