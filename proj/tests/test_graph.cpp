#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "ragc/error.hpp"
#include "ragc/graph.hpp"
#include "test_util.hpp"

using namespace ragc;

TEST(EdgeAttributes, SphericalExamples) {
  EXPECT_EQ(edge_attributes({0, 0, 0}, EdgeAttrMode::kSpherical), (std::vector<double>{0, 0, 0}));
  const auto x = edge_attributes({1, 0, 0}, EdgeAttrMode::kSpherical);
  EXPECT_DOUBLE_EQ(x[0], 1.0);
  EXPECT_DOUBLE_EQ(x[1], 0.0);
  EXPECT_DOUBLE_EQ(x[2], std::numbers::pi / 2);
  EXPECT_EQ(edge_attributes({0, 0, 2}, EdgeAttrMode::kSpherical), (std::vector<double>{2, 0, 0}));
}

TEST(EdgeAttributes, Widths) {
  EXPECT_EQ(attr_width(EdgeAttrMode::kCartesian), 3u);
  EXPECT_EQ(attr_width(EdgeAttrMode::kSpherical), 3u);
  EXPECT_EQ(attr_width(EdgeAttrMode::kBoth), 6u);
  const auto both = edge_attributes({1, 2, 3}, EdgeAttrMode::kBoth);
  ASSERT_EQ(both.size(), 6u);
  EXPECT_EQ(both[0], 1.0);
  EXPECT_EQ(both[2], 3.0);
  EXPECT_NEAR(both[3], std::sqrt(14.0), 1e-15);
  EXPECT_EQ(parse_attr_mode("both"), EdgeAttrMode::kBoth);
  EXPECT_THROW(parse_attr_mode("polar"), ConfigError);
}

TEST(EdgeAttributes, SphericalRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 d{u(rng), u(rng), u(rng)};
    const auto s = edge_attributes(d, EdgeAttrMode::kSpherical);
    EXPECT_NEAR(s[0] * std::sin(s[2]) * std::cos(s[1]), d.x, 1e-9);
    EXPECT_NEAR(s[0] * std::sin(s[2]) * std::sin(s[1]), d.y, 1e-9);
    EXPECT_NEAR(s[0] * std::cos(s[2]), d.z, 1e-9);
  }
}

TEST(ConstructGraph, CollinearInDegrees) {
  PointCloud pc;
  pc.points = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  const auto g = construct_graph(pc, EdgePolicy::with_radius(1.5), EdgeAttrMode::kCartesian);
  EXPECT_EQ(g.in_degree(0), 2u);
  EXPECT_EQ(g.in_degree(1), 3u);
  EXPECT_EQ(g.in_degree(2), 2u);
  EXPECT_NO_THROW(g.validate());
  // offsets are source - destination
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const double dx = g.positions[g.sources[e]].x - g.positions[g.destinations[e]].x;
    EXPECT_EQ(g.edge_attrs[e * 3], dx);
  }
}

TEST(ConstructGraph, SinglePoint) {
  PointCloud pc;
  pc.points = {{0.3, 0.4, 0.5}};
  for (auto policy : {EdgePolicy::with_radius(0.1), EdgePolicy::with_knn(9)}) {
    const auto g = construct_graph(pc, policy, EdgeAttrMode::kSpherical);
    ASSERT_EQ(g.edge_count(), 1u);
    EXPECT_EQ(g.sources[0], 0u);
    for (double a : g.edge_attrs.values()) EXPECT_EQ(a, 0.0);
    EXPECT_EQ(g.node_features.dim(1), 1u);
    EXPECT_EQ(g.node_features[0], 1.0);
  }
}

TEST(ConstructGraph, KnnInDegree) {
  std::mt19937_64 rng(2);
  const PointCloud pc = oracle::random_cloud(100, 1.0, rng);
  const auto g = construct_graph(pc, EdgePolicy::with_knn(9), EdgeAttrMode::kSpherical);
  for (std::size_t i = 0; i < g.node_count(); ++i) EXPECT_EQ(g.in_degree(i), 10u);
}

TEST(ConstructGraph, EmptyCloudIsError) {
  EXPECT_THROW(construct_graph(PointCloud{}, EdgePolicy::with_radius(1), EdgeAttrMode::kSpherical),
               Error);
}

TEST(ConstructGraph, RadiusBoundOnEdges) {
  std::mt19937_64 rng(3);
  const PointCloud pc = oracle::random_cloud(400, 1.0, rng);
  const double r = 0.12;
  const auto g = construct_graph(pc, EdgePolicy::with_radius(r), EdgeAttrMode::kSpherical);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    bool has_self = false;
    for (auto e = g.in_offsets[i]; e < g.in_offsets[i + 1]; ++e) {
      has_self = has_self || g.sources[e] == i;
      EXPECT_LE(g.edge_attrs[e * 3], r);
      if (e > g.in_offsets[i]) EXPECT_LT(g.sources[e - 1], g.sources[e]);
    }
    EXPECT_TRUE(has_self);
  }
}

TEST(ConstructGraph, BatchHasNoCrossSampleEdges) {
  std::mt19937_64 rng(4);
  // overlapping clouds so a cross-sample edge would be possible
  std::vector<PointCloud> clouds{oracle::random_cloud(60, 1.0, rng),
                                 oracle::random_cloud(40, 1.0, rng),
                                 oracle::random_cloud(70, 1.0, rng)};
  for (auto policy : {EdgePolicy::with_radius(0.3), EdgePolicy::with_knn(5)}) {
    const auto g = construct_graph(clouds, policy, EdgeAttrMode::kBoth);
    EXPECT_EQ(g.sample_count, 3u);
    EXPECT_EQ(g.node_count(), 170u);
    EXPECT_NO_THROW(g.validate());
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      EXPECT_EQ(g.batch_id[g.sources[e]], g.batch_id[g.destinations[e]]);
    }
    EXPECT_TRUE(std::is_sorted(g.batch_id.begin(), g.batch_id.end()));
  }
}

TEST(ConstructGraph, PermutationGivesIsomorphicGraph) {
  std::mt19937_64 rng(5);
  const PointCloud pc = oracle::random_cloud(150, 1.0, rng);
  std::vector<std::size_t> perm(pc.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  PointCloud permuted;
  permuted.points.resize(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) permuted.points[perm[i]] = pc.points[i];

  for (auto policy : {EdgePolicy::with_radius(0.2), EdgePolicy::with_knn(9)}) {
    const auto a = construct_graph(pc, policy, EdgeAttrMode::kBoth);
    const auto b = construct_graph(permuted, policy, EdgeAttrMode::kBoth);
    ASSERT_EQ(a.edge_count(), b.edge_count());
    for (std::size_t i = 0; i < pc.size(); ++i) {
      const std::size_t pi = perm[i];
      ASSERT_EQ(a.in_degree(i), b.in_degree(pi));
      std::map<std::size_t, std::vector<double>> ea, eb;
      for (auto e = a.in_offsets[i]; e < a.in_offsets[i + 1]; ++e) {
        ea[perm[a.sources[e]]] = {a.edge_attrs.values().begin() + e * 6,
                                  a.edge_attrs.values().begin() + (e + 1) * 6};
      }
      for (auto e = b.in_offsets[pi]; e < b.in_offsets[pi + 1]; ++e) {
        eb[b.sources[e]] = {b.edge_attrs.values().begin() + e * 6,
                            b.edge_attrs.values().begin() + (e + 1) * 6};
      }
      EXPECT_EQ(ea, eb);
    }
  }
}

TEST(GeometricGraph, ValidateCatchesMissingSelfLoop) {
  PointCloud pc;
  pc.points = {{0, 0, 0}, {1, 0, 0}};
  auto g = construct_graph(pc, EdgePolicy::with_radius(0.5), EdgeAttrMode::kCartesian);
  g.in_offsets = {0, 0, 2};
  g.sources = {1, 1};
  g.destinations = {1, 1};
  EXPECT_THROW(g.validate(), StructuralError);
}
