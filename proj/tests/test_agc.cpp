#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "ragc/agc.hpp"
#include "ragc/error.hpp"
#include "ragc/gradcheck.hpp"
#include "test_util.hpp"

using namespace ragc;

namespace {

GeometricGraph random_graph(std::size_t n, std::size_t d, std::mt19937_64& rng,
                            EdgeAttrMode mode = EdgeAttrMode::kSpherical) {
  const PointCloud pc = oracle::random_cloud(n, 1.0, rng);
  auto g = construct_graph(pc, EdgePolicy::with_radius(0.35), mode);
  g.node_features = oracle::random_tensor({n, d}, rng);
  return g;
}

void zero(Tensor& t) {
  for (auto& v : t.mutable_values()) v = 0.0;
}

void zero_filter(AgcLayer& l) {
  for (auto& h : l.filter.hidden) {
    zero(h.weight);
    zero(h.bias);
  }
  zero(l.filter.last.weight);
  zero(l.filter.last.bias);
}

// Turns a filter net without hidden layers into Θ = c (constant per edge).
AgcLayer constant_theta_layer(std::size_t a, std::vector<double> c, std::size_t d_in,
                              std::size_t d_out, double bias) {
  std::mt19937_64 rng(0);
  AgcLayer l = AgcLayer::init(a, {}, d_in, d_out, rng);
  zero_filter(l);
  std::copy(c.begin(), c.end(), l.filter.last.bias.mutable_values().begin());
  for (auto& b : l.bias.mutable_values()) b = bias;
  return l;
}

}  // namespace

TEST(DynamicFilter, ZeroParametersGiveZeroTheta) {
  std::mt19937_64 rng(1);
  AgcLayer l = AgcLayer::init(3, {16, 32}, 2, 4, rng);
  zero_filter(l);
  Tape tape(false);
  const Tensor theta = dynamic_filter_weights(tape, l, oracle::random_tensor({6, 3}, rng));
  EXPECT_EQ(theta.dim(0), 6u);
  EXPECT_EQ(theta.dim(1), 8u);
  for (double v : theta.values()) EXPECT_EQ(v, 0.0);
}

TEST(DynamicFilter, IdenticalAttributesGiveIdenticalTheta) {
  std::mt19937_64 rng(2);
  AgcLayer l = AgcLayer::init(3, {16, 32}, 3, 2, rng);
  Tape tape(false);
  const Tensor theta = dynamic_filter_weights(tape, l, Tensor({2, 3}, {0.1, -0.2, 0.3, 0.1, -0.2, 0.3}));
  for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(theta[j], theta[6 + j]);
  const auto ref = oracle::naive_theta(l, {0.1, -0.2, 0.3});
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(theta[j], ref[j], 1e-13);
}

TEST(DynamicFilter, AttributeWidthMismatchIsConfigError) {
  std::mt19937_64 rng(3);
  AgcLayer l = AgcLayer::init(3, {16}, 2, 2, rng);
  Tape tape(false);
  EXPECT_THROW(dynamic_filter_weights(tape, l, Tensor::zeros({4, 6})), ConfigError);
}

TEST(DynamicFilter, GradientCheckFiveEdges) {
  std::mt19937_64 rng(4);
  AgcLayer l = AgcLayer::init(3, {16, 32}, 2, 3, rng);
  const Tensor attrs = oracle::random_tensor({5, 3}, rng);
  const Tensor mix = oracle::random_tensor({5, 6}, rng);
  ParameterSet ps;
  l.collect(ps, "agc");
  oracle::randomize_biases(ps, rng);
  const auto r = gradient_check(
      [&](Tape& t) { return sum(t, mul(t, dynamic_filter_weights(t, l, attrs), mix)); },
      ps.tensors());
  EXPECT_TRUE(r.ok(1e-4)) << r.max_rel_error;
}

TEST(Agc, SelfLoopIdentity) {
  PointCloud pc;
  pc.points = {{0.2, 0.2, 0.2}};
  auto g = construct_graph(pc, EdgePolicy::with_radius(0.1), EdgeAttrMode::kSpherical);
  g.node_features = Tensor({1, 2}, {3.5, -1.25});
  const AgcLayer l = constant_theta_layer(3, {1, 0, 0, 1}, 2, 2, 0.0);
  Tape tape(false);
  const Tensor y = agc_forward(tape, l, g);
  EXPECT_EQ(y[0], 3.5);
  EXPECT_EQ(y[1], -1.25);
}

TEST(Agc, NeighborMeanExample) {
  PointCloud pc;
  pc.points = {{0, 0, 0}, {0.1, 0, 0}, {-0.1, 0, 0}};
  auto g = construct_graph(pc, EdgePolicy::with_radius(0.15), EdgeAttrMode::kSpherical);
  g.node_features = Tensor({3, 1}, {0, 2, 4});
  const AgcLayer l = constant_theta_layer(3, {1}, 1, 1, 0.5);
  Tape tape(false);
  const Tensor y = agc_forward(tape, l, g);
  EXPECT_DOUBLE_EQ(y[0], 2.5);
}

TEST(Agc, ZeroFeaturesGiveBias) {
  std::mt19937_64 rng(5);
  auto g = random_graph(30, 3, rng);
  zero(g.node_features);
  AgcLayer l = AgcLayer::init(3, {16, 32}, 3, 4, rng);
  for (auto& b : l.bias.mutable_values()) b = 0.75;
  Tape tape(false);
  const Tensor y = agc_forward(tape, l, g);
  for (double v : y.values()) EXPECT_EQ(v, 0.75);
}

TEST(Agc, FusedMatchesNaiveReference) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 5 + rng() % 96, din = 1 + rng() % 8, dout = 1 + rng() % 8;
    const auto mode = static_cast<EdgeAttrMode>(trial % 3);
    auto g = random_graph(n, din, rng, mode);
    const std::vector<std::vector<std::size_t>> widths{{}, {16}, {16, 32}};
    AgcLayer l = AgcLayer::init(attr_width(mode), widths[trial % 3], din, dout, rng);
    for (auto& b : l.bias.mutable_values()) b = std::uniform_real_distribution<double>(-1, 1)(rng);
    Tape tape(false);
    const Tensor fused = agc_forward(tape, l, g);
    const Tensor mat = l.forward_materialized(tape, g, g.node_features);
    const auto ref = oracle::naive_agc(l, g, g.node_features);
    EXPECT_LT(oracle::max_abs_diff(fused.values(), ref), 1e-10);
    EXPECT_LT(oracle::max_abs_diff(mat.values(), ref), 1e-10);
  }
}

TEST(Agc, Homogeneous) {
  std::mt19937_64 rng(7);
  auto g = random_graph(40, 3, rng);
  AgcLayer l = AgcLayer::init(3, {16, 32}, 3, 5, rng);
  Tape tape(false);
  const Tensor y1 = l.forward(tape, g, g.node_features);
  Tensor scaled = g.node_features.clone();
  for (auto& v : scaled.mutable_values()) v *= -2.5;
  const Tensor y2 = l.forward(tape, g, scaled);
  for (std::size_t i = 0; i < y1.numel(); ++i) EXPECT_NEAR(y2[i], -2.5 * y1[i], 1e-10);
}

TEST(Agc, TranslationInvariant) {
  std::mt19937_64 rng(8);
  const PointCloud pc = oracle::random_cloud(50, 1.0, rng);
  PointCloud moved = pc;
  for (auto& p : moved.points) p = p + Vec3{3.25, -1.5, 0.75};
  for (auto mode : {EdgeAttrMode::kCartesian, EdgeAttrMode::kSpherical}) {
    auto a = construct_graph(pc, EdgePolicy::with_radius(0.3), mode);
    auto b = construct_graph(moved, EdgePolicy::with_radius(0.3), mode);
    ASSERT_EQ(a.sources, b.sources);
    const Tensor x = oracle::random_tensor({50, 2}, rng);
    AgcLayer l = AgcLayer::init(3, {16, 32}, 2, 3, rng);
    Tape tape(false);
    EXPECT_LT(oracle::max_abs_diff(l.forward(tape, a, x).values(), l.forward(tape, b, x).values()),
              1e-10);
  }
}

TEST(Agc, PermutationEquivariant) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 20 + rng() % 60;
    const PointCloud pc = oracle::random_cloud(n, 1.0, rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    PointCloud permuted;
    permuted.points.resize(n);
    const Tensor x = oracle::random_tensor({n, 3}, rng);
    Tensor px = Tensor::zeros({n, 3});
    for (std::size_t i = 0; i < n; ++i) {
      permuted.points[perm[i]] = pc.points[i];
      for (std::size_t c = 0; c < 3; ++c) px.mutable_values()[perm[i] * 3 + c] = x[i * 3 + c];
    }
    const auto ga = construct_graph(pc, EdgePolicy::with_radius(0.3), EdgeAttrMode::kSpherical);
    const auto gb = construct_graph(permuted, EdgePolicy::with_radius(0.3), EdgeAttrMode::kSpherical);
    AgcLayer l = AgcLayer::init(3, {16, 32}, 3, 4, rng);
    Tape tape(false);
    const Tensor ya = l.forward(tape, ga, x);
    const Tensor yb = l.forward(tape, gb, px);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t o = 0; o < 4; ++o) EXPECT_NEAR(yb[perm[i] * 4 + o], ya[i * 4 + o], 1e-12);
    }
  }
}

TEST(Agc, GradientCheckTenNodes) {
  std::mt19937_64 rng(10);
  auto g = random_graph(10, 2, rng);
  Tensor x = oracle::random_tensor({10, 2}, rng, 1.0, true);
  AgcLayer l = AgcLayer::init(3, {16, 32}, 2, 3, rng);
  const Tensor mix = oracle::random_tensor({10, 3}, rng);
  ParameterSet ps;
  l.collect(ps, "agc");
  oracle::randomize_biases(ps, rng);
  auto inputs = ps.tensors();
  inputs.push_back(x);
  for (bool fused : {true, false}) {
    const auto r = gradient_check(
        [&](Tape& t) {
          const Tensor y = fused ? l.forward(t, g, x) : l.forward_materialized(t, g, x);
          return sum(t, mul(t, y, mix));
        },
        inputs);
    EXPECT_TRUE(r.ok(1e-4)) << (fused ? "fused " : "materialized ") << r.max_rel_error;
  }
}

TEST(RagcBlock, ZeroResidualBranchGivesReluOfInput) {
  std::mt19937_64 rng(11);
  auto g = random_graph(12, 3, rng);
  RagcBlock b = RagcBlock::init(3, {16, 32}, 3, 3, {.residual = true, .batch_norm = false}, rng);
  zero_filter(b.conv1);
  zero_filter(b.conv2);
  zero(b.conv1.bias);
  zero(b.conv2.bias);
  zero(b.projection.bias);
  auto w = b.projection.weight.mutable_values();
  for (std::size_t i = 0; i < 9; ++i) w[i] = (i % 4 == 0) ? 1.0 : 0.0;
  Tape tape(false);
  const Tensor y = b.forward(tape, g, g.node_features, Mode::kEval);
  for (std::size_t i = 0; i < y.numel(); ++i) {
    EXPECT_EQ(y[i], std::max(0.0, g.node_features[i]));
  }
}

TEST(RagcBlock, PlainModeIsReluOfF) {
  std::mt19937_64 rng(12);
  auto g = random_graph(15, 2, rng);
  RagcBlock plain = RagcBlock::init(3, {16, 32}, 2, 3, {.residual = false, .batch_norm = false}, rng);
  Tape tape(false);
  const Tensor y = plain.forward(tape, g, g.node_features, Mode::kEval);
  const Tensor h = relu(tape, plain.conv1.forward(tape, g, g.node_features));
  const Tensor f = relu(tape, plain.conv2.forward(tape, g, h));
  for (std::size_t i = 0; i < y.numel(); ++i) EXPECT_EQ(y[i], f[i]);
}

TEST(RagcBlock, GradientCheck) {
  std::mt19937_64 rng(13);
  auto g = random_graph(15, 2, rng);
  Tensor x = oracle::random_tensor({15, 2}, rng, 1.0, true);
  const Tensor mix = oracle::random_tensor({15, 3}, rng);
  for (bool residual : {true, false}) {
    RagcBlock b = RagcBlock::init(3, {16, 32}, 2, 3, {.residual = residual}, rng);
    ParameterSet ps;
    b.collect(ps, "block");
    oracle::randomize_biases(ps, rng);
    auto inputs = ps.tensors();
    inputs.push_back(x);
    const auto r = gradient_check(
        [&](Tape& t) { return sum(t, mul(t, b.forward(t, g, x, Mode::kTrain), mix)); }, inputs);
    EXPECT_TRUE(r.ok(1e-4)) << r.max_rel_error << " " << r.max_abs_error;
  }
}
