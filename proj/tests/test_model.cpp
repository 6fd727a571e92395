#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "ragc/error.hpp"
#include "ragc/gradcheck.hpp"
#include "ragc/model.hpp"
#include "ragc/ops.hpp"
#include "ragc/parallel.hpp"
#include "test_util.hpp"

using namespace ragc;

namespace {

NetworkConfig tiny_config() {
  NetworkConfig c;
  c.initial_width = 2;
  c.stage_widths = {2, 4};
  c.blocks_per_stage = 1;
  c.fc_width = 4;
  c.filter_widths = {4};
  c.graph_radii = {0.3, 0.4, 0.6, 0.6};
  c.pool_radii = {0.15, 0.3, 0.6};
  c.dropout = 0.0;
  return c;
}

std::vector<PointCloud> clouds(std::size_t count, std::size_t points, std::mt19937_64& rng) {
  std::vector<PointCloud> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(oracle::random_cloud(points, 1.0, rng, static_cast<int>(i % 4)));
  }
  return out;
}

}  // namespace

TEST(NetworkConfig, DefaultLevelCounts) {
  const NetworkConfig c;
  EXPECT_EQ(c.pooling_count(), 5u);
  EXPECT_EQ(c.graph_radii.size(), 6u);
  EXPECT_EQ(c.pool_radii.size(), 5u);
  EXPECT_NO_THROW(c.validate());
  NetworkConfig bad = c;
  bad.pool_radii.pop_back();
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(NetworkConfig, KeyValueRoundTrip) {
  NetworkConfig c;
  c.policy = EdgePolicy::Kind::kKnn;
  c.knn_k = 7;
  c.filter_widths = {};
  c.radius_scale = 2.5;
  c.graph_radii[2] = 0.1 + 0.2;
  NetworkConfig back;
  for (const auto& [k, v] : to_key_values(c)) ASSERT_TRUE(apply_key_value(back, k, v)) << k;
  EXPECT_EQ(to_key_values(back), to_key_values(c));
  EXPECT_EQ(back.graph_radii, c.graph_radii);
  EXPECT_FALSE(apply_key_value(back, "no-such-key", "1"));
  EXPECT_THROW(apply_key_value(back, "policy", "nearest"), ConfigError);
}

TEST(Network, DefaultLayerPlan) {
  NetworkConfig c;
  c.class_count = 6;
  Network net(c);
  const auto layers = net.describe();
  std::size_t pools = 0, ragc = 0;
  for (const auto& l : layers) {
    if (l.find("Max Pooling") != std::string::npos) ++pools;
    if (l.find("RAGC") != std::string::npos) ++ragc;
  }
  EXPECT_EQ(pools, 5u);
  EXPECT_EQ(ragc, 4u);  // one row per stage, repeat count 2
  EXPECT_NE(layers.back().find("6"), std::string::npos);
  auto ps = net.parameters();
  EXPECT_EQ(ps.params.back().second.numel(), 6u);  // fc2 bias
}

TEST(Network, GoldenParameterCount) {
  NetworkConfig c;
  EXPECT_EQ(Network(c).parameter_count(), 2581572u);
  c.residual = false;
  Network plain(c);
  EXPECT_LT(plain.parameter_count(), 2581572u);
  EXPECT_EQ(plain.stages().size(), 4u);
  EXPECT_EQ(plain.stages()[0].size(), 2u);
}

TEST(Network, ParameterCountIsPureFunctionOfConfig) {
  NetworkConfig c = tiny_config();
  c.seed = 1;
  const auto a = Network(c).parameter_count();
  c.seed = 99;
  EXPECT_EQ(Network(c).parameter_count(), a);
}

TEST(Network, OutputShapeAndSoftmax) {
  std::mt19937_64 rng(1);
  Network net(tiny_config());
  const auto batch = clouds(3, 40, rng);
  const Tensor p = net.predict_proba(batch);
  ASSERT_EQ(p.dim(0), 3u);
  ASSERT_EQ(p.dim(1), 4u);
  for (std::size_t b = 0; b < 3; ++b) {
    double s = 0.0;
    for (std::size_t c = 0; c < 4; ++c) s += p[b * 4 + c];
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Network, BatchIndependenceInEvalMode) {
  std::mt19937_64 rng(2);
  Network net(tiny_config());
  // move the running statistics away from their initial values
  const auto train = clouds(4, 30, rng);
  for (int i = 0; i < 3; ++i) {
    Tape tape(false);
    net.forward(tape, train, Mode::kTrain, rng);
  }
  const auto batch = clouds(4, 35, rng);
  const Tensor all = net.predict_proba(batch);
  for (std::size_t b = 0; b < 4; ++b) {
    const Tensor one = net.predict_proba(std::span<const PointCloud>(&batch[b], 1));
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(one[c], all[b * 4 + c], 1e-9);
  }
  std::vector<PointCloud> twins{batch[0], batch[0]};
  const Tensor t = net.predict_proba(twins);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(t[c], t[4 + c], 1e-9);
}

TEST(Network, CrossSampleIsolation) {
  std::mt19937_64 rng(3);
  Network net(tiny_config());
  auto batch = clouds(3, 30, rng);
  const Tensor before = net.predict_proba(batch);
  for (auto& p : batch[1].points) p = p + Vec3{0.05, -0.02, 0.1};
  batch[1].points.pop_back();
  const Tensor after = net.predict_proba(batch);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_EQ(before[c], after[c]);
    EXPECT_EQ(before[8 + c], after[8 + c]);
  }
}

TEST(Network, FullGradientCheck) {
  std::mt19937_64 rng(4);
  Network net(tiny_config());
  const auto batch = clouds(2, 25, rng);
  const int targets[] = {1, 2};
  auto ps = net.parameters();
  oracle::randomize_biases(ps, rng);
  auto inputs = ps.tensors();
  const auto r = gradient_check(
      [&](Tape& t) {
        std::mt19937_64 drop(5);
        return softmax_cross_entropy(t, net.forward(t, batch, Mode::kTrain, drop), targets);
      },
      inputs);
  EXPECT_TRUE(r.ok(1e-3, 1e-7)) << r.max_rel_error << " " << r.max_abs_error;
}

TEST(Network, SaveLoadRoundTrip) {
  std::mt19937_64 rng(6);
  NetworkConfig c = tiny_config();
  c.attr_mode = EdgeAttrMode::kBoth;
  Network net(c);
  const auto batch = clouds(2, 30, rng);
  {
    Tape tape(false);
    net.forward(tape, batch, Mode::kTrain, rng);
  }
  const auto dir = std::filesystem::temp_directory_path() / "ragc_model_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "m.ckpt").string();
  save_network(net, path);
  EXPECT_TRUE(std::filesystem::exists(config_path_for(path)));
  Network back = load_network(path);
  EXPECT_EQ(to_key_values(back.config()), to_key_values(c));
  const Tensor a = net.predict_proba(batch);
  const Tensor b = back.predict_proba(batch);
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_EQ(a[i], b[i]);
  std::filesystem::remove_all(dir);
}

TEST(Network, LevelNodeCountsNonIncreasing) {
  std::mt19937_64 rng(7);
  NetworkConfig c = tiny_config();
  Network net(c);
  const auto batch = clouds(2, 60, rng);
  net.predict_proba(batch);
  const auto& counts = net.last_node_counts();
  ASSERT_FALSE(counts.empty());
  for (const auto& per_sample : counts) {
    for (std::size_t l = 1; l < per_sample.size(); ++l) EXPECT_LE(per_sample[l], per_sample[l - 1]);
  }
}

TEST(Network, ThreadCountDoesNotChangeResults) {
  std::mt19937_64 rng(8);
  const auto batch = clouds(6, 50, rng);
  const int targets[] = {0, 1, 2, 3, 0, 1};
  std::vector<std::vector<double>> probs, grads;
  for (int threads : {0, 3}) {
    set_thread_count(threads);
    Network net(tiny_config());
    Tape tape;
    std::mt19937_64 drop(9);
    const Tensor loss =
        softmax_cross_entropy(tape, net.forward(tape, batch, Mode::kTrain, drop), targets);
    tape.backward(loss);
    std::vector<double> g;
    for (const auto& t : net.parameters().tensors()) g.insert(g.end(), t.grad().begin(), t.grad().end());
    grads.push_back(g);
    const Tensor p = net.predict_proba(batch);
    probs.emplace_back(p.values().begin(), p.values().end());
  }
  set_thread_count(-1);
  EXPECT_EQ(probs[0], probs[1]);
  EXPECT_EQ(grads[0], grads[1]);
}
