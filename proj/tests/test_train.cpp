#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "ragc/error.hpp"
#include "ragc/optim.hpp"
#include "ragc/synth.hpp"
#include "ragc/train.hpp"
#include "test_util.hpp"

using namespace ragc;

namespace {

NetworkConfig small_config() {
  NetworkConfig c;
  c.initial_width = 4;
  c.stage_widths = {8, 16};
  c.blocks_per_stage = 1;
  c.fc_width = 16;
  c.filter_widths = {8};
  c.graph_radii = {0.25, 0.4, 0.6, 0.6};
  c.pool_radii = {0.3, 0.6, 1.2};
  return c;
}

std::vector<PointCloud> synthetic(std::size_t per_class, std::uint64_t seed,
                                  std::size_t points = 150) {
  SynthConfig sc;
  sc.points = points;
  sc.point_spread = 5;
  return generate_synthetic_dataset(per_class, seed, sc).clouds;
}

void check_identities(const Metrics& m, std::span<const PointCloud> data) {
  std::size_t total = 0, trace = 0;
  for (std::size_t c = 0; c < m.confusion.size(); ++c) {
    const auto row = std::accumulate(m.confusion[c].begin(), m.confusion[c].end(), std::size_t{0});
    std::size_t expected = 0;
    for (const auto& pc : data) expected += (*pc.label == static_cast<int>(c));
    EXPECT_EQ(row, expected);
    total += row;
    trace += m.confusion[c][c];
  }
  EXPECT_EQ(total, m.total);
  EXPECT_EQ(m.accuracy, static_cast<double>(trace) / static_cast<double>(m.total));
}

}  // namespace

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.lr = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.validation_fraction = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Metrics, AllCorrectIsDiagonal) {
  const std::vector<int> t{0, 1, 2, 3, 1};
  const auto m = compute_metrics(t, t, 4);
  EXPECT_EQ(m.accuracy, 1.0);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) EXPECT_EQ(m.confusion[i][j], 0u);
    }
  }
  EXPECT_EQ(m.confusion[1][1], 2u);
}

TEST(Metrics, RowsAreTrueClasses) {
  const std::vector<int> truth{0, 0, 1, 2};
  const std::vector<int> pred{1, 0, 1, 0};
  const auto m = compute_metrics(truth, pred, 3);
  EXPECT_EQ(m.confusion[0][1], 1u);
  EXPECT_EQ(m.confusion[2][0], 1u);
  EXPECT_EQ(m.accuracy, 0.5);
  EXPECT_EQ(m.per_class_accuracy, (std::vector<double>{0.5, 1.0, 0.0}));
}

TEST(Metrics, Errors) {
  const std::vector<int> none;
  EXPECT_THROW(compute_metrics(none, none, 4), DataError);
  const std::vector<int> bad{5};
  EXPECT_THROW(compute_metrics(bad, bad, 4), LabelError);
}

TEST(Metrics, ArgmaxTiesGoLow) {
  const std::vector<double> row{0.1, 0.4, 0.4, 0.1};
  EXPECT_EQ(argmax_row(row), 1u);
  const std::vector<double> flat{0.25, 0.25, 0.25, 0.25};
  EXPECT_EQ(argmax_row(flat), 0u);
}

TEST(Metrics, TableFormat) {
  const std::vector<int> truth{0, 1, 1};
  const std::vector<int> pred{0, 1, 0};
  const auto table = format_table(compute_metrics(truth, pred, 2), {"a", "b"});
  EXPECT_EQ(table.substr(0, table.find('\n')), "true\\pred\ta\tb\ttotal\taccuracy");
  EXPECT_NE(table.find("overall\t"), std::string::npos);
  const auto pgm = render_confusion_pgm(compute_metrics(truth, pred, 2), 4);
  EXPECT_EQ(pgm.substr(0, 2), "P5");
}

TEST(Evaluate, EmptyDatasetIsError) {
  Network net(small_config());
  EXPECT_THROW(evaluate_model(net, std::vector<PointCloud>{}), DataError);
  EXPECT_THROW(train_model(net, std::vector<PointCloud>{}, TrainConfig{}), DataError);
}

TEST(Evaluate, IdempotentAndIdentitiesHold) {
  const auto data = synthetic(6, 3);
  Network net(small_config());
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 8;
  train_model(net, data, tc);
  const auto a = evaluate_model(net, data);
  const auto b = evaluate_model(net, data, 5);
  EXPECT_EQ(a, b);
  check_identities(a, data);
}

TEST(Evaluate, UntrainedNetIsNearChance) {
  const auto data = synthetic(50, 4, 120);
  double mean = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    NetworkConfig c = small_config();
    c.seed = seed;
    Network net(c);
    const auto m = evaluate_model(net, data);
    check_identities(m, data);
    mean += m.accuracy / 3.0;
  }
  EXPECT_NEAR(mean, 0.25, 0.1);
}

TEST(Train, MissingLabelIsError) {
  auto data = synthetic(1, 5);
  data[2].label.reset();
  Network net(small_config());
  EXPECT_THROW(train_model(net, data, TrainConfig{}), LabelError);
  data[2].label = 9;
  EXPECT_THROW(train_model(net, data, TrainConfig{}), LabelError);
}

TEST(Train, ZeroLearningRateLeavesParametersUnchanged) {
  const auto data = synthetic(3, 6);
  Network net(small_config());
  const auto before = net.parameters().to_arrays();
  TrainConfig tc;
  tc.epochs = 1;
  tc.lr = 0.0;
  tc.weight_decay = 0.0;
  tc.batch_size = 4;
  tc.validation_fraction = 0.0;
  train_model(net, data, tc);
  const auto after = net.parameters().to_arrays();
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i].name.find("running") != std::string::npos) continue;
    EXPECT_EQ(before[i].values, after[i].values) << before[i].name;
  }
}

TEST(Train, OverfitsSingleSample) {
  auto data = synthetic(1, 7, 200);
  data.resize(1);
  NetworkConfig c;
  c.radius_scale = 2.5;
  Network net(c);
  TrainConfig tc;
  tc.epochs = 200;
  tc.batch_size = 1;
  tc.augment = false;
  tc.validation_fraction = 0.0;
  const auto h = train_model(net, data, tc);
  EXPECT_LT(h.epoch_loss.back(), 0.01);
}

TEST(Train, DeterministicHistories) {
  const auto data = synthetic(4, 8);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 4;
  tc.validation_fraction = 0.25;
  std::vector<TrainHistory> runs;
  std::vector<Metrics> metrics;
  for (int r = 0; r < 2; ++r) {
    Network net(small_config());
    runs.push_back(train_model(net, data, tc));
    metrics.push_back(evaluate_model(net, data));
  }
  EXPECT_EQ(runs[0].epoch_loss, runs[1].epoch_loss);
  EXPECT_EQ(runs[0].val_accuracy, runs[1].val_accuracy);
  EXPECT_EQ(metrics[0], metrics[1]);
}

TEST(Train, FrozenBatchLossDecreasesForFiveSteps) {
  const auto data = synthetic(2, 9, 500);
  std::vector<int> targets;
  for (const auto& pc : data) targets.push_back(*pc.label);
  for (std::uint64_t seed : {1, 2, 3}) {
    NetworkConfig c;
    c.radius_scale = 2.5;
    c.seed = seed;
    Network net(c);
    Adam adam(net.parameters().tensors(), {});
    std::vector<double> losses;
    for (int step = 0; step <= 5; ++step) {
      std::mt19937_64 drop(seed);
      Tape tape;
      adam.zero_grad();
      const Tensor loss =
          softmax_cross_entropy(tape, net.forward(tape, data, Mode::kTrain, drop), targets);
      losses.push_back(loss.item());
      tape.backward(loss);
      adam.step();
    }
    for (std::size_t i = 1; i < losses.size(); ++i) {
      EXPECT_LT(losses[i], losses[i - 1]) << "seed " << seed << " step " << i;
    }
  }
}
