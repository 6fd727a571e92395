#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ragc/model.hpp"
#include "ragc/pointcloud.hpp"

namespace ragc {

struct TrainConfig {
  std::size_t epochs = 200;
  double lr = 1e-3;
  double weight_decay = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  bool augment = true;
  AugmentConfig augmentation;
  /// Share of the training set held out (seeded) for checkpoint selection.
  double validation_fraction = 0.1;
  /// Directory receiving best.ckpt (and last.ckpt every `checkpoint_every`
  /// epochs); empty disables writing.
  std::string out_dir;
  std::size_t checkpoint_every = 0;
  /// Leave the best-by-validation parameters in the network when done.
  bool restore_best = true;
  /// Recompute batch-norm running statistics over the training split
  /// before every validation pass and after the last epoch.
  bool refresh_bn = true;

  void validate() const;
};

std::map<std::string, std::string> to_key_values(const TrainConfig& cfg);
bool apply_key_value(TrainConfig& cfg, const std::string& key, const std::string& value);

struct EpochReport {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  /// NaN when there is no validation split.
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<double> epoch_loss;
  std::vector<double> val_accuracy;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
};

/// Replaces every batch-norm running mean/variance with the sample-weighted
/// average of the batch statistics over `dataset` (train-mode forward, no
/// augmentation, no parameter updates). Momentum is left as it was.
void refresh_batch_norm_statistics(Network& net, std::span<const PointCloud> dataset,
                                   std::size_t batch_size = 16);

using EpochCallback = std::function<void(const EpochReport&)>;

/// Per epoch: shuffle, augment online, forward, softmax cross-entropy,
/// backward, ADAM step. Every cloud must carry a label in [0, classes).
TrainHistory train_model(Network& net, std::span<const PointCloud> dataset,
                         const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Confusion matrix rows are true classes, columns predicted classes.
struct Metrics {
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<double> loss_history;
  std::size_t total = 0;

  bool operator==(const Metrics&) const = default;
};

/// Argmax with ties broken toward the lowest class index.
std::size_t argmax_row(std::span<const double> row);

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted,
                        std::size_t classes);

/// Eval-mode predictions for every cloud, batched.
std::vector<int> predict_classes(Network& net, std::span<const PointCloud> dataset,
                                 std::size_t batch_size = 16);

Metrics evaluate_model(Network& net, std::span<const PointCloud> dataset,
                       std::size_t batch_size = 16);

/// Human-readable summary with per-class accuracy and the confusion matrix.
std::string format_report(const Metrics& m, const std::vector<std::string>& class_names = {});

/// Tab-separated table. Header: `true\pred` then one column per class,
/// then `total` and `accuracy`; one row per true class, then a final row
/// `overall` with the sample count and overall accuracy.
std::string format_table(const Metrics& m, const std::vector<std::string>& class_names = {});

/// Renders the row-normalized confusion matrix as a binary PGM image with
/// `cell` pixels per entry (white = 0, black = 1).
std::string render_confusion_pgm(const Metrics& m, std::size_t cell = 32);

}  // namespace ragc
