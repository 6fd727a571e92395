#include "ragc/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "ragc/config_text.hpp"
#include "ragc/error.hpp"
#include "ragc/ops.hpp"
#include "ragc/optim.hpp"

namespace ragc {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(lr >= 0.0)) throw ConfigError("learning rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be >= 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in [0, 1)");
  }
}

std::map<std::string, std::string> to_key_values(const TrainConfig& cfg) {
  return {
      {"epochs", std::to_string(cfg.epochs)},
      {"lr", text::format_double(cfg.lr)},
      {"weight-decay", text::format_double(cfg.weight_decay)},
      {"beta1", text::format_double(cfg.beta1)},
      {"beta2", text::format_double(cfg.beta2)},
      {"batch-size", std::to_string(cfg.batch_size)},
      {"train-seed", std::to_string(cfg.seed)},
      {"augment", text::on_off(cfg.augment)},
      {"val-fraction", text::format_double(cfg.validation_fraction)},
      {"checkpoint-every", std::to_string(cfg.checkpoint_every)},
      {"bn-refresh", text::on_off(cfg.refresh_bn)},
  };
}

bool apply_key_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "epochs") cfg.epochs = text::parse_size(key, value);
  else if (key == "lr") cfg.lr = text::parse_double(key, value);
  else if (key == "weight-decay") cfg.weight_decay = text::parse_double(key, value);
  else if (key == "beta1") cfg.beta1 = text::parse_double(key, value);
  else if (key == "beta2") cfg.beta2 = text::parse_double(key, value);
  else if (key == "batch-size") cfg.batch_size = text::parse_size(key, value);
  else if (key == "train-seed") cfg.seed = text::parse_size(key, value);
  else if (key == "augment") cfg.augment = text::parse_on_off(key, value);
  else if (key == "val-fraction") cfg.validation_fraction = text::parse_double(key, value);
  else if (key == "checkpoint-every") cfg.checkpoint_every = text::parse_size(key, value);
  else if (key == "bn-refresh") cfg.refresh_bn = text::parse_on_off(key, value);
  else return false;
  return true;
}

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  // splitmix64 over the combined words.
  std::uint64_t z = a * 0x9E3779B97F4A7C15ull ^ (b + 0x632BE59BD9B4E019ull) * 0xBF58476D1CE4E5B9ull ^
                    (c + 0x85EBCA77C2B2AE63ull) * 0x94D049BB133111EBull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<int> labels_of(std::span<const PointCloud> data, std::size_t classes) {
  std::vector<int> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data[i].label) throw LabelError("sample " + std::to_string(i) + " has no label");
    const int l = *data[i].label;
    if (l < 0 || static_cast<std::size_t>(l) >= classes) {
      throw LabelError("sample " + std::to_string(i) + " has label " + std::to_string(l) +
                       " outside [0, " + std::to_string(classes) + ")");
    }
    out.push_back(l);
  }
  return out;
}

std::string parameter_norms(Network& net) {
  std::ostringstream os;
  for (const auto& [name, t] : net.parameters().params) {
    double s = 0.0;
    for (double v : t.values()) s += v * v;
    os << "  " << name << " |w|=" << std::sqrt(s) << '\n';
  }
  return os.str();
}

}  // namespace

void refresh_batch_norm_statistics(Network& net, std::span<const PointCloud> dataset,
                                   std::size_t batch_size) {
  if (dataset.empty() || batch_size == 0) return;
  auto params = net.parameters();
  std::vector<double> momenta;
  for (auto& [name, st] : params.buffers) momenta.push_back(st->momentum);
  std::mt19937_64 unused(0);
  std::size_t seen = 0;
  for (std::size_t start = 0; start < dataset.size(); start += batch_size) {
    const std::size_t end = std::min(dataset.size(), start + batch_size);
    seen += end - start;
    for (auto& [name, st] : params.buffers) {
      st->momentum = static_cast<double>(end - start) / static_cast<double>(seen);
    }
    Tape tape(false);
    net.forward(tape, dataset.subspan(start, end - start), Mode::kTrain, unused);
  }
  for (std::size_t i = 0; i < momenta.size(); ++i) params.buffers[i].second->momentum = momenta[i];
}

TrainHistory train_model(Network& net, std::span<const PointCloud> dataset,
                         const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (dataset.empty()) throw DataError("training set is empty");
  const std::size_t classes = net.config().class_count;
  labels_of(dataset, classes);

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(
      std::floor(cfg.validation_fraction * static_cast<double>(dataset.size())));
  std::vector<PointCloud> val, train_plain;
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  for (std::size_t i = 0; i < n_val; ++i) val.push_back(dataset[order[i]]);
  if (train_idx.empty()) throw DataError("validation split leaves no training samples");
  if (cfg.refresh_bn) {
    for (auto i : train_idx) train_plain.push_back(dataset[i]);
  }

  auto params = net.parameters();
  Adam adam(params.tensors(), {cfg.lr, cfg.beta1, cfg.beta2, 1e-8, cfg.weight_decay});

  TrainHistory history;
  history.best_val_accuracy = -1.0;
  std::vector<NamedArray> best_state;
  if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0, batch_no = 0; start < train_idx.size();
         start += cfg.batch_size, ++batch_no) {
      const std::size_t end = std::min(train_idx.size(), start + cfg.batch_size);
      std::vector<PointCloud> batch;
      std::vector<int> targets;
      for (std::size_t p = start; p < end; ++p) {
        const std::size_t idx = train_idx[p];
        if (cfg.augment) {
          std::mt19937_64 sample_rng(mix_seed(cfg.seed, epoch, idx));
          batch.push_back(augment_cloud(dataset[idx], sample_rng, cfg.augmentation));
        } else {
          batch.push_back(dataset[idx]);
        }
        targets.push_back(*dataset[idx].label);
      }
      Tape tape;
      adam.zero_grad();
      const Tensor logits = net.forward(tape, batch, Mode::kTrain, rng);
      const Tensor loss = softmax_cross_entropy(tape, logits, targets);
      if (!std::isfinite(loss.item())) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_no) + "; parameter norms:\n" +
                             parameter_norms(net));
      }
      tape.backward(loss);
      adam.step();
      loss_sum += loss.item() * static_cast<double>(end - start);
    }
    EpochReport report{epoch, loss_sum / static_cast<double>(train_idx.size()),
                       std::numeric_limits<double>::quiet_NaN()};
    history.epoch_loss.push_back(report.mean_loss);
    if (cfg.refresh_bn && (!val.empty() || epoch + 1 == cfg.epochs)) {
      refresh_batch_norm_statistics(net, train_plain, cfg.batch_size);
    }

    if (!val.empty()) {
      report.val_accuracy = evaluate_model(net, val, cfg.batch_size).accuracy;
      history.val_accuracy.push_back(report.val_accuracy);
      if (report.val_accuracy > history.best_val_accuracy) {
        history.best_val_accuracy = report.val_accuracy;
        history.best_epoch = epoch;
        best_state = net.parameters().to_arrays();
        if (!cfg.out_dir.empty()) save_network(net, cfg.out_dir + "/best.ckpt");
      }
    } else {
      history.best_epoch = epoch;
      if (!cfg.out_dir.empty()) save_network(net, cfg.out_dir + "/best.ckpt");
    }
    if (!cfg.out_dir.empty() && cfg.checkpoint_every > 0 &&
        (epoch + 1) % cfg.checkpoint_every == 0) {
      save_network(net, cfg.out_dir + "/last.ckpt");
    }
    if (on_epoch) on_epoch(report);
  }
  if (cfg.restore_best && !best_state.empty()) net.parameters().load_arrays(best_state);
  return history;
}

std::size_t argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted,
                        std::size_t classes) {
  if (truth.empty()) throw DataError("cannot compute metrics over an empty dataset");
  if (truth.size() != predicted.size()) {
    throw DimensionError("truth and prediction counts differ");
  }
  Metrics m;
  m.total = truth.size();
  m.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || static_cast<std::size_t>(truth[i]) >= classes || predicted[i] < 0 ||
        static_cast<std::size_t>(predicted[i]) >= classes) {
      throw LabelError("label out of range at sample " + std::to_string(i));
    }
    ++m.confusion[truth[i]][predicted[i]];
  }
  std::size_t trace = 0;
  m.per_class_accuracy.assign(classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    trace += m.confusion[c][c];
    const std::size_t row = std::accumulate(m.confusion[c].begin(), m.confusion[c].end(),
                                            std::size_t{0});
    m.per_class_accuracy[c] =
        row ? static_cast<double>(m.confusion[c][c]) / static_cast<double>(row) : 0.0;
  }
  m.accuracy = static_cast<double>(trace) / static_cast<double>(m.total);
  return m;
}

std::vector<int> predict_classes(Network& net, std::span<const PointCloud> dataset,
                                 std::size_t batch_size) {
  std::vector<int> out;
  out.reserve(dataset.size());
  for (std::size_t start = 0; start < dataset.size(); start += batch_size) {
    const std::size_t end = std::min(dataset.size(), start + batch_size);
    Tape tape(false);
    std::mt19937_64 unused(0);
    const Tensor logits = net.forward(tape, dataset.subspan(start, end - start), Mode::kEval, unused);
    const std::size_t c = logits.dim(1);
    for (std::size_t i = 0; i < end - start; ++i) {
      out.push_back(static_cast<int>(argmax_row(logits.values().subspan(i * c, c))));
    }
  }
  return out;
}

Metrics evaluate_model(Network& net, std::span<const PointCloud> dataset,
                       std::size_t batch_size) {
  if (dataset.empty()) throw DataError("cannot evaluate on an empty dataset");
  const std::size_t classes = net.config().class_count;
  const auto truth = labels_of(dataset, classes);
  const auto predicted = predict_classes(net, dataset, batch_size);
  return compute_metrics(truth, predicted, classes);
}

namespace {
std::string class_name(const std::vector<std::string>& names, std::size_t c) {
  return c < names.size() ? names[c] : "class" + std::to_string(c);
}
}  // namespace

std::string format_report(const Metrics& m, const std::vector<std::string>& class_names) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "samples: " << m.total << '\n';
  os << "accuracy: " << m.accuracy << '\n';
  os << "per-class accuracy:\n";
  for (std::size_t c = 0; c < m.per_class_accuracy.size(); ++c) {
    os << "  " << class_name(class_names, c) << ": " << m.per_class_accuracy[c] << '\n';
  }
  os << "confusion matrix (rows = true, columns = predicted):\n";
  for (const auto& row : m.confusion) {
    os << ' ';
    for (auto v : row) os << ' ' << std::setw(5) << v;
    os << '\n';
  }
  return os.str();
}

std::string format_table(const Metrics& m, const std::vector<std::string>& class_names) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "true\\pred";
  for (std::size_t c = 0; c < m.confusion.size(); ++c) os << '\t' << class_name(class_names, c);
  os << "\ttotal\taccuracy\n";
  for (std::size_t r = 0; r < m.confusion.size(); ++r) {
    os << class_name(class_names, r);
    std::size_t total = 0;
    for (auto v : m.confusion[r]) {
      os << '\t' << v;
      total += v;
    }
    os << '\t' << total << '\t' << m.per_class_accuracy[r] << '\n';
  }
  os << "overall";
  for (std::size_t c = 0; c < m.confusion.size(); ++c) os << '\t';
  os << '\t' << m.total << '\t' << m.accuracy << '\n';
  return os.str();
}

std::string render_confusion_pgm(const Metrics& m, std::size_t cell) {
  const std::size_t c = m.confusion.size();
  const std::size_t side = c * cell;
  std::ostringstream os;
  os << "P5\n" << side << ' ' << side << "\n255\n";
  std::string pixels(side * side, '\0');
  for (std::size_t r = 0; r < c; ++r) {
    const std::size_t row_total =
        std::accumulate(m.confusion[r].begin(), m.confusion[r].end(), std::size_t{0});
    for (std::size_t k = 0; k < c; ++k) {
      const double frac = row_total ? static_cast<double>(m.confusion[r][k]) /
                                          static_cast<double>(row_total)
                                    : 0.0;
      const auto shade = static_cast<unsigned char>(std::lround(255.0 * (1.0 - frac)));
      for (std::size_t y = r * cell; y < (r + 1) * cell; ++y) {
        for (std::size_t x = k * cell; x < (k + 1) * cell; ++x) {
          pixels[y * side + x] = static_cast<char>(shade);
        }
      }
    }
  }
  os << pixels;
  return os.str();
}

}  // namespace ragc
