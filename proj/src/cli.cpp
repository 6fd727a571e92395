#include "ragc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "ragc/binary_io.hpp"
#include "ragc/config_text.hpp"
#include "ragc/error.hpp"
#include "ragc/io.hpp"
#include "ragc/model.hpp"
#include "ragc/parallel.hpp"
#include "ragc/pool.hpp"
#include "ragc/spatial_index.hpp"
#include "ragc/synth.hpp"
#include "ragc/train.hpp"

namespace ragc {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct KeyHelp {
  const char* key;
  const char* help;
};

const std::vector<KeyHelp>& network_keys() {
  static const std::vector<KeyHelp> keys{
      {"classes", "number of classes (default: taken from the dataset)"},
      {"policy", "edge policy: radius or knn"},
      {"k", "neighbors per node for --policy knn"},
      {"attrs", "edge attributes: cartesian, spherical or both"},
      {"filter-widths", "hidden widths of the dynamic filter net, e.g. 16,32 or none"},
      {"residual", "residual blocks: on or off"},
      {"post-add-relu", "ReLU after the residual addition: on or off"},
      {"batch-norm", "batch normalization: on or off"},
      {"initial-width", "output width of the first AGC layer"},
      {"stage-widths", "block widths per stage, comma-separated"},
      {"blocks-per-stage", "RAGC blocks per stage"},
      {"fc-width", "width of the hidden fully connected layer"},
      {"graph-radii", "graph radius per level in meters, comma-separated"},
      {"pool-radii", "voxel edge per pooling in meters, comma-separated"},
      {"radius-scale", "factor applied to every graph and pooling radius"},
      {"pool-mode", "feature pooling: max or avg"},
      {"dropout", "dropout probability before the last layer"},
      {"seed", "seed for initialization (and training unless --train-seed)"},
  };
  return keys;
}

const std::vector<KeyHelp>& train_keys() {
  static const std::vector<KeyHelp> keys{
      {"epochs", "training epochs"},
      {"lr", "ADAM learning rate"},
      {"weight-decay", "L2 weight decay"},
      {"beta1", "ADAM beta1"},
      {"beta2", "ADAM beta2"},
      {"batch-size", "clouds per batch"},
      {"train-seed", "seed for split, shuffling and augmentation"},
      {"augment", "online augmentation: on or off"},
      {"bn-refresh", "recompute batch-norm statistics before validation and at the end: on or off"},
      {"val-fraction", "share of the training data held out for validation"},
      {"checkpoint-every", "write last.ckpt every N epochs (0 = never)"},
  };
  return keys;
}

/// Option values keyed by flag name; a flag wins over the config file, the
/// config file over built-in defaults.
class Settings {
 public:
  void add(CLI::App* app, const std::string& key, const std::string& help) {
    options_[key] = app->add_option("--" + key, values_[key], help);
  }
  void add_all(CLI::App* app, const std::vector<KeyHelp>& keys) {
    for (const auto& k : keys) add(app, k.key, k.help);
  }
  void add_config(CLI::App* app) {
    app->add_option("--config", config_path_, "key=value file with the same keys as the flags");
  }

  /// Keys set by flag or file, with their winning value.
  std::map<std::string, std::string> given() const {
    std::map<std::string, std::string> out;
    if (!config_path_.empty()) {
      for (const auto& [key, value] : text::read_key_value_file(config_path_)) {
        if (!options_.count(key)) {
          throw UsageError("config file '" + config_path_ + "': unknown key '" + key + "'");
        }
        out[key] = value;
      }
    }
    for (const auto& [key, opt] : options_) {
      if (opt->count() > 0) out[key] = values_.at(key);
    }
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, CLI::Option*> options_;
  std::string config_path_;
};

struct Resolved {
  NetworkConfig net;
  TrainConfig train;
  std::map<std::string, std::string> extra;
  std::map<std::string, std::string> given;

  bool has(const std::string& key) const { return given.count(key) > 0; }
  const std::string& get(const std::string& key) const { return extra.at(key); }
};

Resolved resolve(const Settings& settings, std::map<std::string, std::string> extra_defaults) {
  Resolved r;
  r.given = settings.given();
  r.extra = std::move(extra_defaults);
  try {
    for (const auto& [key, value] : r.given) {
      if (r.extra.count(key)) {
        r.extra[key] = value;
        continue;
      }
      if (apply_key_value(r.net, key, value)) {
        if (key == "seed" && !r.given.count("train-seed")) r.train.seed = r.net.seed;
        continue;
      }
      if (apply_key_value(r.train, key, value)) continue;
      throw UsageError("unknown key '" + key + "'");
    }
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  if (r.net.policy == EdgePolicy::Kind::kKnn && !r.has("k")) {
    throw UsageError("--policy knn requires the missing flag --k");
  }
  return r;
}

void validate_configs(const Resolved& r) {
  try {
    r.net.validate();
    r.train.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

void print_resolved(std::ostream& out, const std::map<std::string, std::string>& kv) {
  out << "# resolved configuration\n";
  for (const auto& [key, value] : kv) out << key << '=' << value << '\n';
  out << "threads=" << thread_count() << '\n';
  out.flush();
}

void print_resolved(std::ostream& out, const Resolved& r, bool with_train = true) {
  auto kv = to_key_values(r.net);
  if (with_train) kv.merge(to_key_values(r.train));
  for (const auto& [key, value] : r.extra) kv[key] = value;
  print_resolved(out, kv);
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::size_t size_value(const Resolved& r, const std::string& key) {
  try {
    return text::parse_size(key, r.get(key));
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

struct RunOutcome {
  TrainHistory history;
  std::optional<Metrics> test;
  double seconds = 0.0;
};

std::vector<std::string> names_for(const Dataset& data, std::size_t classes) {
  std::vector<std::string> names = data.class_names;
  names.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    if (names[c].empty()) names[c] = "class" + std::to_string(c);
  }
  return names;
}

void fill_class_count(Resolved& r, const Dataset& data) {
  if (!r.has("classes")) r.net.class_count = std::max<std::size_t>(2, data.class_names.size());
}

RunOutcome train_once(const NetworkConfig& net_cfg, TrainConfig train_cfg, const Dataset& data,
                      const Dataset* test, const std::string& out_dir, std::ostream& out,
                      bool verbose) {
  const auto start = std::chrono::steady_clock::now();
  train_cfg.out_dir = out_dir;
  Network net(net_cfg);
  RunOutcome outcome;
  outcome.history = train_model(net, data.clouds, train_cfg, [&](const EpochReport& rep) {
    if (!verbose) return;
    out << "epoch " << rep.epoch + 1 << '/' << train_cfg.epochs << " loss " << fixed(rep.mean_loss, 6);
    if (!std::isnan(rep.val_accuracy)) out << " val " << fixed(rep.val_accuracy);
    out << '\n';
    out.flush();
  });
  if (!out_dir.empty()) {
    save_network(net, out_dir + "/model.ckpt");
    std::ostringstream hist;
    hist << "epoch\tloss\tval_accuracy\n";
    for (std::size_t e = 0; e < outcome.history.epoch_loss.size(); ++e) {
      const auto& val = outcome.history.val_accuracy;
      hist << e + 1 << '\t' << text::format_double(outcome.history.epoch_loss[e]) << '\t'
           << (e < val.size() ? text::format_double(val[e]) : std::string("nan")) << '\n';
    }
    le::write_file(out_dir + "/history.tsv", hist.str());
  }
  if (test) {
    outcome.test = evaluate_model(net, test->clouds);
    if (!out_dir.empty()) {
      const auto names = names_for(*test, net_cfg.class_count);
      le::write_file(out_dir + "/test_report.txt", format_report(*outcome.test, names));
      le::write_file(out_dir + "/test_metrics.tsv", format_table(*outcome.test, names));
    }
  }
  outcome.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

// --------------------------------------------------------------------------

int cmd_synth(const Resolved& r, std::ostream& out) {
  print_resolved(out, r.extra);
  SynthConfig cfg;
  std::size_t per_class = 0;
  std::uint64_t seed = 0;
  try {
    per_class = text::parse_size("n", r.get("n"));
    seed = text::parse_size("seed", r.get("seed"));
    cfg.points = text::parse_size("points", r.get("points"));
    cfg.jitter = text::parse_double("jitter", r.get("jitter"));
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  if (per_class < 1) throw UsageError("--n must be >= 1");
  if (r.get("out").empty()) throw UsageError("synth requires --out");
  if (cfg.points <= cfg.point_spread) cfg.point_spread = cfg.points / 4;
  const Dataset data = generate_synthetic_dataset(per_class, seed, cfg);
  write_dataset(r.get("out"), data);
  out << "wrote " << data.clouds.size() << " clouds and " << kManifestName << " to "
      << r.get("out") << '\n';
  return kExitOk;
}

int cmd_train(Resolved& r, std::ostream& out) {
  if (r.get("data").empty()) throw UsageError("train requires --data");
  const Dataset data = load_dataset(r.get("data"));
  fill_class_count(r, data);
  validate_configs(r);
  const std::size_t runs = size_value(r, "runs");
  if (runs < 1) throw UsageError("--runs must be >= 1");
  print_resolved(out, r);

  std::optional<Dataset> test;
  if (!r.get("test").empty()) test = load_dataset(r.get("test"));
  out << "train clouds: " << data.clouds.size();
  if (test) out << ", test clouds: " << test->clouds.size();
  out << '\n';

  const std::string& out_root = r.get("out");
  double best_test = -1.0, best_val = -1.0;
  std::size_t best_run = 0;
  for (std::size_t s = 0; s < runs; ++s) {
    NetworkConfig net_cfg = r.net;
    TrainConfig train_cfg = r.train;
    net_cfg.seed += s;
    train_cfg.seed += s;
    const std::string dir = runs == 1 ? out_root : out_root + "/run" + std::to_string(s);
    if (runs > 1) out << "# run " << s << " (seed " << net_cfg.seed << ")\n";
    const RunOutcome o = train_once(net_cfg, train_cfg, data, test ? &*test : nullptr, dir, out, true);
    out << "best epoch " << o.history.best_epoch + 1 << " val "
        << fixed(o.history.best_val_accuracy);
    if (o.test) out << " test " << fixed(o.test->accuracy);
    out << " (" << fixed(o.seconds, 1) << " s)\n";
    if (!dir.empty()) out << "checkpoint written: " << dir << "/model.ckpt\n";
    const double score = o.test ? o.test->accuracy : o.history.best_val_accuracy;
    if (score > (o.test ? best_test : best_val)) {
      (o.test ? best_test : best_val) = score;
      best_run = s;
    }
    if (o.test && runs == 1) {
      out << format_report(*o.test, names_for(*test, r.net.class_count));
    }
  }
  if (runs > 1) {
    out << "maximum " << (test ? "test" : "validation") << " accuracy over " << runs
        << " runs: " << fixed(test ? best_test : best_val) << " (run " << best_run << ")\n";
  }
  return kExitOk;
}

int cmd_eval(const Resolved& r, std::ostream& out) {
  if (r.get("checkpoint").empty()) throw UsageError("eval requires --checkpoint");
  if (r.get("data").empty()) throw UsageError("eval requires --data");
  Network net = load_network(r.get("checkpoint"));
  auto kv = to_key_values(net.config());
  for (const auto& [key, value] : r.extra) kv[key] = value;
  print_resolved(out, kv);
  const Dataset data = load_dataset(r.get("data"));
  const Metrics m = evaluate_model(net, data.clouds, size_value(r, "batch-size"));
  const auto names = names_for(data, net.config().class_count);
  out << format_report(m, names);
  if (!r.get("confusion-out").empty()) {
    le::write_file(r.get("confusion-out"), render_confusion_pgm(m));
    out << "confusion image written: " << r.get("confusion-out") << '\n';
  }
  if (!r.get("table-out").empty()) {
    le::write_file(r.get("table-out"), format_table(m, names));
    out << "metrics table written: " << r.get("table-out") << '\n';
  }
  return kExitOk;
}

int cmd_predict(const Resolved& r, std::ostream& out) {
  if (r.get("checkpoint").empty()) throw UsageError("predict requires --checkpoint");
  if (r.get("input").empty()) throw UsageError("predict requires --input");
  Network net = load_network(r.get("checkpoint"));
  auto kv = to_key_values(net.config());
  for (const auto& [key, value] : r.extra) kv[key] = value;
  print_resolved(out, kv);
  const PointCloud pc = load_scene_cloud(r.get("input"));
  const Tensor proba = net.predict_proba(std::span<const PointCloud>(&pc, 1));
  const auto row = proba.values();
  std::vector<std::string> names;
  if (!r.get("names").empty()) {
    std::stringstream ss(r.get("names"));
    std::string item;
    while (std::getline(ss, item, ',')) names.push_back(item);
  }
  const std::size_t cls = argmax_row(row);
  out << "points " << pc.size() << '\n';
  out << "class " << cls;
  if (cls < names.size()) out << ' ' << names[cls];
  out << '\n';
  for (std::size_t c = 0; c < row.size(); ++c) {
    out << "p[" << c << "]";
    if (c < names.size()) out << ' ' << names[c];
    out << ' ' << fixed(row[c], 6) << '\n';
  }
  return kExitOk;
}

struct AblationCase {
  std::string label;
  NetworkConfig cfg;
};

std::vector<AblationCase> ablation_cases(const std::string& axis, const Resolved& r) {
  std::vector<AblationCase> cases;
  auto with = [&](const std::string& label, auto edit) {
    NetworkConfig c = r.net;
    edit(c);
    cases.push_back({label, c});
  };
  if (axis == "policy") {
    const std::size_t k = r.has("k") ? r.net.knn_k : 9;
    with("radius", [](NetworkConfig& c) { c.policy = EdgePolicy::Kind::kRadius; });
    with("knn k=" + std::to_string(k), [k](NetworkConfig& c) {
      c.policy = EdgePolicy::Kind::kKnn;
      c.knn_k = k;
    });
  } else if (axis == "edge-attrs") {
    for (auto mode : {EdgeAttrMode::kCartesian, EdgeAttrMode::kSpherical, EdgeAttrMode::kBoth}) {
      with(to_string(mode), [mode](NetworkConfig& c) { c.attr_mode = mode; });
    }
  } else if (axis == "filter-depth") {
    const std::vector<std::vector<std::size_t>> depths{{}, {16}, {32}, {16, 32}};
    for (const auto& widths : depths) {
      std::string label;
      for (auto w : widths) label += "FC(" + std::to_string(w) + ")-";
      label += "FC(out*in)";
      with(label, [widths](NetworkConfig& c) { c.filter_widths = widths; });
    }
  } else if (axis == "residual") {
    with("plain", [](NetworkConfig& c) { c.residual = false; });
    with("residual", [](NetworkConfig& c) { c.residual = true; });
  } else {
    throw UsageError("unknown ablation axis '" + axis +
                     "' (policy, edge-attrs, filter-depth, residual or all)");
  }
  return cases;
}

std::pair<Dataset, Dataset> holdout_split(const Dataset& data, std::uint64_t seed) {
  std::vector<std::size_t> order(data.clouds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_test = std::max<std::size_t>(1, order.size() / 4);
  Dataset train, test;
  train.class_names = test.class_names = data.class_names;
  for (std::size_t i = 0; i < order.size(); ++i) {
    Dataset& dst = i < n_test ? test : train;
    dst.clouds.push_back(data.clouds[order[i]]);
    dst.files.push_back(data.files[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

int cmd_ablate(Resolved& r, std::ostream& out) {
  if (r.get("data").empty()) throw UsageError("ablate requires --data");
  if (!r.has("epochs")) r.train.epochs = 5;
  const std::string axis_arg = r.get("axis");
  std::vector<std::string> axes;
  if (axis_arg == "all") axes = {"policy", "edge-attrs", "filter-depth", "residual"};
  else axes = {axis_arg};
  for (const auto& a : axes) ablation_cases(a, r);  // reject unknown axes before any work

  const Dataset full = load_dataset(r.get("data"));
  fill_class_count(r, full);
  validate_configs(r);
  print_resolved(out, r);

  Dataset train, test;
  if (r.get("test").empty()) {
    std::tie(train, test) = holdout_split(full, r.train.seed);
    out << "no --test given: holding out " << test.clouds.size() << " of "
        << full.clouds.size() << " clouds\n";
  } else {
    train = full;
    test = load_dataset(r.get("test"));
  }

  std::ostringstream tsv;
  tsv << "axis\tconfiguration\taccuracy\tbest_val_accuracy\tseconds\n";
  for (const auto& axis : axes) {
    const auto cases = ablation_cases(axis, r);
    out << "\n## " << axis << " (" << r.train.epochs << " epochs)\n";
    out << std::left << std::setw(34) << "configuration" << "accuracy\n";
    std::vector<double> acc;
    for (const auto& c : cases) {
      try {
        c.cfg.validate();
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }
      const RunOutcome o = train_once(c.cfg, r.train, train, &test, "", out, false);
      acc.push_back(o.test->accuracy);
      out << std::left << std::setw(34) << c.label << fixed(o.test->accuracy) << '\n';
      out.flush();
      tsv << axis << '\t' << c.label << '\t' << text::format_double(o.test->accuracy) << '\t'
          << text::format_double(o.history.best_val_accuracy) << '\t' << fixed(o.seconds, 2)
          << '\n';
    }
    if (axis == "residual") {
      const double delta = 100.0 * (acc[1] - acc[0]);
      out << "residual - plain: " << (delta >= 0 ? "+" : "") << fixed(delta, 1) << " points\n";
    } else {
      const auto best = std::max_element(acc.begin(), acc.end()) - acc.begin();
      out << "best: " << cases[best].label << '\n';
    }
  }
  if (!r.get("out").empty()) {
    std::filesystem::create_directories(r.get("out"));
    le::write_file(r.get("out") + "/ablation.tsv", tsv.str());
    out << "\ntable written: " << r.get("out") << "/ablation.tsv\n";
  }
  return kExitOk;
}

int cmd_bench(Resolved& r, std::ostream& out) {
  validate_configs(r);
  print_resolved(out, r, false);
  const std::size_t points = size_value(r, "points");
  const std::size_t repeats = std::max<std::size_t>(1, size_value(r, "repeats"));
  if (points < 8) throw UsageError("--points must be >= 8");
  SynthConfig sc;
  sc.points = points;
  sc.point_spread = 0;
  const PointCloud pc = synthesize_scene(2, r.net.seed, sc);
  const double radius = r.net.edge_policy(0).kind == EdgePolicy::Kind::kRadius
                            ? r.net.edge_policy(0).radius
                            : r.net.graph_radii.at(0) * r.net.radius_scale;
  const std::size_t k = r.net.knn_k;

  auto time_it = [&](auto&& fn) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < repeats; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      fn();
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
  };
  auto row = [&](const std::string& op, std::size_t n, double sec, const std::string& note) {
    out << std::left << std::setw(28) << op << std::setw(10) << n << std::setw(14)
        << fixed(sec * 1e3, 3) << std::setw(16)
        << (sec > 0 ? fixed(static_cast<double>(n) / sec, 0) : std::string("inf")) << note
        << '\n';
  };

  out << std::left << std::setw(28) << "operation" << std::setw(10) << "items" << std::setw(14)
      << "best ms" << std::setw(16) << "items/s" << "notes\n";
  std::size_t edges = 0;
  row("grid build", points, time_it([&] { GridIndex idx(pc.points, radius); }), "");
  GridIndex idx(pc.points, radius);
  const double radius_sec = time_it([&] {
    edges = 0;
    for (std::size_t i = 0; i < points; ++i) edges += idx.radius_neighbors(i, radius).size();
  });
  row("radius query r=" + text::format_double(radius), points, radius_sec,
      "mean degree " + fixed(static_cast<double>(edges) / points, 2));
  row("knn query k=" + std::to_string(k), points, time_it([&] {
        for (std::size_t i = 0; i < points; ++i) idx.knn_neighbors(i, k);
      }),
      "");
  row("graph construction", points, time_it([&] {
        construct_graph(pc, r.net.edge_policy(0), r.net.attr_mode);
      }),
      "");

  std::vector<Vec3> pos = pc.points;
  for (std::size_t level = 0; level < r.net.pool_radii.size(); ++level) {
    const std::vector<std::size_t> batch(pos.size(), 0);
    const double rp = r.net.pool_radius(level);
    VoxelAssignment va;
    const double sec = time_it([&] { va = voxel_assign(pos, batch, rp); });
    row("voxel pool r_p=" + text::format_double(rp), pos.size(), sec,
        std::to_string(pos.size()) + " -> " + std::to_string(va.cluster_count()) + " nodes (" +
            fixed(static_cast<double>(va.cluster_count()) / pos.size(), 3) + ")");
    pos = va.centroids;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Residual attention graph convolution for 3D scene classification", "ragc_cli"};
  app.require_subcommand(1);

  Settings synth_s, train_s, eval_s, predict_s, ablate_s, bench_s;
  std::map<std::string, std::string> synth_x{{"n", "50"}, {"seed", "1"}, {"out", ""},
                                             {"points", "500"}, {"jitter", "0.01"}};
  std::map<std::string, std::string> train_x{{"data", ""}, {"test", ""}, {"out", "ragc_run"},
                                             {"runs", "1"}};
  std::map<std::string, std::string> eval_x{{"checkpoint", ""}, {"data", ""},
                                            {"confusion-out", ""}, {"table-out", ""},
                                            {"batch-size", "16"}};
  std::map<std::string, std::string> predict_x{{"checkpoint", ""}, {"input", ""}, {"names", ""}};
  std::map<std::string, std::string> ablate_x{{"data", ""}, {"test", ""}, {"axis", "all"},
                                              {"out", ""}};
  std::map<std::string, std::string> bench_x{{"points", "3500"}, {"repeats", "3"}};

  auto* synth = app.add_subcommand("synth", "generate the synthetic 4-class benchmark");
  synth_s.add(synth, "n", "scenes per class");
  synth_s.add(synth, "seed", "generator seed");
  synth_s.add(synth, "out", "output directory");
  synth_s.add(synth, "points", "points per scene");
  synth_s.add(synth, "jitter", "uniform per-axis jitter in meters");
  synth_s.add_config(synth);

  auto* train = app.add_subcommand("train", "train a classifier on a dataset directory");
  train_s.add_all(train, network_keys());
  train_s.add_all(train, train_keys());
  train_s.add(train, "data", "training dataset directory (with index.tsv)");
  train_s.add(train, "test", "optional test dataset directory evaluated after training");
  train_s.add(train, "out", "output directory for checkpoints and history");
  train_s.add(train, "runs", "independent seeded runs; the maximum accuracy is reported");
  train_s.add_config(train);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset directory");
  eval_s.add(eval, "checkpoint", "model checkpoint (config read from <checkpoint>.cfg)");
  eval_s.add(eval, "data", "dataset directory");
  eval_s.add(eval, "confusion-out", "write the confusion matrix as a PGM image");
  eval_s.add(eval, "table-out", "write the tab-separated metrics table");
  eval_s.add(eval, "batch-size", "clouds per forward pass");
  eval_s.add_config(eval);

  auto* predict = app.add_subcommand("predict", "classify one capture or cloud file");
  predict_s.add(predict, "checkpoint", "model checkpoint");
  predict_s.add(predict, "input", "capture (RAGC-DEPTH) or cloud (RAGC-PC) file");
  predict_s.add(predict, "names", "comma-separated class names for display");
  predict_s.add_config(predict);

  auto* ablate = app.add_subcommand("ablate", "run the ablation sweeps and print comparison tables");
  ablate_s.add_all(ablate, network_keys());
  ablate_s.add_all(ablate, train_keys());
  ablate_s.add(ablate, "data", "dataset directory");
  ablate_s.add(ablate, "test", "test dataset directory (default: 25% seeded holdout of --data)");
  ablate_s.add(ablate, "axis", "policy, edge-attrs, filter-depth, residual or all");
  ablate_s.add(ablate, "out", "directory receiving ablation.tsv");
  ablate_s.add_config(ablate);

  auto* bench = app.add_subcommand("bench", "spatial index and pooling throughput");
  bench_s.add_all(bench, network_keys());
  bench_s.add(bench, "points", "points in the benchmark scene");
  bench_s.add(bench, "repeats", "timing repetitions (best is reported)");
  bench_s.add_config(bench);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "usage error: " << e.what() << "\nrun with --help for the flag list\n";
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(resolve(synth_s, synth_x), out);
    if (train->parsed()) {
      Resolved r = resolve(train_s, train_x);
      return cmd_train(r, out);
    }
    if (eval->parsed()) return cmd_eval(resolve(eval_s, eval_x), out);
    if (predict->parsed()) return cmd_predict(resolve(predict_s, predict_x), out);
    if (ablate->parsed()) {
      Resolved r = resolve(ablate_s, ablate_x);
      return cmd_ablate(r, out);
    }
    if (bench->parsed()) {
      Resolved r = resolve(bench_s, bench_x);
      return cmd_bench(r, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ragc
