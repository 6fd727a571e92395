#include "ragc/model.hpp"

#include <fstream>
#include <sstream>

#include "ragc/checkpoint.hpp"
#include "ragc/config_text.hpp"
#include "ragc/error.hpp"
#include "ragc/ops.hpp"

namespace ragc {

EdgePolicy NetworkConfig::edge_policy(std::size_t level) const {
  if (policy == EdgePolicy::Kind::kKnn) return EdgePolicy::with_knn(knn_k);
  return EdgePolicy::with_radius(graph_radii.at(level) * radius_scale);
}

void NetworkConfig::validate() const {
  if (class_count < 2) throw ConfigError("class_count must be at least 2");
  if (initial_width == 0 || fc_width == 0 || blocks_per_stage == 0) {
    throw ConfigError("layer widths and block counts must be positive");
  }
  for (auto w : stage_widths) {
    if (w == 0) throw ConfigError("stage widths must be positive");
  }
  if (pool_radii.size() != pooling_count()) {
    throw ConfigError("pooling radii list has " + std::to_string(pool_radii.size()) +
                      " entries but the layer plan has " + std::to_string(pooling_count()) +
                      " poolings");
  }
  if (graph_radii.size() != pooling_count() + 1) {
    throw ConfigError("graph radii list has " + std::to_string(graph_radii.size()) +
                      " entries, expected " + std::to_string(pooling_count() + 1) +
                      " (graph init plus one per pooling)");
  }
  for (double r : graph_radii) {
    if (!(r > 0.0)) throw ConfigError("graph radii must be positive");
  }
  for (double r : pool_radii) {
    if (!(r > 0.0)) throw ConfigError("pooling radii must be positive");
  }
  if (!(radius_scale > 0.0)) throw ConfigError("radius_scale must be positive");
  if (policy == EdgePolicy::Kind::kKnn && knn_k == 0) throw ConfigError("knn policy needs k >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

std::map<std::string, std::string> to_key_values(const NetworkConfig& cfg) {
  return {
      {"classes", std::to_string(cfg.class_count)},
      {"policy", cfg.policy == EdgePolicy::Kind::kRadius ? "radius" : "knn"},
      {"k", std::to_string(cfg.knn_k)},
      {"attrs", to_string(cfg.attr_mode)},
      {"filter-widths", text::join(cfg.filter_widths)},
      {"residual", text::on_off(cfg.residual)},
      {"post-add-relu", text::on_off(cfg.post_add_relu)},
      {"batch-norm", text::on_off(cfg.batch_norm)},
      {"initial-width", std::to_string(cfg.initial_width)},
      {"stage-widths", text::join(cfg.stage_widths)},
      {"blocks-per-stage", std::to_string(cfg.blocks_per_stage)},
      {"fc-width", std::to_string(cfg.fc_width)},
      {"graph-radii", text::join(cfg.graph_radii)},
      {"pool-radii", text::join(cfg.pool_radii)},
      {"radius-scale", text::format_double(cfg.radius_scale)},
      {"pool-mode", to_string(cfg.pool_mode)},
      {"dropout", text::format_double(cfg.dropout)},
      {"seed", std::to_string(cfg.seed)},
  };
}

bool apply_key_value(NetworkConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "classes") cfg.class_count = text::parse_size(key, value);
  else if (key == "policy") {
    if (value == "radius") cfg.policy = EdgePolicy::Kind::kRadius;
    else if (value == "knn") cfg.policy = EdgePolicy::Kind::kKnn;
    else throw ConfigError("policy must be radius or knn, got '" + value + "'");
  } else if (key == "k") cfg.knn_k = text::parse_size(key, value);
  else if (key == "attrs") cfg.attr_mode = parse_attr_mode(value);
  else if (key == "filter-widths") cfg.filter_widths = text::parse_size_list(key, value);
  else if (key == "residual") cfg.residual = text::parse_on_off(key, value);
  else if (key == "post-add-relu") cfg.post_add_relu = text::parse_on_off(key, value);
  else if (key == "batch-norm") cfg.batch_norm = text::parse_on_off(key, value);
  else if (key == "initial-width") cfg.initial_width = text::parse_size(key, value);
  else if (key == "stage-widths") cfg.stage_widths = text::parse_size_list(key, value);
  else if (key == "blocks-per-stage") cfg.blocks_per_stage = text::parse_size(key, value);
  else if (key == "fc-width") cfg.fc_width = text::parse_size(key, value);
  else if (key == "graph-radii") cfg.graph_radii = text::parse_double_list(key, value);
  else if (key == "pool-radii") cfg.pool_radii = text::parse_double_list(key, value);
  else if (key == "radius-scale") cfg.radius_scale = text::parse_double(key, value);
  else if (key == "pool-mode") {
    if (value == "max") cfg.pool_mode = PoolMode::kMax;
    else if (value == "avg") cfg.pool_mode = PoolMode::kAvg;
    else throw ConfigError("pool-mode must be max or avg, got '" + value + "'");
  } else if (key == "dropout") cfg.dropout = text::parse_double(key, value);
  else if (key == "seed") cfg.seed = text::parse_size(key, value);
  else return false;
  return true;
}

Network::Network(const NetworkConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t a = attr_width(cfg_.attr_mode);
  initial_conv_ = AgcLayer::init(a, cfg_.filter_widths, 1, cfg_.initial_width, rng);
  initial_bn_ = BatchNorm::init(cfg_.initial_width);
  const RagcOptions options{cfg_.residual, cfg_.batch_norm, cfg_.post_add_relu};
  std::size_t width = cfg_.initial_width;
  for (auto stage_width : cfg_.stage_widths) {
    std::vector<RagcBlock> blocks;
    for (std::size_t b = 0; b < cfg_.blocks_per_stage; ++b) {
      blocks.push_back(RagcBlock::init(a, cfg_.filter_widths, width, stage_width, options, rng));
      width = stage_width;
    }
    stages_.push_back(std::move(blocks));
  }
  fc1_ = Linear::init(width, cfg_.fc_width, rng);
  fc2_ = Linear::init(cfg_.fc_width, cfg_.class_count, rng);
}

Network::Network(const NetworkConfig& cfg) : Network(cfg, std::mt19937_64(cfg.seed), 0) {}

Network::Network(const NetworkConfig& cfg, std::mt19937_64 rng, int) : Network(cfg, rng) {}

Tensor Network::forward(Tape& tape, std::span<const PointCloud> batch, Mode mode,
                        std::mt19937_64& rng) {
  if (batch.empty()) throw DataError("network forward needs a non-empty batch");
  node_counts_.assign(batch.size(), {});
  const auto count_nodes = [this](const GeometricGraph& g) {
    std::vector<std::size_t> per(g.sample_count, 0);
    for (auto b : g.batch_id) ++per[b];
    for (std::size_t s = 0; s < per.size(); ++s) node_counts_[s].push_back(per[s]);
  };

  GeometricGraph g = construct_graph(batch, cfg_.edge_policy(0), cfg_.attr_mode);
  count_nodes(g);
  Tensor x = initial_conv_.forward(tape, g, g.node_features);
  if (cfg_.batch_norm) x = initial_bn_.forward(tape, x, mode);
  x = relu(tape, x);

  for (std::size_t level = 0; level < cfg_.pooling_count(); ++level) {
    g.node_features = x;
    g = voxel_downsample(tape, g, cfg_.pool_radius(level), cfg_.pool_mode,
                         cfg_.edge_policy(level + 1), cfg_.attr_mode);
    count_nodes(g);
    x = g.node_features;
    if (level < stages_.size()) {
      for (auto& block : stages_[level]) x = block.forward(tape, g, x, mode);
    }
  }
  g.node_features = x;
  Tensor h = global_average_readout(tape, g);
  h = relu(tape, fc1_.forward(tape, h));
  h = dropout(tape, h, cfg_.dropout, mode, rng);
  return fc2_.forward(tape, h);
}

Tensor Network::predict_proba(std::span<const PointCloud> batch) {
  Tape tape(false);
  std::mt19937_64 unused(0);
  return softmax(forward(tape, batch, Mode::kEval, unused));
}

ParameterSet Network::parameters() {
  ParameterSet set;
  initial_conv_.collect(set, "agc0");
  if (cfg_.batch_norm) initial_bn_.collect(set, "bn0");
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (std::size_t b = 0; b < stages_[s].size(); ++b) {
      stages_[s][b].collect(set, "stage" + std::to_string(s + 1) + ".block" + std::to_string(b));
    }
  }
  fc1_.collect(set, "fc1");
  fc2_.collect(set, "fc2");
  return set;
}

std::size_t Network::parameter_count() { return parameters().scalar_count(); }

std::vector<std::string> Network::describe() const {
  std::vector<std::string> lines;
  const std::string block = cfg_.residual ? "RAGC Block" : "Plain AGC Block";
  const auto row = [&](const std::string& name, const std::string& width, std::size_t n) {
    std::ostringstream os;
    os << name << " | " << width << " | " << n;
    lines.push_back(os.str());
  };
  row("Graph Init", "-", 1);
  row("AGC", std::to_string(cfg_.initial_width), 1);
  for (std::size_t s = 0; s < cfg_.stage_widths.size(); ++s) {
    row(cfg_.pool_mode == PoolMode::kMax ? "Max Pooling" : "Avg Pooling", "-", 1);
    row(block, std::to_string(cfg_.stage_widths[s]), cfg_.blocks_per_stage);
  }
  row(cfg_.pool_mode == PoolMode::kMax ? "Max Pooling" : "Avg Pooling", "-", 1);
  row("Global Average", "-", 1);
  row("FC", std::to_string(cfg_.fc_width), 1);
  row("FC", std::to_string(cfg_.class_count), 1);
  return lines;
}

std::string config_path_for(const std::string& checkpoint_path) {
  return checkpoint_path + ".cfg";
}

void save_network(Network& net, const std::string& path) {
  save_checkpoint(path, net.parameters().to_arrays());
  std::ofstream out(config_path_for(path));
  if (!out) throw Error("cannot write config next to checkpoint '" + path + "'");
  for (const auto& [k, v] : to_key_values(net.config())) out << k << '=' << v << '\n';
}

NetworkConfig read_network_config(const std::string& path) {
  NetworkConfig cfg;
  for (const auto& [k, v] : text::read_key_value_file(path)) {
    if (!apply_key_value(cfg, k, v)) {
      throw ConfigError("unknown network key '" + k + "' in " + path);
    }
  }
  return cfg;
}

Network load_network(const std::string& path) {
  Network net(read_network_config(config_path_for(path)));
  auto params = net.parameters();
  params.load_arrays(load_checkpoint(path));
  return net;
}

}  // namespace ragc
