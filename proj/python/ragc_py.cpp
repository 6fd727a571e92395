#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "ragc/cli.hpp"
#include "ragc/error.hpp"
#include "ragc/graph.hpp"
#include "ragc/io.hpp"
#include "ragc/model.hpp"
#include "ragc/spatial_index.hpp"
#include "ragc/synth.hpp"
#include "ragc/train.hpp"

namespace py = pybind11;
using namespace ragc;

namespace {

using Points = py::array_t<double, py::array::c_style | py::array::forcecast>;
using KeyValues = std::map<std::string, std::string>;

std::vector<Vec3> to_vec3(const Points& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) {
    throw DimensionError("points must have shape (N, 3)");
  }
  const auto r = a.unchecked<2>();
  std::vector<Vec3> out(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) out[i] = {r(i, 0), r(i, 1), r(i, 2)};
  return out;
}

py::array_t<double> to_array(const std::vector<Vec3>& pts) {
  py::array_t<double> out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    w(i, 0) = pts[i].x;
    w(i, 1) = pts[i].y;
    w(i, 2) = pts[i].z;
  }
  return out;
}

py::array_t<double> to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<double> out(shape);
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

std::vector<PointCloud> to_clouds(const std::vector<Points>& arrays) {
  std::vector<PointCloud> out;
  out.reserve(arrays.size());
  for (const auto& a : arrays) out.push_back({to_vec3(a), std::nullopt});
  return out;
}

NetworkConfig network_config(const KeyValues& kv) {
  NetworkConfig cfg;
  for (const auto& [k, v] : kv) {
    if (!apply_key_value(cfg, k, v)) throw ConfigError("unknown network key '" + k + "'");
  }
  cfg.validate();
  return cfg;
}

TrainConfig train_config(const KeyValues& kv) {
  TrainConfig cfg;
  for (const auto& [k, v] : kv) {
    if (!apply_key_value(cfg, k, v)) throw ConfigError("unknown training key '" + k + "'");
  }
  cfg.validate();
  return cfg;
}

SynthConfig synth_config(std::size_t points, double jitter) {
  SynthConfig cfg;
  cfg.points = points;
  cfg.jitter = jitter;
  if (cfg.points <= cfg.point_spread) cfg.point_spread = cfg.points / 4;
  return cfg;
}

// GridIndex keeps a view of its points; this owns them.
struct OwnedIndex {
  std::vector<Vec3> points;
  std::unique_ptr<GridIndex> index;
};

py::dict graph_dict(const GeometricGraph& g) {
  py::dict d;
  d["positions"] = to_array(g.positions);
  d["in_offsets"] = g.in_offsets;
  d["sources"] = g.sources;
  d["destinations"] = g.destinations;
  d["edge_attrs"] = to_array(g.edge_attrs);
  return d;
}

}  // namespace

PYBIND11_MODULE(_ragc, m) {
  m.doc() = "Residual attention graph convolution for point-cloud scene classification";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<DimensionError>(m, "DimensionError", base);
  auto data_error = py::register_exception<DataError>(m, "DataError", base);
  py::register_exception<LabelError>(m, "LabelError", data_error);
  py::register_exception<FormatError>(m, "FormatError", base);

  m.attr("SYNTHETIC_RADIUS_SCALE") = kSyntheticRadiusScale;
  m.attr("SYNTHETIC_CLASS_NAMES") = synthetic_class_names();

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](const std::vector<Points>& clouds, const std::vector<int>& labels,
                       std::vector<std::string> class_names) {
             if (clouds.size() != labels.size()) {
               throw DataError("clouds and labels differ in length");
             }
             Dataset d;
             d.clouds = to_clouds(clouds);
             for (std::size_t i = 0; i < labels.size(); ++i) {
               d.clouds[i].label = labels[i];
               d.files.push_back("scene_" + std::to_string(i) + ".pc");
             }
             d.class_names = std::move(class_names);
             return d;
           }),
           py::arg("clouds"), py::arg("labels"), py::arg("class_names"))
      .def("__len__", [](const Dataset& d) { return d.clouds.size(); })
      .def("points", [](const Dataset& d, std::size_t i) { return to_array(d.clouds.at(i).points); })
      .def("label",
           [](const Dataset& d, std::size_t i) -> std::optional<int> { return d.clouds.at(i).label; })
      .def_property_readonly("labels",
                             [](const Dataset& d) {
                               std::vector<int> out;
                               for (const auto& pc : d.clouds) out.push_back(pc.label.value_or(-1));
                               return out;
                             })
      .def_readwrite("files", &Dataset::files)
      .def_readwrite("class_names", &Dataset::class_names);

  m.def("load_dataset", &load_dataset, py::arg("directory"));
  m.def("write_dataset", &write_dataset, py::arg("directory"), py::arg("dataset"));
  m.def("load_scene", [](const std::string& path) { return to_array(load_scene_cloud(path).points); },
        py::arg("path"));

  m.def(
      "synthesize_scene",
      [](int label, std::uint64_t seed, std::size_t points, double jitter) {
        return to_array(synthesize_scene(label, seed, synth_config(points, jitter)).points);
      },
      py::arg("label"), py::arg("seed"), py::arg("points") = 500, py::arg("jitter") = 0.01);
  m.def(
      "generate_synthetic_dataset",
      [](std::size_t per_class, std::uint64_t seed, std::size_t points, double jitter) {
        return generate_synthetic_dataset(per_class, seed, synth_config(points, jitter));
      },
      py::arg("per_class"), py::arg("seed"), py::arg("points") = 500, py::arg("jitter") = 0.01);

  py::class_<OwnedIndex>(m, "GridIndex")
      .def(py::init([](const Points& pts, double cell_size) {
             auto o = std::make_unique<OwnedIndex>();
             o->points = to_vec3(pts);
             o->index = std::make_unique<GridIndex>(o->points, cell_size);
             return o;
           }),
           py::arg("points"), py::arg("cell_size"))
      .def("__len__", [](const OwnedIndex& o) { return o.points.size(); })
      .def("radius_neighbors",
           [](const OwnedIndex& o, std::size_t i, double r) {
             if (i >= o.points.size()) throw py::index_error("point index out of range");
             return o.index->radius_neighbors(i, r);
           },
           py::arg("i"), py::arg("r"))
      .def("knn_neighbors",
           [](const OwnedIndex& o, std::size_t i, std::size_t k) {
             if (i >= o.points.size()) throw py::index_error("point index out of range");
             return o.index->knn_neighbors(i, k);
           },
           py::arg("i"), py::arg("k"));

  m.def(
      "construct_graph",
      [](const Points& pts, const std::string& policy, double radius, std::size_t k,
         const std::string& attrs) {
        EdgePolicy p;
        if (policy == "radius") {
          p = EdgePolicy::with_radius(radius);
        } else if (policy == "knn") {
          p = EdgePolicy::with_knn(k);
        } else {
          throw ConfigError("policy must be radius or knn, got '" + policy + "'");
        }
        p.validate();
        return graph_dict(construct_graph(PointCloud{to_vec3(pts), std::nullopt}, p,
                                          parse_attr_mode(attrs)));
      },
      py::arg("points"), py::arg("policy") = "radius", py::arg("radius") = 0.1,
      py::arg("k") = 9, py::arg("attrs") = "spherical");

  m.def("network_defaults", [] { return to_key_values(NetworkConfig{}); });
  m.def("train_defaults", [] { return to_key_values(TrainConfig{}); });

  py::class_<Network>(m, "Network")
      .def(py::init([](const KeyValues& kv) { return Network(network_config(kv)); }),
           py::arg("config") = KeyValues{})
      .def_property_readonly("config",
                             [](const Network& n) { return to_key_values(n.config()); })
      .def("parameter_count", &Network::parameter_count)
      .def("describe", &Network::describe)
      .def("predict_proba",
           [](Network& n, const std::vector<Points>& clouds) {
             const auto batch = to_clouds(clouds);
             Tensor p;
             {
               py::gil_scoped_release release;
               p = n.predict_proba(batch);
             }
             return to_array(p);
           },
           py::arg("clouds"))
      .def("save", [](Network& n, const std::string& path) { save_network(n, path); },
           py::arg("path"))
      .def_static("load", &load_network, py::arg("path"));

  py::class_<TrainHistory>(m, "TrainHistory")
      .def_readonly("epoch_loss", &TrainHistory::epoch_loss)
      .def_readonly("val_accuracy", &TrainHistory::val_accuracy)
      .def_readonly("best_epoch", &TrainHistory::best_epoch)
      .def_readonly("best_val_accuracy", &TrainHistory::best_val_accuracy);

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("accuracy", &Metrics::accuracy)
      .def_readonly("per_class_accuracy", &Metrics::per_class_accuracy)
      .def_readonly("confusion", &Metrics::confusion)
      .def_readonly("total", &Metrics::total)
      .def("table",
           [](const Metrics& met, const std::vector<std::string>& names) {
             return format_table(met, names);
           },
           py::arg("class_names") = std::vector<std::string>{})
      .def("__eq__", [](const Metrics& a, const Metrics& b) { return a == b; });

  m.def(
      "train",
      [](Network& net, const Dataset& data, const KeyValues& kv,
         std::function<void(std::size_t, double, double)> on_epoch) {
        const TrainConfig cfg = train_config(kv);
        py::gil_scoped_release release;
        return train_model(net, data.clouds, cfg, [&](const EpochReport& r) {
          if (!on_epoch) return;
          py::gil_scoped_acquire acquire;
          on_epoch(r.epoch, r.mean_loss, r.val_accuracy);
        });
      },
      py::arg("net"), py::arg("dataset"), py::arg("config") = KeyValues{},
      py::arg("on_epoch") = nullptr);
  m.def(
      "evaluate",
      [](Network& net, const Dataset& data, std::size_t batch_size) {
        py::gil_scoped_release release;
        return evaluate_model(net, data.clouds, batch_size);
      },
      py::arg("net"), py::arg("dataset"), py::arg("batch_size") = 16);
  m.def(
      "compute_metrics",
      [](const std::vector<int>& truth, const std::vector<int>& predicted, std::size_t classes) {
        return compute_metrics(truth, predicted, classes);
      },
      py::arg("truth"), py::arg("predicted"), py::arg("classes"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
