"""Residual attention graph convolution networks for point-cloud scene classification."""

from . import _ragc
from ._ragc import (
    SYNTHETIC_CLASS_NAMES,
    SYNTHETIC_RADIUS_SCALE,
    ConfigError,
    DataError,
    Dataset,
    DimensionError,
    Error,
    FormatError,
    GridIndex,
    LabelError,
    Metrics,
    TrainHistory,
    compute_metrics,
    construct_graph,
    generate_synthetic_dataset,
    load_dataset,
    load_scene,
    network_defaults,
    run_cli,
    synthesize_scene,
    train_defaults,
    write_dataset,
)

__all__ = [
    "SYNTHETIC_CLASS_NAMES",
    "SYNTHETIC_RADIUS_SCALE",
    "ConfigError",
    "DataError",
    "Dataset",
    "DimensionError",
    "Error",
    "FormatError",
    "GridIndex",
    "LabelError",
    "Metrics",
    "Network",
    "TrainHistory",
    "compute_metrics",
    "construct_graph",
    "evaluate",
    "generate_synthetic_dataset",
    "load_dataset",
    "load_scene",
    "network_defaults",
    "run_cli",
    "synthesize_scene",
    "train",
    "train_defaults",
    "write_dataset",
]


def _value(v):
    if isinstance(v, bool):
        return "on" if v else "off"
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


def _key_values(config):
    # accept python_style names as well as the CLI spelling
    return {k.replace("_", "-"): _value(v) for k, v in (config or {}).items()}


class Network(_ragc.Network):
    """Network(config=None, **overrides); keys follow the CLI flag names."""

    def __init__(self, config=None, **overrides):
        merged = dict(config or {})
        merged.update(overrides)
        super().__init__(_key_values(merged))


def train(net, dataset, config=None, on_epoch=None, **overrides):
    merged = dict(config or {})
    merged.update(overrides)
    return _ragc.train(net, dataset, _key_values(merged), on_epoch)


def evaluate(net, dataset, batch_size=16):
    return _ragc.evaluate(net, dataset, batch_size)
