import numpy as np
import pytest

import ragc

TINY = {
    "initial_width": 4,
    "stage_widths": [4, 8],
    "blocks_per_stage": 1,
    "fc_width": 8,
    "filter_widths": [8],
    "graph_radii": [0.3, 0.5, 0.8, 0.8],
    "pool_radii": [0.3, 0.6, 1.2],
}


def test_synthetic_scene_is_deterministic():
    a = ragc.synthesize_scene(2, 11, points=200)
    b = ragc.synthesize_scene(2, 11, points=200)
    assert a.shape[1] == 3
    assert 150 <= a.shape[0] <= 250
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ragc.LabelError):
        ragc.synthesize_scene(7, 1)


def test_grid_index_matches_brute_force():
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 1, size=(300, 3))
    index = ragc.GridIndex(pts, 0.1)
    d2 = ((pts - pts[17]) ** 2).sum(axis=1)
    assert index.radius_neighbors(17, 0.2) == sorted(np.flatnonzero(d2 <= 0.04).tolist())
    knn = index.knn_neighbors(17, 5)
    assert knn[-1] == 17
    assert knn[:-1] == [int(j) for j in np.argsort(d2, kind="stable")[1:6]]


def test_graph_has_self_loops_and_attributes():
    pts = ragc.synthesize_scene(0, 4, points=120)
    g = ragc.construct_graph(pts, policy="knn", k=4, attrs="both")
    n = pts.shape[0]
    assert len(g["in_offsets"]) == n + 1
    assert g["edge_attrs"].shape == (len(g["sources"]), 6)
    assert all((i, i) in set(zip(g["sources"], g["destinations"])) for i in range(0, n, 10))
    with pytest.raises(ragc.ConfigError):
        ragc.construct_graph(pts, policy="nearest")


def test_network_defaults_and_probabilities():
    assert ragc.Network().parameter_count() == 2581572
    net = ragc.Network(TINY, seed=5)
    clouds = [ragc.synthesize_scene(c, 9, points=100) for c in range(4)]
    p = net.predict_proba(clouds)
    assert p.shape == (4, 4)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)
    with pytest.raises(ragc.ConfigError):
        ragc.Network(no_such_key=1)


def test_train_evaluate_save_load(tmp_path):
    data = ragc.generate_synthetic_dataset(4, 7, points=120)
    assert len(data) == 16 and sorted(set(data.labels)) == [0, 1, 2, 3]
    net = ragc.Network(TINY)
    seen = []
    h = ragc.train(net, data, {"epochs": 2, "batch_size": 8}, on_epoch=lambda e, l, v: seen.append(e))
    assert seen == [0, 1] and len(h.epoch_loss) == 2
    m = ragc.evaluate(net, data)
    assert m.total == 16
    assert sum(map(sum, m.confusion)) == 16
    assert m.table(list(ragc.SYNTHETIC_CLASS_NAMES)).startswith("true\\pred\tfloor")

    path = str(tmp_path / "m.ckpt")
    net.save(path)
    back = ragc.Network.load(path)
    clouds = [data.points(i) for i in range(3)]
    np.testing.assert_array_equal(back.predict_proba(clouds), net.predict_proba(clouds))
    assert ragc.evaluate(back, data) == m


def test_dataset_round_trip_and_cli(tmp_path):
    data = ragc.generate_synthetic_dataset(1, 2, points=80)
    ragc.write_dataset(str(tmp_path / "d"), data)
    back = ragc.load_dataset(str(tmp_path / "d"))
    assert back.class_names == data.class_names
    np.testing.assert_array_equal(back.points(3), data.points(3))
    code, out, err = ragc.run_cli(["eval", "--data", str(tmp_path / "d")])
    assert code == 2 and "checkpoint" in err
    assert ragc.run_cli(["--help"])[0] == 0
