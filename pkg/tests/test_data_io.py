import json
import warnings

import numpy as np
import pytest

from graph_al import SbmConfig, generate_sbm, load_checkpoint, load_graph, save_checkpoint, save_graph
from graph_al.data_io import CheckpointError, class_centroids, graph_to_dict
from graph_al.graph import GraphError
from graph_al.policy import init_policy
from graph_al.trainer import evaluate_policy
from graph_al.classifier import ClassifierConfig


def test_sbm_two_cliques():
    g = generate_sbm(SbmConfig(num_nodes=4, num_classes=2, p_in=1.0, p_out=0.0, valid_frac=0.0,
                               test_frac=0.0, seed=0))
    assert g.edges.shape[0] == 2
    for u, v in g.edges:
        assert g.labels[u] == g.labels[v]
    assert np.bincount(g.labels).tolist() == [2, 2]


def test_sbm_edge_count_binomial():
    cfg = SbmConfig(num_nodes=300, num_classes=4, p_in=0.1, p_out=0.01, seed=3)
    g = generate_sbm(cfg)
    sizes = np.bincount(g.labels)
    intra = sum(s * (s - 1) // 2 for s in sizes)
    inter = 300 * 299 // 2 - intra
    mean = intra * 0.1 + inter * 0.01
    sd = np.sqrt(intra * 0.1 * 0.9 + inter * 0.01 * 0.99)
    assert intra == 11100 and inter == 33750
    assert abs(g.edges.shape[0] - mean) < 3 * sd


def test_sbm_deterministic_and_split_sizes():
    cfg = SbmConfig(seed=9)
    a, b = generate_sbm(cfg), generate_sbm(cfg)
    assert graph_to_dict(a) == graph_to_dict(b)
    assert (a.valid.size, a.test.size, a.train.size) == (45, 90, 165)


def test_sbm_feature_means():
    cfg = SbmConfig(num_nodes=1000, num_classes=4, seed=2)
    g = generate_sbm(cfg)
    mu = class_centroids(cfg)
    for c in range(4):
        rows = g.features[g.labels == c]
        bound = 3 * cfg.noise_sigma / np.sqrt(1000 / 4)
        assert np.all(np.abs(rows.mean(axis=0) - mu[c]) < bound)


def test_sbm_no_edges_warns():
    with pytest.warns(UserWarning):
        g = generate_sbm(SbmConfig(num_nodes=10, num_classes=2, p_in=0.0, p_out=0.0))
    assert g.edges.shape[0] == 0


def test_bad_sbm_config():
    with pytest.raises(ValueError):
        SbmConfig(valid_frac=0.5, test_frac=0.5)


def test_graph_file_round_trip(tmp_path):
    g = generate_sbm(SbmConfig(num_nodes=50, seed=1))
    path = tmp_path / "g.json"
    save_graph(g, path)
    h = load_graph(path)
    assert graph_to_dict(h) == graph_to_dict(g)
    np.testing.assert_array_equal(h.features, g.features)


def _write(tmp_path, doc):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    return p


@pytest.fixture
def doc():
    return graph_to_dict(generate_sbm(SbmConfig(num_nodes=20, num_classes=2, seed=0)))


@pytest.mark.parametrize("mutate,code", [
    (lambda d: d["edges"].append([3, 3]), "E_SELF_LOOP"),
    (lambda d: d["edges"].append(list(d["edges"][0])), "E_DUPLICATE_EDGE"),
    (lambda d: d["labels"].__setitem__(0, 2), "E_LABEL_RANGE"),
    (lambda d: d["splits"]["valid"].append(d["splits"]["train"][0]), "E_SPLIT_OVERLAP"),
    (lambda d: d["features"][4].pop(), "E_FEATURE_LENGTH"),
    (lambda d: d.pop("labels"), "E_MALFORMED"),
])
def test_load_errors(tmp_path, doc, mutate, code):
    mutate(doc)
    with pytest.raises(GraphError) as e:
        load_graph(_write(tmp_path, doc))
    assert e.value.code == code
    assert "bad.json" in str(e.value)


def test_load_truncated_json_reports_line(tmp_path):
    p = tmp_path / "t.json"
    p.write_text('{\n "name": "x",\n "num_nodes": ')
    with pytest.raises(GraphError) as e:
        load_graph(p)
    assert e.value.code == "E_MALFORMED" and "t.json:3:" in str(e.value)


def test_checkpoint_round_trip(tmp_path):
    p = init_policy("gcn", 3)
    path = tmp_path / "c.json"
    save_checkpoint(path, p, 20.0, (True, True, False, False, True), ["a", "b"], 7, 12)
    q, meta = load_checkpoint(path)
    for k in p.weights:
        np.testing.assert_array_equal(p.weights[k], q.weights[k])
    assert meta["train_graphs"] == ["a", "b"] and meta["seed"] == 7 and meta["episodes"] == 12
    assert meta["feature_mask"] == [True, True, False, False, True]
    save_checkpoint(tmp_path / "d.json", q, 20.0, meta["feature_mask"], ["a", "b"], 7, 12)
    assert (tmp_path / "d.json").read_bytes() == path.read_bytes()


def test_checkpoint_replays_evaluation(tmp_path):
    g = generate_sbm(SbmConfig(num_nodes=60, num_classes=3, p_in=0.3, p_out=0.02, seed=5))
    cfg = ClassifierConfig(hidden=16, max_convergence_epochs=20, patience=5)
    p = init_policy("gcn", 1)
    save_checkpoint(tmp_path / "c.json", p)
    q, _ = load_checkpoint(tmp_path / "c.json")
    a = evaluate_policy(p, g, 5, 2, 0, config=cfg)
    b = evaluate_policy(q, g, 5, 2, 0, config=cfg)
    assert a.sequences == b.sequences
    np.testing.assert_array_equal(a.micro, b.micro)


def test_checkpoint_errors(tmp_path):
    path = tmp_path / "c.json"
    save_checkpoint(path, init_policy("gcn", 0))
    with pytest.raises(CheckpointError) as e:
        load_checkpoint(path, expect_arch="mlp")
    assert e.value.code == "E_ARCH_MISMATCH"
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(CheckpointError) as e:
        load_checkpoint(path)
    assert e.value.code == "E_MALFORMED"
