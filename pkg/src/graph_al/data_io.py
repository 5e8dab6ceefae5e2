"""Graph files, synthetic SBM graphs and policy checkpoints.

Graph file: one UTF-8 JSON object::

    {"name": ..., "num_nodes": n, "num_classes": C,
     "features": [[...], ...], "labels": [...],
     "edges": [[u, v], ...],            # u < v, each edge once
     "splits": {"train": [...], "valid": [...], "test": [...]}}

Checkpoint file: the JSON produced by :func:`graph_al.policy.serialize_policy`.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, GraphError
from .policy import PolicyParams, deserialize_policy, serialize_policy


@dataclass
class SbmConfig:
    num_nodes: int = 300
    num_classes: int = 4
    p_in: float = 0.1
    p_out: float = 0.01
    feat_dim: int = 16
    noise_sigma: float = 2.0
    class_sep: float = 1.0
    valid_frac: float = 0.15
    test_frac: float = 0.30
    seed: int = 0
    name: str | None = None

    def __post_init__(self):
        if self.num_nodes < 1 or self.num_classes < 1 or self.feat_dim < 1:
            raise ValueError("num_nodes, num_classes and feat_dim must be positive")
        for p in (self.p_in, self.p_out):
            if not 0.0 <= p <= 1.0:
                raise ValueError("edge probabilities must lie in [0, 1]")
        if self.valid_frac < 0 or self.test_frac < 0 or self.valid_frac + self.test_frac >= 1.0:
            raise ValueError("valid_frac + test_frac must be below 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


def class_centroids(config: SbmConfig) -> np.ndarray:
    """Class means of the feature distribution, ``class_sep`` times a random near-orthogonal basis."""
    rng = np.random.default_rng([config.seed, 1])
    g = rng.normal(size=(config.num_classes, config.feat_dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return config.class_sep * g


def generate_sbm(config: SbmConfig) -> Graph:
    """Stochastic block model with Gaussian class-conditional features."""
    if config.p_in == 0 and config.p_out == 0:
        warnings.warn("p_in = p_out = 0: the graph has no edges", stacklevel=2)
    rng = np.random.default_rng([config.seed, 0])
    n, c = config.num_nodes, config.num_classes
    labels = rng.permutation(np.arange(n) % c)
    iu, ju = np.triu_indices(n, k=1)
    same = labels[iu] == labels[ju]
    prob = np.where(same, config.p_in, config.p_out)
    keep = rng.random(iu.size) < prob
    edges = np.column_stack([iu[keep], ju[keep]])
    features = class_centroids(config)[labels] + rng.normal(scale=config.noise_sigma, size=(n, config.feat_dim))
    order = rng.permutation(n)
    n_valid = int(round(config.valid_frac * n))
    n_test = int(round(config.test_frac * n))
    valid = order[:n_valid]
    test = order[n_valid:n_valid + n_test]
    train = order[n_valid + n_test:]
    name = config.name or f"sbm-n{n}-c{c}-s{config.seed}"
    return Graph(features, labels, c, edges, train, valid, test, name)


def graph_to_dict(graph: Graph) -> dict:
    return {
        "name": graph.name,
        "num_nodes": graph.num_nodes,
        "num_classes": graph.num_classes,
        "features": graph.features.tolist(),
        "labels": graph.labels.tolist(),
        "edges": graph.edges.tolist(),
        "splits": {"train": graph.train.tolist(), "valid": graph.valid.tolist(),
                   "test": graph.test.tolist()},
    }


def graph_from_dict(doc: dict) -> Graph:
    try:
        n = int(doc["num_nodes"])
        features = doc["features"]
        labels = doc["labels"]
        splits = doc["splits"]
        edges = doc["edges"]
        num_classes = doc["num_classes"]
    except (KeyError, TypeError) as e:
        raise GraphError("E_MALFORMED", f"missing or invalid field {e}") from None
    if len(labels) != n:
        raise GraphError("E_LABEL_LENGTH", f"labels has {len(labels)} entries, num_nodes={n}")
    if len(features) != n:
        raise GraphError("E_FEATURE_LENGTH", f"features has {len(features)} rows, num_nodes={n}")
    widths = {len(r) for r in features}
    if len(widths) > 1:
        row = next(i for i, r in enumerate(features) if len(r) != len(features[0]))
        raise GraphError("E_FEATURE_LENGTH", f"features[{row}] has {len(features[row])} entries, "
                                             f"features[0] has {len(features[0])}")
    for i, e in enumerate(edges):
        if len(e) != 2:
            raise GraphError("E_MALFORMED", f"edges[{i}] is not a pair")
    for i, (u, v) in enumerate(edges):
        if u == v:
            raise GraphError("E_SELF_LOOP", f"edges[{i}] = [{u}, {v}] is a self-loop")
    try:
        return Graph(np.array(features, dtype=np.float64).reshape(n, -1), labels, num_classes,
                     np.array(edges, dtype=np.int64).reshape(-1, 2),
                     splits["train"], splits["valid"], splits["test"], doc.get("name", "graph"))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, GraphError):
            raise
        raise GraphError("E_MALFORMED", str(e)) from None


def save_graph(graph: Graph, path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(graph)) + "\n", encoding="utf-8")


def load_graph(path) -> Graph:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise GraphError("E_MALFORMED", f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    try:
        return graph_from_dict(doc)
    except GraphError as e:
        raise GraphError(e.code, f"{path}: {str(e).split(': ', 1)[1]}") from None


class CheckpointError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


def save_checkpoint(path, params: PolicyParams, alpha: float = 20.0, feature_mask=None,
                    train_graphs=(), seed: int = 0, episodes: int = 0) -> None:
    doc = serialize_policy(params, alpha, feature_mask, train_graphs=list(train_graphs),
                           seed=int(seed), episodes=int(episodes))
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_checkpoint(path, expect_arch: str | None = None) -> tuple[PolicyParams, dict]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CheckpointError("E_MALFORMED", f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    try:
        return deserialize_policy(doc, expect_arch)
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        code = "E_ARCH_MISMATCH" if "architecture mismatch" in str(e) else "E_MALFORMED"
        raise CheckpointError(code, f"{path}: {e}") from None
