"""Per-node state features fed to the query policy.

Columns, in order: scaled degree, normalized prediction entropy, mean
KL(node || neighbour), mean KL(neighbour || node), labeled indicator. All of
them are independent of node count and class count in meaning, so a policy
trained on one graph can be applied to another.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .numerics import EPS

FEATURE_NAMES = ("degree", "entropy", "kl", "reverse_kl", "labeled")
NUM_FEATURES = len(FEATURE_NAMES)


@dataclass(frozen=True)
class GraphState:
    matrix: np.ndarray
    alpha: float = 20.0


def degree_feature(graph: Graph, alpha: float) -> np.ndarray:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return np.minimum(graph.degrees / alpha, 1.0)


def entropy(probs: np.ndarray) -> np.ndarray:
    return -np.sum(probs * np.log(probs + EPS), axis=1)


def entropy_feature(probs: np.ndarray) -> np.ndarray:
    c = probs.shape[1]
    if c < 2:
        raise ValueError("entropy feature needs at least 2 classes")
    return np.clip(entropy(probs) / np.log(c), 0.0, 1.0)


def kl_features(graph: Graph, probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean forward and reverse KL divergence between each node and its neighbours."""
    adj = graph.adjacency
    deg = np.diff(adj.indptr)
    src = np.repeat(np.arange(graph.num_nodes), deg)
    dst = adj.indices
    logp = np.log(probs + EPS)
    # entropy-like terms split so each directed edge costs one dot product
    self_term = np.sum(probs * logp, axis=1)
    cross_fwd = np.einsum("ij,ij->i", probs[src], logp[dst])
    cross_rev = np.einsum("ij,ij->i", probs[dst], logp[src])
    kl_fwd = self_term[src] - cross_fwd
    kl_rev = self_term[dst] - cross_rev
    n = graph.num_nodes
    fwd = np.bincount(src, weights=kl_fwd, minlength=n)
    rev = np.bincount(src, weights=kl_rev, minlength=n)
    safe = np.maximum(deg, 1)
    return fwd / safe, rev / safe


def indicator_feature(graph: Graph, labeled) -> np.ndarray:
    col = np.zeros(graph.num_nodes)
    labeled = np.asarray(sorted(labeled), dtype=np.int64)
    if labeled.size:
        if not np.isin(labeled, graph.train).all():
            raise ValueError("labeled nodes must come from the train split")
        col[labeled] = 1.0
    return col


def parse_feature_mask(spec: str | None) -> tuple[bool, ...]:
    """Parse e.g. ``"-entropy"`` or ``"-kl,-degree"`` into a keep-mask.

    ``kl`` removes both KL columns.
    """
    keep = [True] * NUM_FEATURES
    if not spec:
        return tuple(keep)
    for tok in spec.split(","):
        tok = tok.strip().lstrip("-")
        if tok == "kl":
            keep[2] = keep[3] = False
        elif tok in FEATURE_NAMES:
            keep[FEATURE_NAMES.index(tok)] = False
        elif tok:
            raise ValueError(f"unknown state feature {tok!r}; choose from {FEATURE_NAMES}")
    return tuple(keep)


def build_state(graph: Graph, probs: np.ndarray, labeled, alpha: float = 20.0,
                feature_mask=None) -> GraphState:
    """Stack the five state columns; masked-out columns are zeroed, not dropped."""
    fwd, rev = kl_features(graph, probs)
    m = np.column_stack([
        degree_feature(graph, alpha),
        entropy_feature(probs),
        fwd,
        rev,
        indicator_feature(graph, labeled),
    ])
    if feature_mask is not None:
        m[:, ~np.asarray(feature_mask, dtype=bool)] = 0.0
    return GraphState(m, alpha)
