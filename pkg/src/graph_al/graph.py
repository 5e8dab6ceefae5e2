"""Immutable attributed graphs with a train/valid/test split."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp


class GraphError(ValueError):
    """Invalid graph data. ``code`` is a stable identifier such as ``E_SELF_LOOP``."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


def _frozen(a, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected, unweighted node-attributed graph.

    ``edges`` holds each undirected edge once as ``(u, v)`` with ``u < v``.
    Labeling state is never stored here; a graph can be shared read-only by
    any number of concurrent episodes.
    """

    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    edges: np.ndarray
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray
    name: str = "graph"

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "features", _frozen(self.features, np.float64))
        set_(self, "labels", _frozen(self.labels, np.int64))
        edges = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        set_(self, "edges", _frozen(edges, np.int64))
        for part in ("train", "valid", "test"):
            set_(self, part, _frozen(np.sort(np.asarray(getattr(self, part), dtype=np.int64)), np.int64))
        set_(self, "num_classes", int(self.num_classes))
        self._validate()

    def _validate(self):
        n = self.num_nodes
        if self.features.ndim != 2 or self.features.shape[0] != n:
            raise GraphError("E_FEATURE_LENGTH",
                             f"features have shape {self.features.shape}, expected {n} rows")
        if not np.all(np.isfinite(self.features)):
            raise GraphError("E_FEATURE_VALUE", "features contain non-finite values")
        if self.num_classes < 1:
            raise GraphError("E_LABEL_RANGE", "num_classes must be positive")
        bad = np.flatnonzero((self.labels < 0) | (self.labels >= self.num_classes))
        if bad.size:
            v = int(bad[0])
            raise GraphError("E_LABEL_RANGE",
                             f"node {v} has label {int(self.labels[v])}, num_classes={self.num_classes}")
        e = self.edges
        if e.size:
            out = np.flatnonzero((e < 0).any(axis=1) | (e >= n).any(axis=1))
            if out.size:
                raise GraphError("E_NODE_RANGE", f"edge {out[0]} {e[out[0]].tolist()} references a missing node")
            loops = np.flatnonzero(e[:, 0] == e[:, 1])
            if loops.size:
                raise GraphError("E_SELF_LOOP", f"edge {loops[0]} is a self-loop on node {e[loops[0], 0]}")
            unordered = np.flatnonzero(e[:, 0] > e[:, 1])
            if unordered.size:
                raise GraphError("E_EDGE_ORDER", f"edge {unordered[0]} {e[unordered[0]].tolist()} is not stored as u<v")
            keys = e[:, 0] * n + e[:, 1]
            _, first, counts = np.unique(keys, return_index=True, return_counts=True)
            if (counts > 1).any():
                k = int(np.flatnonzero(counts > 1)[0])
                dup = e[first[k]].tolist()
                raise GraphError("E_DUPLICATE_EDGE", f"edge {dup} appears {counts[k]} times")
        seen = np.zeros(n, dtype=bool)
        for part in ("train", "valid", "test"):
            idx = getattr(self, part)
            if idx.size and (idx.min() < 0 or idx.max() >= n):
                raise GraphError("E_NODE_RANGE", f"{part} split references a missing node")
            if np.unique(idx).size != idx.size or seen[idx].any():
                raise GraphError("E_SPLIT_OVERLAP", f"{part} split overlaps another split or repeats a node")
            seen[idx] = True

    @property
    def num_nodes(self) -> int:
        return int(self.labels.shape[0])

    @property
    def feat_dim(self) -> int:
        return int(self.features.shape[1])

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric binary CSR adjacency without self-loops."""
        n = self.num_nodes
        e = self.edges
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        a = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
        a.sort_indices()
        return a

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.diff(self.adjacency.indptr).astype(np.int64)
        d.setflags(write=False)
        return d

    def degree(self, v: int) -> int:
        if not 0 <= v < self.num_nodes:
            raise IndexError(f"node {v} out of range for graph with {self.num_nodes} nodes")
        return int(self.degrees[v])

    @cached_property
    def norm_adj(self) -> sp.csr_matrix:
        return normalized_adjacency(self)

    @cached_property
    def propagated_features(self) -> np.ndarray:
        """``norm_adj @ features``; constant for the first GCN layer."""
        out = np.asarray(self.norm_adj @ self.features)
        out.setflags(write=False)
        return out


def degree(graph: Graph, v: int) -> int:
    return graph.degree(v)


def normalized_adjacency(graph: Graph) -> sp.csr_matrix:
    """``D^-1/2 (A + I) D^-1/2`` with D the degree-plus-one diagonal."""
    n = graph.num_nodes
    a_tilde = (graph.adjacency + sp.identity(n, format="csr")).tocsr()
    a_tilde.sort_indices()
    inv_sqrt = 1.0 / np.sqrt(np.asarray(a_tilde.sum(axis=1)).ravel())
    d = sp.diags(inv_sqrt)
    out = (d @ a_tilde @ d).tocsr()
    out.sort_indices()
    return out


def candidate_pool(graph: Graph, labeled) -> np.ndarray:
    """Unlabeled training nodes, sorted."""
    labeled = np.asarray(sorted(labeled), dtype=np.int64)
    if labeled.size and not np.isin(labeled, graph.train).all():
        outside = labeled[~np.isin(labeled, graph.train)]
        raise ValueError(f"labeled nodes outside the train split: {outside.tolist()}")
    return np.setdiff1d(graph.train, labeled)
