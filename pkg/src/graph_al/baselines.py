"""Heuristic query strategies: random, uncertainty, centrality, coreset and AGE.

Every selector returns one member of ``candidates``. Deterministic selectors
break ties toward the lowest node id.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .state import entropy
from .trainer import evaluate_selector


def _pool(candidates) -> np.ndarray:
    c = np.unique(np.asarray(candidates, dtype=np.int64))
    if c.size == 0:
        raise ValueError("empty candidate pool")
    return c


def select_random(candidates, rng: np.random.Generator) -> int:
    c = _pool(candidates)
    return int(c[rng.integers(c.size)])


def select_uncertainty(probs: np.ndarray, candidates) -> int:
    c = _pool(candidates)
    return int(c[np.argmax(entropy(probs[c]))])


def select_centrality(graph: Graph, candidates) -> int:
    c = _pool(candidates)
    return int(c[np.argmax(graph.degrees[c])])


def kmeans(x: np.ndarray, k: int, rng: np.random.Generator, iters: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd's algorithm with k-means++ seeding. Returns ``(centroids, assignment)``.

    ``k`` is clipped to the number of points. An emptied cluster keeps its
    previous centroid.
    """
    n = x.shape[0]
    k = max(1, min(k, n))
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[rng.integers(n)]
    d2 = np.sum((x - centroids[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        idx = rng.integers(n) if total <= 0 else rng.choice(n, p=d2 / total)
        centroids[j] = x[idx]
        d2 = np.minimum(d2, np.sum((x - centroids[j]) ** 2, axis=1))
    assign = np.full(n, -1)
    for _ in range(iters):
        dist = _sq_dist(x, centroids)
        new = np.argmin(dist, axis=1)
        if np.array_equal(new, assign):
            break
        assign = new
        for j in range(k):
            members = assign == j
            if members.any():
                centroids[j] = x[members].mean(axis=0)
    assign = np.argmin(_sq_dist(x, centroids), axis=1)
    return centroids, assign


def _sq_dist(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return np.sum((x[:, None, :] - centroids[None, :, :]) ** 2, axis=2)


def select_coreset(hidden: np.ndarray, candidates, labeled, k: int, rng: np.random.Generator) -> int:
    """Cluster the candidates' embeddings and cover an unrepresented cluster.

    A cluster counts as represented once some labeled node lies nearest to its
    centroid. Picks the member closest to the centroid of the largest
    unrepresented cluster; if every cluster is represented, the candidate
    closest to any centroid.
    """
    c = _pool(candidates)
    if k < 1:
        raise ValueError("k must be at least 1")
    centroids, assign = kmeans(hidden[c], k, rng)
    dist = np.sqrt(_sq_dist(hidden[c], centroids))
    labeled = np.asarray(sorted(labeled), dtype=np.int64)
    represented = np.zeros(centroids.shape[0], dtype=bool)
    if labeled.size:
        represented[np.argmin(_sq_dist(hidden[labeled], centroids), axis=1)] = True
    sizes = np.bincount(assign, minlength=centroids.shape[0])
    open_clusters = np.flatnonzero(~represented & (sizes > 0))
    if open_clusters.size:
        # largest first; ties go to the lowest cluster index
        target = open_clusters[np.argmax(sizes[open_clusters])]
        members = np.flatnonzero(assign == target)
        return int(c[members[np.argmin(dist[members, target])]])
    return int(c[np.argmin(dist.min(axis=1))])


def percentile_rank(values: np.ndarray) -> np.ndarray:
    """Fraction of entries strictly below each value."""
    s = np.sort(values)
    return np.searchsorted(s, values, side="left") / values.size


@dataclass(frozen=True)
class AgeWeights:
    entropy: float = 1 / 3
    centrality: float = 1 / 3
    density: float = 1 / 3

    def __post_init__(self):
        w = self.as_array()
        if (w < 0).any() or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"AGE weights must lie on the simplex, got {w.tolist()}")

    def as_array(self) -> np.ndarray:
        return np.array([self.entropy, self.centrality, self.density])

    @classmethod
    def parse(cls, text: str) -> "AgeWeights":
        parts = [float(x) for x in text.split(",")]
        if len(parts) != 3:
            raise ValueError("AGE weights need three comma-separated values")
        return cls(*parts)


def age_score(graph: Graph, probs: np.ndarray, hidden: np.ndarray, candidates,
              weights: AgeWeights, k: int, rng: np.random.Generator) -> np.ndarray:
    """Per-candidate AGE score, aligned with the sorted candidate array.

    Each heuristic becomes a percentile within the pool: higher entropy, higher
    degree and smaller distance to the nearest k-means centroid all score
    higher.
    """
    c = _pool(candidates)
    w = weights.as_array()
    ent = percentile_rank(entropy(probs[c]))
    cen = percentile_rank(graph.degrees[c].astype(np.float64))
    if w[2] > 0:
        centroids, _ = kmeans(hidden[c], k, rng)
        near = np.sqrt(_sq_dist(hidden[c], centroids).min(axis=1))
        den = percentile_rank(-near)
    else:
        den = np.zeros(c.size)
    return w[0] * ent + w[1] * cen + w[2] * den


def select_age(graph: Graph, probs: np.ndarray, hidden: np.ndarray, candidates,
               weights: AgeWeights, k: int, rng: np.random.Generator) -> int:
    c = _pool(candidates)
    return int(c[np.argmax(age_score(graph, probs, hidden, c, weights, k, rng))])


def simplex_grid(step: float = 0.05) -> list[AgeWeights]:
    n = int(round(1.0 / step))
    out = []
    for i, j in itertools.product(range(n + 1), repeat=2):
        if i + j <= n:
            out.append(AgeWeights(i / n, j / n, (n - i - j) / n))
    return out


BASELINES = ("random", "uncertainty", "centrality", "coreset", "age")


def baseline_selector(method: str, rng: np.random.Generator, weights: AgeWeights | None = None,
                      k: int | None = None):
    """Selector callable for the query loop; ``k`` defaults to the class count."""
    if method not in BASELINES:
        raise ValueError(f"unknown method {method!r}; choose from {BASELINES}")
    weights = weights or AgeWeights()

    def select(ctx) -> int:
        kk = k or ctx.graph.num_classes
        if method == "random":
            return select_random(ctx.candidates, rng)
        if method == "uncertainty":
            return select_uncertainty(ctx.probs, ctx.candidates)
        if method == "centrality":
            return select_centrality(ctx.graph, ctx.candidates)
        if method == "coreset":
            return select_coreset(ctx.hidden, ctx.candidates, ctx.labeled, kk, rng)
        return select_age(ctx.graph, ctx.probs, ctx.hidden, ctx.candidates, weights, kk, rng)

    return select


def grid_search_age_weights(graphs, budgets, step: float = 0.05, runs: int = 3, seed: int = 0,
                            config=None) -> tuple[AgeWeights, list[AgeWeights]]:
    """Best simplex weights per training graph (by validation reward), then their mean."""
    grid = simplex_grid(step)
    best_per_graph = []
    for g, b in zip(graphs, budgets):
        scores = []
        for w in grid:
            res = evaluate_selector(g, b, lambda rng, w=w: baseline_selector("age", rng, w),
                                    runs, seed, config)
            scores.append(float(np.mean(res.rewards)))
        best_per_graph.append(grid[int(np.argmax(scores))])
    mean = np.mean([w.as_array() for w in best_per_graph], axis=0)
    mean = mean / mean.sum()
    return AgeWeights(*mean), best_per_graph
