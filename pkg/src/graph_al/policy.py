"""Query policies mapping a state matrix to a distribution over candidate nodes.

The GCN policy propagates the state through two graph convolutions (8 hidden
units, no bias) and scores every node with a linear head. The MLP variant
scores nodes independently and ignores the graph. Either way the weights only
act on the feature dimension, so one set of parameters serves graphs of any
size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import glorot_uniform, relu, relu_backward, spmm
from .state import NUM_FEATURES, GraphState

POLICY_HIDDEN = 8
ARCHS = ("gcn", "mlp")


@dataclass
class PolicyParams:
    """Weights of a query policy, keyed by name.

    gcn: ``W0`` (5x8), ``W1`` (8x8), ``W`` (8x1), ``b`` (1,)
    mlp: ``W0``, ``b0``, ``W1``, ``b1``, ``W2``, ``b2`` (5->8->8->1)
    """

    arch: str
    weights: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise ValueError(f"unknown policy architecture {self.arch!r}")

    def copy(self) -> "PolicyParams":
        return PolicyParams(self.arch, {k: v.copy() for k, v in self.weights.items()})


def init_policy(arch: str = "gcn", seed=0, hidden: int = POLICY_HIDDEN) -> PolicyParams:
    rng = np.random.default_rng(seed)
    if arch == "gcn":
        w = {"W0": glorot_uniform(rng, NUM_FEATURES, hidden),
             "W1": glorot_uniform(rng, hidden, hidden),
             "W": glorot_uniform(rng, hidden, 1),
             "b": np.zeros(1)}
    elif arch == "mlp":
        w = {"W0": glorot_uniform(rng, NUM_FEATURES, hidden), "b0": np.zeros(hidden),
             "W1": glorot_uniform(rng, hidden, hidden), "b1": np.zeros(hidden),
             "W2": glorot_uniform(rng, hidden, 1), "b2": np.zeros(1)}
    else:
        raise ValueError(f"unknown policy architecture {arch!r}")
    return PolicyParams(arch, w)


def zero_policy(arch: str = "gcn", hidden: int = POLICY_HIDDEN) -> PolicyParams:
    p = init_policy(arch, 0, hidden)
    for v in p.weights.values():
        v[...] = 0.0
    return p


def _matrix(state) -> np.ndarray:
    return state.matrix if isinstance(state, GraphState) else np.asarray(state, dtype=np.float64)


def _candidates(candidates, n: int) -> np.ndarray:
    c = np.unique(np.asarray(candidates, dtype=np.int64))
    if c.size == 0:
        raise ValueError("budget exceeds pool: no candidate nodes left")
    if c[0] < 0 or c[-1] >= n:
        raise ValueError("candidate node out of range")
    return c


def _gcn_scores(w, norm_adj, s):
    as_ = spmm(norm_adj, s)
    z1 = as_ @ w["W0"]
    h1 = relu(z1)
    ah1 = spmm(norm_adj, h1)
    z2 = ah1 @ w["W1"]
    h2 = relu(z2)
    return (h2 @ w["W"]).ravel(), (as_, z1, ah1, z2, h2)


def _mlp_scores(w, s):
    z1 = s @ w["W0"] + w["b0"]
    h1 = relu(z1)
    z2 = h1 @ w["W1"] + w["b1"]
    h2 = relu(z2)
    return (h2 @ w["W2"]).ravel(), (s, z1, h1, z2, h2)


def _unbiased_scores(params: PolicyParams, norm_adj, state) -> np.ndarray:
    # The head bias shifts every candidate's score equally and cancels in the
    # softmax; leaving it out keeps the distribution bitwise independent of it.
    s = _matrix(state)
    if params.arch == "gcn":
        return _gcn_scores(params.weights, norm_adj, s)[0]
    return _mlp_scores(params.weights, s)[0]


def node_scores(params: PolicyParams, norm_adj, state) -> np.ndarray:
    """Per-node scores including the head bias."""
    bias = params.weights["b"] if params.arch == "gcn" else params.weights["b2"]
    return _unbiased_scores(params, norm_adj, state) + bias[0]


def masked_softmax(scores: np.ndarray, candidates) -> np.ndarray:
    """Softmax restricted to ``candidates``; every other entry is exactly 0."""
    c = _candidates(candidates, scores.shape[0])
    z = scores[c] - scores[c].max()
    e = np.exp(z)
    dist = np.zeros_like(scores)
    dist[c] = e / e.sum()
    return dist


def policy_forward(params: PolicyParams, norm_adj, state, candidates) -> np.ndarray:
    """Full-length probability vector over nodes, zero off the candidate set."""
    if params.arch != "gcn":
        raise ValueError(f"policy_forward needs a gcn policy, got {params.arch!r}")
    return masked_softmax(_unbiased_scores(params, norm_adj, state), candidates)


def mlp_forward(params: PolicyParams, state, candidates) -> np.ndarray:
    if params.arch != "mlp":
        raise ValueError(f"mlp_forward needs an mlp policy, got {params.arch!r}")
    return masked_softmax(_unbiased_scores(params, None, state), candidates)


def action_distribution(params: PolicyParams, norm_adj, state, candidates) -> np.ndarray:
    """Dispatch on architecture."""
    return masked_softmax(_unbiased_scores(params, norm_adj, state), candidates)


def select_sample(dist: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw, walking candidates in ascending node id."""
    support = np.flatnonzero(dist > 0)
    cdf = np.cumsum(dist[support])
    u = rng.random() * cdf[-1]
    i = int(np.searchsorted(cdf, u, side="right"))
    return int(support[min(i, support.size - 1)])


def select_argmax(dist: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the lowest node id
    return int(np.argmax(dist))


def logprob_grad(params: PolicyParams, norm_adj, state, candidates, chosen: int) -> dict[str, np.ndarray]:
    """Gradient of ``log p(chosen)`` with respect to every policy weight."""
    s = _matrix(state)
    c = _candidates(candidates, s.shape[0])
    if chosen not in set(c.tolist()):
        raise ValueError(f"chosen node {chosen} is not a candidate")
    w = params.weights
    if params.arch == "gcn":
        scores, (as_, z1, ah1, z2, h2) = _gcn_scores(w, norm_adj, s)
    else:
        scores, (as_, z1, ah1, z2, h2) = _mlp_scores(w, s)
    dist = masked_softmax(scores, c)
    # the head bias cancels in the softmax, so its gradient is exactly zero
    dscores = -dist
    dscores[chosen] += 1.0
    if c.size == 1:
        dscores[:] = 0.0
    dscores = dscores[:, None]
    head_w = w["W"] if params.arch == "gcn" else w["W2"]
    dz2 = relu_backward(z2, dscores @ head_w.T)
    if params.arch == "gcn":
        dz1 = relu_backward(z1, spmm(norm_adj, dz2 @ w["W1"].T))
        return {"W0": as_.T @ dz1,
                "W1": ah1.T @ dz2,
                "W": h2.T @ dscores,
                "b": np.zeros(1)}
    dz1 = relu_backward(z1, dz2 @ w["W1"].T)
    return {"W0": as_.T @ dz1, "b0": dz1.sum(axis=0),
            "W1": ah1.T @ dz2, "b1": dz2.sum(axis=0),
            "W2": h2.T @ dscores, "b2": np.zeros(1)}


CHECKPOINT_FORMAT = "graph-al-policy"
CHECKPOINT_VERSION = 1


def serialize_policy(params: PolicyParams, alpha: float = 20.0, feature_mask=None, **meta) -> dict:
    """JSON-ready dict; floats survive a round trip bit for bit."""
    mask = [True] * NUM_FEATURES if feature_mask is None else [bool(x) for x in feature_mask]
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "arch": params.arch,
        "alpha": float(alpha),
        "feature_mask": mask,
        **meta,
        "weights": {k: {"shape": list(v.shape), "values": [float(x) for x in v.ravel()]}
                    for k, v in params.weights.items()},
    }


def deserialize_policy(doc: dict, expect_arch: str | None = None) -> tuple[PolicyParams, dict]:
    """Inverse of :func:`serialize_policy`. Returns ``(params, metadata)``."""
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError("not a policy checkpoint")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('version')!r}")
    arch = doc.get("arch")
    if expect_arch is not None and arch != expect_arch:
        raise ValueError(f"architecture mismatch: checkpoint is {arch!r}, expected {expect_arch!r}")
    ref = init_policy(arch)
    weights = {}
    for k, ref_v in ref.weights.items():
        entry = doc["weights"][k]
        v = np.array(entry["values"], dtype=np.float64).reshape(entry["shape"])
        if v.shape != ref_v.shape:
            raise ValueError(f"weight {k!r} has shape {v.shape}, expected {ref_v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"weight {k!r} contains non-finite values")
        weights[k] = v
    if set(doc["weights"]) != set(ref.weights):
        raise ValueError("checkpoint weight names do not match the architecture")
    meta = {k: v for k, v in doc.items() if k not in ("weights",)}
    if len(meta.get("feature_mask", [])) != NUM_FEATURES:
        raise ValueError("feature_mask must have one entry per state column")
    return PolicyParams(arch, weights), meta
