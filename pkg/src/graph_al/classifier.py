"""Two-layer GCN node classifier, its training loops and F1 metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .numerics import (AdamState, adam_step, cross_entropy, glorot_uniform, relu,
                       relu_backward, row_softmax, spmm)


@dataclass
class GcnParams:
    W0: np.ndarray
    W1: np.ndarray
    head_W: np.ndarray | None = None
    head_b: np.ndarray | None = None

    def arrays(self) -> dict[str, np.ndarray]:
        out = {"W0": self.W0, "W1": self.W1}
        if self.head_W is not None:
            out["W"] = self.head_W
            out["b"] = self.head_b
        return out

    def copy(self) -> "GcnParams":
        return GcnParams(*(None if a is None else a.copy()
                           for a in (self.W0, self.W1, self.head_W, self.head_b)))


@dataclass
class ClassifierConfig:
    hidden: int = 64
    lr: float = 0.03
    weight_decay: float = 5e-4
    max_convergence_epochs: int = 300
    patience: int = 20

    def __post_init__(self):
        if self.hidden <= 0:
            raise ValueError("hidden must be positive")
        if not 0 <= self.patience < self.max_convergence_epochs:
            raise ValueError("need 0 <= patience < max_convergence_epochs")


def init_classifier(graph: Graph, config: ClassifierConfig, seed) -> tuple[GcnParams, AdamState]:
    rng = np.random.default_rng(seed)
    params = GcnParams(glorot_uniform(rng, graph.feat_dim, config.hidden),
                       glorot_uniform(rng, config.hidden, graph.num_classes))
    state = AdamState(lr=config.lr, weight_decay=config.weight_decay)
    return params, state


def _forward(params: GcnParams, norm_adj, ax: np.ndarray):
    pre = ax @ params.W0
    hidden = relu(pre)
    ah = spmm(norm_adj, hidden)
    logits = ah @ params.W1
    return pre, hidden, ah, row_softmax(logits)


def forward(params: GcnParams, norm_adj, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(hidden, probs)`` for every node."""
    if features.shape[1] != params.W0.shape[0]:
        raise ValueError(f"features have {features.shape[1]} columns, W0 expects {params.W0.shape[0]}")
    _, hidden, _, probs = _forward(params, norm_adj, spmm(norm_adj, features))
    return hidden, probs


def predict(params: GcnParams, graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """``forward`` on ``graph`` using its cached propagated features."""
    _, hidden, _, probs = _forward(params, graph.norm_adj, graph.propagated_features)
    return hidden, probs


def loss_and_grads(params: GcnParams, graph: Graph, labeled, labels=None):
    """Cross-entropy over ``labeled`` and its gradients w.r.t. W0 and W1."""
    labels = graph.labels if labels is None else labels
    ax = graph.propagated_features
    pre, hidden, ah, probs = _forward(params, graph.norm_adj, ax)
    loss, dlogits = cross_entropy(probs, labels, labeled)
    dW1 = ah.T @ dlogits
    # norm_adj is symmetric, so its transpose is itself
    dhidden = spmm(graph.norm_adj, dlogits @ params.W1.T)
    dW0 = ax.T @ relu_backward(pre, dhidden)
    return loss, {"W0": dW0, "W1": dW1}


def train_one_epoch(params: GcnParams, state: AdamState, graph: Graph, labeled, labels=None) -> float:
    """Full-batch gradient step on the labeled nodes; returns the pre-step loss."""
    labeled = np.asarray(sorted(labeled), dtype=np.int64)
    if labeled.size == 0:
        raise ValueError("no labeled nodes")
    loss, grads = loss_and_grads(params, graph, labeled, labels)
    adam_step(params.arrays(), grads, state)
    return loss


def validation_micro_f1(params: GcnParams, graph: Graph, labels=None) -> float:
    labels = graph.labels if labels is None else labels
    _, probs = predict(params, graph)
    return micro_f1(probs[graph.valid].argmax(axis=1), labels[graph.valid])


def train_to_convergence(params: GcnParams, state: AdamState, graph: Graph, labeled,
                         config: ClassifierConfig, labels=None) -> int:
    """Train with early stopping on validation micro-F1.

    Stops once ``patience`` epochs pass without a strict improvement, or after
    ``max_convergence_epochs``. The best-scoring parameters (including the
    starting point) are copied back into ``params``. Returns epochs run.
    """
    labeled = np.asarray(sorted(labeled), dtype=np.int64)
    if labeled.size == 0:
        raise ValueError("no labeled nodes")
    best = validation_micro_f1(params, graph, labels)
    best_params = params.copy()
    since_best = 0
    epochs = 0
    while epochs < config.max_convergence_epochs:
        train_one_epoch(params, state, graph, labeled, labels)
        epochs += 1
        score = validation_micro_f1(params, graph, labels)
        if score > best:
            best, best_params, since_best = score, params.copy(), 0
        else:
            since_best += 1
        if since_best >= config.patience:
            break
    params.W0[...] = best_params.W0
    params.W1[...] = best_params.W1
    return epochs


def micro_f1(pred, truth) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("pred and truth differ in length")
    if truth.size == 0:
        raise ValueError("empty input")
    # single-label multiclass: pooled F1 is accuracy
    return float(np.mean(pred == truth))


def macro_f1(pred, truth, num_classes: int) -> float:
    """Unweighted mean of per-class F1, skipping classes absent from both."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("pred and truth differ in length")
    if truth.size == 0:
        raise ValueError("empty input")
    scores = []
    for c in range(num_classes):
        tp = np.sum((pred == c) & (truth == c))
        fp = np.sum((pred == c) & (truth != c))
        fn = np.sum((pred != c) & (truth == c))
        if tp + fp + fn == 0:
            continue
        scores.append(2 * tp / (2 * tp + fp + fn))
    if not scores:
        raise ValueError("every class was excluded")
    return float(np.mean(scores))
