"""Small linear-algebra and optimization kernel shared by both GCNs.

Dense matrices are plain float64 ``numpy`` arrays and sparse matrices are
``scipy.sparse`` CSR matrices. Gradients for the two fixed architectures are
written by hand elsewhere and checked against :func:`finite_diff_check`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import scipy.sparse as sp

EPS = 1e-12


def spmm(s: sp.csr_matrix, d: np.ndarray) -> np.ndarray:
    """Sparse-dense product ``s @ d``."""
    if s.shape[1] != d.shape[0]:
        raise ValueError(f"spmm shape mismatch: {s.shape} x {d.shape}")
    return np.asarray(s @ d, dtype=np.float64)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return a @ b


def relu(m: np.ndarray) -> np.ndarray:
    return np.maximum(m, 0.0)


def relu_backward(m: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    # derivative at exactly 0 is taken as 0
    return np.where(m > 0.0, upstream, 0.0)


def row_softmax(m: np.ndarray) -> np.ndarray:
    z = m - m.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(probs: np.ndarray, labels, subset) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood over ``subset``.

    Returns the loss and its gradient with respect to the pre-softmax logits
    (non-zero only on the rows in ``subset``).
    """
    subset = np.asarray(subset, dtype=np.int64)
    if subset.size == 0:
        raise ValueError("no labeled nodes")
    y = np.asarray(labels[subset], dtype=np.int64)
    p = probs[subset, y]
    loss = float(-np.mean(np.log(p + EPS)))
    grad = np.zeros_like(probs)
    grad[subset] = probs[subset]
    grad[subset, y] -= 1.0
    grad[subset] /= subset.size
    return loss, grad


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


@dataclass
class AdamState:
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray],
              state: AdamState) -> None:
    """One bias-corrected Adam update, applied to ``params`` in place.

    Weight decay is the classic L2 form: ``g + weight_decay * theta`` enters
    the moment estimates.
    """
    for k, p in params.items():
        if grads[k].shape != p.shape:
            raise ValueError(f"gradient shape {grads[k].shape} != parameter shape {p.shape} for {k!r}")
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for k, p in params.items():
        g = grads[k]
        if state.weight_decay:
            g = g + state.weight_decay * p
        if k not in state.m:
            state.m[k] = np.zeros_like(p)
            state.v[k] = np.zeros_like(p)
        m, v = state.m[k], state.v[k]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)


LossFn = Callable[[Mapping[str, np.ndarray]], "tuple[float, Mapping[str, np.ndarray]]"]


def finite_diff_check(loss_fn: LossFn, params: Mapping[str, np.ndarray], h: float = 1e-5) -> float:
    """Compare ``loss_fn``'s analytic gradient with central differences.

    ``loss_fn(params)`` must return ``(loss, grads)``. Every coordinate of
    every array is perturbed in place and restored afterwards. Returns the
    largest ``|a - n| / max(1e-8, |a| + |n|)`` over all coordinates.
    """
    _, analytic = loss_fn(params)
    analytic = {k: np.array(g, dtype=np.float64) for k, g in analytic.items()}
    worst = 0.0
    for k, p in params.items():
        flat = p.reshape(-1)
        if not np.shares_memory(flat, p):
            raise ValueError(f"parameter {k!r} must be contiguous")
        ga = analytic[k].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp, _ = loss_fn(params)
            flat[i] = orig - h
            fm, _ = loss_fn(params)
            flat[i] = orig
            num = (fp - fm) / (2.0 * h)
            err = abs(ga[i] - num) / max(1e-8, abs(ga[i]) + abs(num))
            worst = max(worst, err)
    return worst
