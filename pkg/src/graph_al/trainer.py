"""Query-loop environment, REINFORCE training and zero-shot evaluation."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .classifier import (ClassifierConfig, GcnParams, init_classifier, macro_f1, micro_f1,
                         predict, train_one_epoch, train_to_convergence)
from .graph import Graph, candidate_pool
from .numerics import AdamState, adam_step
from .policy import (PolicyParams, action_distribution, init_policy, logprob_grad,
                     select_argmax, select_sample)
from .state import build_state

log = logging.getLogger(__name__)


class LabelAccessError(RuntimeError):
    pass


class NumericError(FloatingPointError):
    pass


class LabelStore:
    """Label array that only hands out training labels that were queried.

    Validation and test labels are always readable (the reward and the final
    metrics need them). Every read is recorded for auditing.
    """

    def __init__(self, graph: Graph):
        self._labels = graph.labels
        self._train = np.zeros(graph.num_nodes, dtype=bool)
        self._train[graph.train] = True
        self._revealed = np.zeros(graph.num_nodes, dtype=bool)
        self.reads = np.zeros(graph.num_nodes, dtype=np.int64)

    def reveal(self, v: int) -> int:
        if not self._train[v]:
            raise LabelAccessError(f"node {v} is not in the train split")
        self._revealed[v] = True
        return self[v]

    def __getitem__(self, idx):
        flat = np.atleast_1d(np.arange(self._labels.size)[idx])
        hidden = flat[self._train[flat] & ~self._revealed[flat]]
        if hidden.size:
            raise LabelAccessError(f"read of unqueried training labels {hidden[:5].tolist()}")
        np.add.at(self.reads, flat, 1)
        return self._labels[idx]

    def unqueried_train_reads(self) -> np.ndarray:
        return np.flatnonzero((self.reads > 0) & self._train & ~self._revealed)

    @property
    def revealed(self) -> np.ndarray:
        return np.flatnonzero(self._revealed)


@dataclass
class StepContext:
    graph: Graph
    t: int
    labeled: list[int]
    candidates: np.ndarray
    hidden: np.ndarray
    probs: np.ndarray


Selector = Callable[[StepContext], int]


@dataclass
class EpisodeResult:
    sequence: list[int]
    reward: float
    params: GcnParams
    labels: LabelStore
    epochs: int

    def test_scores(self, graph: Graph) -> tuple[float, float]:
        _, probs = predict(self.params, graph)
        pred = probs[graph.test].argmax(axis=1)
        truth = self.labels[graph.test]
        return micro_f1(pred, truth), macro_f1(pred, truth, graph.num_classes)


def _check_finite(params: GcnParams, where: str):
    for k, v in params.arrays().items():
        if not np.all(np.isfinite(v)):
            raise NumericError(f"non-finite classifier weight {k} {where}")


def run_query_loop(graph: Graph, budget: int, selector: Selector, classifier_seed,
                   config: ClassifierConfig | None = None) -> EpisodeResult:
    """Label ``budget`` nodes one at a time, then train to convergence.

    A fresh classifier is initialized from ``classifier_seed``; after each
    query it trains for one more epoch. The reward is validation micro-F1 of
    the converged classifier.
    """
    config = config or ClassifierConfig()
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if budget > graph.train.size:
        raise ValueError(f"budget exceeds pool: budget {budget} > {graph.train.size} training nodes")
    labels = LabelStore(graph)
    params, opt = init_classifier(graph, config, classifier_seed)
    labeled: list[int] = []
    for t in range(budget):
        hidden, probs = predict(params, graph)
        cands = candidate_pool(graph, labeled)
        v = int(selector(StepContext(graph, t, list(labeled), cands, hidden, probs)))
        if v not in set(cands.tolist()):
            raise ValueError(f"selector returned node {v}, which is not a candidate")
        labels.reveal(v)
        labeled.append(v)
        loss = train_one_epoch(params, opt, graph, labeled, labels)
        if not np.isfinite(loss):
            raise NumericError(f"non-finite classifier loss at query step {t} (labeled={labeled})")
    epochs = train_to_convergence(params, opt, graph, labeled, config, labels)
    _check_finite(params, f"after convergence (labeled={labeled})")
    _, probs = predict(params, graph)
    reward = micro_f1(probs[graph.valid].argmax(axis=1), labels[graph.valid])
    return EpisodeResult(labeled, reward, params, labels, epochs)


@dataclass
class Step:
    state: np.ndarray
    candidates: np.ndarray
    chosen: int


@dataclass
class Trajectory:
    graph: Graph
    steps: list[Step]
    reward: float
    budget: int
    graph_id: int = 0
    episode: EpisodeResult | None = None

    @property
    def sequence(self) -> list[int]:
        return [s.chosen for s in self.steps]


def policy_selector(policy: PolicyParams, mode: str, rng: np.random.Generator | None = None,
                    alpha: float = 20.0, feature_mask=None, record: list | None = None) -> Selector:
    if mode not in ("sample", "argmax"):
        raise ValueError(f"mode must be 'sample' or 'argmax', got {mode!r}")
    if mode == "sample" and rng is None:
        raise ValueError("sampling mode needs an rng")

    def select(ctx: StepContext) -> int:
        st = build_state(ctx.graph, ctx.probs, ctx.labeled, alpha, feature_mask)
        dist = action_distribution(policy, ctx.graph.norm_adj, st, ctx.candidates)
        v = select_sample(dist, rng) if mode == "sample" else select_argmax(dist)
        if record is not None:
            record.append(Step(st.matrix, ctx.candidates, v))
        return v

    return select


def run_episode(policy: PolicyParams, graph: Graph, budget: int, mode: str, classifier_seed,
                rng: np.random.Generator | None = None, alpha: float = 20.0, feature_mask=None,
                config: ClassifierConfig | None = None, graph_id: int = 0) -> Trajectory:
    steps: list[Step] = []
    sel = policy_selector(policy, mode, rng, alpha, feature_mask, steps)
    result = run_query_loop(graph, budget, sel, classifier_seed, config)
    return Trajectory(graph, steps, result.reward, budget, graph_id, result)


def surrogate_grad(policy: PolicyParams, trajectories: Sequence[Trajectory],
                   advantages: Sequence[float]) -> dict[str, np.ndarray]:
    """Gradient of ``sum_i A_i * sum_t log p(a_t | s_t)`` over a batch."""
    total = {k: np.zeros_like(v) for k, v in policy.weights.items()}
    for traj, adv in zip(trajectories, advantages):
        if adv == 0.0:
            continue
        for step in traj.steps:
            g = logprob_grad(policy, traj.graph.norm_adj, step.state, step.candidates, step.chosen)
            for k in total:
                total[k] += adv * g[k]
    return total


def reinforce_update(policy: PolicyParams, trajectories: Sequence[Trajectory], optimizer: AdamState,
                     baselines: dict, decay: float = 0.9) -> float:
    """One policy-gradient step; returns the mean advantage of the batch.

    Advantages use each graph's running reward baseline, which is then moved
    toward every reward in the batch. A graph without a baseline yet starts
    from its batch mean.
    """
    if not trajectories:
        raise ValueError("empty batch")
    for gid in {t.graph_id for t in trajectories}:
        if gid not in baselines:
            baselines[gid] = float(np.mean([t.reward for t in trajectories if t.graph_id == gid]))
    adv = [t.reward - baselines[t.graph_id] for t in trajectories]
    grad = surrogate_grad(policy, trajectories, adv)
    for k, g in grad.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite policy gradient for {k}")
    # Adam minimizes; ascend the surrogate
    adam_step(policy.weights, {k: -g for k, g in grad.items()}, optimizer)
    for t in trajectories:
        baselines[t.graph_id] = decay * baselines[t.graph_id] + (1.0 - decay) * t.reward
    return float(np.mean(adv))


@dataclass
class TrainConfig:
    episodes: int = 2000
    batch_size: int = 5
    lr: float = 0.01
    budget_per_class: int = 5
    budgets: Sequence[int] | None = None
    alpha: float = 20.0
    feature_mask: Sequence[bool] | None = None
    arch: str = "gcn"
    baseline_decay: float = 0.9
    seed: int = 0
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")

    def budget_for(self, graph: Graph, i: int) -> int:
        if self.budgets is not None:
            return int(self.budgets[i])
        return self.budget_per_class * graph.num_classes


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def train_policy(graphs: Sequence[Graph], config: TrainConfig, init: PolicyParams | None = None,
                 callback: Callable[[dict], None] | None = None) -> tuple[PolicyParams, list[dict]]:
    """REINFORCE over several fully labeled source graphs.

    Each episode visits every graph, collects ``batch_size`` sampled
    trajectories on it and applies one update. Returns the trained policy and
    one curve row per (episode, graph).
    """
    if not graphs:
        raise ValueError("need at least one source graph")
    budgets = [config.budget_for(g, i) for i, g in enumerate(graphs)]
    for g, b in zip(graphs, budgets):
        if g.train.size == 0:
            raise ValueError(f"source graph {g.name!r} has no labeled training nodes")
        if b > g.train.size:
            raise ValueError(f"budget exceeds pool on {g.name!r}: {b} > {g.train.size}")
    policy = init.copy() if init is not None else init_policy(config.arch, derive_seed(config.seed, 0))
    opt = AdamState(lr=config.lr)
    rng = np.random.default_rng(derive_seed(config.seed, 1))
    baselines: dict = {}
    curve: list[dict] = []
    for ep in range(config.episodes):
        for gi, g in enumerate(graphs):
            batch = [run_episode(policy, g, budgets[gi], "sample",
                                 derive_seed(config.seed, 2, ep, gi, k), rng,
                                 config.alpha, config.feature_mask, config.classifier, gi)
                     for k in range(config.batch_size)]
            mean_adv = reinforce_update(policy, batch, opt, baselines, config.baseline_decay)
            row = {"episode": ep, "graph_id": gi, "graph": g.name,
                   "mean_reward": float(np.mean([t.reward for t in batch])),
                   "baseline": baselines[gi], "mean_advantage": mean_adv}
            curve.append(row)
            log.debug("episode %d graph %s reward %.4f", ep, g.name, row["mean_reward"])
            if callback is not None:
                callback(row)
    return policy, curve


@dataclass
class EvalResult:
    micro: np.ndarray
    macro: np.ndarray
    seeds: list[int]
    sequences: list[list[int]]
    rewards: np.ndarray

    @property
    def mean_micro(self) -> float:
        return float(np.mean(self.micro))

    @property
    def mean_macro(self) -> float:
        return float(np.mean(self.macro))

    @property
    def std_micro(self) -> float:
        return float(np.std(self.micro, ddof=1)) if self.micro.size > 1 else 0.0

    @property
    def std_macro(self) -> float:
        return float(np.std(self.macro, ddof=1)) if self.macro.size > 1 else 0.0


def run_seed(seed: int, run: int) -> int:
    """Classifier seed of evaluation run ``run``; shared by every method."""
    return derive_seed(seed, 3, run)


def evaluate_selector(graph: Graph, budget: int, make_selector: Callable[[np.random.Generator], Selector],
                      num_runs: int, seed: int = 0, config: ClassifierConfig | None = None) -> EvalResult:
    """Independent query episodes scored on the test split.

    ``make_selector(rng)`` builds a fresh selector per run; its rng is seeded
    separately from the classifier.
    """
    if num_runs < 1:
        raise ValueError("num_runs must be at least 1")
    micro, macro, seeds, seqs, rewards = [], [], [], [], []
    for r in range(num_runs):
        cseed = run_seed(seed, r)
        sel = make_selector(np.random.default_rng(derive_seed(seed, 4, r)))
        res = run_query_loop(graph, budget, sel, cseed, config)
        mi, ma = res.test_scores(graph)
        micro.append(mi)
        macro.append(ma)
        seeds.append(cseed)
        seqs.append(res.sequence)
        rewards.append(res.reward)
    return EvalResult(np.array(micro), np.array(macro), seeds, seqs, np.array(rewards))


def evaluate_policy(policy: PolicyParams, graph: Graph, budget: int, num_runs: int = 100, seed: int = 0,
                    alpha: float = 20.0, feature_mask=None,
                    config: ClassifierConfig | None = None) -> EvalResult:
    """Zero-shot evaluation: greedy (argmax) queries, policy weights untouched."""
    return evaluate_selector(graph, budget,
                             lambda rng: policy_selector(policy, "argmax", None, alpha, feature_mask),
                             num_runs, seed, config)


def fixed_sequence_selector(sequence: Sequence[int]) -> Selector:
    def select(ctx: StepContext) -> int:
        return int(sequence[ctx.t])
    return select


def oracle_table(graph: Graph, budget: int, classifier_seed, config: ClassifierConfig | None = None,
                 max_sequences: int = 10_000) -> list[tuple[tuple[int, ...], float]]:
    """Reward of every ordered query sequence, by brute force."""
    pool = graph.train.tolist()
    count = 1
    for i in range(budget):
        count *= len(pool) - i
    if budget > len(pool):
        raise ValueError("budget exceeds pool")
    if count > max_sequences:
        raise ValueError(f"pool too large: {count} sequences exceeds the limit of {max_sequences}")
    rows = []
    for seq in itertools.permutations(pool, budget):
        res = run_query_loop(graph, budget, fixed_sequence_selector(seq), classifier_seed, config)
        rows.append((seq, res.reward))
    return rows
