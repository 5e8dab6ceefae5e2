"""Heuristic query strategies on one graph, plus AGE weight search.

AGE mixes entropy, degree and embedding density as percentile ranks. Its
weights are picked by grid search on a training graph and reused unchanged on
the target.
"""

from graph_al import SbmConfig, generate_sbm
from graph_al.baselines import BASELINES, AgeWeights, baseline_selector, grid_search_age_weights
from graph_al.report import ci_halfwidth
from graph_al.trainer import evaluate_selector

target = generate_sbm(SbmConfig(seed=300))
source = generate_sbm(SbmConfig(seed=200))
budget, runs = 20, 10

# a coarse grid keeps this quick; the full protocol uses step 0.05
weights, _ = grid_search_age_weights([source], [budget], step=0.25, runs=2, seed=0)
print("AGE weights (entropy, centrality, density):", weights.as_array().round(3).tolist())

for method in BASELINES:
    w = weights if method == "age" else None
    res = evaluate_selector(target, budget, lambda rng: baseline_selector(method, rng, w), runs, seed=7)
    print(f"{method:12s} micro-F1 {res.mean_micro:.4f} +/- {ci_halfwidth(res.micro):.4f}  "
          f"macro-F1 {res.mean_macro:.4f}")

# one-hot AGE weights reduce to the single heuristic
a = evaluate_selector(target, budget, lambda rng: baseline_selector("age", rng, AgeWeights(1, 0, 0)), 2, seed=1)
b = evaluate_selector(target, budget, lambda rng: baseline_selector("uncertainty", rng), 2, seed=1)
print("AGE(1,0,0) queries == uncertainty queries:", a.sequences == b.sequences)
