"""Zero-shot transfer: apply a policy trained on source graphs to unseen targets.

The policy is frozen; on each target it picks nodes greedily and the final
classifier is scored on the test split. Every method shares the classifier
seeds of each run, so differences come from the queried nodes alone.
Around 200 training episodes are needed before the policy reliably beats
random; pass a smaller count as the first argument for a quick look.
"""

import sys

from graph_al import (SbmConfig, TrainConfig, baseline_selector, evaluate_policy, evaluate_selector,
                      generate_sbm, train_policy)

episodes = int(sys.argv[1]) if len(sys.argv) > 1 else 200
runs = 10
sources = [generate_sbm(SbmConfig(seed=s)) for s in (200, 201)]
targets = [generate_sbm(SbmConfig(seed=s)) for s in (300, 301, 302)]

policy, _ = train_policy(sources, TrainConfig(episodes=episodes, seed=0))

print(f"{'target':20s} {'gpa':>8s} {'random':>8s} {'degree':>8s}")
for g in targets:
    budget = 5 * g.num_classes
    gpa = evaluate_policy(policy, g, budget, num_runs=runs, seed=7)
    rnd = evaluate_selector(g, budget, lambda rng: baseline_selector("random", rng), runs, seed=7)
    deg = evaluate_selector(g, budget, lambda rng: baseline_selector("centrality", rng), runs, seed=7)
    print(f"{g.name:20s} {gpa.mean_micro:8.4f} {rnd.mean_micro:8.4f} {deg.mean_micro:8.4f}")
