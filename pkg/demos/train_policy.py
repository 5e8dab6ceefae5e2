"""Train a query policy with REINFORCE on two source graphs and save a checkpoint.

Short run for illustration; the learning signal shows up after a few hundred
episodes on the default graphs.
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from graph_al import SbmConfig, TrainConfig, generate_sbm, load_checkpoint, save_checkpoint, train_policy

episodes = int(sys.argv[1]) if len(sys.argv) > 1 else 40
sources = [generate_sbm(SbmConfig(seed=s)) for s in (200, 201)]


def progress(row):
    if row["episode"] % 10 == 0:
        print(f"episode {row['episode']:4d}  {row['graph']}  reward {row['mean_reward']:.4f}  "
              f"baseline {row['baseline']:.4f}")


policy, curve = train_policy(sources, TrainConfig(episodes=episodes, seed=0), callback=progress)

for gi, g in enumerate(sources):
    r = np.array([c["mean_reward"] for c in curve if c["graph_id"] == gi])
    k = max(1, len(r) // 4)
    print(f"{g.name}: first {k} episodes {r[:k].mean():.4f}, last {k} {r[-k:].mean():.4f}")

with tempfile.TemporaryDirectory() as d:
    path = Path(d) / "policy.json"
    save_checkpoint(path, policy, train_graphs=[g.name for g in sources], episodes=episodes)
    restored, meta = load_checkpoint(path, expect_arch="gcn")
    assert all(np.array_equal(restored.weights[k], policy.weights[k]) for k in policy.weights)
    print("checkpoint keys:", sorted(meta))
