"""Synthetic graphs: generate, inspect, save and reload a stochastic block model."""

import tempfile
from pathlib import Path

import numpy as np

from graph_al import SbmConfig, generate_sbm, load_graph, save_graph

g = generate_sbm(SbmConfig(num_nodes=300, num_classes=4, p_in=0.1, p_out=0.01, seed=0))
print(g.name, "nodes:", g.num_nodes, "edges:", len(g.edges), "features:", g.feat_dim)
print("split sizes train/valid/test:", g.train.size, g.valid.size, g.test.size)

# homophily: fraction of edges joining nodes of the same class
u, v = g.edges.T
print("same-class edge fraction: %.3f" % np.mean(g.labels[u] == g.labels[v]))
print("mean degree: %.2f" % g.degrees.mean())

with tempfile.TemporaryDirectory() as d:
    path = Path(d) / "sbm.json"
    save_graph(g, path)
    h = load_graph(path)
    assert np.array_equal(h.features, g.features) and np.array_equal(h.edges, g.edges)
    print("round trip through", path.name, "ok,", path.stat().st_size, "bytes")
