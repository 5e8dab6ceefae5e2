import numpy as np
import pytest

from graph_al import Graph


def random_graph(seed, n=10, num_classes=3, feat_dim=4, p=0.3, train_frac=0.5):
    """Small Erdos-Renyi graph with Gaussian features and a random split."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    edges = np.column_stack([iu[keep], ju[keep]])
    labels = rng.integers(num_classes, size=n)
    labels[:num_classes] = np.arange(num_classes)
    order = rng.permutation(n)
    n_train = max(1, int(train_frac * n))
    n_valid = max(1, (n - n_train) // 2)
    return Graph(rng.normal(size=(n, feat_dim)), labels, num_classes, edges,
                 order[:n_train], order[n_train:n_train + n_valid], order[n_train + n_valid:],
                 name=f"rand{seed}")


def make_graph(n, edges, num_classes=2, feat_dim=2, train=None, valid=(), test=(), labels=None, features=None):
    labels = np.zeros(n, dtype=int) if labels is None else labels
    features = np.ones((n, feat_dim)) if features is None else features
    train = list(range(n)) if train is None else train
    return Graph(features, labels, num_classes, np.array(edges, dtype=int).reshape(-1, 2),
                 train, list(valid), list(test))


@pytest.fixture
def small_graph():
    return random_graph(0)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
