import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graph_al import Graph, SbmConfig, generate_sbm
from graph_al.classifier import (ClassifierConfig, GcnParams, forward, init_classifier, loss_and_grads,
                                 macro_f1, micro_f1, predict, train_one_epoch, train_to_convergence,
                                 validation_micro_f1)
from graph_al.numerics import AdamState, finite_diff_check

from conftest import make_graph, random_graph


def classifier_loss_fn(graph, labeled):
    def f(arrays):
        return loss_and_grads(GcnParams(arrays["W0"], arrays["W1"]), graph, labeled)
    return f


def test_init_is_glorot_and_seeded(small_graph):
    cfg = ClassifierConfig()
    a, _ = init_classifier(small_graph, cfg, 7)
    b, _ = init_classifier(small_graph, cfg, 7)
    np.testing.assert_array_equal(a.W0, b.W0)
    np.testing.assert_array_equal(a.W1, b.W1)
    assert a.W0.shape == (small_graph.feat_dim, 64)
    assert np.abs(a.W0).max() <= np.sqrt(6 / (small_graph.feat_dim + 64))
    assert np.abs(a.W1).max() <= np.sqrt(6 / (64 + small_graph.num_classes))


def test_forward_zero_weights_uniform(small_graph):
    p = GcnParams(np.zeros((small_graph.feat_dim, 64)), np.zeros((64, 3)))
    _, probs = forward(p, small_graph.norm_adj, small_graph.features)
    np.testing.assert_allclose(probs, 1 / 3, atol=1e-15)


def test_forward_isolated_node_uses_own_features():
    x = np.array([[1.0, -2.0]])
    g = make_graph(1, [], features=x, num_classes=2)
    p = GcnParams(np.eye(2), np.eye(2))
    hidden, probs = forward(p, g.norm_adj, g.features)
    np.testing.assert_array_equal(hidden, [[1.0, 0.0]])
    np.testing.assert_allclose(probs, [[np.e / (np.e + 1), 1 / (np.e + 1)]])


@pytest.mark.parametrize("seed", range(5))
def test_forward_rows_are_distributions(seed):
    g = random_graph(seed, n=5)
    p, _ = init_classifier(g, ClassifierConfig(), seed)
    _, probs = forward(p, g.norm_adj, g.features)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)
    assert probs.min() >= 0 and probs.max() <= 1


def test_forward_shape_mismatch(small_graph):
    p = GcnParams(np.zeros((3, 64)), np.zeros((64, 3)))
    with pytest.raises(ValueError):
        forward(p, small_graph.norm_adj, small_graph.features)


def test_permutation_equivariance():
    g = random_graph(3, n=10)
    perm = np.random.default_rng(0).permutation(10)
    inv = np.argsort(perm)
    # node i of g becomes node inv[i] of h
    e = inv[g.edges]
    e = np.sort(e, axis=1)
    h = Graph(g.features[perm], g.labels[perm], g.num_classes, e, inv[g.train], inv[g.valid], inv[g.test])
    p, _ = init_classifier(g, ClassifierConfig(), 1)
    _, pg = predict(p, g)
    _, ph = predict(p, h)
    np.testing.assert_allclose(ph, pg[perm], rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("seed", range(20))
def test_classifier_gradients_match_finite_differences(seed):
    g = random_graph(seed, n=10)
    p, _ = init_classifier(g, ClassifierConfig(hidden=6), seed)
    labeled = g.train[:4]
    assert finite_diff_check(classifier_loss_fn(g, labeled), p.arrays(), 1e-5) < 1e-5


def test_train_one_epoch_lr_zero_keeps_params(small_graph):
    p, st_ = init_classifier(small_graph, ClassifierConfig(lr=0.0), 0)
    before = p.copy()
    train_one_epoch(p, st_, small_graph, small_graph.train[:3])
    np.testing.assert_array_equal(p.W0, before.W0)
    np.testing.assert_array_equal(p.W1, before.W1)
    with pytest.raises(ValueError):
        train_one_epoch(p, st_, small_graph, [])


def test_first_step_reduces_loss_mostly():
    decreased = 0
    for seed in range(20):
        g = random_graph(seed, n=30)
        p, st_ = init_classifier(g, ClassifierConfig(lr=1e-3), seed)
        before = train_one_epoch(p, st_, g, g.train)
        after, _ = loss_and_grads(p, g, g.train)
        decreased += after <= before
    assert decreased >= 18


def test_convergence_patience_zero_runs_one_epoch(small_graph):
    cfg = ClassifierConfig(patience=0)
    p, st_ = init_classifier(small_graph, cfg, 0)
    assert train_to_convergence(p, st_, small_graph, small_graph.train[:3], cfg) == 1


def test_convergence_already_converged():
    # every validation node is already classified correctly, so nothing can improve
    cfg = ClassifierConfig(hidden=2, patience=5, max_convergence_epochs=50)
    g = make_graph(6, [(0, 1), (2, 3)], num_classes=2, train=[0, 1, 2], valid=[3, 4], test=[5])
    p = GcnParams(np.eye(2), np.array([[5.0, 0.0], [5.0, 0.0]]))
    assert validation_micro_f1(p, g) == 1.0
    _, st_ = init_classifier(g, cfg, 0)
    epochs = train_to_convergence(p, st_, g, g.train, cfg)
    assert epochs <= cfg.patience + 1


def test_convergence_restores_best_snapshot(small_graph):
    cfg = ClassifierConfig(patience=10, max_convergence_epochs=40)
    p, st_ = init_classifier(small_graph, cfg, 0)
    start = validation_micro_f1(p, small_graph)
    train_to_convergence(p, st_, small_graph, small_graph.train[:3], cfg)
    assert validation_micro_f1(p, small_graph) >= start


def test_convergence_improves_validation_on_sbm():
    cfg = ClassifierConfig()
    improved = 0
    for seed in range(20):
        g = generate_sbm(SbmConfig(seed=seed))
        p, st_ = init_classifier(g, cfg, seed)
        start = validation_micro_f1(p, g)
        train_to_convergence(p, st_, g, g.train[:20], cfg)
        improved += validation_micro_f1(p, g) > start
    assert improved >= 18


def test_micro_f1_examples():
    assert micro_f1([0, 1, 2], [0, 1, 2]) == 1.0
    assert micro_f1([1, 2, 0], [0, 1, 2]) == 0.0
    assert micro_f1([0, 1, 1, 1], [0, 1, 1, 0]) == 0.75
    with pytest.raises(ValueError):
        micro_f1([], [])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=40))
def test_micro_f1_is_accuracy(pairs):
    pred, truth = map(list, zip(*pairs))
    correct = sum(1 for a, b in pairs if a == b)
    assert micro_f1(pred, truth) == pytest.approx(correct / len(pairs), abs=1e-15)
    # pooled definition over classes
    tp = correct
    fp = fn = len(pairs) - correct
    assert micro_f1(pred, truth) == pytest.approx(tp / (tp + 0.5 * (fp + fn)), abs=1e-12)


def test_macro_f1_examples():
    assert macro_f1([0, 1, 2], [0, 1, 2], 3) == 1.0
    # class 0: tp=2 fp=2 fn=0 -> 2/3; class 1: tp=0 -> 0
    assert macro_f1([0, 0, 0, 0], [0, 0, 1, 1], 2) == pytest.approx(1 / 3)
    # class 2 absent from both -> excluded
    assert macro_f1([0, 1], [0, 1], 3) == 1.0
    with pytest.raises(ValueError):
        macro_f1([], [], 2)
