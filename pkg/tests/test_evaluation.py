import itertools

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pytest
import pylls as ll


def brute_force_accuracy(C):
    """
    Best matched accuracy over every permutation
    """
    k = C.shape[0]
    perms = np.array(list(itertools.permutations(range(k))))
    return C[perms, np.arange(k)].sum(axis=1).max() / C.sum()


def test_hungarian_diagonal():
    """
    Diagonal and anti-diagonal confusions
    """
    perm, acc = ll.hungarian_match(np.diag([5, 3, 2]))
    assert perm.tolist() == [0, 1, 2]
    assert acc == 1.0

    perm, acc = ll.hungarian_match(np.fliplr(np.diag([5, 3, 2])))
    assert perm.tolist() == [2, 1, 0]
    assert acc == 1.0


def test_hungarian_brute_force():
    """
    The assignment solver matches exhaustive search
    """
    rng = np.random.default_rng(0)
    for _ in range(1000):
        k = int(rng.integers(2, 7))
        C = rng.integers(0, 20, size=(k, k))
        C[0, 0] += 1
        perm, acc = ll.hungarian_match(C)
        assert acc == pytest.approx(brute_force_accuracy(C), abs=1e-12)
        assert sorted(perm.tolist()) == list(range(k))
        # perm[pred] is the true class of predicted class pred
        assert C[perm, np.arange(k)].sum() / C.sum() == pytest.approx(acc, abs=1e-12)


def test_hungarian_errors():
    """
    Non-square or empty confusions
    """
    with pytest.raises(ll.ShapeMismatch):
        ll.hungarian_match(np.ones((2, 3)))
    with pytest.raises(ll.InvalidInput):
        ll.hungarian_match(np.zeros((2, 2)))


def test_q_yd_error():
    """
    Mean absolute error after row matching
    """
    q_true = np.array([[0.17, 0.65], [0.83, 0.35]])
    q_hat = np.array([[0.2, 0.6], [0.8, 0.4]])
    assert ll.q_yd_error(q_hat, q_true) == pytest.approx(0.04, abs=1e-12)
    assert ll.q_yd_error(q_true, q_true) == 0.0

    q3 = np.array([[0.1, 0.5, 0.2], [0.3, 0.2, 0.2], [0.6, 0.3, 0.6]])
    order = [2, 0, 1]
    assert ll.q_yd_error(q3[order], q3, order) == pytest.approx(0.0, abs=1e-15)
    assert ll.match_rows(q3[order], q3).tolist() == order

    with pytest.raises(ll.InvalidInput):
        ll.q_yd_error(q3, q3, [0, 0, 1])
    with pytest.raises(ll.ShapeMismatch):
        ll.q_yd_error(q3, q3[:2])


def test_evaluate_relabeled():
    """
    A consistent relabeling scores perfectly
    """
    rng = np.random.default_rng(1)
    y_true = rng.integers(3, size=90)
    domains = rng.integers(4, size=90)
    y_pred = (y_true + 1) % 3
    q_true = np.array([[0.2, 0.5, 0.1, 0.3], [0.3, 0.2, 0.8, 0.3], [0.5, 0.3, 0.1, 0.4]])

    report = ll.evaluate(y_true, y_pred, domains, q_true[[2, 0, 1]], q_true, y_agnostic=y_pred)
    assert report.accuracy == 1.0
    assert report.permutation.tolist() == [2, 0, 1]
    assert report.q_yd_error == pytest.approx(0.0, abs=1e-15)
    assert report.balanced_accuracy == 1.0
    assert report.agnostic_accuracy == 1.0
    assert report.per_domain_accuracy == pytest.approx(np.ones(4))
    assert report.n_test == 90
    assert np.array_equal(
        report.matched_confusion(), ll.confusion_matrix(y_true, y_true, 3)
    )
    d = report.to_dict()
    assert d["permutation"] == [2, 0, 1]


def test_evaluate_partial():
    """
    Per-domain and balanced accuracies
    """
    y_true = np.array([0, 0, 0, 1, 1, 1])
    y_pred = np.array([0, 0, 1, 1, 1, 1])
    domains = np.array([0, 0, 0, 1, 1, 1])
    q = np.array([[0.5, 0.5], [0.5, 0.5]])
    report = ll.evaluate(y_true, y_pred, domains, q, q, r=3)
    assert report.accuracy == pytest.approx(5 / 6)
    assert report.per_domain_accuracy[:2] == pytest.approx([2 / 3, 1.0])
    assert np.isnan(report.per_domain_accuracy[2])
    assert report.balanced_accuracy == pytest.approx((2 / 3 + 1.0) / 2)
    assert report.agnostic_accuracy is None


def test_confusion_matrix():
    """
    Rows are true classes
    """
    C = ll.confusion_matrix([0, 1, 1], [1, 1, 0], 2)
    assert C.tolist() == [[0, 1], [1, 1]]
    with pytest.raises(ll.ShapeMismatch):
        ll.confusion_matrix([0, 1], [0], 2)


def test_plot_label_marginals():
    """
    Heat map on a given axis
    """
    _, ax = plt.subplots()
    q = np.array([[0.2, 0.5, 0.1], [0.8, 0.5, 0.9]])
    out = ll.plot_label_marginals(q, ax=ax, title="Q")
    assert out is ax
    assert ax.get_title() == "Q"
    assert len(ax.texts) == 6
    plt.close(ax.figure)
