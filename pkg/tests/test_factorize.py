import numpy as np
import pytest
import pylls as ll


def setup(seed=0):
    """
    Exact anchored product of a 6x3 cluster matrix and 3x5 label marginals
    """
    rng = np.random.default_rng(seed)
    W = rng.uniform(0.1, 1.0, size=(6, 3))
    W[:3] = np.diag(rng.uniform(0.5, 1.5, size=3))
    W /= W.sum(axis=0)
    params = ll.ProblemParams(3, 5, alpha=0.5, kappa_max=5.0, seed=seed)
    H = ll.sample_label_marginals(params).data
    return W, H, W @ H


def test_spa_exact_product():
    """
    Successive projection recovers exact anchored factors
    """
    for seed in range(5):
        W, H, V = setup(seed)
        result = ll.spa_anchor_nmf(V, 3)
        perm = ll.match_rows(result.h_hat.data, H)
        assert result.h_hat.data == pytest.approx(H[perm], abs=1e-8)
        assert result.w_hat.data == pytest.approx(W[:, perm], abs=1e-8)
        assert sorted(result.anchors) == [0, 1, 2]
        assert result.residual <= 1e-10


def test_spa_identity():
    """
    The identity is its own factorization
    """
    result = ll.spa_anchor_nmf(np.eye(3), 3)
    assert sorted(result.anchors) == [0, 1, 2]
    perm = ll.match_rows(result.h_hat.data, np.eye(3))
    assert result.h_hat.data == pytest.approx(np.eye(3)[perm], abs=1e-12)


def test_spa_rank_deficient():
    """
    A rank k-1 matrix has only k-1 anchors
    """
    W = np.array([[0.5, 0.0], [0.0, 0.5], [0.25, 0.25], [0.25, 0.25]])
    H = np.array([[0.2, 0.5, 0.9], [0.8, 0.5, 0.1]])
    with pytest.raises(ll.AnchorDeficient):
        ll.spa_anchor_nmf(W @ H, 3)


def test_nmf_exact_product():
    """
    Multiplicative updates recover an anchored product
    """
    W, H, V = setup(1)
    result = ll.nmf(V, 3, max_iter=5000, rng=np.random.default_rng(0))
    perm = ll.match_rows(result.h_hat.data, H)
    assert result.h_hat.data == pytest.approx(H[perm], abs=1e-3)
    assert result.h_hat.data.sum(axis=0) == pytest.approx(np.ones(5), abs=1e-12)
    assert result.w_hat.data.sum(axis=0) == pytest.approx(np.ones(3), abs=1e-12)
    assert result.residual == pytest.approx(result.history[-1])


def test_nmf_residual_never_increases():
    """
    Each multiplicative update lowers the Frobenius residual
    """
    for seed in range(3):
        _, _, V = setup(seed)
        result = ll.nmf(V, 3, max_iter=500, n_init=1, rng=np.random.default_rng(seed))
        history = np.asarray(result.history)
        assert history.size == result.n_iter + 1
        assert np.all(np.diff(history) <= 1e-10 + 1e-6 * history[:-1])


def test_nmf_permutation_equivariant():
    """
    Reordering words or domains reorders the recovered factors
    """
    W, H, V = setup(1)
    rng = np.random.default_rng(8)
    rows = rng.permutation(6)
    cols = rng.permutation(5)
    result = ll.nmf(V[rows][:, cols], 3, max_iter=5000, rng=np.random.default_rng(0))
    h_hat = np.empty_like(H)
    h_hat[:, cols] = result.h_hat.data
    w_hat = np.empty_like(W)
    w_hat[rows] = result.w_hat.data
    perm = ll.match_rows(h_hat, H)
    assert h_hat == pytest.approx(H[perm], abs=1e-2)
    assert w_hat == pytest.approx(W[:, perm], abs=1e-2)


@pytest.mark.slow
@pytest.mark.filterwarnings("ignore::pylls.NMFConvergenceWarning")
def test_anchored_topic_recovery():
    """
    Both solvers recover the label marginals of exact anchored word tables
    """
    for seed in range(20):
        params = ll.ProblemParams(4, 8, alpha=0.5, kappa_max=10.0, m=20, seed=seed)
        instance = ll.make_discrete_instance(params)
        V = instance.q_xd.data
        H = instance.q_yd_true.data

        spa = ll.spa_anchor_nmf(V, 4)
        perm = ll.match_rows(spa.h_hat.data, H)
        assert spa.h_hat.data == pytest.approx(H[perm], abs=1e-6)

        mu = ll.nmf(V, 4, max_iter=10000, tol=1e-12, n_init=3, rng=np.random.default_rng(seed))
        perm = ll.match_rows(mu.h_hat.data, H)
        assert mu.h_hat.data == pytest.approx(H[perm], abs=1e-2)


def test_nmf_rank_one():
    """
    Rank one input has a single component
    """
    c = np.array([0.1, 0.2, 0.3, 0.4])
    V = np.tile(c[:, None], (1, 4))
    result = ll.nmf(V, 1, rng=np.random.default_rng(0))
    assert result.h_hat.data == pytest.approx(np.ones((1, 4)), abs=1e-15)
    assert result.w_hat.data[:, 0] == pytest.approx(c, abs=1e-4)


def test_nmf_rank_checks():
    """
    Rank above min(m, r) needs the overcomplete flag
    """
    V = np.full((3, 3), 1 / 3)
    with pytest.raises(ll.InvalidRank):
        ll.nmf(V, 4)
    with pytest.raises(ll.InvalidRank):
        ll.spa_anchor_nmf(V, 4)
    with pytest.raises(ll.InvalidRank):
        ll.nmf(V, 0)
    with pytest.warns(ll.NMFConvergenceWarning):
        result = ll.nmf(V[:2], 3, max_iter=2, n_init=1, allow_overcomplete=True)
    assert result.h_hat.shape == (3, 3)


def test_nmf_not_converged():
    """
    Unconverged runs are flagged, not raised
    """
    _, _, V = setup(2)
    with pytest.warns(ll.NMFConvergenceWarning):
        result = ll.nmf(V, 3, max_iter=1, tol=0.0, n_init=2, rng=np.random.default_rng(0))
    assert not result.converged
    assert result.n_iter == 1


def test_nmf_seeded():
    """
    Equal generators give equal factors
    """
    _, _, V = setup(3)
    a = ll.nmf(V, 3, max_iter=200, n_init=3, rng=np.random.default_rng(5))
    b = ll.nmf(V, 3, max_iter=200, n_init=3, rng=np.random.default_rng(5))
    assert np.array_equal(a.h_hat.data, b.h_hat.data)
    assert np.array_equal(a.w_hat.data, b.w_hat.data)


def test_factorization_json(tmp_path):
    """
    Factor files hold both factors and the diagnostics
    """
    _, _, V = setup(4)
    result = ll.spa_anchor_nmf(V, 3)
    d = result.to_dict()
    assert d["method"] == "spa"
    assert np.array(d["h"]).shape == (3, 5)
    assert np.array(d["w"]).shape == (6, 3)
    assert len(d["h_column_sums"]) == 5
    result.to_json(tmp_path / "factors.json")
    assert (tmp_path / "factors.json").read_text().endswith("}\n")
    assert result.getQYD() is result.h_hat
