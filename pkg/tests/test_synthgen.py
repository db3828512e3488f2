import numpy as np
import pytest
import pylls as ll


def setup(overlap_fraction=0.0, seed=0, n_per_domain=200):
    """
    Small block-mixture instance
    """
    params = ll.ProblemParams(3, 5, alpha=0.5, kappa_max=3.0, epsilon=0.3, seed=seed)
    return ll.make_block_instance(
        params, p=1, overlap_fraction=overlap_fraction, n_per_domain=n_per_domain
    )


def test_label_marginals_conditioning():
    """
    Accepted marginals are column-stochastic and well conditioned
    """
    params = ll.ProblemParams(3, 5, alpha=0.5, kappa_max=3.0, seed=3)
    q = ll.sample_label_marginals(params)
    assert q.shape == (3, 5)
    assert q.data.sum(axis=0) == pytest.approx(np.ones(5), abs=1e-12)
    assert ll.condition_number_2norm(q.data) <= 3.0 * (1 + 1e-9)


def test_label_marginals_concentration():
    """
    Large concentration puts the columns near the uniform vector
    """
    params = ll.ProblemParams(3, 5, alpha=1000.0, kappa_max=1e6, seed=0)
    rng = params.rng()
    cols = np.hstack([ll.sample_label_marginals(params, rng).data for _ in range(200)])
    assert cols.mean(axis=1) == pytest.approx(np.full(3, 1 / 3), abs=0.02)


def test_label_marginals_budget():
    """
    An unreachable condition bound exhausts the budget
    """
    params = ll.ProblemParams(2, 2, alpha=1000.0, kappa_max=1.0)
    with pytest.raises(ll.GenerationBudgetExceeded) as info:
        ll.sample_label_marginals(params, max_attempts=5)
    assert info.value.attempts == 5
    assert info.value.best_condition > 1.0


def test_class_quotas():
    """
    Largest remainder rounding
    """
    assert ll.class_quotas([0.25, 0.75], 100).tolist() == [25, 75]
    assert ll.class_quotas([1 / 3, 1 / 3, 1 / 3], 100).tolist() == [34, 33, 33]
    assert ll.class_quotas([0.5, 0.5], 7).sum() == 7


def test_block_mixture_layout():
    """
    Anchor and shared blocks of the generated densities
    """
    params = ll.ProblemParams(2, 2, epsilon=0.3)
    spec = ll.make_block_mixture(params, p=1, overlap_fraction=0.0)
    assert spec.anchor_block(0).lower.tolist() == [0.0]
    assert spec.anchor_block(1).lower.tolist() == [2.0]
    assert len(spec.classes[0]) == 1

    params = ll.ProblemParams(2, 2, epsilon=0.5)
    spec = ll.make_block_mixture(params, p=1, overlap_fraction=0.5)
    for y in range(2):
        anchor, shared = spec.classes[y].blocks
        assert anchor.lower.tolist() == [2.0 * y]
        assert anchor.weight == pytest.approx(0.5)
        assert shared.lower.tolist() == [4.0]
        assert shared.upper.tolist() == [5.0]
        assert shared.weight == pytest.approx(0.5)
    for b in spec.classes[1].blocks:
        assert not spec.anchor_block(0).intersects(b)

    with pytest.raises(ll.ValidationError):
        ll.make_block_mixture(ll.ProblemParams(2, 2, epsilon=0.5), overlap_fraction=0.6)
    with pytest.raises(ll.GenerationBudgetExceeded):
        ll.make_block_mixture(params, overlap_fraction=0.5, extent=4.0)


def test_sample_dataset_identity_marginals():
    """
    Identity marginals put one class in each domain
    """
    params = ll.ProblemParams(2, 2)
    spec = ll.make_block_mixture(params)
    q = ll.StochasticMatrix(np.eye(2))
    data = ll.sample_dataset(q, spec, 100, rng=np.random.default_rng(0))
    assert data.n == 200
    assert np.all(data.labels[data.domains == 0] == 0)
    assert np.all(data.labels[data.domains == 1] == 1)
    assert (data.splits == "train").sum() == 120


def test_sample_dataset_quotas():
    """
    Class counts per domain follow the marginal columns exactly
    """
    params = ll.ProblemParams(2, 2)
    spec = ll.make_block_mixture(params)
    q = ll.StochasticMatrix([[0.25, 0.5], [0.75, 0.5]])
    data = ll.sample_dataset(q, spec, 100, splits=(1.0, 0.0, 0.0), rng=np.random.default_rng(0))
    d0 = data.labels[data.domains == 0]
    assert np.bincount(d0).tolist() == [25, 75]
    # every feature lies in the anchor block of its class
    assert np.all(spec.anchor_class(data.features) == data.labels)


def test_generation_determinism():
    """
    Equal parameters give identical instances
    """
    a = setup(0.3, seed=7)
    b = setup(0.3, seed=7)
    assert np.array_equal(a.q_yd_true.data, b.q_yd_true.data)
    assert np.array_equal(a.dataset.features, b.dataset.features)
    assert np.array_equal(a.dataset.labels, b.dataset.labels)
    c = setup(0.3, seed=8)
    assert not np.array_equal(a.dataset.features, c.dataset.features)


def test_oracle_single_domain():
    """
    A single domain gives the trivial posterior
    """
    params = ll.ProblemParams(1, 1)
    inst = ll.make_block_instance(params, n_per_domain=20)
    f = inst.oracle()
    assert f(inst.dataset.features[0]).entries == pytest.approx([1.0])

    g = ll.oracle_discriminator(inst.spec, inst.q_yd_true)
    assert g(inst.dataset.features[0]).entries == pytest.approx([1.0])


def test_oracle_anchor_points():
    """
    On an anchor block f(x) is the matching column of Q_{D|Y}
    """
    inst = setup(0.3)
    f = inst.oracle()
    q_dy = ll.q_d_given_y(inst.q_yd_true).data
    X = inst.dataset.features
    anchors = inst.spec.anchor_class(X)
    F = f.batch(X)
    for y in range(3):
        inside = anchors == y
        assert inside.any()
        assert np.max(np.abs(F[inside] - q_dy[:, y])) <= 1e-15

    # away from anchors, f is Q_{D|Y} applied to the class posterior
    G = f.class_posterior(X)
    assert F == pytest.approx(G @ q_dy.T, abs=1e-12)

    with pytest.raises(ll.OutOfSupport):
        f.batch([[-5.0]])


def test_discrete_instance():
    """
    Anchored word matrices
    """
    params = ll.ProblemParams(2, 2, m=2, kappa_max=3.0, seed=1)
    inst = ll.make_discrete_instance(params)
    q_xy = inst.q_xy_true.data
    # with m = k every word is an anchor
    assert sorted(q_xy.ravel().tolist()) == [0.0, 0.0, 1.0, 1.0]
    for y, rows in enumerate(inst.anchor_rows):
        assert q_xy[rows[0], y] == pytest.approx(1.0)

    params = ll.ProblemParams(3, 5, m=12, kappa_max=5.0, seed=2)
    inst = ll.make_discrete_instance(params, anchors_per_class=2, n_per_domain=50)
    assert inst.q_xd.shape == (12, 5)
    assert inst.q_xd.data == pytest.approx(inst.q_xy_true.data @ inst.q_yd_true.data)
    for y, rows in enumerate(inst.anchor_rows):
        assert len(rows) == 2
        others = [z for z in range(3) if z != y]
        assert np.all(inst.q_xy_true.data[np.ix_(rows, others)] == 0.0)
    assert inst.dataset.p == 12

    with pytest.raises(ll.ValidationError):
        ll.make_discrete_instance(params, m=5, anchors_per_class=2)


def test_ground_truth_roundtrip(tmp_path):
    """
    Ground truth rebuilds the instance and restores hidden labels
    """
    inst = setup(0.3, n_per_domain=50)
    path = tmp_path / "ground_truth.json"
    inst.write_ground_truth(path, config={"note": "test"})

    hidden = inst.dataset.hidden()
    back = ll.ProblemInstance.read_ground_truth(path, dataset=hidden)
    assert back.kind == "blocks"
    assert back.q_yd_true.data == pytest.approx(inst.q_yd_true.data, abs=1e-15)
    assert np.array_equal(back.dataset.labels, inst.dataset.labels)
    X = inst.dataset.features
    assert back.oracle().batch(X) == pytest.approx(inst.oracle().batch(X), abs=1e-15)

    short = ll.DomainDataset(X[:10], inst.dataset.domains[:10], r=5).hidden()
    with pytest.raises(ll.ValidationError):
        ll.ProblemInstance.read_ground_truth(path, dataset=short)


def test_dataset_csv(tmp_path):
    """
    Dataset files round trip and report bad lines
    """
    inst = setup(0.0, n_per_domain=20)
    path = tmp_path / "dataset.csv"
    inst.dataset.to_csv(path)
    back = ll.DomainDataset.from_csv(path)
    assert back.n == inst.dataset.n
    assert np.array_equal(back.features, inst.dataset.features)
    assert np.array_equal(back.labels, inst.dataset.labels)
    assert back.split("test").n == 5 * 4

    lines = path.read_text().splitlines()
    fields = lines[3].split(",")
    fields[1] = "x"
    lines[3] = ",".join(fields)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ll.DatasetParseError) as info:
        ll.DomainDataset.from_csv(path)
    assert info.value.line == 4


def test_dataset_views():
    """
    Split selection and label hiding
    """
    data = ll.DomainDataset(
        [[0.0], [1.0], [2.0], [3.0]],
        [0, 1, 0, 1],
        [0, 1, 1, 0],
        ["train", "valid", "test", "train"],
    )
    assert data.has_labels
    assert data.split("train").features.ravel().tolist() == [0.0, 3.0]
    assert data.split(("train", "valid")).n == 3
    assert data.without_labels().labels is None
    assert not data.hidden().has_labels
    assert data.domain_counts().tolist() == [2, 2]

    with pytest.raises(ll.InvalidInput):
        data.split("holdout")
    with pytest.raises(ll.ShapeMismatch):
        ll.DomainDataset([[0.0], [1.0]], [0])
