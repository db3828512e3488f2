import json

import numpy as np
import pandas as pd
import pytest
import pylls as ll


def setup(overlap_fraction=0.0, seed=0, k=3, r=5, n_per_domain=1000, m=None):
    """
    Block-mixture instance with default generator knobs
    """
    params = ll.ProblemParams(k, r, alpha=0.5, kappa_max=3.0, epsilon=0.3, m=m, seed=seed)
    return ll.make_block_instance(
        params, p=1, overlap_fraction=overlap_fraction, n_per_domain=n_per_domain
    )


def separable_instance(n_per_domain=500):
    """
    Two classes, each confined to its own domain
    """
    params = ll.ProblemParams(2, 2, seed=0)
    spec = ll.make_block_mixture(params)
    q = ll.StochasticMatrix(np.eye(2))
    data = ll.sample_dataset(q, spec, n_per_domain, rng=np.random.default_rng(0))
    return ll.ProblemInstance(params, q, spec=spec, dataset=data)


def test_oracle_exact_recovery():
    """
    Oracle posteriors on an anchored instance recover everything
    """
    inst = setup()
    options = ll.AnalysisOptions(mode="oracle", factorizer="spa")
    analysis = ll.DDFA(inst, options)
    analysis.run()

    report = analysis.getReport()
    assert report.accuracy >= 0.99
    assert report.q_yd_error <= 1e-2
    assert analysis.info["point_mass_groups"] == 3
    assert analysis.q_cd.rows == 4
    assert set(report.timings) == set(ll.STAGES)
    assert analysis.getQYD().shape == (3, 5)


def test_oracle_discrete_instance():
    """
    Word-level oracle posteriors on a topic-model instance
    """
    params = ll.ProblemParams(3, 5, m=8, kappa_max=3.0, seed=4)
    inst = ll.make_discrete_instance(params, n_per_domain=20000)
    options = ll.AnalysisOptions(mode="oracle", factorizer="spa", point_mass_epsilon=1e-4)
    report = ll.run_pipeline(inst, "oracle", options)
    assert report.q_yd_error <= 5e-2


def test_learned_separable_domains():
    """
    When the domain determines the class, learned posteriors suffice
    """
    inst = separable_instance()
    options = ll.AnalysisOptions(factorizer="spa")
    analysis = ll.DDFA(inst, options, ll.TrainConfig(max_epochs=30))
    analysis.run()
    assert analysis.getReport().accuracy >= 0.99
    assert analysis.getModel() is not None
    assert analysis.cluster_model.m == 2


def test_naive_mode():
    """
    The naive pipeline predicts with cluster-level posteriors
    """
    inst = setup(0.3, n_per_domain=300)
    options = ll.AnalysisOptions(mode="naive", n_clusters=6)
    analysis = ll.NaiveDDFA(inst, options)
    analysis.run()
    n_fit = inst.dataset.n - inst.dataset.split("test").n
    assert analysis.representation.shape == (inst.dataset.n, 5)
    assert analysis.cluster_model.labels.size == n_fit
    assert 0.0 <= analysis.getReport().accuracy <= 1.0
    assert analysis.getFactorization() is None
    assert analysis.A.shape == (inst.dataset.split("test").n, 3)


def test_naive_representation_ignores_features():
    """
    The naive representation is the same whatever the features are
    """
    inst = setup(0.3, n_per_domain=200)
    data = inst.dataset
    scrambled = ll.DomainDataset(
        -data.features[::-1], data.domains, data.labels, data.splits, r=data.r
    )
    options = ll.AnalysisOptions(mode="naive", n_clusters=6, seed=3)
    a = ll.NaiveDDFA(data, options, k=3)
    a.run()
    b = ll.NaiveDDFA(scrambled, options, k=3)
    b.run()
    assert np.array_equal(a.representation, b.representation)
    assert np.array_equal(a.y_pred, b.y_pred)


def test_hidden_labels():
    """
    Without labels the run predicts but reports no metrics
    """
    inst = setup(n_per_domain=200)
    data = inst.dataset.hidden()
    analysis = ll.DDFA(data, ll.AnalysisOptions(), ll.TrainConfig(max_epochs=10), k=3)
    analysis.run()
    assert analysis.getReport() is None
    d = analysis.to_dict()
    assert d["metrics"] == "no labels"
    assert len(analysis.getPredictions()) == data.split("test").n

    with pytest.raises(ll.InvalidInput):
        ll.DDFA(data)


def test_stage_errors():
    """
    Failures name their stage
    """
    inst = setup(n_per_domain=200)
    with pytest.raises(ll.StageError) as info:
        ll.DDFA(inst.dataset, ll.AnalysisOptions(mode="oracle"), k=3).run()
    assert info.value.stage == "discriminate"
    assert isinstance(info.value.cause, ll.ValidationError)

    options = ll.AnalysisOptions(mode="oracle", discretizer="kmeans", n_clusters=2)
    with pytest.raises(ll.StageError) as info:
        ll.DDFA(inst, options).run()
    assert info.value.stage == "factorize"
    assert isinstance(info.value.cause, ll.InvalidRank)


def test_overcomplete_ablation():
    """
    Fewer clusters than classes run when allowed
    """
    inst = setup(0.3, n_per_domain=200)
    options = ll.AnalysisOptions(
        mode="oracle", discretizer="kmeans", n_clusters=2, allow_overcomplete=True
    )
    report = ll.run_pipeline(inst, "oracle", options)
    assert 0.0 <= report.accuracy <= 1.0


def test_reports_are_reproducible(tmp_path):
    """
    Equal seeds give byte-identical reports
    """
    inst = setup(0.3, n_per_domain=200)
    options = ll.AnalysisOptions(n_clusters=6, seed=3)
    train = ll.TrainConfig(max_epochs=10, seed=3)
    paths = []
    for i in range(2):
        analysis = ll.DDFA(inst, options, train)
        analysis.run()
        path = tmp_path / f"report{i}.json"
        analysis.write_report(path, config={"seed": 3})
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_output_files(tmp_path):
    """
    Report, prediction, factor, assignment and timing files
    """
    inst = setup(n_per_domain=100)
    analysis = ll.DDFA(inst, ll.AnalysisOptions(mode="oracle", factorizer="spa"))
    analysis.run()
    analysis.write_report(tmp_path / "report.json")
    analysis.write_predictions(tmp_path / "predictions.csv")
    analysis.write_factors(tmp_path / "factors.json")
    analysis.write_assignments(tmp_path / "assignments.csv")
    analysis.write_timings(tmp_path / "timings.json")

    report = json.loads((tmp_path / "report.json").read_text())
    assert 0.0 <= report["metrics"]["accuracy"] <= 1.0
    assert report["mode"] == "oracle"
    assert "timings" not in report

    pred = pd.read_csv(tmp_path / "predictions.csv")
    test_rows = np.flatnonzero(inst.dataset.splits == "test")
    assert pred["index"].tolist() == test_rows.tolist()
    assert list(pred.columns[3:]) == ["q0", "q1", "q2"]

    assign = pd.read_csv(tmp_path / "assignments.csv")
    assert len(assign) == inst.dataset.n - test_rows.size

    factors = json.loads((tmp_path / "factors.json").read_text())
    assert np.array(factors["h"]).shape == (3, 5)
    timings = json.loads((tmp_path / "timings.json").read_text())
    assert set(timings["seconds"]) == set(ll.STAGES)


def test_analysis_options():
    """
    Options are validated when set
    """
    options = ll.AnalysisOptions()
    assert options.getDiscretizer() == "kmeans"
    options.setMode("oracle")
    assert options.getDiscretizer() == "point_mass"
    assert ll.AnalysisOptions(mode="oracle", discretizer="kmeans").getDiscretizer() == "kmeans"
    with pytest.raises(ll.ConfigError):
        options.setMode("supervised")
    with pytest.raises(ll.ConfigError) as info:
        ll.AnalysisOptions(clusters=3)
    assert info.value.key == "clusters"


def test_oracle_kmeans():
    """
    k-means on oracle posteriors finds the same groups as point masses
    """
    inst = setup()
    options = ll.AnalysisOptions(
        mode="oracle", discretizer="kmeans", n_clusters=3, factorizer="spa", seed=0
    )
    analysis = ll.DDFA(inst, options)
    analysis.run()
    assert analysis.cluster_model.m == 3
    report = analysis.getReport()
    assert report.accuracy >= 0.99
    assert report.q_yd_error <= 1e-2


def test_print_output(capsys):
    """
    Printed summary of a run
    """
    inst = setup(n_per_domain=100)
    options = ll.AnalysisOptions(mode="oracle", factorizer="spa", print_output=True)
    ll.DDFA(inst, options).run()
    out = capsys.readouterr().out
    assert "Matched accuracy" in out
    assert "Stage: factorize" in out


@pytest.mark.slow
def test_oracle_nmf_recovery():
    """
    Multiplicative-update factorization on oracle posteriors
    """
    inst = setup()
    report = ll.run_pipeline(inst, "oracle", ll.AnalysisOptions(nmf_max_iter=20000))
    assert report.accuracy >= 0.99
    assert report.q_yd_error <= 2e-2


@pytest.mark.slow
def test_learned_overlap_accuracy():
    """
    Learned posteriors on overlapping blocks over five seeds
    """
    accuracies = []
    for seed in range(5):
        inst = setup(0.3, seed=seed, r=6, n_per_domain=2000, m=9)
        options = ll.AnalysisOptions(n_clusters=9, seed=seed)
        report = ll.run_pipeline(inst, "learned", options, ll.TrainConfig(seed=seed))
        accuracies.append(report.accuracy)
    assert np.mean(accuracies) >= 0.90


@pytest.mark.slow
def test_cluster_count_trend():
    """
    Fewer clusters than classes do worst
    """
    grid = {"m": [2, 3, 6, 15], "modes": ["learned"], "seeds": [0, 1, 2]}
    config = ll.RunConfig(
        {
            "problem": {"k": 3, "r": 6, "alpha": 0.5},
            "data": {"overlap_fraction": 0.3, "n_per_domain": 2000},
        }
    )
    rows = ll.sweep(grid, config)
    df = pd.DataFrame([row for row in rows if row["status"] == "ok"])
    means = df.groupby("m")["accuracy"].mean()
    assert means.idxmin() == 2
    assert abs(means[3] - means[6]) <= 0.05


@pytest.mark.slow
def test_naive_below_learned():
    """
    A class-agnostic representation loses to learned posteriors
    """
    naive, learned = [], []
    for seed in range(5):
        inst = setup(0.3, seed=seed, r=6, n_per_domain=2000, m=9)
        options = ll.AnalysisOptions(n_clusters=9, seed=seed)
        train = ll.TrainConfig(seed=seed)
        naive.append(ll.run_pipeline(inst, "naive", options, train).accuracy)
        learned.append(ll.run_pipeline(inst, "learned", options, train).accuracy)
    assert np.mean(learned) - np.mean(naive) >= 0.1
