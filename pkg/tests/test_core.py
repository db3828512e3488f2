import numpy as np
import pytest
import pylls as ll


def test_simplex_vec():
    """
    Probability vectors are checked and normalized
    """
    v = ll.SimplexVec([0.25, 0.75])
    assert v.dim == 2
    assert v.argmax() == 1
    assert pytest.approx(np.asarray(v).sum(), abs=1e-15) == 1.0

    # ties go to the lowest index
    assert ll.SimplexVec([0.5, 0.5]).argmax() == 0

    with pytest.raises(ll.InvalidInput):
        ll.SimplexVec([0.5, 0.6])
    with pytest.raises(ll.InvalidInput):
        ll.SimplexVec([-0.1, 1.1])
    assert ll.SimplexVec([1, 3], normalize=True)[1] == 0.75


def test_stochastic_matrix():
    """
    Columns must sum to one, zero rows are allowed
    """
    Q = ll.StochasticMatrix([[0.17, 0.65], [0.83, 0.35]])
    assert Q.shape == (2, 2)
    assert Q.column(1).argmax() == 0

    Z = ll.StochasticMatrix([[1.0, 1.0], [0.0, 0.0]])
    assert Z.rows == 2

    with pytest.raises(ll.InvalidInput):
        ll.StochasticMatrix([[0.5, 0.5], [0.4, 0.5]])
    with pytest.raises(ll.InvalidInput):
        ll.StochasticMatrix([[0.0, 1.0], [0.0, 0.0]], normalize=True)

    P = Q.permute_rows([1, 0])
    assert P[0, 0] == pytest.approx(0.83)


def test_problem_params():
    """
    Problem dimensions are validated
    """
    params = ll.ProblemParams(3, 5)
    assert params.m == 3
    assert params.replace(seed=4).seed == 4
    assert params == ll.ProblemParams(3, 5)

    with pytest.raises(ll.ValidationError):
        ll.ProblemParams(3, 2)
    with pytest.raises(ll.ValidationError):
        ll.ProblemParams(3, 5, m=2)
    with pytest.raises(ll.ValidationError):
        ll.ProblemParams(3, 5, alpha=0.0)
    with pytest.raises(ll.ValidationError):
        ll.ProblemParams(3, 5, kappa_max=0.5)
    with pytest.raises(ll.ValidationError):
        ll.ProblemParams(3, 5, epsilon=1.0)

    assert ll.ProblemParams(3, 5, m=2, allow_small_m=True).m == 2


def test_errors_are_value_errors():
    """
    Validation and numerical errors keep their builtin bases
    """
    assert issubclass(ll.ShapeMismatch, ValueError)
    assert issubclass(ll.RankDeficient, ArithmeticError)
    assert issubclass(ll.StageError, ll.PyllsError)
    e = ll.StageError("factorize", ll.InvalidRank("rank 4"))
    assert e.stage == "factorize"
    assert "InvalidRank" in str(e)


def test_condition_number():
    """
    2-norm condition numbers
    """
    assert pytest.approx(ll.condition_number_2norm(np.eye(3)), abs=1e-12) == 1.0
    assert pytest.approx(ll.condition_number_2norm(np.diag([4.0, 1.0])), abs=1e-12) == 4.0
    A = [[0.17, 0.65], [0.83, 0.35]]
    assert pytest.approx(ll.condition_number_2norm(A), abs=1e-2) == 2.17
    assert ll.condition_number_2norm([[0.5, 0.5], [0.5, 0.5]]) == np.inf

    with pytest.raises(ll.DegenerateInput):
        ll.condition_number_2norm(np.zeros((2, 2)))


def test_pseudo_inverse_solve():
    """
    Least-squares solves recover exact solutions
    """
    x = ll.pseudo_inverse_solve(np.eye(2), [0.3, 0.7])
    assert x == pytest.approx([0.3, 0.7], abs=1e-12)

    A = np.array([[0.2073, 0.7034], [0.7927, 0.2966]])
    for method in ("qr", "cholesky"):
        x = ll.pseudo_inverse_solve(A, A @ [1.0, 0.0], method=method)
        assert x == pytest.approx([1.0, 0.0], abs=1e-10)

    # tall system with b in the column space
    rng = np.random.default_rng(1)
    A = rng.uniform(size=(6, 3))
    x0 = np.array([0.2, 0.3, 0.5])
    assert ll.pseudo_inverse_solve(A, A @ x0) == pytest.approx(x0, abs=1e-10)

    with pytest.raises(ll.RankDeficient):
        ll.pseudo_inverse_solve([[0.5, 0.5], [0.5, 0.5]], [0.5, 0.5])
    with pytest.raises(ll.ShapeMismatch):
        ll.pseudo_inverse_solve(np.eye(2), [1.0, 0.0, 0.0])


def test_column_normalize():
    """
    Column normalization and its scales
    """
    Q, scales = ll.column_normalize([[1, 3], [1, 1]])
    assert Q.data == pytest.approx(np.array([[0.5, 0.75], [0.5, 0.25]]))
    assert scales == pytest.approx([2, 4])
    assert Q.data * scales == pytest.approx(np.array([[1, 3], [1, 1]]))

    S = [[0.2, 0.6], [0.8, 0.4]]
    Q, scales = ll.column_normalize(S)
    assert Q.data == pytest.approx(np.array(S))
    assert scales == pytest.approx([1, 1])

    with pytest.raises(ll.ZeroColumn) as info:
        ll.column_normalize([[0, 1], [0, 1]])
    assert info.value.index == 0


def test_uniform_block():
    """
    Half-open boxes
    """
    a = ll.UniformBlock([0.0], [1.0])
    b = ll.UniformBlock([1.0], [2.0])
    assert not a.intersects(b)
    assert a.intersects(ll.UniformBlock([0.5], [1.5]))
    assert a.contains([[0.0], [0.999], [1.0]]).tolist() == [True, True, False]
    assert a.pdf([[0.5]]) == pytest.approx([1.0])

    rng = np.random.default_rng(0)
    x = ll.UniformBlock([0.0, 2.0], [1.0, 4.0]).sample(100, rng)
    assert x.shape == (100, 2)
    assert np.all((x[:, 1] >= 2.0) & (x[:, 1] < 4.0))

    with pytest.raises(ll.InvalidInput):
        ll.UniformBlock([1.0], [0.0])


def test_mixture_spec_anchor_check():
    """
    An anchor block may not meet a block of another class
    """
    c0 = ll.BlockMixture([ll.UniformBlock([0.0], [1.0])])
    c1 = ll.BlockMixture(
        [ll.UniformBlock([2.0], [3.0], 0.5), ll.UniformBlock([0.5], [1.5], 0.5)]
    )
    with pytest.raises(ll.InvalidInput):
        ll.MixtureSpec([c0, c1], [0, 0])

    c1 = ll.BlockMixture(
        [ll.UniformBlock([2.0], [3.0], 0.5), ll.UniformBlock([4.0], [5.0], 0.5)]
    )
    spec = ll.MixtureSpec([c0, c1], [0, 0], epsilon=0.5)
    assert spec.anchor_class([[0.5], [2.5], [4.5]]).tolist() == [0, 1, -1]
    assert spec.class_densities([[4.5]]) == pytest.approx(np.array([[0.0, 0.5]]))

    with pytest.raises(ll.InvalidInput):
        ll.MixtureSpec([c0, c1], [0, 0], epsilon=0.6)
