import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from anosov.floyd import (
    FloydFunction,
    FloydGraph,
    OutOfBall,
    floyd_distance,
    floyd_lipschitz_check,
    karlsson_bound,
    ugsp_check,
)
from anosov.words import FreeGroup, parse_word, reduce
from anosov.zoo import trivial_rep

F2 = FreeGroup(2)
EXP2 = FloydFunction.exponential(2.0)


def W(s):
    return parse_word(s)


def tree_distance(f, g, h):
    """Sum of edge lengths along the unique reduced path from g to h."""
    k = 0
    while k < min(len(g), len(h)) and g[k] == h[k]:
        k += 1
    total = 0.0
    for w in (g, h):
        for n in range(k, len(w)):
            total += f(n + 1)
    return total


def test_floyd_function_values():
    assert EXP2(3) == 0.125
    p = FloydFunction.power_law(1.0)
    assert p(0) == 1.0 and p(1) == 1.0 and p(2) == 0.25
    t = FloydFunction.table([1.0, 0.5, 0.25])
    assert t(1) == 0.5 and t(7) == 0.0
    assert str(FloydFunction.parse("exp:2")) == "exp:2"
    assert str(FloydFunction.parse("power:1.5")) == "power:1.5"
    for bad in (lambda: FloydFunction.exponential(1.0), lambda: FloydFunction.power_law(0),
                lambda: FloydFunction.table([1.0, 2.0]), lambda: FloydFunction.parse("cubic:1")):
        with pytest.raises(ValueError):
            bad()


def test_floyd_tails():
    assert EXP2.tail(0) == pytest.approx(2.0)
    assert EXP2.tail(3) == pytest.approx(0.25)
    p = FloydFunction.power_law(1.0)
    assert p.tail(1) == pytest.approx(np.pi ** 2 / 6)
    assert p.tail(0) == pytest.approx(1 + np.pi ** 2 / 6)
    assert p.tail(5) == pytest.approx(sum(k ** -2.0 for k in range(5, 200_000)) + 1 / 199_999.5, rel=1e-10)
    assert FloydFunction.table([1.0, 0.5, 0.25]).tail(1) == 0.75
    assert EXP2.decay_bounds(50) == (True, 0.5)


def test_karlsson_bound_examples():
    assert karlsson_bound(EXP2, 4) == pytest.approx(5.0)
    assert karlsson_bound(EXP2, 5) == pytest.approx(5.0)
    assert karlsson_bound(EXP2, 0) == pytest.approx(20.0)


def test_floyd_distance_examples():
    assert floyd_distance(F2, EXP2, (), W("a"), 3) == 0.5
    assert floyd_distance(F2, EXP2, (), W("ab"), 3) == 0.75
    assert floyd_distance(F2, EXP2, W("a"), W("b"), 3) == 1.0
    with pytest.raises(OutOfBall):
        floyd_distance(F2, EXP2, (), W("abab"), 3)


def test_floyd_matches_tree_paths():
    f = FloydFunction.power_law(0.5)
    G = FloydGraph(F2, f, 5)
    D = G.all_pairs()
    words = G.ball.words
    for i in range(0, len(words), 13):
        for j in range(0, len(words), 7):
            assert D[i, j] == pytest.approx(tree_distance(f, words[i], words[j]), rel=1e-12)


@pytest.mark.parametrize("which", ["free", "surface"])
def test_floyd_matches_scipy(which, octagon):
    model = F2 if which == "free" else octagon.model
    G = FloydGraph(model, EXP2, 4 if which == "free" else 3)
    indptr, indices, weights = G.csr
    n = len(G.ball)
    ref = dijkstra(csr_matrix((weights, indices, indptr), shape=(n, n)), directed=False)
    assert np.allclose(G.all_pairs(), ref, rtol=1e-12, atol=0)


def test_floyd_metric_axioms(octagon):
    for model, R in ((F2, 4), (octagon.model, 2)):
        D = FloydGraph(model, EXP2, R).all_pairs()
        assert np.allclose(D, D.T)
        assert np.all(np.diag(D) == 0)
        off = D[~np.eye(len(D), dtype=bool)]
        assert np.all(off > 0)
        # triangle inequality through every intermediate vertex
        for k in range(0, len(D), max(1, len(D) // 40)):
            assert np.all(D <= D[:, [k]] + D[[k], :] + 1e-12)


def test_floyd_distance_decreases_with_radius(octagon):
    g, h = W("ab"), W("cd")
    vals = [floyd_distance(octagon.model, EXP2, g, h, R) for R in (2, 3, 4)]
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


@settings(max_examples=30)
@given(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=4), st.lists(st.sampled_from([1, -1, 2, -2]), max_size=4))
def test_floyd_bounded_by_karlsson(g, h):
    """The Floyd distance between g and h is at most the Karlsson bound at
    the distance from e to the geodesic between them."""
    g, h = reduce(tuple(g)), reduce(tuple(h))
    G = FloydGraph(F2, EXP2, 4)
    k = 0
    while k < min(len(g), len(h)) and g[k] == h[k]:
        k += 1
    assert G.distance(g, h) <= karlsson_bound(EXP2, k) + 1e-12
    assert G.distance(g, h) == G.distance(h, g)


def test_ugsp_check(fuchsian):
    rep = ugsp_check(fuchsian, FloydFunction.exponential(np.e), 6)
    assert rep.passed
    vals = [c for _, c in rep.table]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert rep.plateau == pytest.approx(vals[-1] - vals[-3])
    bad = ugsp_check(trivial_rep(), FloydFunction.exponential(np.e), 6)
    assert not bad.passed and bad.C == pytest.approx(6.0)
    with pytest.raises(ValueError):
        ugsp_check(fuchsian, EXP2, 1)


def test_lipschitz_check(fuchsian, sym2):
    rep = floyd_lipschitz_check(fuchsian, FloydFunction.exponential(np.e), 4)
    assert 0 < rep.C < np.inf and rep.excluded == ("",)
    assert rep.pairs == 160 * 159
    rep_t = floyd_lipschitz_check(trivial_rep(), EXP2, 3)
    assert len(rep_t.excluded) == 53 and rep_t.C == 0.0
    # threads do not change the result
    a = floyd_lipschitz_check(sym2, EXP2, 4, threads=1)
    b = floyd_lipschitz_check(sym2, EXP2, 4, threads=3)
    assert a == b
