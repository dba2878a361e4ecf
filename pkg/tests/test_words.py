import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from anosov.words import (
    BoundaryRay,
    FreeGroup,
    SurfaceRadiusExceeded,
    anchor_displacement,
    anchor_stable_length,
    ball,
    conjugation_depth,
    cyclic_classes,
    cyclic_reduce,
    format_word,
    gromov_product_group,
    inverse,
    is_reduced,
    model_from_json,
    parse_word,
    ray_prefix,
    reduce,
    stable_length,
    word_length,
)

F2 = FreeGroup(2)
letters2 = st.sampled_from([1, -1, 2, -2])
raw_words = st.lists(letters2, max_size=14).map(tuple)


def W(s):
    return parse_word(s)


# ---------------------------------------------------------------- parsing and reduction

def test_parse_format_roundtrip():
    assert parse_word("abAB") == (1, 2, -1, -2)
    assert format_word((1, 2, -1, -2)) == "abAB"
    assert parse_word("") == () and parse_word("1") == ()
    assert parse_word("e") == (5,)
    with pytest.raises(ValueError):
        parse_word("a?b")


@pytest.mark.parametrize("raw, expected", [("aAb", "b"), ("", ""), ("abBa", "aa")])
def test_reduce_examples(raw, expected):
    assert reduce(W(raw)) == W(expected)


def test_reduce_rejects_zero():
    with pytest.raises(ValueError):
        reduce((1, 0))


@given(raw_words)
def test_reduce_idempotent_and_shortening(w):
    r = reduce(w)
    assert reduce(r) == r
    assert len(r) <= len(w)
    assert is_reduced(r)


@given(raw_words, raw_words)
def test_reduce_is_a_homomorphism(u, v):
    assert reduce(u + v) == reduce(reduce(u) + reduce(v))
    assert reduce(u + inverse(u)) == ()


@pytest.mark.parametrize("w, expected", [("abA", "b"), ("ab", "ab"), ("abbA", "bb")])
def test_cyclic_reduce_examples(w, expected):
    assert cyclic_reduce(W(w)) == W(expected)


@given(raw_words)
def test_cyclic_reduce_is_conjugate(w):
    w = reduce(w)
    c = cyclic_reduce(w)
    k = conjugation_depth(w)
    assert reduce(w[:k] + c + inverse(w[:k])) == w
    assert not c or len(c) == 1 or c[0] != -c[-1]


# ---------------------------------------------------------------- metrics

def test_word_length_examples(octagon):
    assert word_length(F2, W("abab")) == 4
    assert word_length(F2, ()) == 0
    assert word_length(octagon.model, octagon.model.relator) == 0


def test_surface_relator_conjugates_are_trivial(octagon):
    model = octagon.model
    rel = model.relator
    for k in range(1, len(rel)):
        rot = rel[k:] + rel[:k]
        assert word_length(model, rot) == 0
    assert word_length(model, W("ab")) == 2


def test_surface_radius_exceeded(octagon):
    with pytest.raises(SurfaceRadiusExceeded):
        word_length(octagon.model, W("a" * 8))


def test_stable_length_examples():
    assert stable_length(F2, W("abA")) == 1
    assert stable_length(F2, ()) == 0
    assert stable_length(F2, W("aabab")) == 5


def test_stable_length_concatenation_oracle():
    g = W("aabab")
    for n in range(1, 6):
        assert word_length(F2, reduce(g * n)) == 5 * n


def test_anchor_displacement_examples():
    m = FreeGroup(1, anchor=[np.diag([2.0, 0.5])])
    # d(i, 4i) in the upper half plane is log 4
    assert anchor_displacement(m, W("a")) == pytest.approx(2 * np.log(2), abs=1e-14)
    assert anchor_displacement(m, ()) == 0.0
    c, s = np.cos(0.7), np.sin(0.7)
    rot = FreeGroup(1, anchor=[np.array([[c, -s], [s, c]])])
    assert anchor_displacement(rot, W("aaa")) == pytest.approx(0.0, abs=1e-12)


def test_anchor_stable_length_hyperbolic(fuchsian):
    # the stable displacement of a hyperbolic 2x2 matrix is twice its log spectral radius
    for w in ("a", "ab", "aBBa", "abAB"):
        g = W(w)
        mat = np.eye(2)
        for x in g:
            mat = mat @ fuchsian.image(x)
        expected = 2 * np.log(np.max(np.abs(np.linalg.eigvals(mat))))
        value, bracket = anchor_stable_length(fuchsian.model, g)
        assert value == pytest.approx(expected, abs=1e-9)
        assert bracket >= 0


def test_ball_sizes():
    assert [len(ball(F2, r)) for r in range(3)] == [1, 5, 17]
    for k in (1, 2, 3):
        Fk = FreeGroup(k)
        for r in range(7 if k < 3 else 5):
            expected = 1 + sum(2 * k * (2 * k - 1) ** (j - 1) for j in range(1, r + 1))
            assert len(ball(Fk, r)) == expected


def test_ball_is_shortlex_and_unique():
    B = ball(F2, 4)
    keys = [(len(w), [2 * (abs(x) - 1) + (x < 0) for x in w]) for w in B.words]
    assert keys == sorted(keys)
    assert len(set(B.words)) == len(B)
    assert all(is_reduced(w) for w in B.words)


def test_surface_ball_sizes(octagon):
    sizes = [len(ball(octagon.model, r)) for r in range(4)]
    assert sizes == [1, 9, 65, 457]


def test_ball_tables():
    B = ball(F2, 4)
    for i in range(len(B)):
        w = B[i]
        assert B[B.inverse[i]] == inverse(w)
        for m in range(len(w) + 1):
            assert B[B.prefix_table[i, m]] == w[:m]
            assert B[B.suffix_table[i, m]] == w[m:]


def test_word_length_subadditive_exhaustive():
    B = ball(F2, 6)
    words = B.words[:: max(1, len(B) // 300)]
    for g, h in itertools.product(words, repeat=2):
        assert word_length(F2, reduce(g + h)) <= len(g) + len(h)


@pytest.mark.parametrize("g, h, expected", [("ab", "a", 1), ("", "", 0), ("a", "A", 0)])
def test_gromov_product_examples(g, h, expected):
    assert gromov_product_group(F2, W(g), W(h)) == expected


def test_gromov_product_formula_and_tree_inequality():
    B = ball(F2, 3)
    words = list(B.words)
    for g, h in itertools.product(words, repeat=2):
        gp = gromov_product_group(F2, g, h)
        assert gp >= 0
        assert gp == 0.5 * (len(g) + len(h) - len(reduce(inverse(g) + h)))
    sample = words[::3]
    for x, y, z in itertools.product(sample, repeat=3):
        xy = gromov_product_group(F2, x, y)
        assert xy >= min(gromov_product_group(F2, x, z), gromov_product_group(F2, z, y))


def test_gromov_product_surface(octagon):
    m = octagon.model
    assert gromov_product_group(m, W("ab"), W("a")) == 1
    assert gromov_product_group(m, (), ()) == 0


def test_stable_gromov_product_bound():
    """Gromov product of g^+ and g^-1 against half the length defect."""
    for g in ball(F2, 8).words[1:]:
        gn = reduce(g * 8)
        lhs = gromov_product_group(F2, gn, inverse(g))
        rhs = 0.5 * (len(g) - len(cyclic_reduce(g)))
        assert abs(lhs - rhs) <= 1


# ---------------------------------------------------------------- boundary rays and classes

@pytest.mark.parametrize("head, cycle, n, expected", [("", "ab", 3, "aba"), ("", "ab", 0, ""),
                                                      ("b", "a", 4, "baaa")])
def test_ray_prefix_examples(head, cycle, n, expected):
    assert ray_prefix(BoundaryRay(W(head), W(cycle)), n) == W(expected)


def test_ray_validation_and_parse():
    with pytest.raises(ValueError):
        BoundaryRay((), ())
    with pytest.raises(ValueError):
        BoundaryRay(W("A"), W("a"))
    with pytest.raises(ValueError):
        BoundaryRay((), W("abA"))
    x = BoundaryRay.parse("b:aB")
    assert str(x) == "b:aB"
    assert BoundaryRay.parse("ab") == BoundaryRay((), W("ab"))


@given(st.integers(0, 30), st.integers(0, 30))
def test_ray_prefixes_nested(n, m):
    x = BoundaryRay(W("bA"), W("AAb"))
    a, b = sorted((n, m))
    assert ray_prefix(x, b)[:a] == ray_prefix(x, a)
    assert is_reduced(ray_prefix(x, b))


def test_cyclic_classes():
    cls = cyclic_classes(F2, 2)
    assert [format_word(w) for w in cls] == ["a", "A", "b", "B", "aa", "ab", "aB", "AA", "Ab", "AB", "bb", "BB"]
    cls4 = cyclic_classes(F2, 4)
    seen = set()
    for w in cls4:
        rots = {w[k:] + w[:k] for k in range(len(w))}
        assert not (rots & seen)
        seen |= rots


def test_model_json_roundtrip(octagon, fuchsian):
    for model in (F2, fuchsian.model, octagon.model):
        back = model_from_json(json.loads(json.dumps(model.to_json())))
        assert back.kind == model.kind and back.rank == model.rank
        assert back.same_group(model)
