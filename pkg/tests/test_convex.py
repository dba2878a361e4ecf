import numpy as np
import pytest
from hypothesis import given, strategies as st

from anosov.convex import (
    BoundaryDegenerate,
    ConvexDomain,
    OrbitEscape,
    control1_check,
    hilbert_displacement,
    hilbert_distance,
    preserves_form,
)
from anosov.words import ball, parse_word
from anosov.zoo import ball_action, diagonal_rep, fuchsian_free, symmetric_power, trivial_rep

DISC = ConvexDomain.ball(2)
TRI = ConvexDomain.simplex(2)

coord = st.floats(-0.95, 0.95, allow_nan=False)


def in_disc(p):
    p = np.asarray(p)
    r = np.linalg.norm(p)
    return p if r < 0.95 else p * 0.9 / r


@pytest.mark.parametrize("r", [0.0, 0.1, 0.5, 0.9, 0.999999])
def test_ball_distance_from_centre(r):
    assert hilbert_distance(DISC, [0, 0], [r, 0]) == pytest.approx(np.arctanh(r), rel=1e-12, abs=1e-300)
    assert hilbert_distance(ConvexDomain.ball(3), [0, 0, 0], [0, 0, -r]) == pytest.approx(np.arctanh(r), abs=1e-12)


def test_ball_distance_along_diameter():
    a, b = 0.3, -0.6
    assert hilbert_distance(DISC, [a, 0], [b, 0]) == pytest.approx(np.arctanh(a) - np.arctanh(b))


def test_simplex_distance_examples():
    assert hilbert_distance(TRI, TRI.center, [0.5, 0.25]) == pytest.approx(0.5 * np.log(2))
    assert hilbert_distance(ConvexDomain.simplex(1), [0.5], [0.8]) == pytest.approx(0.5 * np.log(4))


def test_domain_validation():
    with pytest.raises(BoundaryDegenerate):
        hilbert_distance(DISC, [0, 0], [1.0, 0])
    with pytest.raises(BoundaryDegenerate):
        hilbert_distance(TRI, TRI.center, [0.6, 0.5])
    with pytest.raises(ValueError):
        hilbert_distance(DISC, [0, 0, 0], [0, 0])
    with pytest.raises(ValueError):
        ConvexDomain("cube", 2)
    assert ConvexDomain.parse("simplex:3") == ConvexDomain.simplex(3)
    assert str(DISC) == "ball:2"


@given(coord, coord, coord, coord)
def test_ball_distance_symmetric(x1, x2, y1, y2):
    x, y = in_disc([x1, x2]), in_disc([y1, y2])
    assert hilbert_distance(DISC, x, y) == pytest.approx(hilbert_distance(DISC, y, x), rel=1e-9, abs=1e-12)


@given(st.lists(st.floats(0.02, 1.0), min_size=9, max_size=9))
def test_simplex_triangle_inequality(v):
    pts = []
    for k in range(3):
        w = np.array(v[3 * k: 3 * k + 3])
        pts.append((w / w.sum())[:2])
    x, y, z = pts
    assert hilbert_distance(TRI, x, z) <= hilbert_distance(TRI, x, y) + hilbert_distance(TRI, y, z) + 1e-9


def test_simplex_triangle_inequality_random_triples(rng):
    w = rng.uniform(0.01, 1.0, (1000, 3, 3))
    pts = (w / w.sum(axis=2, keepdims=True))[:, :, :2]
    for x, y, z in pts:
        assert hilbert_distance(TRI, x, z) <= hilbert_distance(TRI, x, y) + hilbert_distance(TRI, y, z) + 1e-10


@given(coord, coord, coord, coord, st.floats(0, 2 * np.pi))
def test_invariance_under_ball_isometries(x1, x2, y1, y2, theta):
    rho = ball_action(fuchsian_free(2, 1.0))
    x, y = in_disc([x1, x2]), in_disc([y1, y2])
    m = rho.images[0]
    gx, gy = DISC.chart(m @ DISC.lift(x)), DISC.chart(m @ DISC.lift(y))
    assert hilbert_distance(DISC, gx, gy) == pytest.approx(hilbert_distance(DISC, x, y), rel=1e-7, abs=1e-9)


def test_invariance_under_positive_diagonal():
    m = np.diag([3.0, 0.5, 1.0])
    for x, y in [([0.2, 0.3], [0.5, 0.1]), ([0.01, 0.01], [0.9, 0.05])]:
        gx, gy = TRI.chart(m @ TRI.lift(x)), TRI.chart(m @ TRI.lift(y))
        assert hilbert_distance(TRI, gx, gy) == pytest.approx(hilbert_distance(TRI, x, y), rel=1e-12)


def test_preserves_form(fuchsian):
    assert preserves_form(ball_action(fuchsian), DISC)
    assert not preserves_form(symmetric_power(fuchsian, 2), DISC)
    assert not preserves_form(ball_action(fuchsian), TRI)


def test_displacement_ball(fuchsian):
    rho = ball_action(fuchsian)
    d = hilbert_displacement(rho, "a", DISC)
    # the Klein model with half log cross ratios has curvature -1
    assert d.per_orbit == pytest.approx(4.0, abs=1e-12)
    assert d.stable == pytest.approx(4.0, abs=1e-12)
    d = hilbert_displacement(rho, "aB", DISC, N=20)
    lam = np.log(np.max(np.abs(np.linalg.eigvals(fuchsian.images[0] @ np.linalg.inv(fuchsian.images[1])))))
    assert d.stable == pytest.approx(2 * lam, rel=1e-9)
    assert d.bracket <= d.per_orbit


def test_displacement_simplex():
    rho = diagonal_rep([[4.0, 1.0, 0.25], [0.5, 2.0, 1.0]])
    d = hilbert_displacement(rho, "a", TRI)
    assert d.per_orbit == pytest.approx(np.log(4.0))
    assert d.stable == pytest.approx(np.log(4.0))
    d = hilbert_displacement(rho, "ab", TRI, N=10)
    assert d.stable == pytest.approx(0.5 * np.log(2.0 / 0.25), rel=1e-12)


def test_displacement_errors(fuchsian):
    with pytest.raises(OrbitEscape):
        hilbert_displacement(symmetric_power(fuchsian, 2), "b", DISC)
    with pytest.raises(ValueError):
        hilbert_displacement(ball_action(fuchsian), "a", DISC, N=7)
    with pytest.raises(ValueError):
        hilbert_displacement(fuchsian, "a", DISC)
    with pytest.raises(BoundaryDegenerate):
        hilbert_displacement(ball_action(fuchsian), "a", DISC, x0=[1.0, 0.0])


def test_control1(fuchsian):
    rep = control1_check(ball_action(fuchsian), DISC, 6)
    assert rep.passed and rep.kappa < 1e-9
    assert abs(rep.min_slack) < 1e-9
    assert len(rep.table) == 7
    t = control1_check(ball_action(fuchsian_free(2, 1.0)), DISC, 4)
    assert t.kappa < 1e-9
    triv = control1_check(trivial_rep(2, 3), DISC, 3)
    assert triv.kappa == 0.0 and triv.passed
    with pytest.raises(ValueError):
        control1_check(ball_action(fuchsian), DISC, -1)


def test_control1_form_and_chord_agree(fuchsian):
    """Distances from the invariant form match the chord formula."""
    rho = ball_action(fuchsian_free(2, 1.3, angles=[0.0, 1.7]))
    for w in ball(rho.model, 3).words[1:]:
        m = np.eye(3)
        for x in w:
            m = m @ rho.image(x)
        p = DISC.chart(m @ DISC.lift(DISC.center))
        d = hilbert_displacement(rho, w, DISC, N=2).per_orbit
        assert d == pytest.approx(hilbert_distance(DISC, p, DISC.center), rel=1e-9)
    assert parse_word("a") == (1,)
