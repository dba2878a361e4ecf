import numpy as np
import pytest

from anosov.evaluate import evaluate_ball
from anosov.linalg import Representation, cartan, cartan_word, lyapunov_word, rep_apply, symmetric_power
from anosov.words import anchor_displacement, ball, inverse, parse_word, reduce
from anosov.zoo import (
    PingPongFailure,
    ZOO_NAMES,
    ball_action,
    block_triangular,
    build,
    deform,
    diagonal_rep,
    fuchsian_free,
    lift,
    ping_pong_certificate,
    rotation,
    semisimplify,
    surface_octagon,
    trivial_rep,
)


def product(rho, w):
    m = np.eye(rho.dim)
    for x in w:
        m = m @ rho.image(x)
    return m


def test_fuchsian_generators():
    rho = fuchsian_free(2, 2.0)
    for m in rho.images:
        assert np.linalg.det(m) == pytest.approx(1.0)
        assert np.trace(m) == pytest.approx(2 * np.cosh(2.0))
        assert np.allclose(m, m.T)
    assert np.allclose(rho.images[0], np.diag([np.exp(2), np.exp(-2)]))


def test_ping_pong_certificate():
    cert = fuchsian_free(2, 2.0).certificate
    assert cert.radius == pytest.approx(np.arctan(np.exp(-2.0)))
    assert cert.min_separation > 2 * cert.radius
    with pytest.raises(PingPongFailure):
        fuchsian_free(2, 0.01)
    with pytest.raises(PingPongFailure):
        fuchsian_free(2, 2.0, angles=[0.0, 0.01])
    with pytest.raises(ValueError):
        fuchsian_free(2, -1.0)
    ping_pong_certificate(3.0, [0.0, 1.0, 2.0])


def test_fuchsian_is_free_on_a_ball():
    """Distinct reduced words give distinct matrices."""
    rho = fuchsian_free(2, 1.0)
    B = ball(rho.model, 5)
    keys = {tuple(np.round(product(rho, w), 6).ravel()) for w in B.words}
    assert len(keys) == len(B)


def test_fuchsian_gap_is_anchor_displacement(fuchsian):
    B = ball(fuchsian.model, 6)
    ev = evaluate_ball(fuchsian, B)
    for i, w in enumerate(B.words):
        assert ev.gap(1)[i] == pytest.approx(anchor_displacement(fuchsian.model, w), abs=1e-9)


def test_octagon_relator_and_traces(octagon):
    rel = octagon.model.relator
    assert np.allclose(product(octagon, rel), np.eye(2), atol=1e-10)
    for m in octagon.images:
        assert np.linalg.det(m) == pytest.approx(1.0)
        assert abs(np.trace(m)) > 2
    # all side pairings are conjugate in PSL(2, R)
    tr = {round(abs(np.trace(m)), 9) for m in octagon.images}
    assert len(tr) == 1
    # an element with nonzero word length is not the identity
    assert not np.allclose(product(octagon, parse_word("ab")), np.eye(2))


def test_sym_power_identity_over_ball(fuchsian):
    """The Cartan vector of sym^q is determined by the 2x2 one."""
    for q in (2, 3, 4):
        rho = symmetric_power(fuchsian, q)
        for w in ball(fuchsian.model, 5).words[::5]:
            m1 = cartan_word(fuchsian, w)[0]
            expected = np.array([(q - 2 * j) * m1 for j in range(q + 1)])
            assert np.allclose(cartan_word(rho, w), expected, atol=1e-9)


def test_dual_of_dual(sym2):
    dd = lift(lift(sym2, "dual"), "dual")
    for a, b in zip(dd.images, sym2.images):
        assert np.allclose(a, b)
    d = lift(sym2, "dual")
    for w in ball(sym2.model, 3).words:
        assert np.allclose(cartan_word(d, w), -cartan_word(sym2, w)[::-1], atol=1e-9)


def test_lift_names(fuchsian):
    assert lift(fuchsian, "sym3").dim == 4
    assert lift(fuchsian, "ext", q=2).dim == 1
    assert lift(fuchsian, "tensor", other=fuchsian).dim == 4
    assert lift(fuchsian, "complexify").dim == 4
    with pytest.raises(ValueError):
        lift(fuchsian, "sum")
    with pytest.raises(ValueError):
        lift(fuchsian, "cube")


def test_deform():
    rho = fuchsian_free(2, 2.0)
    assert all(np.array_equal(a, b) for a, b in zip(deform(rho, 0.0).images, rho.images))
    a, b = deform(rho, 1e-3, seed=4), deform(rho, 1e-3, seed=4)
    for x, y, z in zip(a.images, b.images, rho.images):
        assert np.array_equal(x, y)
        assert abs(abs(np.linalg.det(x)) - 1) < 1e-12
        assert 0 < np.linalg.norm(x - z, 2) < 2e-3 * np.linalg.norm(z, 2)
    c = deform(rho, 1e-3, seed=5)
    assert not np.array_equal(a.images[0], c.images[0])


def test_block_triangular_and_semisimplify(rng):
    a, b = fuchsian_free(2, 1.0), trivial_rep(2, 1)
    bt = block_triangular(a, b, seed=3)
    assert bt.dim == 3 and bt.blocks == (2, 1)
    for m in bt.images:
        assert np.allclose(m[2, :2], 0) and np.any(m[:2, 2] != 0)
    ss = semisimplify(bt)
    for m, x in zip(ss.images, a.images):
        assert np.allclose(m[:2, :2], x) and np.allclose(m[:2, 2], 0)
    assert semisimplify(a) is a
    # eigenvalues only see the diagonal blocks
    for w in ball(a.model, 4).words[1:]:
        assert np.allclose(lyapunov_word(bt, w), lyapunov_word(ss, w), atol=1e-8)
    with pytest.raises(ValueError):
        block_triangular(a, trivial_rep(3, 1))


def test_ball_action_preserves_form(fuchsian):
    rho = ball_action(fuchsian)
    J = np.diag([-1.0, -1.0, 1.0])
    for m in rho.images:
        assert np.allclose(m.T @ J @ m, J, atol=1e-9)
    with pytest.raises(ValueError):
        ball_action(symmetric_power(fuchsian, 2))


def test_build_names():
    for name in ZOO_NAMES:
        rho = build(name)
        assert rho.rank >= 1
    assert build("fuchsian-free", sym=3).dim == 4
    assert build("fuchsian-free", double=True).summands is not None
    assert build("diagonal", t=1.0).images[0][0, 0] == pytest.approx(np.e)
    assert build("fuchsian-free", ball=True).dim == 3
    with pytest.raises(ValueError):
        build("nonsense")


def test_diagonal_and_rotation_reps():
    rho = diagonal_rep([[2.0, 0.5]])
    assert np.allclose(cartan_word(rho, parse_word("aaa")), [3 * np.log(2), -3 * np.log(2)])
    r = build("rotation", angles=[0.4, 1.1])
    w = parse_word("abAb")
    assert np.allclose(product(r, w), rotation(0.4 + 1.1 - 0.4 + 1.1))
    assert np.allclose(cartan(rep_apply(r, reduce(w + inverse(w))).dense()), 0, atol=1e-12)


def test_representation_validation_for_surface(octagon):
    with pytest.raises(ValueError):
        Representation(octagon.images[:2], model=octagon.model)
    assert surface_octagon().model.same_group(octagon.model)
