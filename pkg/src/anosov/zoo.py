"""Representations with known ground truth.

Ping-pong hyperbolic generators for free groups, the regular octagon
side pairings for the genus-2 surface group, and constructions built on
top of them (functorial lifts, random deformations, block-triangular
extensions).
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .linalg import (
    Representation,
    complexify,
    direct_sum,
    dual,
    exterior_power,
    symmetric_power,
    tensor,
)
from .words import FreeGroup, SurfaceGroup

__all__ = [
    "PingPongFailure",
    "PingPongCertificate",
    "rotation",
    "fuchsian_free",
    "surface_octagon",
    "diagonal_rep",
    "trivial_rep",
    "unipotent_rep",
    "rotation_rep",
    "lift",
    "deform",
    "block_triangular",
    "semisimplify",
    "SYM2_BALL_CONJUGATION",
    "ball_action",
    "build",
    "ZOO_NAMES",
]


class PingPongFailure(ValueError):
    """The ping-pong neighbourhoods of the generator axes overlap."""


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class PingPongCertificate:
    """Attracting and repelling directions (angles mod pi on the projective
    line) with the common neighbourhood radius; the neighbourhoods are
    pairwise disjoint."""

    attracting: tuple
    repelling: tuple
    radius: float
    min_separation: float


def _line_gap(x, y):
    d = (x - y) % np.pi
    return min(d, np.pi - d)


def fuchsian_free(rank=2, t=2.0, angles=None):
    """Free group representation into SL(2, R) by hyperbolic ping-pong.

    Generator ``i`` translates by ``2t`` along the geodesic whose
    endpoints sit at boundary angles ``angles[i]`` and ``angles[i] + pi``
    of the unit disc; the default angles are ``i pi / rank``.  Raises
    :class:`PingPongFailure` unless the certificate holds.  The returned
    representation is registered as the anchor of its group model.
    """
    if rank < 1:
        raise ValueError("rank must be >= 1")
    if t <= 0:
        raise ValueError("t must be positive")
    if angles is None:
        angles = [i * np.pi / rank for i in range(rank)]
    angles = [float(a) for a in angles]
    if len(angles) != rank:
        raise ValueError("need one angle per generator")
    cert = ping_pong_certificate(t, angles)
    mats = []
    for th in angles:
        k = rotation(th / 2.0)
        mats.append(k @ np.diag([np.exp(t), np.exp(-t)]) @ k.T)
    model = FreeGroup(rank, anchor=mats)
    rho = Representation(mats, model=model)
    rho.certificate = cert
    return rho


def ping_pong_certificate(t, angles):
    # diag(e^t, e^-t) maps the complement of the eps-neighbourhood of the
    # repelling line into the eps-neighbourhood of the attracting line
    # exactly when tan(eps) = e^-t
    eps = float(np.arctan(np.exp(-t)))
    attr = [(a / 2.0) % np.pi for a in angles]
    rep = [(a / 2.0 + np.pi / 2.0) % np.pi for a in angles]
    pts = attr + rep
    sep = np.pi / 2.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            sep = min(sep, _line_gap(pts[i], pts[j]))
    if len(angles) > 1 and sep <= 2.0 * eps:
        raise PingPongFailure(
            f"neighbourhoods of radius {eps:.4g} overlap (closest directions {sep:.4g} apart)"
        )
    return PingPongCertificate(tuple(attr), tuple(rep), eps, float(sep))


def _k(theta):
    h = theta / 2.0
    return np.array([[np.cos(h), np.sin(h)], [-np.sin(h), np.cos(h)]])


def _octagon_pairing(alpha, beta, r):
    d = np.diag([np.exp(r), np.exp(-r)])
    return _k(beta) @ d @ _k(np.pi) @ _k(-alpha)


def surface_octagon():
    """Genus-2 surface group from the side pairings of the regular
    hyperbolic octagon with interior angles pi/4.

    The product of commutators ``[a, b][c, d]`` is the identity.
    """
    r = float(np.arccosh(1.0 + np.sqrt(2.0)))
    ang = [k * np.pi / 4.0 for k in range(8)]
    gens = [
        _octagon_pairing(ang[2], ang[0], r),
        _octagon_pairing(ang[1], ang[3], r),
        _octagon_pairing(ang[6], ang[4], r),
        _octagon_pairing(ang[5], ang[7], r),
    ]
    model = SurfaceGroup(2, anchor=gens)
    return Representation(gens, model=model)


def diagonal_rep(diagonals, model=None):
    return Representation([np.diag(np.asarray(d, dtype=float)) for d in diagonals], model=model)


def trivial_rep(rank=2, dim=2, model=None):
    return Representation([np.eye(dim) for _ in range(rank)], model=model)


def unipotent_rep(rank=1):
    return Representation([np.array([[1.0, 1.0], [0.0, 1.0]]) for _ in range(rank)])


def rotation_rep(angles):
    return Representation([rotation(a) for a in angles])


_UNARY = {
    "dual": dual,
    "complexify": lambda m: complexify(m, np.zeros_like(m)),
}


def lift(rho, functor, other=None, q=None):
    """Apply a functor generator-wise.

    ``functor`` is one of ``"sym"`` (with ``q``), ``"ext"`` (with ``q``
    as k), ``"dual"``, ``"tensor"`` and ``"sum"`` (with ``other``), or
    ``"complexify"``.  Strings like ``"sym3"`` and ``"ext2"`` also work.
    """
    name = functor
    if name[:3] in ("sym", "ext") and name[3:].isdigit():
        name, q = name[:3], int(name[3:])
    if name == "sym":
        return symmetric_power(rho, int(q))
    if name == "ext":
        return exterior_power(rho, int(q))
    if name in ("tensor", "sum"):
        if other is None:
            raise ValueError(f"{name} needs a second representation")
        return (tensor if name == "tensor" else direct_sum)(rho, other)
    if name in _UNARY:
        if name == "dual":
            return dual(rho)
        return rho.lift(_UNARY[name])
    raise ValueError(f"unknown functor {functor!r}")


def _unimodular(m):
    d = m.shape[0]
    return m / abs(np.linalg.det(m)) ** (1.0 / d)


def deform(rho, eps, seed=0):
    """Multiply each generator by ``expm(eps X)`` with ``X`` random.

    ``X`` is Gaussian, made trace-free and scaled to unit operator norm;
    the draws are deterministic in ``seed``.  The result is rescaled to
    determinant +-1.
    """
    rng = np.random.default_rng(seed)
    d = rho.dim
    out = []
    for m in rho.images:
        x = rng.standard_normal((d, d))
        x -= np.trace(x) / d * np.eye(d)
        x /= np.linalg.norm(x, 2)
        out.append(m @ expm(eps * x) if eps else m.copy())
    if eps == 0:
        return Representation(out, model=rho.model, inverse_images=[np.array(m) for m in rho._neg])
    return Representation([_unimodular(m) for m in out], model=rho.model)


def block_triangular(rho_a, rho_b, seed=0, scale=1.0):
    """Upper block-triangular representation ``[[A, U], [0, B]]``.

    The off-diagonal blocks on the generators are random (Gaussian times
    ``scale``, deterministic in ``seed``); any choice defines a
    representation of a free group.
    """
    if rho_a.rank != rho_b.rank:
        raise ValueError("block_triangular needs representations of equal rank")
    if rho_a.model.kind != "free":
        raise ValueError("random cocycles only define representations of free groups")
    rng = np.random.default_rng(seed)
    p, q = rho_a.dim, rho_b.dim
    out = []
    for a, b in zip(rho_a.images, rho_b.images):
        m = direct_sum(a, b)
        m[:p, p:] = scale * rng.standard_normal((p, q))
        out.append(m)
    rep = Representation(out, model=rho_a.model)
    rep.blocks = (p, q)
    return rep


def semisimplify(rho):
    """Zero the off-diagonal block of a block-triangular representation."""
    blocks = getattr(rho, "blocks", None)
    if blocks is None:
        return rho
    p, _ = blocks
    out = []
    for m in rho.images:
        m = np.array(m)
        m[:p, p:] = 0.0
        out.append(m)
    rep = Representation(out, model=rho.model)
    rep.blocks = blocks
    return rep


# maps the orthonormal sym^2 coordinates to (X1, X2, z) with the invariant
# form z^2 - X1^2 - X2^2; the unit disc |X| < z is then the Klein ball
SYM2_BALL_CONJUGATION = np.array([
    [0.5, 0.0, -0.5],
    [0.0, 1.0 / np.sqrt(2.0), 0.0],
    [0.5, 0.0, 0.5],
])


def ball_action(rho):
    """Projective action of ``sym^2 rho`` on the Klein disc, for 2x2 ``rho``.

    The centre of the disc corresponds to the point fixed by SO(2).
    """
    if rho.dim != 2:
        raise ValueError("ball_action needs a 2-dimensional representation")
    c = SYM2_BALL_CONJUGATION
    return symmetric_power(rho, 2).conjugate(c)


ZOO_NAMES = ("fuchsian-free", "surface-octagon", "diagonal", "trivial", "unipotent", "rotation")


def build(name, rank=2, t=2.0, angles=None, sym=None, ext=None, dual_=False, deform_eps=0.0,
          seed=0, double=False, ball=False):
    """Construct a named zoo representation with optional post-processing."""
    if name == "fuchsian-free":
        rho = fuchsian_free(rank, t, angles)
    elif name == "surface-octagon":
        rho = surface_octagon()
    elif name == "diagonal":
        rho = diagonal_rep([[np.exp(t), np.exp(-t)]] * rank)
    elif name == "trivial":
        rho = trivial_rep(rank)
    elif name == "unipotent":
        rho = unipotent_rep(rank)
    elif name == "rotation":
        rho = rotation_rep(angles if angles is not None else [1.0] * rank)
    else:
        raise ValueError(f"unknown zoo entry {name!r}; choose from {', '.join(ZOO_NAMES)}")
    if sym:
        rho = symmetric_power(rho, sym)
    if ext:
        rho = exterior_power(rho, ext)
    if dual_:
        rho = dual(rho)
    if deform_eps:
        rho = deform(rho, deform_eps, seed)
    if double:
        rho = direct_sum(rho, rho)
    if ball:
        rho = ball_action(rho)
    return rho
