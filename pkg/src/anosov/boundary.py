"""Limit maps at boundary points and Hölder exponents.

The limit point of an eventually periodic ray is approximated by the
Cartan attractor of a long prefix.  Consecutive attractors along the ray
move by at most ``C exp(-gap)`` where ``gap`` is the first singular value
gap of the shorter prefix and ``C = sigma_1(r) sigma_1(r^-1) sqrt(d - 1)``
for the appended letter ``r``; summing these moves bounds the distance
from the current attractor to every later one.
"""

from dataclasses import dataclass
from math import gcd

import numpy as np

from .evaluate import evaluate_ball, prefix_evaluation
from .linalg import (
    GAP_TOL,
    DegenerateGap,
    Hyperplane,
    LinearFunctional,
    ProjectivePoint,
    gromov_product_phi,
    point_hyperplane_distance,
)
from .words import BoundaryRay, ball, cyclic_classes, format_word, ray_prefix

__all__ = [
    "NonDivergent",
    "LimitSample",
    "limit_point",
    "transversality",
    "Transversality",
    "holder_exponent_singular",
    "holder_exponent_eigen",
    "HolderTable",
    "limit_span_rank",
    "limits_table",
    "letter_constant",
]

STAGNANT_DEPTHS = 5
TAIL_DEPTH = 64
# attractors of long products are only resolved to about this accuracy
NUMERIC_FLOOR = 1e-13


class NonDivergent(ArithmeticError):
    """The singular value gap stops growing along the ray."""


@dataclass(frozen=True)
class LimitSample:
    ray: BoundaryRay
    depth: int
    point: ProjectivePoint
    hyperplane: Hyperplane
    err_bound: float
    hyperplane_err_bound: float
    tail: float
    gap: float


def letter_constant(rho):
    """``max_r sigma_1(rho(r)) sigma_1(rho(r)^-1) sqrt(d - 1)`` over letters."""
    c = 0.0
    for i in range(1, rho.rank + 1):
        a, b = rho.image(i), rho.image(-i)
        c = max(c, np.linalg.norm(a, 2) * np.linalg.norm(b, 2))
    return c * np.sqrt(max(rho.dim - 1, 1))


def _tail_sum(gaps, n, period, C):
    """``sum_{m >= n} C exp(-gaps[m])`` with the terms past the table
    extrapolated from the growth over the last full period."""
    head = float(np.sum(C * np.exp(-gaps[n:])))
    M = len(gaps) - 1
    growth = gaps[M] - gaps[M - period]
    last_cycle = float(np.sum(C * np.exp(-gaps[M - period + 1:M + 1])))
    if growth <= 0:
        return head, np.inf
    r = np.exp(-growth)
    return head, last_cycle * r / (1.0 - r)


def _stagnant(gaps, n):
    m = max(n, STAGNANT_DEPTHS)
    return m < len(gaps) and gaps[m] <= gaps[m - STAGNANT_DEPTHS] + 1e-12


def limit_point(rho, x, depth, gap_tol=GAP_TOL):
    """Approximate the limit point and limit hyperplane at ``x``.

    Raises :class:`NonDivergent` when the gap has not grown over the last
    five depths, and :class:`DegenerateGap` when the attractor at
    ``depth`` is not defined.
    """
    if isinstance(x, str):
        x = BoundaryRay.parse(x)
    n = int(depth)
    if n < 0:
        raise ValueError("depth must be >= 0")
    period = len(x.cycle)
    M = max(n, STAGNANT_DEPTHS) + TAIL_DEPTH + period
    w = ray_prefix(x, M)
    pe = prefix_evaluation(rho, w, keep=(n,))
    gaps = pe.mu[:, 0] - pe.mu[:, 1]
    dual_gaps = pe.mu[:, -2] - pe.mu[:, -1]
    if _stagnant(gaps, n):
        raise NonDivergent(
            f"gap along {x} stays at {gaps[max(n, STAGNANT_DEPTHS)]:.3g} over {STAGNANT_DEPTHS} depths"
        )
    lg = np.log(gap_tol)
    if gaps[n] < lg or dual_gaps[n] < lg:
        raise DegenerateGap(f"prefix {format_word(w[:n])!r} of {x} has no singular value gap")
    C = letter_constant(rho)
    head, tail = _tail_sum(gaps, n, period, C)
    dhead, dtail = _tail_sum(dual_gaps, n, period, C)
    plus, minus = pe.attractor_vectors(n)
    return LimitSample(
        ray=x,
        depth=n,
        point=ProjectivePoint(plus),
        hyperplane=Hyperplane(minus),
        err_bound=min(1.0, head + tail + NUMERIC_FLOOR),
        hyperplane_err_bound=min(1.0, dhead + dtail + NUMERIC_FLOOR),
        tail=tail,
        gap=float(gaps[n]),
    )


def _same_ray(x, y):
    L = max(len(x.head), len(y.head)) + len(x.cycle) * len(y.cycle) // gcd(len(x.cycle), len(y.cycle))
    return ray_prefix(x, L) == ray_prefix(y, L)


@dataclass(frozen=True)
class Transversality:
    """Two estimates of ``dist(xi(x), xi^-(y)) * dist(xi(y), xi^-(x))``."""

    value: float
    gromov_estimate: float
    discrepancy: float
    err_bound: float
    depth: int
    witnesses: tuple


def transversality(rho, x, y, depth, gap_tol=GAP_TOL):
    if isinstance(x, str):
        x = BoundaryRay.parse(x)
    if isinstance(y, str):
        y = BoundaryRay.parse(y)
    if _same_ray(x, y):
        raise ValueError("transversality needs two distinct boundary points")
    sx = limit_point(rho, x, depth, gap_tol)
    sy = limit_point(rho, y, depth, gap_tol)
    d1 = point_hyperplane_distance(sx.point, sy.hyperplane)
    d2 = point_hyperplane_distance(sy.point, sx.hyperplane)
    g, h = ray_prefix(x, depth), ray_prefix(y, depth)
    gp = gromov_product_phi(rho, g, h, LinearFunctional.epsilon(1))
    est = float(np.exp(-4.0 * gp))
    err = sx.err_bound + sy.hyperplane_err_bound + sy.err_bound + sx.hyperplane_err_bound
    return Transversality(
        value=d1 * d2,
        gromov_estimate=est,
        discrepancy=abs(d1 * d2 - est),
        err_bound=min(1.0, err),
        depth=int(depth),
        witnesses=(format_word(g), format_word(h)),
    )


# ---------------------------------------------------------------- Hölder exponents

def _displacement(model, ev):
    """Anchor displacement for every ball element, or word length."""
    if model.has_anchor:
        from .linalg import Representation

        anchor = Representation(list(model.anchor), model=model)
        aev = evaluate_ball(anchor, ev.ball)
        return np.maximum(aev.mu[:, 0] - aev.mu[:, 1], 0.0), "anchor"
    return ev.ball.lengths.astype(float), "word"


@dataclass(frozen=True)
class HolderTable:
    estimate: float
    table: tuple
    metric: str
    witness: str
    radius: int


def holder_exponent_singular(rho, radius, model=None, ev=None):
    """``max_n min { gap(rho(g)) / |g|_X : g in ball, |g|_X >= n }``.

    ``|g|_X`` is the displacement in the hyperbolic plane through the
    model's anchor when there is one, else word length; the visual
    parameter is ``e``.  ``table`` lists ``(n, a_n)``; it is
    nondecreasing in ``n`` since the sets shrink.
    """
    if radius < 2:
        raise ValueError("radius must be >= 2")
    model = rho.model if model is None else model
    if ev is None:
        ev = evaluate_ball(rho, ball(model, radius))
    disp, metric = _displacement(model, ev)
    gap = ev.gap(1)
    table = []
    best, witness = -np.inf, ""
    for n in range(1, radius + 1):
        sel = np.flatnonzero(disp >= n)
        if sel.size == 0:
            break
        ratios = gap[sel] / disp[sel]
        k = int(np.argmin(ratios))
        a_n = float(ratios[k])
        table.append((n, a_n))
        if a_n > best:
            best, witness = a_n, format_word(ev.ball[sel[k]])
    if not table:
        raise ValueError("no element reaches displacement 1 inside the ball")
    return HolderTable(float(best), tuple(table), metric, witness, int(radius))


def _lam_gap(lam):
    return max(0.0, float(lam[0] - lam[1]))


def _translation_lengths(model, words):
    from .words import stable_length

    if model.has_anchor:
        from .linalg import Representation, lyapunov_word

        anchor = Representation(list(model.anchor), model=model)
        # for a 2x2 unimodular matrix the stable displacement is the
        # difference of log eigenvalue moduli
        return np.array([_lam_gap(lyapunov_word(anchor, w)) for w in words])
    return np.array([stable_length(model, w) for w in words], dtype=float)


def holder_exponent_eigen(rho, max_length, model=None):
    """``min gap(lambda(rho(g))) / |g|_X,inf`` over conjugacy classes.

    Free groups: one cyclically reduced representative per rotation
    class up to ``max_length``.  Surface groups: every element of the
    ball of that radius.
    """
    from .linalg import lyapunov_word

    if max_length < 1:
        raise ValueError("max_length must be >= 1")
    model = rho.model if model is None else model
    if model.kind == "free":
        words = cyclic_classes(model, max_length)
    else:
        words = list(ball(model, max_length).words[1:])
    tl = _translation_lengths(model, words)
    best, witness = np.inf, ""
    for w, L in zip(words, tl):
        if L <= 1e-12:
            continue
        lam = lyapunov_word(rho, w)
        r = float(lam[0] - lam[1]) / L
        if r < best:
            best, witness = r, format_word(w)
    return float(best), witness


# ---------------------------------------------------------------- sampling

def limit_span_rank(rho, rays, depth, tol=1e-8):
    """Numerical rank of sampled limit points (relative threshold ``tol``)."""
    pts = []
    for x in rays:
        try:
            pts.append(limit_point(rho, x, depth).point.dir)
        except (DegenerateGap, NonDivergent):
            continue
    if not pts:
        return 0
    s = np.linalg.svd(np.array(pts), compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def sample_rays(model, count):
    """Deterministic rays: cycles taken from short cyclic classes."""
    if model.kind != "free":
        raise NotImplementedError("boundary rays are implemented for free groups")
    out, L = [], 1
    while len(out) < count and L <= 8:
        out = [BoundaryRay((), c) for c in cyclic_classes(model, L)]
        L += 1
    return out[:count]


def limits_table(rho, rays, depths):
    """Rows ``(ray, depth, point..., hyperplane..., err_bound)``."""
    rows = []
    for x in rays:
        for n in depths:
            s = limit_point(rho, x, n)
            rows.append((str(x), n, *s.point.dir.tolist(), *s.hyperplane.normal.tolist(), s.err_bound))
    return rows
