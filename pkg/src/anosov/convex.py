"""Hilbert geometry of the Klein ball and the open simplex.

Points live in an affine chart of projective space.  For the ball the
chart is ``[x : 1]`` with ``|x| < 1``; for the simplex it is
``[x_1 : ... : x_n : 1 - sum(x)]`` with all coordinates positive.
Projective transformations act on homogeneous coordinates.
"""

from dataclasses import dataclass

import numpy as np

from .evaluate import evaluate_ball
from ._product import scaled_power
from .words import _as_word, ball, format_word

__all__ = [
    "BoundaryDegenerate",
    "OrbitEscape",
    "ConvexDomain",
    "hilbert_distance",
    "hilbert_displacement",
    "Displacement",
    "control1_check",
    "Control1Report",
    "preserves_form",
]

MARGIN = 1e-12
PLATEAU_TOL = 0.5


class BoundaryDegenerate(ValueError):
    """A point is on or outside the boundary, or a chord is degenerate."""


class OrbitEscape(ValueError):
    """An orbit point left the domain, so the action does not preserve it."""


@dataclass(frozen=True)
class ConvexDomain:
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in ("ball", "simplex"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("domain dimension must be >= 1")

    @classmethod
    def ball(cls, dim):
        return cls("ball", dim)

    @classmethod
    def simplex(cls, dim):
        return cls("simplex", dim)

    @classmethod
    def parse(cls, s):
        """``"ball:2"`` or ``"simplex:3"``."""
        kind, _, d = s.partition(":")
        return cls(kind, int(d))

    def __str__(self):
        return f"{self.kind}:{self.dim}"

    @property
    def center(self):
        if self.kind == "ball":
            return np.zeros(self.dim)
        return np.full(self.dim, 1.0 / (self.dim + 1))

    # homogeneous coordinates <-> chart
    def lift(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "ball":
            return np.append(x, 1.0)
        return np.append(x, 1.0 - np.sum(x))

    def chart(self, y):
        y = np.asarray(y, dtype=float)
        den = y[-1] if self.kind == "ball" else np.sum(y)
        if den == 0 or not np.isfinite(den):
            raise OrbitEscape("point at infinity in the affine chart")
        return y[:-1] / den

    def contains(self, x, margin=MARGIN):
        x = np.asarray(x, dtype=float)
        if self.kind == "ball":
            r = np.linalg.norm(x)
            return bool(r < 1.0 - margin)
        return bool(np.all(x > margin) and 1.0 - np.sum(x) > margin)

    def exit_times(self, p, v):
        """``(t_minus < 0 < t_plus)`` with ``p + t v`` on the boundary."""
        if self.kind == "ball":
            # solve along a unit direction so that tiny chords do not underflow
            s = float(np.max(np.abs(v)))
            n = s * float(np.linalg.norm(v / s))
            u = (v / s) / (n / s)
            b = float(p @ u)
            r = np.linalg.norm(p)
            c = -(1.0 - r) * (1.0 + r)
            disc = np.sqrt(b * b - c)
            q = -(b + np.copysign(disc, b))
            if q == 0.0:
                raise BoundaryDegenerate("degenerate chord")
            r1, r2 = q, c / q
            return min(r1, r2) / n, max(r1, r2) / n
        y = self.lift(p)
        dy = np.append(v, -np.sum(v))
        neg, pos = dy < 0, dy > 0
        if not neg.any() or not pos.any():
            raise BoundaryDegenerate("chord does not meet the boundary twice")
        t_plus = float(np.min(y[neg] / -dy[neg]))
        t_minus = float(np.max(-y[pos] / dy[pos]))
        return t_minus, t_plus


def hilbert_distance(domain, x, y):
    """Half the log cross-ratio of ``x, y`` and the two chord endpoints."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    for p in (x, y):
        if p.shape != (domain.dim,):
            raise ValueError(f"points must have {domain.dim} coordinates")
        if not domain.contains(p):
            raise BoundaryDegenerate(f"point {p} is not inside {domain}")
    v = y - x
    if not np.any(v):
        return 0.0
    # work along a unit direction so that subnormal separations stay finite
    s = float(np.max(np.abs(v)))
    n = s * float(np.linalg.norm(v / s))
    u = (v / s) / (n / s)
    # exit distances measured from each endpoint avoid subtracting nearby numbers
    t_minus, _ = domain.exit_times(x, u)
    _, u_plus = domain.exit_times(y, u)
    a, b = -t_minus, u_plus
    if not (a > 0 and b > 0 and np.isfinite(a) and np.isfinite(b)):
        raise BoundaryDegenerate("chord endpoints could not be resolved")
    return 0.5 * float(np.log1p(n / a) + np.log1p(n / b))


# ---------------------------------------------------------------- actions

def _form(dim):
    return np.diag(np.append(-np.ones(dim), 1.0))


def preserves_form(rho, domain, tol=1e-9):
    """Whether every generator satisfies ``g^T J g = c J`` for the ball's form ``J``."""
    if domain.kind != "ball" or rho.dim != domain.dim + 1:
        return False
    J = _form(domain.dim)
    for m in rho.images:
        lhs = m.T @ J @ m
        c = lhs[-1, -1]
        if not np.allclose(lhs, c * J, rtol=0, atol=tol * max(1.0, abs(c), np.abs(lhs).max())):
            return False
    return True


def _form_distances(J, X0, mats, log_scales, logdets):
    """Hyperbolic distances ``d(g X0, X0)`` from the invariant quadratic form.

    ``Q(g X) = |det g|^(2/n) Q(X)``, so only the cross term needs the
    product, and it carries no cancellation for the centre.
    """
    n = X0.size
    q0 = float(X0 @ J @ X0)
    cross = np.abs(np.einsum("...i,i->...", mats @ X0, J @ X0))
    with np.errstate(divide="ignore"):
        log_y = np.log(cross) + log_scales - logdets / n - np.log(q0)
    y = np.exp(np.minimum(log_y, 700.0))
    small = np.arccosh(np.maximum(y, 1.0))
    # arccosh(y) = log y + log(1 + sqrt(1 - y^-2)) for large y
    big = log_y + np.log1p(np.sqrt(np.maximum(0.0, 1.0 - np.exp(-2.0 * np.maximum(log_y, 0.0)))))
    return np.where(log_y > 20.0, big, small)


# below this distance arccosh loses digits; the chord formula is used instead
NEAR = 1.0


def _near_fix(domain, x0, mats, dist):
    for i in np.flatnonzero(dist < NEAR):
        p = domain.chart(mats[i] @ domain.lift(x0))
        dist[i] = hilbert_distance(domain, p, x0) if np.any(p != x0) else 0.0
    return dist


def _orbit_distance(domain, x0, mat, log_scale, logdet, use_form):
    X0 = domain.lift(x0)
    if use_form:
        J = _form(domain.dim)
        d = _form_distances(J, X0, mat[None], np.array([log_scale]), np.array([logdet]))
        return float(_near_fix(domain, x0, mat[None], d)[0])
    Y = mat @ X0
    if domain.kind == "simplex":
        # the simplex metric is 1/2 log max_ij (Y_i X_j) / (Y_j X_i) on
        # positive homogeneous coordinates, free of any chart rounding
        if np.all(Y < 0):
            Y = -Y
        if not np.all(Y > 0):
            raise OrbitEscape(f"orbit point {Y} is outside {domain}")
        r = np.log(Y) - np.log(X0)
        return 0.5 * float(np.max(r) - np.min(r))
    p = domain.chart(Y)
    if not domain.contains(p):
        raise OrbitEscape(f"orbit point {p} is outside {domain}")
    return hilbert_distance(domain, p, x0)


@dataclass(frozen=True)
class Displacement:
    per_orbit: float
    stable: float
    stable_naive: float
    bracket: float
    N: int


def hilbert_displacement(rho, g, domain, x0=None, N=50):
    """``d(g x0, x0)`` and the stable displacement ``lim d(g^N x0, x0) / N``.

    The stable value is ``(d_N - d_(N/2)) / (N/2)``, which cancels the
    bounded offset that makes ``d_N / N`` converge only like ``1/N``;
    ``bracket`` is the distance between the two estimates.
    """
    if N < 2 or N % 2:
        raise ValueError("N must be an even integer >= 2")
    x0 = domain.center if x0 is None else np.asarray(x0, dtype=float)
    if not domain.contains(x0):
        raise BoundaryDegenerate("base point is not inside the domain")
    if rho.dim != domain.dim + 1:
        raise ValueError(f"a {rho.dim}-dimensional action cannot act on {domain}")
    w = _as_word(g)
    use_form = preserves_form(rho, domain)
    mat, ls = rho.product(w)
    ld = rho.log_abs_det(w)
    if not use_form:
        # spot-check invariance along the orbit
        for k in (2, 3):
            m, s = scaled_power(mat, ls, k)
            Y = m @ domain.lift(x0)
            if domain.kind == "simplex":
                inside = np.all(Y > 0) or np.all(Y < 0)
            else:
                inside = domain.contains(domain.chart(Y), margin=0.0)
            if not inside:
                raise OrbitEscape(f"{format_word(w)!r}^{k} moves the base point outside {domain}")
    d1 = _orbit_distance(domain, x0, mat, ls, ld, use_form)
    mh, sh = scaled_power(mat, ls, N // 2)
    mn, sn = scaled_power(mat, ls, N)
    dh = _orbit_distance(domain, x0, mh, sh, ld * (N // 2), use_form)
    dn = _orbit_distance(domain, x0, mn, sn, ld * N, use_form)
    stable = max(0.0, (dn - dh) / (N // 2))
    naive = dn / N
    return Displacement(d1, stable, naive, abs(stable - naive), N)


@dataclass(frozen=True)
class Control1Report:
    kappa: float
    min_slack: float
    witness: str
    table: tuple
    plateau: float
    passed: bool


def control1_check(rho, domain, radius, x0=None, plateau_tol=PLATEAU_TOL):
    """Fit ``kappa`` in ``gap_(1,d)(mu(rho g)) >= 2 d(g x0, x0) - kappa`` over a ball.

    ``table`` holds the running value of kappa per radius; the check
    passes when it grows by less than ``plateau_tol`` over the last two
    radii (always for radius < 2).
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    x0 = domain.center if x0 is None else np.asarray(x0, dtype=float)
    if rho.dim != domain.dim + 1:
        raise ValueError(f"a {rho.dim}-dimensional action cannot act on {domain}")
    B = ball(rho.model, radius)
    ev = evaluate_ball(rho, B)
    use_form = preserves_form(rho, domain)
    prods = ev._first_lift()
    if use_form:
        dist = _form_distances(_form(domain.dim), domain.lift(x0), prods.fwd, prods.fwd_log, ev.logdet)
        dist = _near_fix(domain, x0, prods.fwd, dist)
    else:
        dist = np.array([
            _orbit_distance(domain, x0, prods.fwd[i], prods.fwd_log[i], ev.logdet[i], False)
            for i in range(len(B))
        ])
    gap = ev.mu[:, 0] - ev.mu[:, -1]
    viol = 2.0 * dist - gap
    table, kappa, witness = [], 0.0, ""
    for r in range(radius + 1):
        sel = np.flatnonzero(B.lengths == r)
        if sel.size:
            k = sel[int(np.argmax(viol[sel]))]
            if viol[k] > kappa:
                kappa, witness = float(viol[k]), format_word(B[k])
        table.append((r, kappa))
    plateau = table[-1][1] - table[-3][1] if radius >= 2 else 0.0
    return Control1Report(kappa, float(np.min(gap - 2.0 * dist)), witness, tuple(table),
                          float(plateau), bool(plateau < plateau_tol))
