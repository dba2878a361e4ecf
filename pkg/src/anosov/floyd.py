"""Floyd metrics on Cayley graph balls.

The edge between ``g`` and ``g s`` gets length ``f(max(|g|, |g s|))``
for a summable, nonincreasing Floyd function ``f``; distances are
shortest paths inside the ball, so they overestimate the distance in the
whole group and can only decrease as the radius grows.
"""

from dataclasses import dataclass, field
from math import floor

import numpy as np
from scipy.special import zeta

from .evaluate import evaluate_ball
from .kernels import all_pairs_dijkstra, csr_graph
from .words import _as_word, ball, format_word, reduce

__all__ = [
    "OutOfBall",
    "FloydFunction",
    "FloydGraph",
    "floyd_distance",
    "karlsson_bound",
    "ugsp_check",
    "UGSPReport",
    "floyd_lipschitz_check",
    "LipschitzReport",
    "PLATEAU_TOL",
]

PLATEAU_TOL = 0.5


class OutOfBall(LookupError):
    """A word is not in the ball the metric was built on."""


class FloydFunction:
    """``exponential(c)``: ``c^-n``; ``power_law(kappa)``: ``max(n, 1)^(-1-kappa)``;
    ``table(values)``: given values, zero past the end."""

    def __init__(self, kind, param=None, values=None):
        if kind == "exponential":
            if param is None or param <= 1:
                raise ValueError("exponential Floyd function needs base c > 1")
        elif kind == "power":
            if param is None or param <= 0:
                raise ValueError("power-law Floyd function needs kappa > 0")
        elif kind == "table":
            values = np.asarray(values, dtype=float)
            if values.ndim != 1 or values.size == 0 or np.any(values <= 0):
                raise ValueError("table Floyd function needs positive values")
            if np.any(np.diff(values) > 0):
                raise ValueError("table Floyd function must be nonincreasing")
        else:
            raise ValueError(f"unknown Floyd function kind {kind!r}")
        self.kind = kind
        self.param = None if param is None else float(param)
        self.values = values

    @classmethod
    def exponential(cls, c):
        return cls("exponential", c)

    @classmethod
    def power_law(cls, kappa):
        return cls("power", kappa)

    @classmethod
    def table(cls, values):
        return cls("table", values=values)

    @classmethod
    def parse(cls, s):
        """``"exp:2"`` or ``"power:1"``."""
        kind, _, arg = s.partition(":")
        if kind in ("exp", "exponential"):
            return cls.exponential(float(arg))
        if kind in ("power", "powerlaw", "power_law"):
            return cls.power_law(float(arg))
        raise ValueError(f"cannot parse Floyd function {s!r}")

    def __str__(self):
        if self.kind == "exponential":
            return f"exp:{self.param:g}"
        if self.kind == "power":
            return f"power:{self.param:g}"
        return f"table:{self.values.size}"

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        if self.kind == "exponential":
            out = self.param ** (-n)
        elif self.kind == "power":
            out = np.maximum(n, 1.0) ** (-1.0 - self.param)
        else:
            k = n.astype(np.int64)
            out = np.where(k < self.values.size, self.values[np.minimum(k, self.values.size - 1)], 0.0)
        return float(out) if out.ndim == 0 else out

    def tail(self, k0):
        """``sum_{k >= k0} f(k)``."""
        k0 = max(0, int(k0))
        if self.kind == "exponential":
            c = self.param
            return c ** (-k0) / (1.0 - 1.0 / c)
        if self.kind == "power":
            s = 1.0 + self.param
            if k0 == 0:
                return 1.0 + float(zeta(s, 1))
            return float(zeta(s, k0))
        return float(np.sum(self.values[k0:]))

    def decay_bounds(self, kmax=10_000):
        """``(nonincreasing, m)`` with ``m = min_k f(k+1) / f(k)`` for ``k < kmax``."""
        k = np.arange(kmax + 1)
        v = self(k)
        if self.kind == "table":
            v = v[: self.values.size]
        ratio = v[1:] / v[:-1]
        return bool(np.all(np.diff(v) <= 0)), float(np.min(ratio)) if ratio.size else 1.0


def karlsson_bound(f, x):
    """``10 * sum_{k >= floor(x / 2)} f(k)``."""
    return 10.0 * f.tail(floor(x / 2.0))


class FloydGraph:
    """Ball of the Cayley graph with Floyd edge lengths and cached distances."""

    def __init__(self, model, f, radius, threads=1):
        if radius < 0:
            raise ValueError("radius must be >= 0")
        self.model = model
        self.f = f
        self.radius = int(radius)
        self.threads = threads
        self.ball = ball(model, radius)
        rows, cols = self.ball.neighbours()
        L = self.ball.lengths
        w = f(np.maximum(L[rows], L[cols]))
        self.csr = csr_graph(len(self.ball), rows, cols, np.atleast_1d(w))
        self._rows = {}
        self._all = None

    def index(self, g):
        i = self.ball.find(reduce(g) if self.model.kind == "free" else _as_word(g))
        if i is None:
            raise OutOfBall(f"{format_word(_as_word(g))!r} is not in the ball of radius {self.radius}")
        return i

    def all_pairs(self):
        if self._all is None:
            self._all = all_pairs_dijkstra(*self.csr, threads=self.threads)
        return self._all

    def row(self, i):
        if self._all is not None:
            return self._all[i]
        if i not in self._rows:
            self._rows[i] = all_pairs_dijkstra(*self.csr, sources=[i])[0]
        return self._rows[i]

    def distance(self, g, h):
        return float(self.row(self.index(g))[self.index(h)])


def floyd_distance(model, f, g, h, radius):
    """Floyd distance inside the ball of the given radius."""
    return FloydGraph(model, f, radius).distance(g, h)


# ---------------------------------------------------------------- checks

@dataclass(frozen=True)
class UGSPReport:
    C: float
    witness: str
    table: tuple
    plateau: float
    plateau_tol: float
    passed: bool
    functional: str = "root:1"


def ugsp_check(rho, f, radius, plateau_tol=PLATEAU_TOL, root=1, ev=None):
    """Fit ``C`` in ``gap(rho(g)) >= -log f(|g|) - C`` over the ball.

    ``table`` holds the running maximum per radius; the check passes when
    it grows by less than ``plateau_tol`` over the last two radii.
    """
    if radius < 2:
        raise ValueError("radius must be >= 2")
    if ev is None:
        ev = evaluate_ball(rho, ball(rho.model, radius))
    L = ev.ball.lengths
    slack = -np.log(f(L)) - ev.gap(root)
    table = []
    best, witness = -np.inf, ""
    for r in range(radius + 1):
        sel = np.flatnonzero(L == r)
        if sel.size:
            k = sel[int(np.argmax(slack[sel]))]
            if slack[k] > best:
                best, witness = float(slack[k]), format_word(ev.ball[k])
        table.append((r, best))
    plateau = table[-1][1] - table[-3][1]
    return UGSPReport(best, witness, tuple(table), float(plateau), plateau_tol,
                      bool(plateau < plateau_tol), f"root:{root}")


def _line_distances(P, i):
    """``|sin|`` of the angle between line ``P[i]`` and each row of ``P``."""
    r = P - np.outer(P @ P[i], P[i])
    return np.minimum(1.0, np.sqrt(np.einsum("ij,ij->i", r, r)))


@dataclass(frozen=True)
class LipschitzReport:
    C: float
    witness: tuple
    radius: int
    excluded: tuple
    pairs: int


def floyd_lipschitz_check(rho, f, radius, threads=1, graph=None, ev=None, min_distance=1e-12):
    """Largest ratio of attractor distance to Floyd distance over ball pairs.

    Elements without a first singular value gap are excluded and listed.
    """
    model = rho.model
    if graph is None:
        graph = FloydGraph(model, f, radius, threads=threads)
    if ev is None:
        ev = evaluate_ball(rho, graph.ball)
    plus, _, ok, _ = ev.attractors()
    good = np.flatnonzero(ok)
    excluded = tuple(format_word(ev.ball[i]) for i in np.flatnonzero(~ok))
    D = graph.all_pairs()
    P = plus[good]
    best, wit, pairs = 0.0, ("", ""), 0
    for a, i in enumerate(good):
        num = _line_distances(P, a)
        den = D[i, good]
        mask = (den >= min_distance) & np.isfinite(den)
        mask[a] = False
        pairs += int(mask.sum())
        if not mask.any():
            continue
        ratios = np.where(mask, num / np.where(mask, den, 1.0), -1.0)
        b = int(np.argmax(ratios))
        if ratios[b] > best:
            best, wit = float(ratios[b]), (format_word(ev.ball[i]), format_word(ev.ball[good[b]]))
    return LipschitzReport(best, wit, int(radius), excluded, pairs)
