"""Ball-scan diagnostics for singular value characterizations of Anosov
representations.

Each check scans a finite ball, fits the constants of an inequality so
that it holds on the scanned data, and returns a :class:`Report` with a
verdict:

``consistent``
    the data fit the criterion and the fitted constants have settled;
``inconsistent``
    the data contradict it (e.g. a gap that does not grow at all);
``inconclusive``
    neither, typically because a constant is still drifting.

No verdict proves anything about the infinite group.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from .evaluate import evaluate_ball
from .floyd import FloydFunction, ugsp_check
from .kernels import common_prefix_lengths
from .linalg import LinearFunctional, cartan_word, lyapunov_word
from .words import (
    ball,
    conjugation_depth,
    cyclic_classes,
    cyclic_reduce,
    format_word,
    reduce,
    _as_word,
)

__all__ = [
    "CONSISTENT",
    "INCONSISTENT",
    "INCONCLUSIVE",
    "PreconditionError",
    "Report",
    "ScanContext",
    "divergence_profile",
    "qie_check",
    "ccartan_check",
    "weak_gap_check",
    "property_u_defect",
    "directsum_check",
    "tensor_check",
    "interval_search",
    "gromov_comparability",
    "ugsp_gromov_bounds",
    "mu_lambda_search",
    "growth_verdict",
    "log_bound_fit",
    "envelope_fit",
    "CHECKS",
]

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"
INCONCLUSIVE = "inconclusive"
PLATEAU_TOL = 0.5
CHUNK = 1 << 16


class PreconditionError(ValueError):
    """The inputs do not satisfy the hypotheses the check relies on."""


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return x


@dataclass
class Report:
    """Fitted constants, witnesses and verdict of one criterion."""

    criterion: str
    verdict: str
    parameters: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    parts: list = field(default_factory=list)

    def to_dict(self):
        d = {
            "criterion": self.criterion,
            "verdict": self.verdict,
            "parameters": self.parameters,
            "constants": self.constants,
            "witnesses": self.witnesses,
            "tables": self.tables,
            "notes": self.notes,
        }
        if self.parts:
            d["parts"] = [p.to_dict() for p in self.parts]
        return _clean(d)

    def part(self, name):
        for p in self.parts:
            if p.criterion == name:
                return p
        raise KeyError(name)


def _combine(verdicts):
    verdicts = list(verdicts)
    if any(v == INCONSISTENT for v in verdicts):
        return INCONSISTENT
    if verdicts and all(v == CONSISTENT for v in verdicts):
        return CONSISTENT
    return INCONCLUSIVE


# ---------------------------------------------------------------- fitting

def growth_verdict(values, tol=1e-9):
    """Verdict for ``values -> +infinity`` from the last four entries."""
    v = np.asarray(values, dtype=float)
    if v.size < 4:
        return INCONCLUSIVE
    last = v[-4:]
    if np.all(np.diff(last) > tol):
        return CONSISTENT
    if last[-1] <= last[0] + tol:
        return INCONSISTENT
    return INCONCLUSIVE


def log_bound_fit(x, m, c_min=0.0, plateau_tol=PLATEAU_TOL):
    """Fit ``m(x) >= c log x - C`` to per-length minima ``m``.

    ``c`` is the least-squares slope of ``m`` against ``log x``; ``C`` is
    the smallest constant making the bound hold on the data.  Returns
    ``(c, C, C_table, verdict)``: consistent when ``c > c_min`` and ``C``
    has settled over the last two lengths, inconsistent when
    ``c <= c_min``.
    """
    x = np.asarray(x, dtype=float)
    m = np.asarray(m, dtype=float)
    keep = x >= 1
    x, m = x[keep], m[keep]
    if x.size < 3:
        return float("nan"), float("nan"), [], INCONCLUSIVE
    lx = np.log(x)
    c = float(np.polyfit(lx, m, 1)[0])
    slack = c * lx - m
    C_table = np.maximum.accumulate(slack)
    plateau = C_table[-1] - C_table[-3]
    if c <= c_min:
        verdict = INCONSISTENT
    elif plateau < plateau_tol:
        verdict = CONSISTENT
    else:
        verdict = INCONCLUSIVE
    return c, float(C_table[-1]), [(int(a), float(b)) for a, b in zip(x, C_table)], verdict


def envelope_fit(W, D, lengths, radius, plateau_tol=PLATEAU_TOL):
    """Fit ``D <= A W + a``.

    ``A`` is the least-squares slope through the upper envelope
    (maximum ``D`` for each value of ``W``); ``a`` is then the smallest
    intercept making the bound hold.  ``a_table`` is the running value
    over radii; the fit is consistent when it has settled over the last
    two radii.
    """
    W = np.asarray(W, dtype=float)
    D = np.asarray(D, dtype=float)
    ws = np.unique(W)
    env = np.array([D[W == w].max() for w in ws])
    if ws.size >= 2:
        A = max(0.0, float(np.polyfit(ws, env, 1)[0]))
    else:
        A = 0.0
    slack = D - A * W
    table = []
    best = -np.inf
    for r in range(radius + 1):
        sel = lengths == r
        if sel.any():
            best = max(best, float(slack[sel].max()))
        table.append((r, best))
    plateau = table[-1][1] - table[-3][1] if radius >= 2 else 0.0
    verdict = CONSISTENT if plateau < plateau_tol else INCONCLUSIVE
    k = int(np.argmax(slack))
    return A, float(best), table, float(plateau), verdict, k


def _sphere_extremes(values, lengths, radius, fn=np.min):
    radii, out, idx = [], [], []
    for r in range(1, radius + 1):
        sel = np.flatnonzero(lengths == r)
        if sel.size == 0:
            continue
        k = sel[int(np.argmin(values[sel]) if fn is np.min else np.argmax(values[sel]))]
        radii.append(r)
        out.append(float(values[k]))
        idx.append(int(k))
    return np.array(radii), np.array(out), idx


# ---------------------------------------------------------------- scan context

class ScanContext:
    """Caches balls and ball evaluations shared between checks."""

    def __init__(self, threads=1):
        self.threads = max(1, int(threads))
        self._balls = {}
        self._evals = {}

    def ball(self, model, radius):
        key = (id(model), radius)
        if key not in self._balls:
            self._balls[key] = (model, ball(model, radius))
        return self._balls[key][1]

    def evaluate(self, rho, radius):
        key = (id(rho), radius)
        if key not in self._evals:
            self._evals[key] = (rho, evaluate_ball(rho, self.ball(rho.model, radius)))
        return self._evals[key][1]

    def map_chunks(self, fn, n):
        """``concatenate([fn(lo, hi) for fixed-size chunks])`` in order.

        Chunk boundaries do not depend on the thread count, so neither
        does the result.
        """
        bounds = [(lo, min(n, lo + CHUNK)) for lo in range(0, n, CHUNK)]
        if not bounds:
            return []
        if self.threads == 1 or len(bounds) == 1:
            return [fn(lo, hi) for lo, hi in bounds]
        with ThreadPoolExecutor(max_workers=self.threads) as ex:
            return list(ex.map(lambda b: fn(*b), bounds))


def _ctx(ctx):
    return ScanContext() if ctx is None else ctx


def _check_radius(radius, minimum=0):
    if not isinstance(radius, (int, np.integer)) or radius < minimum:
        raise PreconditionError(f"radius must be an integer >= {minimum}, got {radius!r}")


# ---------------------------------------------------------------- checks

def divergence_profile(rho, i=1, radius=6, ctx=None):
    """Per-radius minimum of the ``i``-th root over spheres."""
    _check_radius(radius, 1)
    if not 1 <= i < rho.dim:
        raise PreconditionError(f"root index must be in 1..{rho.dim - 1}")
    ctx = _ctx(ctx)
    ev = ctx.evaluate(rho, radius)
    gap = ev.gap(i)
    radii, mins, idx = _sphere_extremes(gap, ev.ball.lengths, radius)
    verdict = growth_verdict(mins)
    return Report(
        "divergence",
        verdict,
        parameters={"radius": radius, "root": i},
        constants={"last_min_gap": float(mins[-1])},
        witnesses={"sphere_minimizers": [format_word(ev.ball[k]) for k in idx]},
        tables={"min_gap": [(int(r), float(v)) for r, v in zip(radii, mins)]},
    )


def _linear_vs_log(x, m):
    """Residuals of least-squares fits of ``m`` to ``a + b x`` and ``a + b log x``."""
    res = []
    for feat in (x, np.log(x)):
        A = np.vstack([np.ones_like(feat), feat]).T
        coef, *_ = np.linalg.lstsq(A, m, rcond=None)
        res.append(float(np.linalg.norm(A @ coef - m)))
    return res


def qie_check(rho, radius=6, ctx=None):
    """Fit ``|g|/C - K <= |mu(rho g)| <= C |g| + K`` over a ball."""
    _check_radius(radius, 3)
    ctx = _ctx(ctx)
    ev = ctx.evaluate(rho, radius)
    norm = np.linalg.norm(ev.mu, axis=1)
    L = ev.ball.lengths
    radii, mins, idx_min = _sphere_extremes(norm, L, radius, np.min)
    _, maxs, idx_max = _sphere_extremes(norm, L, radius, np.max)
    lower = float(np.polyfit(radii, mins, 1)[0])
    upper = float(np.polyfit(radii, maxs, 1)[0])
    res_lin, res_log = _linear_vs_log(radii.astype(float), mins)
    notes = []
    if lower <= 1e-9:
        verdict = INCONSISTENT
        C = float("inf")
        K = float("nan")
    else:
        C = max(1.0 / lower, upper, 1.0)
        K = float(max(0.0, np.max(radii / C - mins), np.max(maxs - C * radii)))
        if res_log < res_lin:
            verdict = INCONSISTENT
            notes.append("sphere minima fit logarithmic growth better than linear growth")
        else:
            verdict = CONSISTENT
    return Report(
        "qie",
        verdict,
        parameters={"radius": radius},
        constants={"C": C, "K": K, "lower_slope": lower, "upper_slope": upper,
                   "residual_linear": res_lin, "residual_log": res_log},
        witnesses={"min": format_word(ev.ball[idx_min[-1]]), "max": format_word(ev.ball[idx_max[-1]])},
        tables={"sphere_min": list(zip(radii.tolist(), mins.tolist())),
                "sphere_max": list(zip(radii.tolist(), maxs.tolist()))},
        notes=notes,
    )


def _square_data(ev):
    """Cartan vectors of squares and word defects ``2|g| - |g^2|`` (free groups).

    ``g = w c w^-1`` with ``c`` cyclically reduced has reduced square
    ``w c c w^-1``, evaluated as the product of the prefix ``w c`` and
    the suffix ``c w^-1``, both already in the ball.
    """
    B = ev.ball
    n = len(B)
    depth = np.array([conjugation_depth(w) for w in B.words], dtype=np.int64)
    L = B.lengths
    pre = B.prefix_table[np.arange(n), L - depth]
    suf = B.suffix_table[np.arange(n), depth]
    mu_sq = ev.mu_concat(pre, suf)
    return mu_sq, 2 * depth


def ccartan_check(rho, alpha=1, radius=7, ctx=None, plateau_tol=PLATEAU_TOL):
    """Both conditions of the root / fundamental weight characterization.

    (i)  ``<alpha, mu(rho g)> >= c log|g| - C`` with ``c > 1``;
    (ii) ``<omega_alpha, 2 mu(rho g) - mu(rho g^2)> <= A (2|g| - |g^2|) + a``.
    """
    _check_radius(radius, 3)
    if not 1 <= alpha < rho.dim:
        raise PreconditionError(f"root index must be in 1..{rho.dim - 1}")
    ctx = _ctx(ctx)
    ev = ctx.evaluate(rho, radius)
    B = ev.ball
    gap = ev.gap(alpha)
    radii, mins, idx = _sphere_extremes(gap, B.lengths, radius)
    c, C, C_table, v1 = log_bound_fit(radii, mins, c_min=1.0, plateau_tol=plateau_tol)
    part1 = Report(
        "ccartan_i",
        v1,
        parameters={"radius": radius, "root": alpha},
        constants={"c": c, "C": C},
        witnesses={"sphere_minimizers": [format_word(B[k]) for k in idx]},
        tables={"min_gap": list(zip(radii.tolist(), mins.tolist())), "C": C_table},
    )
    if B.model.kind != "free":
        part2 = Report("ccartan_ii", INCONCLUSIVE, parameters={"radius": radius, "weight": alpha},
                       notes=["word lengths of squares are only computed for free groups"])
    else:
        mu_sq, W = _square_data(ev)
        omega = LinearFunctional.weight(alpha)
        D = omega(2.0 * ev.mu - mu_sq)
        A, a, a_table, plateau, v2, k = envelope_fit(W, D, B.lengths, radius, plateau_tol)
        part2 = Report(
            "ccartan_ii",
            v2,
            parameters={"radius": radius, "weight": alpha, "plateau_tol": plateau_tol},
            constants={"A": A, "a": a, "plateau": plateau, "min_defect": float(D.min())},
            witnesses={"intercept": format_word(B[k]), "min_defect": format_word(B[int(np.argmin(D))])},
            tables={"a": a_table},
        )
    return Report("ccartan", _combine([part1.verdict, part2.verdict]),
                  parameters={"radius": radius, "alpha": alpha}, parts=[part1, part2])


def _classes(model, max_length):
    if model.kind != "free":
        raise PreconditionError("conjugacy class scans are implemented for free groups")
    return cyclic_classes(model, max_length)


def weak_gap_check(rho, i=1, max_length=8):
    """``inf <root_i, lambda(rho g)> / |g|_inf`` over cyclic classes."""
    if max_length < 1:
        raise PreconditionError("max_length must be >= 1")
    if not 1 <= i < rho.dim:
        raise PreconditionError(f"root index must be in 1..{rho.dim - 1}")
    best, wit = np.inf, ""
    for w in _classes(rho.model, max_length):
        lam = lyapunov_word(rho, w)
        r = float(lam[i - 1] - lam[i]) / len(w)
        if r < best:
            best, wit = r, format_word(w)
    verdict = CONSISTENT if best > 1e-9 else INCONSISTENT
    return Report("weak_gap", verdict, parameters={"root": i, "max_length": max_length},
                  constants={"c": best}, witnesses={"infimum": wit})


def property_u_defect(model, radius=8):
    """Histogram of ``|g| - |g|_inf`` over a ball of a free group."""
    _check_radius(radius, 0)
    if model.kind != "free":
        raise PreconditionError("stable word lengths are exact only for free groups")
    B = ball(model, radius)
    defect = np.array([2 * conjugation_depth(w) for w in B.words])
    values, counts = np.unique(defect, return_counts=True)
    k = int(np.argmax(defect))
    return Report("property_u", CONSISTENT, parameters={"radius": radius},
                  constants={"max_defect": int(defect.max())},
                  witnesses={"max_defect": format_word(B[k])},
                  tables={"histogram": list(zip(values.tolist(), counts.tolist()))})


def _per_length_min(values, lengths):
    ls = np.unique(lengths)
    return ls, np.array([values[lengths == l].min() for l in ls])


def _class_lambdas(rho, words):
    return np.array([lyapunov_word(rho, w) for w in words])


def directsum_check(rho_l, rho_r, radius=7, max_length=8, ctx=None, plateau_tol=PLATEAU_TOL):
    """Four equivalent growth conditions for the direct sum ``rho_l x rho_r``.

    (2) ``<e_1, mu_l - mu_r> -> +inf``; (3) its absolute value is at least
    ``c log|g| - C``; (4), (5) the same for Lyapunov vectors along
    conjugacy classes.
    """
    _check_radius(radius, 4)
    if not rho_l.model.same_group(rho_r.model):
        raise PreconditionError("both representations must share the group model")
    ctx = _ctx(ctx)
    evl, evr = ctx.evaluate(rho_l, radius), ctx.evaluate(rho_r, radius)
    B = evl.ball
    diff = evl.mu[:, 0] - evr.mu[:, 0]
    radii, mins, idx = _sphere_extremes(diff, B.lengths, radius)
    v2 = growth_verdict(mins)
    _, amins, aidx = _sphere_extremes(np.abs(diff), B.lengths, radius)
    c3, C3, C3_table, v3 = log_bound_fit(radii, amins, 0.0, plateau_tol)

    words = _classes(B.model, max_length)
    lens = np.array([len(w) for w in words])
    ldiff = _class_lambdas(rho_l, words)[:, 0] - _class_lambdas(rho_r, words)[:, 0]
    ls, lmins = _per_length_min(ldiff, lens)
    v4 = growth_verdict(lmins)
    _, almins = _per_length_min(np.abs(ldiff), lens)
    c5, C5, C5_table, v5 = log_bound_fit(ls, almins, 0.0, plateau_tol)
    k0 = int(np.argmax(ldiff))
    notes = []
    if ldiff[k0] <= 0:
        notes.append("no scanned class has a larger top eigenvalue under the first representation")
    notes.append("hypothesis on the second representation is assumed, not verified")
    parts = [
        Report("directsum_2", v2, constants={"last_min": float(mins[-1])},
               witnesses={"sphere_minimizers": [format_word(B[k]) for k in idx]},
               tables={"min_diff": list(zip(radii.tolist(), mins.tolist()))}),
        Report("directsum_3", v3, constants={"c": c3, "C": C3},
               witnesses={"sphere_minimizers": [format_word(B[k]) for k in aidx]},
               tables={"min_abs_diff": list(zip(radii.tolist(), amins.tolist())), "C": C3_table}),
        Report("directsum_4", v4, constants={"last_min": float(lmins[-1])},
               tables={"min_diff": list(zip(ls.tolist(), lmins.tolist()))}),
        Report("directsum_5", v5, constants={"c": c5, "C": C5},
               tables={"min_abs_diff": list(zip(ls.tolist(), almins.tolist())), "C": C5_table}),
    ]
    return Report(
        "directsum",
        _combine(p.verdict for p in parts),
        parameters={"radius": radius, "max_length": max_length, "plateau_tol": plateau_tol},
        constants={"precondition_gap": float(ldiff[k0])},
        witnesses={"precondition": format_word(words[k0])},
        notes=notes,
        parts=parts,
    )


def tensor_check(rho_l, rho_r, radius=7, max_length=8, ctx=None, plateau_tol=PLATEAU_TOL):
    """Logarithmic lower bounds, with ``c > 1``, on the first-root
    differences of Cartan and of Lyapunov vectors."""
    _check_radius(radius, 4)
    if not rho_l.model.same_group(rho_r.model):
        raise PreconditionError("both representations must share the group model")
    if rho_l.dim < 2 or rho_r.dim < 2:
        raise PreconditionError("both representations need dimension >= 2")
    ctx = _ctx(ctx)
    evl, evr = ctx.evaluate(rho_l, radius), ctx.evaluate(rho_r, radius)
    B = evl.ball
    d = np.abs(evl.gap(1) - evr.gap(1))
    radii, mins, idx = _sphere_extremes(d, B.lengths, radius)
    c2, C2, C2_table, v2 = log_bound_fit(radii, mins, 1.0, plateau_tol)
    words = _classes(B.model, max_length)
    lens = np.array([len(w) for w in words])
    ll, lr = _class_lambdas(rho_l, words), _class_lambdas(rho_r, words)
    ld = np.abs((ll[:, 0] - ll[:, 1]) - (lr[:, 0] - lr[:, 1]))
    ls, lmins = _per_length_min(ld, lens)
    c3, C3, C3_table, v3 = log_bound_fit(ls, lmins, 1.0, plateau_tol)
    parts = [
        Report("tensor_2", v2, constants={"c": c2, "C": C2},
               witnesses={"sphere_minimizers": [format_word(B[k]) for k in idx]},
               tables={"min_abs_diff": list(zip(radii.tolist(), mins.tolist())), "C": C2_table}),
        Report("tensor_3", v3, constants={"c": c3, "C": C3},
               tables={"min_abs_diff": list(zip(ls.tolist(), lmins.tolist())), "C": C3_table}),
    ]
    return Report("tensor", _combine(p.verdict for p in parts),
                  parameters={"radius": radius, "max_length": max_length, "plateau_tol": plateau_tol},
                  parts=parts)


def interval_search(rho1, rho2, p, q, delta=1.0, radius=8, max_length=6, ctx=None, tol=1e-9):
    """Element whose top-singular-value ratio is closest to ``p / q``.

    The admissible interval of ratios is estimated from the top
    eigenvalues over conjugacy classes; ``p / q`` must lie in it.  The
    returned element minimizes ``|p/q - ratio| - (delta/q) log|g| / |g|``,
    ties going to the shortlex-first element.
    """
    _check_radius(radius, 2)
    if q <= 0:
        raise PreconditionError("q must be positive")
    if not rho1.model.same_group(rho2.model):
        raise PreconditionError("both representations must share the group model")
    target = p / q
    words = _classes(rho1.model, max_length)
    l1 = _class_lambdas(rho1, words)[:, 0]
    l2 = _class_lambdas(rho2, words)[:, 0]
    ok = l2 > 1e-12
    ratios = l1[ok] / l2[ok]
    lo, hi = float(ratios.min()), float(ratios.max())
    if not (lo - tol <= target <= hi + tol):
        raise PreconditionError(f"target {p}/{q} lies outside the eigenvalue ratio interval [{lo:.6g}, {hi:.6g}]")
    ctx = _ctx(ctx)
    e1, e2 = ctx.evaluate(rho1, radius), ctx.evaluate(rho2, radius)
    B = e1.ball
    L = B.lengths.astype(float)
    sel = np.flatnonzero((B.lengths >= 2) & (e2.mu[:, 0] > 1e-12))
    ratio = e1.mu[sel, 0] / e2.mu[sel, 0]
    resid = np.abs(target - ratio)
    shape = np.log(L[sel]) / L[sel]
    score = resid - delta / q * shape
    k = int(np.argmin(score))
    g = sel[k]
    res = float(resid[k])
    needed = q * res / shape[k]
    return Report(
        "interval",
        CONSISTENT if res <= delta / q * shape[k] else INCONCLUSIVE,
        parameters={"p": p, "q": q, "delta": delta, "radius": radius, "max_length": max_length},
        constants={"residual": res, "budget": float(delta / q * shape[k]), "delta_needed": float(needed),
                   "ratio": float(ratio[k]), "interval_low": lo, "interval_high": hi,
                   "length": int(B.lengths[g])},
        witnesses={"element": format_word(B[g])},
    )


def _pair_indices(n):
    i, j = np.triu_indices(n)
    return i.astype(np.int64), j.astype(np.int64)


def _pair_gromov(ev, i, j, phi, ctx):
    """``(rho(g) . rho(h))_phi`` for index arrays, chunked."""
    mu = ev.mu
    inv = ev.ball.inverse

    def work(lo, hi):
        a, b = i[lo:hi], j[lo:hi]
        s = mu[a] + mu[inv[a]] + mu[b] + mu[inv[b]] - ev.mu_between(a, b) - ev.mu_between(b, a)
        return 0.25 * phi(s)

    parts = ctx.map_chunks(work, i.size)
    return np.concatenate(parts) if parts else np.zeros(0)


def _group_gromov(ev, i, j):
    B = ev.ball
    if B.model.kind == "free":
        return common_prefix_lengths(B.prefix_table, i, j).astype(float)
    raise PreconditionError("pair scans need free groups")


def gromov_comparability(rho, alpha=1, radius=6, ctx=None, rel_tol=0.15):
    """Compare Gromov products in the group with those relative to ``omega_alpha``.

    (i) fits ``C`` with ``(g.h)/C - c <= (rho g . rho h)_omega <= C (g.h) + c``
    over pairs with ``(g.h) >= 2``; consistent when ``C`` changes by less
    than ``rel_tol`` between the last two radii.  (iii) fits the weight
    defect ``<omega, mu - lambda>`` against the word defect
    ``|g| - |g|_inf``.
    """
    _check_radius(radius, 3)
    ctx = _ctx(ctx)
    ev = ctx.evaluate(rho, radius)
    B = ev.ball
    if B.model.kind != "free":
        raise PreconditionError("pair scans need free groups")
    phi = LinearFunctional.weight(alpha)
    i, j = _pair_indices(len(B))
    gp = _group_gromov(ev, i, j)
    keep = gp >= 2
    i, j, gp = i[keep], j[keep], gp[keep]
    rp = _pair_gromov(ev, i, j, phi, ctx)
    ratio = rp / gp
    outer = np.maximum(B.lengths[i], B.lengths[j])

    def fit(mask):
        r = ratio[mask]
        if r.size == 0 or r.min() <= 1e-12:
            return float("inf"), float("nan")
        C = float(max(r.max(), 1.0 / r.min()))
        c = float(max(0.0, np.max(gp[mask] / C - rp[mask]), np.max(rp[mask] - C * gp[mask])))
        return C, c

    C, c = fit(np.ones(i.size, dtype=bool))
    C_prev, _ = fit(outer <= radius - 1)
    if not np.isfinite(C):
        v1 = INCONSISTENT
    elif np.isfinite(C_prev) and abs(C - C_prev) <= rel_tol * C_prev:
        v1 = CONSISTENT
    else:
        v1 = INCONCLUSIVE
    kmin, kmax = int(np.argmin(ratio)), int(np.argmax(ratio))
    part1 = Report(
        "gromov_i", v1,
        constants={"C": C, "c": c, "C_previous_radius": C_prev,
                   "min_ratio": float(ratio[kmin]), "max_ratio": float(ratio[kmax]), "pairs": int(i.size)},
        witnesses={"min_ratio": [format_word(B[i[kmin]]), format_word(B[j[kmin]])],
                   "max_ratio": [format_word(B[i[kmax]]), format_word(B[j[kmax]])]},
    )
    Wd = np.array([2 * conjugation_depth(w) for w in B.words], dtype=float)
    Dd = phi(ev.mu - ev.lam)
    A, a, a_table, plateau, v3, k = envelope_fit(Wd, Dd, B.lengths, radius)
    part3 = Report("gromov_iii", v3, constants={"A": A, "a": a, "plateau": plateau},
                   witnesses={"intercept": format_word(B[k])}, tables={"a": a_table})
    return Report("gromov", _combine([part1.verdict, part3.verdict]),
                  parameters={"radius": radius, "alpha": alpha, "rel_tol": rel_tol},
                  parts=[part1, part3])


def ugsp_gromov_bounds(rho, kappa=1.0, radius=6, ctx=None, plateau_tol=PLATEAU_TOL):
    """Fit ``R`` and ``L`` in

    (i)  ``(g.h) <= R (s(g^-1) s(h) / s(g^-1 h))^(1/kappa)``,
    (ii) ``|g| - |g|_inf <= L (s(g) / l(g))^(1/kappa)``,

    with ``s`` the top singular value and ``l`` the top eigenvalue modulus.
    Requires the gap summation check to pass for ``f(n) = n^(-1-kappa)``.
    """
    _check_radius(radius, 3)
    ctx = _ctx(ctx)
    ev = ctx.evaluate(rho, radius)
    B = ev.ball
    if B.model.kind != "free":
        raise PreconditionError("pair scans need free groups")
    pre = ugsp_check(rho, FloydFunction.power_law(kappa), radius, ev=ev)
    if not pre.passed:
        raise PreconditionError(
            f"gap summation fails for power law {kappa:g} (C still grows by {pre.plateau:.3g})"
        )
    inv = B.inverse
    i, j = _pair_indices(len(B))
    gp = _group_gromov(ev, i, j)
    keep = gp >= 1
    i, j, gp = i[keep], j[keep], gp[keep]

    def work(lo, hi):
        a, b = i[lo:hi], j[lo:hi]
        return ev.mu[inv[a], 0] + ev.mu[b, 0] - ev.mu_between(a, b)[:, 0]

    parts = ctx.map_chunks(work, i.size)
    logratio = np.concatenate(parts) if parts else np.zeros(0)
    log_r = np.log(gp) - logratio / kappa
    outer = np.maximum(B.lengths[i], B.lengths[j])
    table = []
    for r in range(1, radius + 1):
        m = outer <= r
        table.append((r, float(np.exp(log_r[m].max())) if m.any() else 0.0))
    Rc = table[-1][1]
    plat1 = table[-1][1] - table[-3][1]
    v1 = CONSISTENT if plat1 < plateau_tol else INCONCLUSIVE
    k1 = int(np.argmax(log_r))
    part1 = Report("ugsp_i", v1, constants={"R": Rc, "plateau": plat1},
                   witnesses={"pair": [format_word(B[i[k1]]), format_word(B[j[k1]])]},
                   tables={"R": table})

    defect = np.array([2 * conjugation_depth(w) for w in B.words], dtype=float)
    pos = defect > 0
    log_l = np.full(len(B), -np.inf)
    log_l[pos] = np.log(defect[pos]) - (ev.mu[pos, 0] - ev.lam[pos, 0]) / kappa
    table2 = []
    for r in range(1, radius + 1):
        m = pos & (B.lengths <= r)
        table2.append((r, float(np.exp(log_l[m].max())) if m.any() else 0.0))
    plat2 = table2[-1][1] - table2[-3][1]
    v2 = CONSISTENT if plat2 < plateau_tol else INCONCLUSIVE
    k2 = int(np.argmax(log_l))
    part2 = Report("ugsp_ii", v2, constants={"L": table2[-1][1], "plateau": plat2},
                   witnesses={"element": format_word(B[k2])}, tables={"L": table2})
    return Report("ugsp_gromov", _combine([v1, v2]),
                  parameters={"radius": radius, "kappa": kappa, "plateau_tol": plateau_tol},
                  constants={"gap_summation_C": pre.C}, parts=[part1, part2])


def mu_lambda_search(rho, g, search_radius=2):
    """``f`` in a small ball minimizing ``|lambda(rho(g f)) - mu(rho(g))|``."""
    _check_radius(search_radius, 0)
    g = reduce(_as_word(g))
    target = cartan_word(rho, g)
    best, arg, base = np.inf, (), None
    for f in ball(rho.model, search_radius).words:
        w = reduce(g + f)
        v = float(np.linalg.norm(lyapunov_word(rho, w) - target)) if w else float(np.linalg.norm(target))
        if base is None:
            base = v
        if v < best:
            best, arg = v, f
    return Report("mu_lambda", CONSISTENT,
                  parameters={"element": format_word(g), "search_radius": search_radius},
                  constants={"value": best, "value_at_identity": base},
                  witnesses={"f": format_word(arg)})


CHECKS = ("divergence", "qie", "ccartan", "weak_gap", "property_u", "gromov", "ugsp", "ugsp_gromov")
