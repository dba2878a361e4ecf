"""Batched evaluation of a representation over a ball or along a word.

Every element of a ball is the product of its parent with one more
letter, so the products for a whole ball cost one batched matrix
multiply per element.  Products are kept for each exterior power needed
by the partial-sum formula for Cartan vectors, both for the element and
for its inverse:

    S_k(g) = log sigma_1(Lambda^k g)                      for k <= d/2
    S_k(g) = log|det g| + log sigma_1(Lambda^(d-k) g^-1)  otherwise

and ``mu_k = S_k - S_(k-1)``.  This resolves every singular value of a
long product to relative precision.
"""

import numpy as np

from ._product import op_norm, renormalize
from .linalg import GAP_TOL, canonical_sign
from .words import cyclic_reduce, _as_word

__all__ = ["BallEvaluation", "evaluate_ball", "prefix_evaluation", "PrefixEvaluation"]


def _lifts_needed(d):
    fwd = list(range(1, d // 2 + 1))
    back = sorted({d - k for k in range(d // 2 + 1, d)} | {1})
    return fwd, back


def _mu_from(S):
    mu = np.diff(S, axis=-1)
    return -np.sort(-mu, axis=-1)


def _merge(parts):
    return -np.sort(-np.concatenate(parts, axis=-1), axis=-1)


def _spectral_radius(m):
    if m.shape[-1] == 1:
        return np.abs(m[..., 0, 0])
    return np.max(np.abs(np.linalg.eigvals(m)), axis=-1)


class _Products:
    """Renormalized forward and inverse products of one lift over a ball."""

    def __init__(self, rho_k, ball, forward=True, backward=True):
        n = len(ball)
        D = rho_k.dim
        self.fwd = np.empty((n, D, D)) if forward else None
        self.fwd_log = np.zeros(n) if forward else None
        self.bwd = np.empty((n, D, D)) if backward else None
        self.bwd_log = np.zeros(n) if backward else None
        if forward:
            self.fwd[0] = np.eye(D)
        if backward:
            self.bwd[0] = np.eye(D)
        lengths = ball.lengths
        parent, last = ball.parent, ball.last
        for r in range(1, ball.radius + 1):
            lvl = np.flatnonzero(lengths == r)
            if lvl.size == 0:
                break
            for x in np.unique(last[lvl]):
                idx = lvl[last[lvl] == x]
                par = parent[idx]
                if forward:
                    m, s = renormalize(self.fwd[par] @ rho_k.image(int(x)), self.fwd_log[par])
                    self.fwd[idx], self.fwd_log[idx] = m, s
                if backward:
                    m, s = renormalize(rho_k.image(-int(x)) @ self.bwd[par], self.bwd_log[par])
                    self.bwd[idx], self.bwd_log[idx] = m, s


class BallEvaluation:
    """Cartan vectors, Lyapunov vectors and attractors over a ball.

    Attributes
    ----------
    mu : (n, d) array
        Cartan vectors, descending, in ball order.
    logdet : (n,) array
        ``log |det rho(g)|``.
    """

    def __init__(self, rho, ball):
        self.rho = rho
        self.ball = ball
        self.dim = d = rho.dim
        self._lam = None
        self._attr = None
        self._full = None
        ld = rho.log_abs_det_letters()
        logdet = np.zeros(len(ball))
        for i in range(1, len(ball)):
            logdet[i] = logdet[ball.parent[i]] + ld[int(ball.last[i])]
        self.logdet = logdet
        if rho.summands:
            self.parts = [BallEvaluation(r, ball) for r in rho.summands]
            self._prods = None
            self.mu = _merge([p.mu for p in self.parts])
            return
        self.parts = None
        fwd, back = _lifts_needed(d)
        self._prods = {}
        for k in sorted(set(fwd) | set(back)):
            self._prods[k] = _Products(rho.exterior(k), ball, forward=k in fwd, backward=k in back)
        n = len(ball)
        S = np.zeros((n, d + 1))
        S[:, d] = self.logdet
        for k in range(1, d):
            if k <= d // 2:
                S[:, k] = self._prods[k].fwd_log
            else:
                S[:, k] = self.logdet + self._prods[d - k].bwd_log
        self.mu = _mu_from(S)

    def __len__(self):
        return len(self.ball)

    # -- Cartan vectors of products of two ball elements
    def mu_concat(self, a, b):
        """Cartan vectors of ``rho(w_a) rho(w_b)`` for index arrays ``a, b``.

        Accurate when the concatenation has little cancellation, e.g. when
        it is a reduced word.
        """
        a = np.atleast_1d(np.asarray(a, dtype=np.int64))
        b = np.atleast_1d(np.asarray(b, dtype=np.int64))
        if self.parts is not None:
            return _merge([p.mu_concat(a, b) for p in self.parts])
        d = self.dim
        S = np.zeros((a.size, d + 1))
        ldet = self.logdet[a] + self.logdet[b]
        S[:, d] = ldet
        for k in range(1, d):
            if k <= d // 2:
                p = self._prods[k]
                m = p.fwd[a] @ p.fwd[b]
                S[:, k] = p.fwd_log[a] + p.fwd_log[b] + np.log(op_norm(m))
            else:
                p = self._prods[d - k]
                m = p.bwd[b] @ p.bwd[a]
                S[:, k] = ldet + p.bwd_log[a] + p.bwd_log[b] + np.log(op_norm(m))
        return _mu_from(S)

    def reduced_between(self, i, j):
        """Index pairs ``(i', j')`` with ``w_i^-1 w_j = w_i'^-1 w_j'`` and no
        cancellation between ``w_i'^-1`` and ``w_j'`` (free groups)."""
        i = np.atleast_1d(np.asarray(i, dtype=np.int64))
        j = np.atleast_1d(np.asarray(j, dtype=np.int64))
        ball = self.ball
        if ball.model.kind != "free":
            return i, j
        from .kernels import common_prefix_lengths

        m = common_prefix_lengths(ball.prefix_table, i, j)
        suf = ball.suffix_table
        return suf[i, m], suf[j, m]

    def mu_between(self, i, j):
        """Cartan vectors of ``rho(w_i)^-1 rho(w_j)``.

        For free groups the common prefix is stripped first, so the
        product is evaluated along the reduced word.
        """
        i, j = self.reduced_between(i, j)
        return self.mu_concat(self.ball.inverse[i], j)

    # -- Lyapunov vectors
    @property
    def lam(self):
        if self._lam is None:
            if self.parts is not None:
                self._lam = _merge([p.lam for p in self.parts])
            else:
                self._lam = self._lyapunov()
        return self._lam

    def _lyapunov(self):
        ball, d, n = self.ball, self.dim, len(self.ball)
        if ball.model.kind == "free":
            rep = np.empty(n, dtype=np.int64)
            for i, w in enumerate(ball.words):
                rep[i] = ball.index[cyclic_reduce(w)]
            todo = np.unique(rep)
        else:
            rep = np.arange(n)
            todo = rep
        S = np.zeros((todo.size, d + 1))
        S[:, d] = self.logdet[todo]
        for k in range(1, d):
            if k <= d // 2:
                p = self._prods[k]
                S[:, k] = p.fwd_log[todo] + np.log(_spectral_radius(p.fwd[todo]))
            else:
                p = self._prods[d - k]
                S[:, k] = self.logdet[todo] + p.bwd_log[todo] + np.log(_spectral_radius(p.bwd[todo]))
        lam_todo = _mu_from(S)
        return lam_todo[np.searchsorted(todo, rep)]

    # -- attractors
    def _first_lift(self):
        if self._prods is not None:
            return self._prods[1]
        if self._full is None:
            self._full = _Products(self.rho, self.ball)
        return self._full

    def attractors(self, gap_tol=GAP_TOL):
        """``(plus, minus, ok_plus, ok_minus)``: attracting lines, normals of
        repelling hyperplanes, and masks of elements whose singular value
        gaps make them well defined."""
        if self._attr is None:
            p = self._first_lift()
            u, _, _ = np.linalg.svd(p.fwd)
            # the repelling hyperplane of g is normal to the bottom left
            # singular vector of g, the top right singular vector of g^-1
            _, _, vt = np.linalg.svd(p.bwd)
            plus = np.array([canonical_sign(v) for v in u[:, :, 0]])
            minus = np.array([canonical_sign(v) for v in vt[:, 0, :]])
            self._attr = (plus, minus)
        plus, minus = self._attr
        lg = np.log(gap_tol)
        ok_plus = (self.mu[:, 0] - self.mu[:, 1]) >= lg
        ok_minus = (self.mu[:, -2] - self.mu[:, -1]) >= lg
        return plus, minus, ok_plus, ok_minus

    def gap(self, i=1):
        return self.mu[:, i - 1] - self.mu[:, i]


def evaluate_ball(rho, ball):
    return BallEvaluation(rho, ball)


class PrefixEvaluation:
    """Cartan vectors of every prefix of a word, with attractors on request.

    ``mu[m]`` is the Cartan vector of the length-``m`` prefix.
    """

    def __init__(self, rho, w, keep=()):
        w = _as_word(w)
        self.word = w
        self.rho = rho
        keep = set(keep)
        if rho.summands:
            parts = [PrefixEvaluation(r, w) for r in rho.summands]
            self.mu = _merge([p.mu for p in parts])
            self._snap = _sweep(rho, w, [1], [1], keep)[2]
            return
        d = rho.dim
        fwd, back = _lifts_needed(d)
        logs_f, logs_b, self._snap = _sweep(rho, w, fwd, back, keep)
        n = len(w) + 1
        ld = rho.log_abs_det_letters()
        logdet = np.concatenate([[0.0], np.cumsum([ld[x] for x in w])])
        S = np.zeros((n, d + 1))
        S[:, d] = logdet
        for k in range(1, d):
            if k <= d // 2:
                S[:, k] = logs_f[k]
            else:
                S[:, k] = logdet + logs_b[d - k]
        self.mu = _mu_from(S)

    def attractor_vectors(self, m):
        """``(plus, minus_normal)`` for the length-``m`` prefix, as unit vectors."""
        P, Q = self._snap[m]
        u, _, _ = np.linalg.svd(P)
        _, _, vt = np.linalg.svd(Q)
        return canonical_sign(u[:, 0]), canonical_sign(vt[0])


def _sweep(rho, w, fwd, back, keep):
    """Walk along ``w`` keeping renormalized products of the needed lifts.

    Forward products multiply on the right; inverse products
    ``rho(prefix)^-1`` multiply on the left.
    """
    ks = sorted(set(fwd) | set(back))
    lifts = {k: rho.exterior(k) for k in ks}
    P = {k: np.eye(lifts[k].dim) for k in fwd}
    Q = {k: np.eye(lifts[k].dim) for k in back}
    Pl = {k: 0.0 for k in fwd}
    Ql = {k: 0.0 for k in back}
    logs_f = {k: [0.0] for k in fwd}
    logs_b = {k: [0.0] for k in back}
    snap = {}
    if 0 in keep:
        snap[0] = (P[1].copy(), Q[1].copy())
    for m, x in enumerate(w, start=1):
        for k in fwd:
            P[k], Pl[k] = renormalize(P[k] @ lifts[k].image(x), Pl[k])
            logs_f[k].append(Pl[k])
        for k in back:
            Q[k], Ql[k] = renormalize(lifts[k].image(-x) @ Q[k], Ql[k])
            logs_b[k].append(Ql[k])
        if m in keep:
            snap[m] = (P[1].copy(), Q[1].copy())
    return ({k: np.array(v) for k, v in logs_f.items()},
            {k: np.array(v) for k, v in logs_b.items()}, snap)


def prefix_evaluation(rho, w, keep=()):
    return PrefixEvaluation(rho, w, keep)
