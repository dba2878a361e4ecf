"""Linear algebra for representations into GL(d, R).

Cartan vectors (log singular values) and Lyapunov vectors (log eigenvalue
moduli), Cartan attractors, root and weight functionals, Gromov products
relative to a functional, and the functors used to build new
representations (exterior, symmetric and tensor powers, direct sums,
duals, complexification).

Word-level quantities go through :func:`cartan_word` and friends, which
evaluate the k-th partial sum ``log sigma_1 + ... + log sigma_k`` as the
top singular value of the k-th exterior power.  Small singular values of
long products are then resolved to relative precision instead of being
swamped by rounding of the large ones.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, permutations
from math import factorial, comb
import json

import numpy as np

from ._product import renormalize, scaled_product
from .words import FreeGroup, format_word, parse_word, reduce, inverse, model_from_json, _as_word

__all__ = [
    "SingularProduct",
    "DegenerateGap",
    "NotProximal",
    "ScaledMatrix",
    "ProjectivePoint",
    "Hyperplane",
    "LinearFunctional",
    "Representation",
    "GAP_TOL",
    "rep_apply",
    "cartan",
    "lyapunov",
    "attractor_plus",
    "attractor_minus",
    "functional",
    "cartan_word",
    "lyapunov_word",
    "gromov_product_phi",
    "projective_distance",
    "point_hyperplane_distance",
    "exterior_power",
    "symmetric_power",
    "tensor",
    "direct_sum",
    "dual",
    "complexify",
    "proximal_data",
    "ProximalData",
    "canonical_sign",
]

GAP_TOL = 1.0 + 1e-6
SIGN_EPS = 1e-12
COND_LIMIT = 1e15


class SingularProduct(ArithmeticError):
    """A word product is too ill-conditioned to be resolved in floating point."""


class DegenerateGap(ValueError):
    """The singular value gap needed for an attractor is below tolerance."""


class NotProximal(ValueError):
    """No spectral gap between the top two eigenvalue moduli."""


# ---------------------------------------------------------------- containers

@dataclass(frozen=True)
class ScaledMatrix:
    """The matrix ``exp(log_scale) * mat``."""

    mat: np.ndarray
    log_scale: float = 0.0

    @property
    def dim(self):
        return self.mat.shape[0]

    def dense(self):
        return self.mat * np.exp(self.log_scale)

    def __matmul__(self, other):
        m, s = renormalize(self.mat @ other.mat, self.log_scale + other.log_scale)
        return ScaledMatrix(m, s)

    def condition(self):
        s = np.linalg.svd(self.mat, compute_uv=False)
        return np.inf if s[-1] == 0 else float(s[0] / s[-1])


def canonical_sign(v):
    """Unit vector with its first non-negligible coordinate positive."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    nz = np.flatnonzero(np.abs(v) > SIGN_EPS)
    if nz.size and v[nz[0]] < 0:
        v = -v
    return v


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    dir: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dir", canonical_sign(self.dir))

    def __eq__(self, other):
        return isinstance(other, ProjectivePoint) and projective_distance(self, other) < 1e-12

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Hyperplane:
    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "normal", canonical_sign(self.normal))

    def __eq__(self, other):
        return isinstance(other, Hyperplane) and abs(abs(self.normal @ other.normal) - 1.0) < 1e-12

    __hash__ = None


class LinearFunctional:
    """Linear functional on Cartan or Lyapunov vectors.

    Indices are 1-based.  ``root(i)`` is ``e_i - e_{i+1}``, ``weight(i)``
    is ``e_1 + ... + e_i`` evaluated on the trace-free part, ``epsilon(i)``
    reads entry ``i`` and ``custom`` applies fixed coefficients to the
    trace-free part.
    """

    __slots__ = ("kind", "index", "coeffs")

    def __init__(self, kind, index=None, coeffs=None):
        if kind not in ("root", "weight", "epsilon", "custom"):
            raise ValueError(f"unknown functional kind {kind!r}")
        if kind == "custom":
            if coeffs is None:
                raise ValueError("custom functional needs coefficients")
            coeffs = tuple(float(c) for c in coeffs)
        elif index is None or index < 1:
            raise ValueError("functional index must be >= 1")
        self.kind = kind
        self.index = index
        self.coeffs = coeffs

    @classmethod
    def root(cls, i):
        return cls("root", i)

    @classmethod
    def weight(cls, i):
        return cls("weight", i)

    @classmethod
    def epsilon(cls, i):
        return cls("epsilon", i)

    @classmethod
    def custom(cls, coeffs):
        return cls("custom", coeffs=coeffs)

    @classmethod
    def parse(cls, s):
        """``"root:1"``, ``"weight:2"``, ``"eps:1"`` or ``"custom:1,0,-1"``."""
        kind, _, arg = s.partition(":")
        kind = {"eps": "epsilon", "alpha": "root", "omega": "weight"}.get(kind, kind)
        if kind == "custom":
            return cls.custom([float(c) for c in arg.split(",")])
        return cls(kind, int(arg))

    def __repr__(self):
        if self.kind == "custom":
            return f"LinearFunctional.custom({list(self.coeffs)})"
        return f"LinearFunctional.{self.kind}({self.index})"

    def __str__(self):
        if self.kind == "custom":
            return "custom:" + ",".join(repr(c) for c in self.coeffs)
        return f"{self.kind}:{self.index}"

    def __eq__(self, other):
        return isinstance(other, LinearFunctional) and str(self) == str(other)

    def __hash__(self):
        return hash(str(self))

    def coefficients(self, d):
        """Coefficient vector ``c`` so that the value on ``v`` is ``c @ v``."""
        c = np.zeros(d)
        if self.kind == "custom":
            if len(self.coeffs) != d:
                raise ValueError(f"functional has {len(self.coeffs)} coefficients, vector has {d}")
            c[:] = self.coeffs
            return c - c.mean()
        i = self.index
        if self.kind == "root":
            if i >= d:
                raise ValueError(f"root index {i} needs dimension > {i}, got {d}")
            c[i - 1], c[i] = 1.0, -1.0
            return c
        if i > d:
            raise ValueError(f"index {i} exceeds dimension {d}")
        if self.kind == "epsilon":
            c[i - 1] = 1.0
            return c
        c[:i] = 1.0
        return c - c.mean()

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        return v @ self.coefficients(v.shape[-1])


def functional(phi, v):
    return float(phi(v))


# ---------------------------------------------------------------- functors on matrices

@lru_cache(maxsize=None)
def _subsets(d, k):
    return np.array(list(combinations(range(d), k)), dtype=np.intp).reshape(-1, k)


def exterior_power(m, k):
    """k-th exterior power on the lexicographic k-subset basis.

    Accepts a matrix, a stack of matrices or a :class:`Representation`.
    """
    if isinstance(m, Representation):
        return m.lift(lambda x: exterior_power(x, k), name=f"ext{k}")
    m = np.asarray(m, dtype=float)
    d = m.shape[-1]
    if not 1 <= k <= d:
        raise ValueError(f"exterior power needs 1 <= k <= {d}")
    if k == 1:
        return m.copy()
    idx = _subsets(d, k)
    sub = m[..., idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)


@lru_cache(maxsize=None)
def _sym_tables(d, q):
    basis = list(combinations_with_replacement(range(d), q))
    orderings = [sorted(set(permutations(b))) for b in basis]
    # sqrt(q! / alpha!) with alpha the multiplicity vector of the multiset
    weights = []
    for b in basis:
        den = 1
        for j in range(d):
            den *= factorial(b.count(j))
        weights.append(np.sqrt(factorial(q) / den))
    return basis, orderings, np.array(weights)


def symmetric_power(m, q, normalized=True):
    """q-th symmetric power on the degree-q monomial basis.

    With ``normalized=False`` the coordinates are the plain monomial
    coefficients, so ``symmetric_power([[1, 1], [0, 1]], 2)`` is
    ``[[1, 2, 1], [0, 1, 1], [0, 0, 1]]``.  The default rescales monomial
    ``x^alpha`` by ``sqrt(q! / alpha!)``, which makes the functor carry
    orthogonal matrices to orthogonal matrices; singular values of the
    output are then products of q singular values of the input.
    """
    if isinstance(m, Representation):
        return m.lift(lambda x: symmetric_power(x, q, normalized), name=f"sym{q}")
    if q < 1:
        raise ValueError("symmetric power needs q >= 1")
    m = np.asarray(m, dtype=float)
    d = m.shape[-1]
    if q == 1:
        return m.copy()
    basis, orderings, w = _sym_tables(d, q)
    n = len(basis)
    out = np.zeros(m.shape[:-2] + (n, n))
    for a, rows in enumerate(basis):
        for b, perms in enumerate(orderings):
            acc = 0.0
            for cols in perms:
                term = m[..., rows[0], cols[0]]
                for r, c in zip(rows[1:], cols[1:]):
                    term = term * m[..., r, c]
                acc = acc + term
            out[..., a, b] = acc
    if normalized:
        out = out * (w[:, None] / w[None, :])
    return out


def tensor(a, b):
    """Kronecker product, row-major blocks: ``(A (x) B)[i*m+k, j*m+l] = A[i,j] B[k,l]``."""
    if isinstance(a, Representation):
        return a.combine(b, tensor, name="tensor")
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.ndim == 2 and b.ndim == 2:
        return np.kron(a, b)
    out = np.einsum("...ij,...kl->...ikjl", a, b)
    sh = out.shape
    return out.reshape(sh[:-4] + (sh[-4] * sh[-3], sh[-2] * sh[-1]))


def direct_sum(a, b):
    if isinstance(a, Representation):
        out = a.combine(b, direct_sum, name="sum")
        # Cartan and Lyapunov vectors of a direct sum are merges of those of
        # the summands; keeping them avoids rounding noise in repeated entries
        out.summands = (a.summands or (a,)) + (b.summands or (b,))
        return out
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    p, q = a.shape[-1], b.shape[-1]
    batch = np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    out = np.zeros(batch + (p + q, p + q))
    out[..., :p, :p] = a
    out[..., p:, p:] = b
    return out


def dual(a):
    """Inverse transpose."""
    if isinstance(a, Representation):
        return Representation(
            [m.T.copy() for m in a._neg], model=a.model,
            inverse_images=[m.T.copy() for m in a._pos],
        )
    return np.swapaxes(np.linalg.inv(np.asarray(a, dtype=float)), -1, -2)


def complexify(a, imag=None):
    """Real 2n x 2n form ``[[Re, -Im], [Im, Re]]`` of a complex n x n matrix.

    ``a`` may be complex, or the real part with ``imag`` given separately.
    """
    a = np.asarray(a)
    if imag is None:
        re, im = a.real.astype(float), a.imag.astype(float)
    else:
        re, im = a.astype(float), np.asarray(imag, dtype=float)
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


# ---------------------------------------------------------------- representations

class Representation:
    """Assignment of invertible matrices to the generators of a group model.

    ``images[i]`` is the image of generator ``i + 1``.  Inverse images are
    computed once (or supplied exactly by functors) and reused.
    """

    def __init__(self, images, model=None, unimodularize=False, inverse_images=None):
        pos = [np.array(m, dtype=float) for m in images]
        if not pos:
            raise ValueError("a representation needs at least one generator")
        d = pos[0].shape[0]
        for m in pos:
            if m.shape != (d, d):
                raise ValueError("generator images must be square of a common size")
        if model is None:
            model = FreeGroup(len(pos))
        if model.rank != len(pos):
            raise ValueError(f"model has rank {model.rank} but {len(pos)} images were given")
        logdet = []
        for m in pos:
            sign, ld = np.linalg.slogdet(m)
            if sign == 0 or not np.isfinite(ld):
                raise ValueError("generator images must be invertible")
            logdet.append(ld)
        if inverse_images is None:
            neg = [np.linalg.inv(m) for m in pos]
        else:
            neg = [np.array(m, dtype=float) for m in inverse_images]
        if unimodularize:
            for i in range(len(pos)):
                s = np.exp(logdet[i] / d)
                pos[i] = pos[i] / s
                neg[i] = neg[i] * s
            logdet = [0.0] * len(pos)
        self.dim = d
        self.model = model
        self.unimodularized = bool(unimodularize) or all(abs(x) < 1e-9 for x in logdet)
        self._pos = tuple(pos)
        self._neg = tuple(neg)
        self._logdet = np.array(logdet)
        self._ext = {}
        self.summands = None
        for m in self._pos + self._neg:
            m.setflags(write=False)

    # -- basic access
    @property
    def rank(self):
        return len(self._pos)

    @property
    def images(self):
        return self._pos

    def image(self, letter):
        return self._pos[letter - 1] if letter > 0 else self._neg[-letter - 1]

    def letter_images(self):
        out = {}
        for i in range(self.rank):
            out[i + 1] = self._pos[i]
            out[-(i + 1)] = self._neg[i]
        return out

    def log_abs_det(self, w):
        return float(sum(self._logdet[x - 1] if x > 0 else -self._logdet[-x - 1] for x in w))

    def log_abs_det_letters(self):
        return {i + 1: self._logdet[i] for i in range(self.rank)} | {
            -(i + 1): -self._logdet[i] for i in range(self.rank)}

    def __repr__(self):
        return f"Representation(dim={self.dim}, rank={self.rank}, model={self.model!r})"

    # -- functors
    def lift(self, fn, name=None):
        """Apply a matrix functor generator-wise (to images and inverse images)."""
        return Representation([fn(m) for m in self._pos], model=self.model,
                              inverse_images=[fn(m) for m in self._neg])

    def combine(self, other, fn, name=None):
        if not isinstance(other, Representation):
            raise TypeError("expected a Representation")
        if other.rank != self.rank or type(other.model) is not type(self.model) \
                or not self.model.same_group(other.model):
            raise ValueError("binary functors need representations of the same group model")
        return Representation([fn(a, b) for a, b in zip(self._pos, other._pos)], model=self.model,
                              inverse_images=[fn(a, b) for a, b in zip(self._neg, other._neg)])

    def exterior(self, k):
        """Cached k-th exterior power lift (k = 1 is the representation itself)."""
        if k == 1:
            return self
        if k not in self._ext:
            self._ext[k] = exterior_power(self, k)
        return self._ext[k]

    def conjugate(self, p):
        p = np.asarray(p, dtype=float)
        pinv = np.linalg.inv(p)
        return Representation([p @ m @ pinv for m in self._pos], model=self.model,
                              inverse_images=[p @ m @ pinv for m in self._neg])

    def with_model(self, model):
        return Representation(self._pos, model=model, inverse_images=self._neg)

    # -- evaluation
    def apply(self, w):
        return rep_apply(self, w)

    def product(self, w):
        """Renormalized product ``(mat, log_scale)`` with no conditioning check."""
        return scaled_product(self.letter_images(), _as_word(w), self.dim)

    # -- serialization
    def to_json(self):
        letters = "abcdefghijklmnopqrstuvwxyz"
        d = {
            "dim": self.dim,
            "generators": {letters[i]: self._pos[i].tolist() for i in range(self.rank)},
            "unimodularize": False,
            "model": self.model.to_json(),
        }
        if self.summands:
            d["summands"] = [r.to_json() for r in self.summands]
        return d

    @classmethod
    def from_json(cls, d):
        if isinstance(d, str):
            d = json.loads(d)
        gens = d["generators"]
        names = sorted(gens)
        expected = [chr(ord("a") + i) for i in range(len(names))]
        if names != expected:
            raise ValueError(f"generators must be named {''.join(expected)}")
        images = [np.array(gens[n], dtype=float) for n in names]
        dim = int(d.get("dim", images[0].shape[0]))
        if any(m.shape != (dim, dim) for m in images):
            raise ValueError(f"generator matrices must be {dim}x{dim}")
        model = model_from_json(d["model"]) if "model" in d else FreeGroup(len(images))
        if d.get("summands"):
            parts = [cls.from_json(s).with_model(model) for s in d["summands"]]
            out = parts[0]
            for r in parts[1:]:
                out = direct_sum(out, r)
            if any(not np.allclose(a, b, rtol=1e-12, atol=1e-12) for a, b in zip(out.images, images)):
                raise ValueError("summands do not match the generator matrices")
            return out
        return cls(images, model=model, unimodularize=bool(d.get("unimodularize", False)))


def rep_apply(rho, w):
    """Product of generator images along ``w`` as a :class:`ScaledMatrix`.

    Raises :class:`SingularProduct` when the product's condition number
    exceeds 1e15, since its small singular values are then lost.
    """
    mat, log_scale = rho.product(w)
    out = ScaledMatrix(mat, log_scale)
    if out.condition() > COND_LIMIT:
        raise SingularProduct(f"product along {format_word(_as_word(w))!r} has condition number above 1e15")
    return out


# ---------------------------------------------------------------- projections

def cartan(m):
    if isinstance(m, ScaledMatrix):
        s = np.linalg.svd(m.mat, compute_uv=False)
        return np.log(s) + m.log_scale
    return np.log(np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False))


def lyapunov(m):
    if isinstance(m, ScaledMatrix):
        ev = np.abs(np.linalg.eigvals(m.mat))
        return np.sort(np.log(ev))[::-1] + m.log_scale
    ev = np.abs(np.linalg.eigvals(np.asarray(m, dtype=float)))
    return np.sort(np.log(ev))[::-1]


def _check_gap(s, i, gap_tol, what):
    if s[i] < gap_tol * s[i + 1]:
        raise DegenerateGap(f"{what}: singular value ratio {s[i] / s[i + 1]:.12g} below {gap_tol}")


def attractor_plus(m, gap_tol=GAP_TOL):
    mat = m.mat if isinstance(m, ScaledMatrix) else np.asarray(m, dtype=float)
    u, s, _ = np.linalg.svd(mat)
    _check_gap(s, 0, gap_tol, "attractor")
    return ProjectivePoint(u[:, 0])


def attractor_minus(m, gap_tol=GAP_TOL):
    mat = m.mat if isinstance(m, ScaledMatrix) else np.asarray(m, dtype=float)
    u, s, _ = np.linalg.svd(mat)
    _check_gap(s, len(s) - 2, gap_tol, "repelling hyperplane")
    return Hyperplane(u[:, -1])


def projective_distance(p, q):
    a = p.dir if isinstance(p, ProjectivePoint) else canonical_sign(p)
    b = q.dir if isinstance(q, ProjectivePoint) else canonical_sign(q)
    # norm of the component orthogonal to a; accurate for nearly equal lines
    r = b - float(a @ b) * a
    return float(min(1.0, np.sqrt(float(r @ r))))


def point_hyperplane_distance(p, h):
    a = p.dir if isinstance(p, ProjectivePoint) else canonical_sign(p)
    n = h.normal if isinstance(h, Hyperplane) else canonical_sign(h)
    return float(min(1.0, abs(a @ n)))


@dataclass(frozen=True)
class ProximalData:
    top_modulus: float
    point: ProjectivePoint
    hyperplane: Hyperplane
    biproximal: bool


def proximal_data(m, gap_tol=GAP_TOL):
    """Attracting eigenline and repelling invariant hyperplane of a proximal matrix."""
    if isinstance(m, ScaledMatrix):
        mat, log_scale = m.mat, m.log_scale
    else:
        mat, log_scale = np.asarray(m, dtype=float), 0.0
    ev, vec = np.linalg.eig(mat)
    order = np.argsort(-np.abs(ev), kind="stable")
    mods = np.abs(ev[order])
    if mods.size < 2 or mods[0] <= gap_tol * mods[1]:
        raise NotProximal("top two eigenvalue moduli are not separated")
    top = vec[:, order[0]]
    evt, vect = np.linalg.eig(mat.T)
    top_t = vect[:, int(np.argmax(np.abs(evt)))]
    biprox = mods[-2] > gap_tol * mods[-1]
    return ProximalData(
        top_modulus=float(np.log(mods[0]) + log_scale),
        point=ProjectivePoint(np.real(top)),
        hyperplane=Hyperplane(np.real(top_t)),
        biproximal=bool(biprox),
    )


# ---------------------------------------------------------------- word-level, precision-aware

def _top_log_sv(rho, w):
    mat, log_scale = rho.product(w)
    return float(np.log(np.linalg.svd(mat, compute_uv=False)[0])) + log_scale


def _top_log_ev(rho, w):
    mat, log_scale = rho.product(w)
    return float(np.log(np.max(np.abs(np.linalg.eigvals(mat))))) + log_scale


def _partial_sums(rho, w, top):
    d = rho.dim
    w = _as_word(w)
    winv = inverse(w)
    ldet = rho.log_abs_det(w)
    S = np.zeros(d + 1)
    S[d] = ldet
    for k in range(1, d):
        if k <= d // 2:
            S[k] = top(rho.exterior(k), w)
        else:
            S[k] = ldet + top(rho.exterior(d - k), winv)
    return S


def cartan_word(rho, w):
    """Cartan vector of ``rho(w)``, descending."""
    if rho.summands:
        return np.sort(np.concatenate([cartan_word(r, w) for r in rho.summands]))[::-1]
    S = _partial_sums(rho, w, _top_log_sv)
    return np.sort(np.diff(S))[::-1]


def lyapunov_word(rho, w):
    """Lyapunov vector of ``rho(w)``, descending.

    For free groups the word is cyclically reduced first, which does not
    change the spectrum but shortens the product.
    """
    from .words import cyclic_reduce

    w = _as_word(w)
    if rho.model.kind == "free":
        w = cyclic_reduce(w)
    if not w:
        return np.zeros(rho.dim)
    if rho.summands:
        return np.sort(np.concatenate([lyapunov_word(r, w) for r in rho.summands]))[::-1]
    S = _partial_sums(rho, w, _top_log_ev)
    return np.sort(np.diff(S))[::-1]


def gromov_product_phi(rho, g, h, phi):
    """Gromov product of ``rho(g)`` and ``rho(h)`` relative to ``phi``."""
    g, h = reduce(g), reduce(h)
    gi, hi = inverse(g), inverse(h)
    v = (cartan_word(rho, g) + cartan_word(rho, gi) + cartan_word(rho, h) + cartan_word(rho, hi)
         - cartan_word(rho, reduce(gi + h)) - cartan_word(rho, reduce(hi + g)))
    return 0.25 * float(phi(v))

