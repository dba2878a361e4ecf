"""Free and surface group combinatorics.

Words are tuples of nonzero integers: ``i`` stands for the generator
``a_i`` and ``-i`` for its inverse.  As strings, generator ``i`` is the
``i``-th lowercase letter and its inverse the matching capital, so
``"abA"`` is ``(1, 2, -1)``.

Enumeration uses shortlex order with ``a_1 < a_1^-1 < a_2 < a_2^-1 < ...``.
"""

from dataclasses import dataclass, field
import string

import numpy as np

from ._product import scaled_product, scaled_power

__all__ = [
    "SurfaceRadiusExceeded",
    "Alphabet",
    "FreeGroup",
    "SurfaceGroup",
    "BoundaryRay",
    "Ball",
    "parse_word",
    "format_word",
    "letter_key",
    "reduce",
    "inverse",
    "is_reduced",
    "cyclic_reduce",
    "conjugation_depth",
    "word_length",
    "stable_length",
    "anchor_stable_length",
    "anchor_displacement",
    "ball",
    "gromov_product_group",
    "ray_prefix",
    "cyclic_classes",
    "model_from_json",
]


class SurfaceRadiusExceeded(LookupError):
    """A surface group element was not found within the BFS search radius."""


# ---------------------------------------------------------------- letters

def letter_key(x):
    return 2 * (abs(x) - 1) + (1 if x < 0 else 0)


def parse_word(s):
    """Parse ``"abA"`` into ``(1, 2, -1)``; ``""`` and ``"1"`` are the identity.
    Whitespace is ignored."""
    if s.strip() == "1":
        return ()
    out = []
    for ch in s:
        if ch.isspace():
            continue
        if ch in string.ascii_lowercase:
            out.append(string.ascii_lowercase.index(ch) + 1)
        elif ch in string.ascii_uppercase:
            out.append(-(string.ascii_uppercase.index(ch) + 1))
        else:
            raise ValueError(f"invalid letter {ch!r} in word {s!r}")
    return tuple(out)


def format_word(w):
    return "".join(
        string.ascii_lowercase[x - 1] if x > 0 else string.ascii_uppercase[-x - 1]
        for x in w
    )


def _as_word(w):
    if isinstance(w, str):
        return parse_word(w)
    return tuple(int(x) for x in w)


def reduce(raw):
    """Freely reduce a letter sequence."""
    out = []
    for x in _as_word(raw):
        if x == 0:
            raise ValueError("0 is not a letter")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse(w):
    return tuple(-x for x in reversed(_as_word(w)))


def is_reduced(w):
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def conjugation_depth(w):
    """Number of letters peeled off each end by cyclic reduction."""
    w = reduce(w)
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return i


def cyclic_reduce(w):
    w = reduce(w)
    k = conjugation_depth(w)
    return w[k:len(w) - k]


@dataclass(frozen=True)
class Alphabet:
    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")

    @property
    def letters(self):
        """All letters in shortlex order."""
        out = []
        for i in range(1, self.rank + 1):
            out.extend((i, -i))
        return tuple(out)


# ---------------------------------------------------------------- models

class _MatrixIndex:
    """Tolerant lookup of 2x2 matrices up to sign.

    Two staggered rounding grids are used so that a value sitting next
    to a grid boundary still matches on the other grid.
    """

    def __init__(self, decimals=6):
        self.scale = 10.0 ** decimals
        self._a = {}
        self._b = {}

    def _keys(self, m):
        flat = np.asarray(m, dtype=float).ravel()
        nz = np.flatnonzero(np.abs(flat) > 1e-6)
        if nz.size and flat[nz[0]] < 0:
            flat = -flat
        q = flat * self.scale
        return tuple(np.round(q).astype(np.int64)), tuple(np.round(q + 0.5).astype(np.int64))

    def find(self, m):
        ka, kb = self._keys(m)
        hit = self._a.get(ka)
        if hit is None:
            hit = self._b.get(kb)
        return hit

    def add(self, m, value):
        ka, kb = self._keys(m)
        self._a.setdefault(ka, value)
        self._b.setdefault(kb, value)


class _Model:
    kind = None
    anchor = None

    @property
    def alphabet(self):
        return Alphabet(self.rank)

    @property
    def letters(self):
        return self.alphabet.letters

    @property
    def has_anchor(self):
        return self.anchor is not None

    def anchor_images(self):
        if self.anchor is None:
            raise ValueError(f"{self!r} carries no anchor")
        images = {}
        for i, m in enumerate(self.anchor, start=1):
            images[i] = m
            images[-i] = np.linalg.inv(m)
        return images

    def anchor_product(self, w):
        return scaled_product(self._images(), _as_word(w), 2)

    def _images(self):
        if self._img_cache is None:
            self._img_cache = self.anchor_images()
        return self._img_cache

    def to_json(self):
        d = {"kind": self.kind}
        if self.kind == "free":
            d["rank"] = self.rank
        else:
            d["genus"] = self.genus
        if self.anchor is not None:
            d["anchor"] = [np.asarray(m).tolist() for m in self.anchor]
        return d


class FreeGroup(_Model):
    """Free group of the given rank, optionally anchored by a 2x2 rep."""

    kind = "free"

    def __init__(self, rank, anchor=None):
        if rank < 1:
            raise ValueError("rank must be >= 1")
        self.rank = int(rank)
        self.anchor = None if anchor is None else tuple(np.array(m, dtype=float) for m in anchor)
        if self.anchor is not None and len(self.anchor) != self.rank:
            raise ValueError("anchor needs one matrix per generator")
        self._img_cache = None

    def __repr__(self):
        return f"FreeGroup({self.rank}{', anchored' if self.anchor is not None else ''})"

    def same_group(self, other):
        return isinstance(other, FreeGroup) and other.rank == self.rank


class SurfaceGroup(_Model):
    """Closed orientable surface group of genus ``g`` with generators
    ``a_1, b_1, ..., a_g, b_g`` and relator ``[a_1, b_1] ... [a_g, b_g]``.

    The anchor must be a faithful discrete representation into SL(2, R);
    it solves the word problem by matrix-keyed breadth-first search.
    """

    kind = "surface"

    def __init__(self, genus, anchor, search_radius=5, relator_tol=1e-8):
        if genus < 1:
            raise ValueError("genus must be >= 1")
        self.genus = int(genus)
        self.rank = 2 * self.genus
        self.anchor = tuple(np.array(m, dtype=float) for m in anchor)
        if len(self.anchor) != self.rank or any(m.shape != (2, 2) for m in self.anchor):
            raise ValueError("surface anchor needs 2*genus matrices of shape 2x2")
        self.search_radius = int(search_radius)
        self._img_cache = None
        self._balls = {}
        rel, _ = scaled_product(self._images(), self.relator, 2)
        err = min(np.linalg.norm(rel * s - np.eye(2), 2) for s in (1.0, -1.0))
        # the relator is a product of commutators, so log scale is ~0
        if err > relator_tol * 10:
            raise ValueError(f"anchor violates the surface relator (error {err:.2e})")

    def __repr__(self):
        return f"SurfaceGroup(genus={self.genus})"

    @property
    def relator(self):
        out = []
        for k in range(self.genus):
            a, b = 2 * k + 1, 2 * k + 2
            out.extend((a, b, -a, -b))
        return tuple(out)

    def same_group(self, other):
        return isinstance(other, SurfaceGroup) and other.genus == self.genus and all(
            np.allclose(x, y) for x, y in zip(self.anchor, other.anchor)
        )

    def bfs_ball(self, radius=None):
        radius = self.search_radius if radius is None else int(radius)
        if radius not in self._balls:
            self._balls[radius] = _surface_ball(self, radius)
        return self._balls[radius]

    def locate(self, w, radius=None):
        """Index of the element ``w`` inside the cached BFS ball."""
        b = self.bfs_ball(radius)
        mat = _plain_product(self._images(), _as_word(w))
        hit = b._mindex.find(mat)
        if hit is None:
            raise SurfaceRadiusExceeded(
                f"{format_word(w)!r} not within radius {b.radius} of the identity"
            )
        return hit


def _plain_product(images, w):
    m = np.eye(2)
    for x in w:
        m = m @ images[x]
    return m


def model_from_json(d):
    kind = d.get("kind", "free")
    anchor = d.get("anchor")
    if kind == "free":
        return FreeGroup(int(d["rank"]), anchor=anchor)
    if kind == "surface":
        if anchor is None:
            raise ValueError("surface group models require an anchor")
        return SurfaceGroup(int(d["genus"]), anchor=anchor)
    raise ValueError(f"unknown group model kind {kind!r}")


# ---------------------------------------------------------------- balls

class Ball:
    """Elements of word length <= radius, each once, in shortlex order.

    Behaves as a sequence of words.  ``parent[i]`` is the index of the
    word with its last letter removed; ``inverse[i]`` the index of the
    inverse element.
    """

    def __init__(self, model, radius, words, parent, last, mindex=None):
        self.model = model
        self.radius = radius
        self.words = tuple(words)
        self.parent = np.asarray(parent, dtype=np.int64)
        self.last = np.asarray(last, dtype=np.int64)
        self.lengths = np.fromiter((len(w) for w in self.words), dtype=np.int64,
                                   count=len(self.words))
        self.index = {w: i for i, w in enumerate(self.words)}
        self._mindex = mindex
        self._inverse = None
        self._prefix = None
        self._suffix = None

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __getitem__(self, i):
        return self.words[i]

    def __contains__(self, w):
        return self.find(w) is not None

    def find(self, w):
        w = _as_word(w)
        if self.model.kind == "free":
            return self.index.get(reduce(w))
        hit = self.index.get(w)
        if hit is None and len(w) <= 2 * self.radius + 2:
            hit = self._mindex.find(_plain_product(self.model._images(), w))
        return hit

    def sphere(self, r):
        return np.flatnonzero(self.lengths == r)

    @property
    def inverse(self):
        if self._inverse is None:
            inv = np.empty(len(self), dtype=np.int64)
            for i, w in enumerate(self.words):
                j = self.find(inverse(w))
                if j is None:
                    raise SurfaceRadiusExceeded(f"inverse of {format_word(w)!r} missing")
                inv[i] = j
            self._inverse = inv
        return self._inverse

    @property
    def prefix_table(self):
        """``prefix_table[i, m]`` is the index of ``words[i][:m]``, or -1."""
        if self._prefix is None:
            n, R = len(self), self.radius
            tab = np.full((n, R + 1), -1, dtype=np.int64)
            tab[:, 0] = 0
            for i in range(1, n):
                L = self.lengths[i]
                p = self.parent[i]
                tab[i, :L] = tab[p, :L]
                tab[i, L] = i
            self._prefix = tab
        return self._prefix

    @property
    def suffix_table(self):
        """``suffix_table[i, m]`` is the index of ``words[i][m:]`` (free groups)."""
        if self.model.kind != "free":
            raise NotImplementedError("suffix tables need unique reduced words")
        if self._suffix is None:
            n, R = len(self), self.radius
            tab = np.full((n, R + 1), -1, dtype=np.int64)
            for i, w in enumerate(self.words):
                for m in range(len(w) + 1):
                    tab[i, m] = self.index[w[m:]]
            self._suffix = tab
        return self._suffix

    def neighbours(self):
        """Cayley graph edges ``(i, j)`` with ``words[j] = words[i] * letter``."""
        rows, cols = [], []
        letters = self.model.letters
        for i, w in enumerate(self.words):
            for x in letters:
                if self.model.kind == "free":
                    j = self.index.get(w[:-1] if w and w[-1] == -x else w + (x,))
                else:
                    j = self.find(w + (x,))
                if j is not None:
                    rows.append(i)
                    cols.append(j)
        return np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64)


def _free_ball(model, radius):
    letters = model.letters
    words, parent, last = [()], [-1], [0]
    frontier = [0]
    for _ in range(radius):
        nxt = []
        for i in frontier:
            w = words[i]
            for x in letters:
                if w and w[-1] == -x:
                    continue
                nxt.append(len(words))
                words.append(w + (x,))
                parent.append(i)
                last.append(x)
        frontier = nxt
    return Ball(model, radius, words, parent, last)


def _surface_ball(model, radius):
    images = model._images()
    letters = model.letters
    mindex = _MatrixIndex()
    words, parent, last, mats = [()], [-1], [0], [np.eye(2)]
    mindex.add(mats[0], 0)
    frontier = [0]
    for _ in range(radius):
        nxt = []
        for i in frontier:
            w = words[i]
            for x in letters:
                if w and w[-1] == -x:
                    continue
                m = mats[i] @ images[x]
                if mindex.find(m) is not None:
                    continue
                k = len(words)
                mindex.add(m, k)
                nxt.append(k)
                words.append(w + (x,))
                parent.append(i)
                last.append(x)
                mats.append(m)
        frontier = nxt
    return Ball(model, radius, words, parent, last, mindex=mindex)


def ball(model, radius):
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if model.kind == "free":
        return _free_ball(model, radius)
    return model.bfs_ball(radius)


# ---------------------------------------------------------------- metrics

def word_length(model, g):
    g = _as_word(g)
    if model.kind == "free":
        return len(reduce(g))
    b = model.bfs_ball()
    return int(b.lengths[model.locate(reduce(g))])


def anchor_displacement(model, g):
    """Displacement ``d(g x0, x0)`` in the hyperbolic plane, ``2 log sigma_1``."""
    mat, log_scale = model.anchor_product(_as_word(g))
    s1 = np.linalg.svd(mat, compute_uv=False)[0]
    return max(0.0, 2.0 * (float(np.log(s1)) + log_scale))


def anchor_stable_length(model, g, power=64):
    """Stable displacement ``lim |g^n|_X / n`` by power doubling.

    Returns ``(value, bracket)`` where ``value`` is
    ``(|g^N| - |g^(N/2)|) / (N/2)`` and ``bracket`` the absolute
    difference to the cruder ``|g^N| / N``.
    """
    if power < 2 or power % 2:
        raise ValueError("power must be an even integer >= 2")
    mat, log_scale = model.anchor_product(_as_word(g))
    half = scaled_power(mat, log_scale, power // 2)
    full = scaled_power(mat, log_scale, power)

    def disp(p):
        return max(0.0, 2.0 * (float(np.log(np.linalg.svd(p[0], compute_uv=False)[0])) + p[1]))

    dn, dh = disp(full), disp(half)
    value = max(0.0, (dn - dh) / (power // 2))
    return value, abs(value - dn / power)


def stable_length(model, g, power=64):
    if model.kind == "free":
        return float(len(cyclic_reduce(g)))
    return anchor_stable_length(model, g, power)[0]


def gromov_product_group(model, g, h):
    g, h = reduce(g), reduce(h)
    if model.kind == "free":
        m = 0
        while m < min(len(g), len(h)) and g[m] == h[m]:
            m += 1
        return float(m)
    return 0.5 * (word_length(model, g) + word_length(model, h)
                  - word_length(model, reduce(inverse(g) + h)))


# ---------------------------------------------------------------- boundary

@dataclass(frozen=True)
class BoundaryRay:
    """Eventually periodic boundary point ``head . cycle . cycle . ...``."""

    head: tuple = ()
    cycle: tuple = field(default=(1,))

    def __post_init__(self):
        head, cycle = _as_word(self.head), _as_word(self.cycle)
        if not cycle:
            raise ValueError("cycle must be nonempty")
        if cycle != cyclic_reduce(cycle) or not is_reduced(cycle):
            raise ValueError("cycle must be cyclically reduced")
        if not is_reduced(head) or (head and head[-1] == -cycle[0]):
            raise ValueError("head . cycle must be freely reduced")
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "cycle", cycle)

    @classmethod
    def parse(cls, s):
        """``"head:cycle"`` or just ``"cycle"``."""
        head, _, cycle = s.rpartition(":")
        return cls(parse_word(head), parse_word(cycle))

    def __str__(self):
        return f"{format_word(self.head)}:{format_word(self.cycle)}"


def ray_prefix(x, n):
    if n < 0:
        raise ValueError("n must be >= 0")
    if n <= len(x.head):
        return x.head[:n]
    k = n - len(x.head)
    reps = k // len(x.cycle) + 1
    return x.head + (x.cycle * reps)[:k]


# ---------------------------------------------------------------- cyclic words

def _least_rotation(w):
    keys = [letter_key(x) for x in w]
    best = min(range(len(w)), key=lambda i: keys[i:] + keys[:i])
    return w[best:] + w[:best]


def cyclic_classes(model, max_length):
    """One representative per conjugacy class of cyclically reduced words.

    For free groups the representative is the least cyclic rotation.
    Returned in shortlex order.
    """
    if model.kind != "free":
        raise NotImplementedError("cyclic classes are enumerated for free groups only")
    out = []
    for w in ball(model, max_length).words[1:]:
        if w[0] == -w[-1] and len(w) > 1:
            continue
        if _least_rotation(w) == w:
            out.append(w)
    return out
