"""Concrete spaces with exact graph metrics.

Every space is a connected unit-edge graph, possibly the truncation of an
infinite model (regular tree, line, horoball, Bass-Serre tree of BS(1,2)).
Points are plain hashable payloads; ``Point`` pairs a payload with the
identifier of the space it belongs to and is accepted wherever a payload is.
"""
from __future__ import annotations

import hashlib
import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import (
    BadDepth,
    BadValence,
    Disconnected,
    InvalidPoint,
    InvalidSpace,
    MismatchedSpace,
)

INF = math.inf


@dataclass(frozen=True)
class Point:
    space_id: str
    payload: Hashable


def to_json(payload):
    """Render a payload as JSON-friendly data (tuples become lists)."""
    if isinstance(payload, tuple):
        return [to_json(p) for p in payload]
    if isinstance(payload, Fraction):
        return str(payload) if payload.denominator != 1 else int(payload)
    return payload


class Space:
    """Base class. Subclasses supply ``contains``, ``dist`` and ``neighbors``."""

    kind = "space"
    is_tree = False
    truncated = False

    def __init__(self, space_id: str):
        self.space_id = space_id
        self.base: Hashable = None

    def __repr__(self) -> str:
        return f"<{self.space_id}>"

    def contains(self, x) -> bool:
        raise NotImplementedError

    def dist(self, x, y):
        raise NotImplementedError

    def neighbors(self, x) -> list:
        raise NotImplementedError

    def points(self) -> list:
        raise NotImplementedError

    def on_frontier(self, x) -> bool:
        return False

    def margin(self, x):
        """Distance from ``x`` to the truncation frontier (inf if none)."""
        return INF

    def shrink(self, k: int = 1) -> "Space":
        return self

    def unbounded(self) -> "Space":
        return self

    def describe(self) -> dict:
        return {"kind": self.kind, "id": self.space_id}

    # convenience
    def point(self, payload) -> Point:
        if not self.contains(payload):
            raise InvalidPoint(f"{payload!r} is not a point of {self.space_id}")
        return Point(self.space_id, payload)

    def ball(self, center, r) -> list:
        """All points within distance ``r`` of ``center`` (BFS order)."""
        seen = {center: 0}
        order = [center]
        queue = deque([center])
        while queue:
            x = queue.popleft()
            if seen[x] >= r:
                continue
            for y in self.neighbors(x):
                if y not in seen:
                    seen[y] = seen[x] + 1
                    order.append(y)
                    queue.append(y)
        return order

    def payload(self, p):
        """Unwrap and validate a point given as ``Point`` or payload."""
        if isinstance(p, Point):
            if p.space_id != self.space_id:
                raise MismatchedSpace(f"{p.space_id} is not {self.space_id}")
            p = p.payload
        try:
            ok = self.contains(p)
        except (TypeError, ValueError):
            ok = False
        if not ok:
            raise InvalidPoint(f"{p!r} is not a point of {self.space_id}")
        return p


# --------------------------------------------------------------------------
# explicit graphs


class _GraphMetric:
    """Adjacency lists plus cached BFS rows over an index of the vertices."""

    def __init__(self, vertices: Iterable, adj: dict):
        self.vertices = sorted(vertices)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self.adj = {v: sorted(set(adj.get(v, ()))) for v in self.vertices}
        self._nbr = [[self.index[w] for w in self.adj[v]] for v in self.vertices]
        self._rows: dict[int, np.ndarray] = {}
        self._matrix = None

    def row(self, v) -> np.ndarray:
        i = self.index[v]
        r = self._rows.get(i)
        if r is None:
            r = self._bfs(i)
            self._rows[i] = r
        return r

    def _bfs(self, i: int) -> np.ndarray:
        n = len(self.vertices)
        d = [-1] * n
        d[i] = 0
        frontier = [i]
        nbr = self._nbr
        k = 0
        while frontier:
            k += 1
            nxt = []
            for u in frontier:
                for w in nbr[u]:
                    if d[w] < 0:
                        d[w] = k
                        nxt.append(w)
            frontier = nxt
        return np.array(d, dtype=np.int64)

    def dist(self, u, v) -> int:
        iu, iv = self.index[u], self.index[v]
        r = self._rows.get(iv)
        if r is not None:
            return int(r[iu])
        return int(self.row(u)[iv])

    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.stack([self.row(v) for v in self.vertices])
        return self._matrix

    def connected(self) -> bool:
        return bool(len(self.vertices) == 0 or (self.row(self.vertices[0]) >= 0).all())


class GraphSpace(Space):
    """A space backed by an explicit finite graph."""

    kind = "finite_graph"

    def __init__(self, space_id: str, vertices, adj, base=None):
        super().__init__(space_id)
        self.graph = _GraphMetric(vertices, adj)
        if not self.graph.connected():
            raise Disconnected(f"{space_id} is not connected")
        self.base = self.graph.vertices[0] if base is None else base
        self._margins = None

    def contains(self, x) -> bool:
        return x in self.graph.index

    def dist(self, x, y) -> int:
        return self.graph.dist(x, y)

    def neighbors(self, x) -> list:
        return self.graph.adj[x]

    def points(self) -> list:
        return list(self.graph.vertices)

    def frontier(self) -> list:
        return []

    def on_frontier(self, x) -> bool:
        return False

    def margin(self, x):
        fr = self.frontier()
        if not fr:
            return INF
        if self._margins is None:
            d = {v: 0 for v in fr}
            queue = deque(fr)
            while queue:
                u = queue.popleft()
                for w in self.graph.adj[u]:
                    if w not in d:
                        d[w] = d[u] + 1
                        queue.append(w)
            self._margins = d
        return self._margins[x]

    def diameter(self) -> int:
        return int(self.graph.matrix().max())


class FiniteGraph(GraphSpace):
    kind = "finite_graph"

    def __init__(self, edges: Sequence, label: str | None = None, bounded: bool = False,
                 vertices: Iterable | None = None):
        adj: dict = {}
        verts = set(vertices or ())
        for u, v in edges:
            if u == v:
                continue
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
            verts.update((u, v))
        if not verts:
            raise InvalidSpace("a graph needs at least one vertex")
        if label is None:
            canon = sorted(tuple(sorted((repr(u), repr(v)))) for u, v in edges)
            label = "graph#" + hashlib.sha1(repr(canon).encode()).hexdigest()[:10]
        self.edges = sorted({tuple(sorted((u, v))) for u, v in edges if u != v})
        self.bounded = bounded
        if bounded:
            self.kind = "bounded_graph"
        super().__init__(label, verts, adj)
        self.diameter_bound = self.diameter() if bounded else None

    def describe(self) -> dict:
        out = {"kind": self.kind, "id": self.space_id, "vertices": len(self.graph.vertices),
               "edges": len(self.edges)}
        if self.bounded:
            out["diameter"] = self.diameter_bound
        return out


# --------------------------------------------------------------------------
# regular trees (Cayley trees of free groups / free products of Z/2)


def _alphabet(valence: int, letters: str | None):
    if valence % 2 == 0:
        k = valence // 2
        base = letters if letters else "abcdefghijklmnopqrstuvwxyz"[:k]
        if len(base) != k or not base.isalpha() or not base.islower() or len(set(base)) != k:
            raise BadValence(f"valence {valence} needs {k} distinct lowercase letters")
        inv = {}
        for ch in base:
            inv[ch] = ch.upper()
            inv[ch.upper()] = ch
    else:
        base = letters if letters else "abcdefghijklmnopqrstuvwxyz"[:valence]
        if len(base) != valence or len(set(base)) != valence:
            raise BadValence(f"valence {valence} needs {valence} distinct letters")
        inv = {ch: ch for ch in base}
    return inv


def reduce_word(word: str, inv: dict) -> str:
    out: list[str] = []
    for ch in word:
        if out and inv[out[-1]] == ch:
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def invert_word(word: str, inv: dict) -> str:
    return "".join(inv[ch] for ch in reversed(word))


def is_reduced(word: str, inv: dict) -> bool:
    return all(ch in inv for ch in word) and all(
        inv[word[i]] != word[i + 1] for i in range(len(word) - 1))


def common_prefix(u: str, v: str) -> int:
    n = min(len(u), len(v))
    i = 0
    while i < n and u[i] == v[i]:
        i += 1
    return i


class RegularTree(Space):
    """Truncated Cayley tree; vertices are reduced words, root is the empty word.

    Even valence 2k uses the free group on k letters (inverse = uppercase).
    Odd valence v uses v self-inverse letters (free product of v copies of Z/2).
    With ``pendant=True`` every vertex ``w`` carries an extra leaf ``w + "*"``.
    ``radius=None`` gives the untruncated model (no enumeration).
    """

    kind = "regular_tree"
    is_tree = True

    def __init__(self, valence: int, radius: int | None, letters: str | None = None,
                 pendant: bool = False):
        if not isinstance(valence, int) or valence < 3:
            raise BadValence(f"valence must be an integer >= 3, got {valence!r}")
        if radius is not None and (not isinstance(radius, int) or radius < 1):
            raise BadDepth(f"truncation radius must be >= 1, got {radius!r}")
        self.valence = valence
        self.radius = radius
        self.letters = letters
        self.pendant = pendant
        self.inv = _alphabet(valence, letters)
        self.alphabet = sorted(self.inv)
        self.truncated = radius is not None
        extra = f",letters={letters}" if letters else ""
        extra += ",pendant" if pendant else ""
        r = "inf" if radius is None else str(radius)
        super().__init__(f"tree(v={valence},r={r}{extra})")
        self.base = ""

    # payload helpers
    def split(self, x: str) -> tuple[str, int]:
        if self.pendant and x.endswith("*"):
            return x[:-1], 1
        return x, 0

    def reduce(self, word: str) -> str:
        return reduce_word(word, self.inv)

    def invert(self, word: str) -> str:
        return invert_word(word, self.inv)

    def contains(self, x) -> bool:
        if not isinstance(x, str):
            return False
        w, _ = self.split(x)
        if not is_reduced(w, self.inv):
            return False
        return self.radius is None or len(w) <= self.radius

    def dist(self, x: str, y: str) -> int:
        u, lu = self.split(x)
        v, lv = self.split(y)
        if u == v:
            return 0 if lu == lv else 1
        return len(u) + len(v) - 2 * common_prefix(u, v) + lu + lv

    def neighbors(self, x: str) -> list:
        w, leaf = self.split(x)
        if leaf:
            return [w]
        out = []
        if w:
            out.append(w[:-1])
        if self.radius is None or len(w) < self.radius:
            last = self.inv[w[-1]] if w else None
            out.extend(w + ch for ch in self.alphabet if ch != last)
        if self.pendant:
            out.append(w + "*")
        return sorted(out)

    def points(self) -> list:
        if self.radius is None:
            raise InvalidSpace("the untruncated tree cannot be enumerated")
        words = [""]
        layer = [""]
        for _ in range(self.radius):
            nxt = []
            for w in layer:
                last = self.inv[w[-1]] if w else None
                nxt.extend(w + ch for ch in self.alphabet if ch != last)
            words.extend(nxt)
            layer = nxt
        if self.pendant:
            words = words + [w + "*" for w in words]
        return sorted(words)

    def on_frontier(self, x) -> bool:
        w, leaf = self.split(x)
        return self.radius is not None and not leaf and len(w) == self.radius

    def margin(self, x):
        if self.radius is None:
            return INF
        w, leaf = self.split(x)
        return self.radius - len(w) + leaf

    def shrink(self, k: int = 1) -> "RegularTree":
        if self.radius is None:
            return self
        return RegularTree(self.valence, max(1, self.radius - k), self.letters, self.pendant)

    def with_radius(self, radius: int | None) -> "RegularTree":
        return RegularTree(self.valence, radius, self.letters, self.pendant)

    def unbounded(self) -> "RegularTree":
        return self.with_radius(None)

    def describe(self) -> dict:
        return {"kind": self.kind, "id": self.space_id, "valence": self.valence,
                "radius": self.radius, "pendant": self.pendant}


# --------------------------------------------------------------------------
# the line Z


class Line(Space):
    """The integer line, truncated to [-radius, radius]."""

    kind = "line"
    is_tree = True

    def __init__(self, radius: int | None):
        if radius is not None and (not isinstance(radius, int) or radius < 1):
            raise BadDepth(f"truncation radius must be >= 1, got {radius!r}")
        self.radius = radius
        self.truncated = radius is not None
        super().__init__(f"line(r={'inf' if radius is None else radius})")
        self.base = 0

    def contains(self, x) -> bool:
        return isinstance(x, int) and not isinstance(x, bool) and (
            self.radius is None or abs(x) <= self.radius)

    def dist(self, x: int, y: int) -> int:
        return abs(x - y)

    def neighbors(self, x: int) -> list:
        return [y for y in (x - 1, x + 1) if self.contains(y)]

    def points(self) -> list:
        if self.radius is None:
            raise InvalidSpace("the untruncated line cannot be enumerated")
        return list(range(-self.radius, self.radius + 1))

    def on_frontier(self, x) -> bool:
        return self.radius is not None and abs(x) == self.radius

    def margin(self, x):
        return INF if self.radius is None else self.radius - abs(x)

    def shrink(self, k: int = 1) -> "Line":
        return self if self.radius is None else Line(max(1, self.radius - k))

    def unbounded(self) -> "Line":
        return Line(None)

    def describe(self) -> dict:
        return {"kind": self.kind, "id": self.space_id, "radius": self.radius}


# --------------------------------------------------------------------------
# Bass-Serre tree of BS(1,2)


def v2(q: Fraction) -> float:
    """2-adic valuation of a rational (inf for zero)."""
    if q == 0:
        return INF
    num, den = q.numerator, q.denominator
    a = (abs(num) & -abs(num)).bit_length() - 1
    b = (den & -den).bit_length() - 1
    return a - b


def _pow2(k: int) -> Fraction:
    return Fraction(2) ** k


def _v2int(n: int) -> int:
    return (n & -n).bit_length() - 1


def dyadic_mod(num: int, den: int, j: int) -> Fraction:
    """(num / den) mod 2^j as a Fraction in [0, 2^j); den a power of two."""
    if j >= 0:
        return Fraction(num % (den << j), den)
    return Fraction((num << -j) % den, den << -j)


class BSTree(Space):
    """Bass-Serre tree of BS(1,2) = Z[1/2] x| Z acting by x -> 2^m x + b.

    A vertex ``(k, r)`` is the coset ``r + 2^k Z`` with ``0 <= r < 2^k``.
    Its neighbours are the coset containing it, ``(k-1, r mod 2^(k-1))``, and
    the two cosets it contains at level ``k+1``. Every vertex has valence 3 and
    the direction ``k -> -inf`` (the cusp) is fixed by the whole group.
    """

    kind = "bs_tree"
    is_tree = True

    def __init__(self, radius: int | None):
        if radius is not None and (not isinstance(radius, int) or radius < 1):
            raise BadDepth(f"truncation radius must be >= 1, got {radius!r}")
        self.radius = radius
        self.truncated = radius is not None
        super().__init__(f"bs_tree(r={'inf' if radius is None else radius})")
        self.base = (0, Fraction(0))

    @staticmethod
    def normal(k: int, r) -> tuple:
        r = Fraction(r)
        return (k, dyadic_mod(r.numerator, r.denominator, k))

    def _dist(self, x, y) -> int:
        (ka, ra), (kb, rb) = x, y
        diff = ra.numerator * rb.denominator - rb.numerator * ra.denominator
        j = min(ka, kb)
        if diff:
            j = min(j, _v2int(diff) - _v2int(ra.denominator * rb.denominator))
        return ka + kb - 2 * j

    def contains(self, x) -> bool:
        if not (isinstance(x, tuple) and len(x) == 2 and isinstance(x[0], int)):
            return False
        k, r = x
        if not isinstance(r, (int, Fraction)):
            return False
        r = Fraction(r)
        den = r.denominator
        if den & (den - 1) or r < 0 or r >= _pow2(k):
            return False
        return self.radius is None or self._dist(x, self.base) <= self.radius

    def dist(self, x, y) -> int:
        return self._dist(x, y)

    def neighbors(self, x) -> list:
        k, r = x
        cand = [self.normal(k - 1, r), (k + 1, Fraction(r)), (k + 1, Fraction(r) + _pow2(k))]
        return sorted(y for y in cand if self.contains(y))

    def points(self) -> list:
        if self.radius is None:
            raise InvalidSpace("the untruncated tree cannot be enumerated")
        return sorted(self.ball(self.base, self.radius))

    def on_frontier(self, x) -> bool:
        return self.radius is not None and self._dist(x, self.base) == self.radius

    def margin(self, x):
        return INF if self.radius is None else self.radius - self._dist(x, self.base)

    def shrink(self, k: int = 1) -> "BSTree":
        return self if self.radius is None else BSTree(max(1, self.radius - k))

    def unbounded(self) -> "BSTree":
        return BSTree(None)

    def describe(self) -> dict:
        return {"kind": self.kind, "id": self.space_id, "radius": self.radius}


# --------------------------------------------------------------------------
# combinatorial horoballs


class Horoball(GraphSpace):
    """Combinatorial horoball over a line segment [-width, width] or a cycle.

    ``model="full"``: every level carries every base point and level ``k`` has a
    horizontal edge between base points at distance at most ``2^k``; integer
    shifts of the base are isometries.
    ``model="dyadic"``: level ``k`` carries the representatives
    ``2^k * floor(x / 2^k)``, joined to the next representative on the level and
    vertically to their representative one level up.
    """

    kind = "horoball"

    def __init__(self, depth: int, base: str | int = "line", width: int | None = None,
                 model: str = "full"):
        if not isinstance(depth, int) or depth < 1:
            raise BadDepth(f"depth must be >= 1, got {depth!r}")
        if model not in ("full", "dyadic"):
            raise InvalidSpace(f"unknown horoball model {model!r}")
        self.depth = depth
        self.model = model
        self.cycle = None
        if base == "line":
            self.width = width if width is not None else 2 ** (depth - 1)
            if self.width < 1:
                raise BadDepth("base width must be >= 1")
            base_pts = list(range(-self.width, self.width + 1))
            label = f"horoball(line,w={self.width},d={depth},{model})"
        else:
            if not isinstance(base, int) or base < 3:
                raise InvalidSpace(f"cycle base length must be >= 3, got {base!r}")
            self.cycle = base
            self.width = None
            base_pts = list(range(base))
            label = f"horoball(cycle={base},d={depth},{model})"
        self.truncated = True
        levels = self._levels(base_pts)
        self.level_sets = levels
        adj: dict = {}

        def link(u, v):
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)

        verts = [(k, x) for k in range(depth + 1) for x in levels[k]]
        for k in range(depth + 1):
            xs = levels[k]
            if model == "full":
                span = 2 ** k
                for i, x in enumerate(xs):
                    for y in xs[i + 1:]:
                        gap = y - x
                        if self.cycle is not None:
                            gap = min(gap, self.cycle - gap)
                        if gap <= span:
                            link((k, x), (k, y))
                    if k < depth:
                        link((k, x), (k + 1, x))
            else:
                for a, b in zip(xs, xs[1:]):
                    link((k, a), (k, b))
                if self.cycle is not None and len(xs) > 2:
                    link((k, xs[-1]), (k, xs[0]))
                if k < depth:
                    for x in xs:
                        link((k, x), (k + 1, self._rep(x, k + 1)))
            for x in xs:
                adj.setdefault((k, x), set())
        super().__init__(label, verts, adj, base=(0, 0))
        fr = [v for v in self.graph.vertices if self._frontier(v)]
        self._frontier_list = fr

    def _rep(self, x: int, k: int) -> int:
        return (2 ** k) * (x // (2 ** k))

    def _levels(self, base_pts: list) -> list:
        if self.model == "full":
            return [list(base_pts) for _ in range(self.depth + 1)]
        return [sorted({self._rep(x, k) for x in base_pts}) for k in range(self.depth + 1)]

    def level(self, k: int) -> list:
        return list(self.level_sets[k])

    def _frontier(self, v) -> bool:
        k, x = v
        if k == self.depth:
            return True
        if self.cycle is None:
            xs = self.level_sets[k]
            return x == xs[0] or x == xs[-1]
        return False

    def frontier(self) -> list:
        return self._frontier_list

    def on_frontier(self, x) -> bool:
        return self._frontier(x)

    def shrink(self, k: int = 1) -> "Horoball":
        base = "line" if self.cycle is None else self.cycle
        return Horoball(max(1, self.depth - k), base, self.width, self.model)

    def unbounded(self) -> Space:
        if self.model == "full" and self.cycle is None:
            return HoroballModel()
        return self

    def describe(self) -> dict:
        return {"kind": self.kind, "id": self.space_id, "depth": self.depth,
                "width": self.width, "cycle": self.cycle, "model": self.model,
                "vertices": len(self.graph.vertices)}


# --------------------------------------------------------------------------
# products


class Product(Space):
    """Flat product of D >= 1 non-product factors with the l^1 or l^inf metric."""

    kind = "product"

    def __init__(self, factors: Sequence[Space], p=1):
        factors = list(factors)
        if not factors:
            raise InvalidSpace("a product needs at least one factor")
        if any(isinstance(f, Product) for f in factors):
            raise InvalidSpace("product factors must not themselves be products")
        if p in ("inf", "infinity", INF):
            p = INF
        if p not in (1, INF):
            raise InvalidSpace(f"p must be 1 or inf, got {p!r}")
        self.factors = factors
        self.p = p
        self.D = len(factors)
        self.truncated = any(f.truncated for f in factors)
        pname = "1" if p == 1 else "inf"
        super().__init__(f"product(p={pname};" + "|".join(f.space_id for f in factors) + ")")
        self.base = tuple(f.base for f in factors)

    def contains(self, x) -> bool:
        return (isinstance(x, tuple) and len(x) == self.D
                and all(f.contains(c) for f, c in zip(self.factors, x)))

    def payload(self, p):
        if isinstance(p, tuple) and len(p) == self.D and any(isinstance(c, Point) for c in p):
            p = tuple(f.payload(c) for f, c in zip(self.factors, p))
        return super().payload(p)

    def combine(self, parts):
        return sum(parts) if self.p == 1 else max(parts)

    def dist(self, x, y):
        return self.combine([f.dist(a, b) for f, a, b in zip(self.factors, x, y)])

    def neighbors(self, x) -> list:
        out = []
        if self.p == 1:
            for i, f in enumerate(self.factors):
                for y in f.neighbors(x[i]):
                    out.append(x[:i] + (y,) + x[i + 1:])
        else:
            options = [[c] + f.neighbors(c) for f, c in zip(self.factors, x)]
            for combo in itertools.product(*options):
                if combo != x:
                    out.append(tuple(combo))
        return sorted(out)

    def points(self) -> list:
        return [tuple(c) for c in itertools.product(*(f.points() for f in self.factors))]

    def on_frontier(self, x) -> bool:
        return any(f.on_frontier(c) for f, c in zip(self.factors, x))

    def margin(self, x):
        return min(f.margin(c) for f, c in zip(self.factors, x))

    def shrink(self, k: int = 1) -> "Product":
        return Product([f.shrink(k) for f in self.factors], self.p)

    def unbounded(self) -> "Product":
        return Product([f.unbounded() for f in self.factors], self.p)

    def describe(self) -> dict:
        return {"kind": self.kind, "id": self.space_id, "p": 1 if self.p == 1 else "inf",
                "factors": [f.describe() for f in self.factors]}


# --------------------------------------------------------------------------
# constructors


def make_regular_tree(valence: int, radius: int, letters: str | None = None,
                      pendant: bool = False) -> RegularTree:
    return RegularTree(valence, radius, letters, pendant)


def make_horoball(base: str | int = "line", depth: int = 3, width: int | None = None,
                  model: str = "full") -> Horoball:
    return Horoball(depth, base, width, model)


def make_line(radius: int) -> Line:
    return Line(radius)


def make_bs_tree(radius: int) -> BSTree:
    return BSTree(radius)


def make_finite_graph(edges, label: str | None = None) -> FiniteGraph:
    return FiniteGraph(edges, label)


def make_bounded_graph(edges, label: str | None = None) -> FiniteGraph:
    return FiniteGraph(edges, label, bounded=True)


def make_cycle(n: int, bounded: bool = False) -> FiniteGraph:
    if n < 2:
        raise InvalidSpace("a cycle needs at least 2 vertices")
    edges = [(i, (i + 1) % n) for i in range(n)]
    return FiniteGraph(edges, f"cycle({n})", bounded=bounded)


def make_path(n: int) -> FiniteGraph:
    if n < 1:
        raise InvalidSpace("a path needs at least 1 vertex")
    return FiniteGraph([(i, i + 1) for i in range(n - 1)], f"path({n})", vertices=range(n))


def make_grid(rows: int, cols: int) -> FiniteGraph:
    edges = []
    for r in range(rows):
        for c in range(cols):
            if r + 1 < rows:
                edges.append(((r, c), (r + 1, c)))
            if c + 1 < cols:
                edges.append(((r, c), (r, c + 1)))
    return FiniteGraph(edges, f"grid({rows}x{cols})", vertices=[(0, 0)])


def make_product(factors: Sequence[Space], p=1) -> Product:
    return Product(factors, p)


def factor_spaces(space: Space) -> list:
    return list(space.factors) if isinstance(space, Product) else [space]


class HoroballModel(Space):
    """The untruncated full horoball over the integer line.

    Distances use the closed form min over levels j of
    (j - k1) + (j - k2) + ceil(|x - y| / 2^j).
    """

    kind = "horoball_model"

    def __init__(self):
        super().__init__("horoball(line,inf)")
        self.base = (0, 0)

    def contains(self, x) -> bool:
        return (isinstance(x, tuple) and len(x) == 2 and isinstance(x[0], int)
                and isinstance(x[1], int) and x[0] >= 0)

    def dist(self, u, v) -> int:
        (k1, x), (k2, y) = u, v
        gap = abs(x - y)
        best = None
        j = max(k1, k2)
        while True:
            span = 1 << j
            d = (j - k1) + (j - k2) + -(-gap // span)
            if best is None or d < best:
                best = d
            if span >= gap:
                return best
            j += 1

    def neighbors(self, v) -> list:
        k, x = v
        out = [(k + 1, x)]
        if k > 0:
            out.append((k - 1, x))
        span = 1 << k
        out.extend((k, x + s) for s in range(-span, span + 1) if s)
        return sorted(out)

    def points(self) -> list:
        raise InvalidSpace("the untruncated horoball cannot be enumerated")
