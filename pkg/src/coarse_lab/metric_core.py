"""Distances, Gromov products, geodesics and hyperbolicity measurements.

All values are exact: graph distances are integers and Gromov products are
half-integers, returned as ``Fraction``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import EmptySample, EndpointMismatch, MismatchedSpace, TooFewPoints
from .spaces import Point, Space, to_json


def _pt(space: Space, p):
    return space.payload(p)


def dist(space: Space, p, q):
    """Exact distance between two points of ``space``."""
    if isinstance(p, Point) and isinstance(q, Point) and p.space_id != q.space_id:
        raise MismatchedSpace(f"{p.space_id} vs {q.space_id}")
    return space.dist(_pt(space, p), _pt(space, q))


def gromov_product(space: Space, x, y, o) -> Fraction:
    x, y, o = (_pt(space, p) for p in (x, y, o))
    return Fraction(space.dist(x, o) + space.dist(o, y) - space.dist(x, y), 2)


@dataclass(frozen=True)
class Path:
    points: tuple
    lam: Fraction = Fraction(1)
    c: Fraction = Fraction(0)

    def __len__(self) -> int:
        return len(self.points)

    def to_json(self) -> dict:
        return {"points": [to_json(p) for p in self.points], "lambda": str(self.lam),
                "c": str(self.c)}


def geodesic(space: Space, p, q) -> Path:
    """Lexicographically least geodesic: always step to the least neighbour
    that is one closer to ``q``."""
    p, q = _pt(space, p), _pt(space, q)
    pts = [p]
    x = p
    d = space.dist(x, q)
    while d > 0:
        for y in space.neighbors(x):
            if space.dist(y, q) == d - 1:
                x = y
                break
        else:  # pragma: no cover - impossible in a connected graph metric
            raise RuntimeError("no descending neighbour")
        d -= 1
        pts.append(x)
    return Path(tuple(pts))


def all_geodesics(space: Space, p, q, limit: int = 10_000) -> list[Path]:
    """Every geodesic from ``p`` to ``q`` (depth-first, lexicographic order)."""
    p, q = _pt(space, p), _pt(space, q)
    out: list[Path] = []

    def walk(prefix: list, d: int):
        if len(out) >= limit:
            return
        if d == 0:
            out.append(Path(tuple(prefix)))
            return
        for y in space.neighbors(prefix[-1]):
            if space.dist(y, q) == d - 1:
                prefix.append(y)
                walk(prefix, d - 1)
                prefix.pop()

    walk([p], space.dist(p, q))
    return out


def quasigeodesic_constant(space: Space, pts: Sequence, lam=1) -> Fraction:
    """Least ``c`` making ``pts`` a (lam, c)-quasigeodesic under index parametrization."""
    lam = Fraction(lam)
    c = Fraction(0)
    for i, j in itertools.combinations(range(len(pts)), 2):
        d = space.dist(pts[i], pts[j])
        k = j - i
        c = max(c, k / lam - d, d - lam * k)
    return c


def check_certificate(space: Space, path: Path) -> bool:
    return quasigeodesic_constant(space, path.points, path.lam) <= path.c


def metric_violations(space: Space, pts: Sequence | None = None) -> int:
    """Count failures of the metric axioms over all pairs and triples of ``pts``."""
    pts = list(space.points() if pts is None else pts)
    D = distance_matrix(space, pts)
    n = len(pts)
    bad = int((D != D.T).sum()) + int((np.diag(D) != 0).sum())
    off = ~np.eye(n, dtype=bool)
    bad += int((D[off] <= 0).sum())
    for w in range(n):
        # d(x,y) <= d(x,w) + d(w,y)
        bad += int((D > D[:, w][:, None] + D[w, :][None, :]).sum())
    return bad


def distance_matrix(space: Space, pts: Sequence) -> np.ndarray:
    rows = getattr(space, "graph", None)
    if rows is not None and all(p in rows.index for p in pts):
        idx = [rows.index[p] for p in pts]
        return np.stack([rows.row(p)[idx] for p in pts]).astype(np.int64)
    n = len(pts)
    D = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = space.dist(pts[i], pts[j])
    return D


# --------------------------------------------------------------------------
# hyperbolicity


@dataclass
class HyperbolicityReport:
    delta_four_point: Fraction
    delta_tripod: Fraction
    sample_size: int
    exhaustive: bool
    worst_triangle: tuple | None = None

    def to_json(self) -> dict:
        return {"delta_four_point": str(self.delta_four_point),
                "delta_tripod": str(self.delta_tripod),
                "sample_size": self.sample_size, "exhaustive": self.exhaustive}


def four_point_delta(space: Space, pts: Sequence) -> Fraction:
    """max over w,x,y,z of min(<x,z>_w, <z,y>_w) - <x,y>_w, clamped at 0."""
    return four_point_delta_matrix(distance_matrix(space, pts))


def four_point_delta_matrix(D: np.ndarray) -> Fraction:
    """Four-point delta of an integer distance table."""
    best = 0
    for w in range(len(D)):
        P = D[:, w][:, None] + D[w, :][None, :] - D  # doubled Gromov products at w
        # M[x, y] = max_z min(P[x, z], P[z, y])
        M = np.minimum(P[:, :, None], P.T[None, :, :]).max(axis=1)
        best = max(best, int((M - P).max()))
    return Fraction(best, 2)


def _centre(path: Sequence[int], pos: Fraction) -> tuple:
    """A point at half-integer position on a path of indices: vertex or edge midpoint."""
    if pos.denominator == 1:
        return (path[int(pos)],)
    i = math.floor(pos)
    return (path[i], path[i + 1])


def _centre_dist(D: np.ndarray, a: tuple, b: tuple) -> Fraction:
    if len(a) == 1 and len(b) == 1:
        return Fraction(int(D[a[0], b[0]]))
    if len(a) == 2 and len(b) == 2:
        if set(a) == set(b):
            return Fraction(0)
        return 1 + int(min(D[u, v] for u in a for v in b))
    if len(a) == 2:
        a, b = b, a
    return Fraction(1, 2) + int(min(D[a[0], v] for v in b))


def tripod_delta(space: Space, pts: Sequence) -> tuple[Fraction, tuple | None]:
    """Largest tripod-centre diameter over all ordered triangles of ``pts``.

    Sides are the tie-broken geodesics; the centre on side [u, v] sits at
    distance <v, w>_u from u, where w is the third vertex. Geodesics may leave
    ``pts``, so distances are taken over the points they visit as well.
    """
    pts = list(pts)
    n = len(pts)
    sides = {}
    extra = {p: i for i, p in enumerate(pts)}
    for i in range(n):
        for j in range(n):
            for v in geodesic(space, pts[i], pts[j]).points:
                extra.setdefault(v, len(extra))
    allpts = list(extra)
    D = distance_matrix(space, allpts)
    for i in range(n):
        for j in range(n):
            sides[i, j] = [extra[v] for v in geodesic(space, pts[i], pts[j]).points]
    best, worst = Fraction(0), None
    for a, b, c in itertools.product(range(n), repeat=3):
        cs = []
        for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
            pos = Fraction(int(D[u, v] + D[u, w] - D[v, w]), 2)
            cs.append(_centre(sides[u, v], pos))
        t = max(_centre_dist(D, cs[0], cs[1]), _centre_dist(D, cs[1], cs[2]),
                _centre_dist(D, cs[0], cs[2]))
        if t > best:
            best, worst = t, (pts[a], pts[b], pts[c])
    return best, worst


def hyperbolicity_estimate(space: Space, sample: Sequence | None = None,
                           exhaustive: bool = False) -> HyperbolicityReport:
    if exhaustive:
        pts = space.points()
    else:
        if not sample:
            raise EmptySample("hyperbolicity needs a nonempty sample")
        pts = list(dict.fromkeys(_pt(space, p) for p in sample))
    if not pts:
        raise EmptySample("hyperbolicity needs a nonempty sample")
    tri, worst = tripod_delta(space, pts)
    return HyperbolicityReport(four_point_delta(space, pts), tri, len(pts), exhaustive, worst)


# --------------------------------------------------------------------------
# Morse gaps and tree approximation


def morse_gap(space: Space, q: Path, endpoints_geodesic: Path):
    """Exact Hausdorff distance between the vertex sets of two paths."""
    a, b = q.points, endpoints_geodesic.points
    if a[0] != b[0] or a[-1] != b[-1]:
        raise EndpointMismatch("paths must share both endpoints")
    A, B = list(dict.fromkeys(a)), list(dict.fromkeys(b))
    D = np.array([[space.dist(x, y) for y in B] for x in A], dtype=np.int64)
    return int(max(D.min(axis=1).max(), D.min(axis=0).max()))


def projection_distance(space: Space, path: Path, b) -> int:
    """Distance from ``b`` to the closest vertex of ``path``."""
    return min(space.dist(b, p) for p in path.points)


def measured_morse_constant(space: Space, sample: Sequence, c_max) -> int:
    """Largest Morse gap of a broken geodesic p -> z -> q over the sample whose
    measured quasigeodesic constant (lambda = 1) is at most ``c_max``."""
    pts = list(dict.fromkeys(_pt(space, p) for p in sample))
    M = 0
    for p, z, q in itertools.product(pts, repeat=3):
        if p == q:
            continue
        broken = geodesic(space, p, z).points + geodesic(space, z, q).points[1:]
        if quasigeodesic_constant(space, broken) <= c_max:
            M = max(M, morse_gap(space, Path(broken), geodesic(space, p, q)))
    return M


@dataclass
class TreeApprox:
    points: list
    table: np.ndarray
    distortion: int
    original: np.ndarray = field(repr=False, default=None)

    def tree_dist(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def to_json(self) -> dict:
        return {"points": [to_json(p) for p in self.points],
                "tree_table": self.table.tolist(), "distortion": self.distortion}


def tree_approx(space: Space, pts: Sequence) -> TreeApprox:
    """Gromov's tree approximation rooted at ``pts[0]``.

    Gromov products at the root are replaced by their maximin closure
    <x,y>' = max over chains of the min of consecutive products; the tree
    metric is d(x,o) + d(y,o) - 2<x,y>'.
    """
    pts = [_pt(space, p) for p in pts]
    if len(pts) < 2:
        raise TooFewPoints("tree approximation needs at least two points")
    D = distance_matrix(space, pts)
    P = D[:, 0][:, None] + D[0, :][None, :] - D  # doubled products at the root
    n = len(pts)
    for k in range(n):  # maximin closure
        P = np.maximum(P, np.minimum(P[:, k][:, None], P[k, :][None, :]))
    T = D[:, 0][:, None] + D[0, :][None, :] - P
    np.fill_diagonal(T, 0)
    distortion = int(np.abs(T - D).max())
    return TreeApprox(pts, T, distortion, D)


def tree_approx_bound(M, delta, n: int) -> float:
    return 2 * M + float(delta) * math.log2(n)


# --------------------------------------------------------------------------
# thin quadrilaterals


@dataclass
class ThinQuadResult:
    quads: int
    pairs: int
    outer_violations: list
    inner_violations: list


def thin_quad_scan(space: Space, delta, L_max: int, pts: Sequence | None = None,
                   geodesic_limit: int = 64) -> ThinQuadResult:
    """Check both synchronous-distance bounds for every pair of geodesics q, q'
    with d(x,y) = d(x',y') and d(x,x'), d(y,y') <= L, for each L <= L_max."""
    pts = list(space.points() if pts is None else pts)
    D = distance_matrix(space, pts)
    idx = range(len(pts))
    geos: dict = {}

    def geo_list(i, j):
        if (i, j) not in geos:
            geos[(i, j)] = [g.points for g in all_geodesics(space, pts[i], pts[j], geodesic_limit)]
        return geos[(i, j)]

    quads = pairs = 0
    outer, inner = [], []
    two_delta = 2 * Fraction(delta)
    for x, y in itertools.product(idx, repeat=2):
        n = D[x, y]
        for xp in idx:
            if D[x, xp] > L_max:
                continue
            for yp in idx:
                if D[y, yp] > L_max or D[xp, yp] != n:
                    continue
                L = max(D[x, xp], D[y, yp])
                quads += 1
                for q in geo_list(x, y):
                    for qp in geo_list(xp, yp):
                        pairs += 1
                        for t in range(n + 1):
                            s = space.dist(q[t], qp[t])
                            if s > max(two_delta, 3 * L):
                                outer.append((pts[x], pts[y], pts[xp], pts[yp], t, s))
                            if L <= t <= n - L and s > two_delta:
                                inner.append((pts[x], pts[y], pts[xp], pts[yp], t, s))
    return ThinQuadResult(quads, pairs, outer, inner)


def neighborhood(space: Space, pts, r) -> set:
    """Closed r-neighbourhood of a point set."""
    out = set()
    for p in pts:
        out.update(space.ball(p, r))
    return out
