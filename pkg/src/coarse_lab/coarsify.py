"""Space-taming constructions: the essential core of a general-type action and
the metric quotient by a tremble group, each with exhaustive checks."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .action import MarkedGroup, classify_action, loxodromics, safe_region, word_str
from .errors import HorizonExceeded, InvalidSpace, NotATremble, NotGeneralType
from .isometry import Isometry, _jsonable, unbounded
from .metric_core import (
    distance_matrix,
    four_point_delta_matrix,
    geodesic,
    hyperbolicity_estimate,
    neighborhood,
)
from .spaces import Space, to_json

PAIR_CAP = 20_000


# --------------------------------------------------------------------------
# essential core


@dataclass
class CoreReport:
    core_points: list
    r_used: int
    axes_found: list  # {word, tau, points}
    quasiconvexity_gap: int
    invariance_gap: int
    region_size: int
    slack: Fraction
    ends: list
    density_sample: list = field(default_factory=list)
    pairs_checked: int = 0

    def to_json(self) -> dict:
        return {"core_points": [to_json(x) for x in self.core_points], "core_size": len(self.core_points),
                "r_used": self.r_used, "axes_found": _jsonable(self.axes_found),
                "quasiconvexity_gap": self.quasiconvexity_gap, "invariance_gap": self.invariance_gap,
                "region_size": self.region_size, "slack": str(self.slack),
                "ends": [str(e) for e in self.ends], "density_sample": _jsonable(self.density_sample),
                "pairs_checked": self.pairs_checked}


def _dist_to_set(space: Space, S: set) -> dict:
    """Multi-source BFS distances to ``S`` inside the truncation."""
    dist = {x: 0 for x in S}
    queue = deque(S)
    while queue:
        x = queue.popleft()
        for y in space.neighbors(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def axis_points(space: Space, g: Isometry, region: Sequence, slack=0, tau=None) -> list:
    """Region points displaced by at most tau + slack. On trees with tau given
    this is the axis; otherwise the region minimum stands in for tau."""
    h = unbounded(g)
    model = h.space
    disp = [model.dist(h.image(x), x) for x in region]
    if not disp:
        return []
    top = (tau if tau is not None and space.is_tree else min(disp)) + slack
    return [x for x, d in zip(region, disp) if d <= top]


def essential_core(G: MarkedGroup, n: int | None = None, r: int = 0,
                   region: Sequence | None = None, slack=None,
                   pair_cap: int = PAIR_CAP) -> CoreReport:
    """Closed r-neighbourhood of the loxodromic axes of ball(n), inside a fixed
    region (default: where the generators act safely, so the core can only
    grow with n)."""
    n = G.horizon if n is None else n
    if n > G.horizon:
        raise HorizonExceeded(f"ball radius {n} exceeds horizon {G.horizon}")
    if r < 0:
        raise ValueError("r must be nonnegative")
    cls = classify_action(G, n)
    if cls.kind != "general_type":
        raise NotGeneralType(f"action is {cls.label}")
    sp = G.space
    region = sorted(safe_region(G, 1) if region is None else region)
    rset = set(region)
    if slack is None:
        slack = 0 if sp.is_tree else 2 * hyperbolicity_estimate(sp, region[:: max(1, len(region) // 40)]).delta_tripod
    axes, on_axes, ends = [], set(), []
    for w, g, tau, fwd, bwd in loxodromics(G, n):
        pts = axis_points(sp, g, region, slack, tau)
        on_axes.update(pts)
        axes.append({"word": word_str(w), "tau": tau, "points": len(pts)})
        for e in (fwd, bwd):
            if e not in ends:
                ends.append(e)
    core = sorted(x for x in neighborhood(sp, on_axes, r) if x in rset)
    cset = set(core)
    todist = _dist_to_set(sp, cset)
    # quasiconvexity: geodesics between core points
    qgap, checked = 0, 0
    m = len(core)
    total = m * (m - 1) // 2
    stride = max(1, math.ceil(total / pair_cap)) if pair_cap else 1
    k = 0
    for i in range(m):
        for j in range(i + 1, m):
            k += 1
            if (k - 1) % stride:
                continue
            checked += 1
            for z in geodesic(sp, core[i], core[j]).points:
                qgap = max(qgap, todist.get(z, 0))
    # invariance: generator images that stay in the region
    igap = 0
    for name, s in G.gens.items():
        h = unbounded(s)
        for x in core:
            y = h.image(x)
            if y in rset:
                igap = max(igap, todist[y])
    # essentiality sample: orbits of a few core seeds should be coarsely dense
    density = []
    if core:
        ball = G.ball(n)
        for x in core[:: max(1, len(core) // 4)][:4]:
            orbit = {y for y in (unbounded(g).image(x) for _, g in ball) if y in rset}
            od = _dist_to_set(sp, orbit)
            density.append({"seed": to_json(x), "orbit_points": len(orbit),
                            "max_distance_to_orbit": max(od[c] for c in core)})
    return CoreReport(core, r, axes, qgap, igap, len(region), Fraction(slack), ends, density, checked)


# --------------------------------------------------------------------------
# tremble quotient


@dataclass
class QuotientSpace:
    points: list
    classes: list  # lists of original points
    class_of: dict
    dprime: np.ndarray
    B: int
    checks: dict

    def dist(self, x, y) -> int:
        return int(self.dprime[self.class_of[x], self.class_of[y]])

    def induced(self, g: Isometry) -> list | None:
        """Class permutation induced by g, or None if g does not respect the partition."""
        perm = []
        for cl in self.classes:
            imgs = {self.class_of.get(g.image(x)) for x in cl}
            if len(imgs) != 1 or None in imgs:
                return None
            perm.append(imgs.pop())
        return perm

    def equivariant(self, g: Isometry) -> bool:
        perm = self.induced(g)
        if perm is None:
            raise ValueError("g does not normalize the orbit partition")
        p = np.array(perm)
        return bool((self.dprime[np.ix_(p, p)] == self.dprime).all())

    def to_json(self) -> dict:
        return {"classes": [[to_json(x) for x in c] for c in self.classes],
                "size": len(self.classes), "B": self.B,
                "dprime": self.dprime.tolist(), "checks": _jsonable(self.checks)}


def _orbits(space: Space, pts: list, T: Sequence[Isometry]) -> list[list]:
    parent = {x: x for x in pts}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in T:
        for x in pts:
            try:
                y = g.apply(x)
            except HorizonExceeded:
                raise NotATremble(f"{g.name()} moves {x!r} off the space: orbit leaves the finite model")
            a, b = find(x), find(y)
            if a != b:
                parent[a] = b
    groups: dict = {}
    for x in pts:
        groups.setdefault(find(x), []).append(x)
    return sorted((sorted(c) for c in groups.values()), key=lambda c: c[0])


def tremble_quotient(space: Space, T: Sequence[Isometry]) -> QuotientSpace:
    try:
        pts = sorted(space.points())
    except InvalidSpace:
        raise InvalidSpace("the quotient needs a finite space; truncate first")
    for g in T:
        if g.space.space_id != space.space_id:
            raise InvalidSpace(f"{g.name()} acts on {g.space.space_id}")
    classes = _orbits(space, pts, T)
    order = [x for c in classes for x in c]
    idx = {x: i for i, x in enumerate(order)}
    D = distance_matrix(space, order)
    diam = int(D.max()) if len(order) else 0
    starts = np.cumsum([0] + [len(c) for c in classes[:-1]])
    B = max(int(D[np.ix_(range(s, s + len(c)), range(s, s + len(c)))].max())
            for s, c in zip(starts, classes))
    if B > diam / 2:
        raise NotATremble(f"orbit diameter {B} exceeds half the diameter {diam}")
    Dp = np.minimum.reduceat(np.minimum.reduceat(D, starts, axis=0), starts, axis=1)
    cls_idx = np.repeat(np.arange(len(classes)), [len(c) for c in classes])
    lifted = Dp[np.ix_(cls_idx, cls_idx)]
    k = len(classes)
    tri = 0
    for w in range(k):
        tri += int((Dp > Dp[:, w][:, None] + Dp[w, :][None, :]).sum())
    off = ~np.eye(k, dtype=bool)
    checks = {
        "metric_axioms": {"triangle_violations": tri,
                          "symmetric": bool((Dp == Dp.T).all()),
                          "separation": bool((Dp[off] > 0).all()) and bool((np.diag(Dp) == 0).all()),
                          "triples": k ** 3},
        "projection_1_lipschitz": bool((lifted <= D).all()),
        "lower_qi": bool((D <= 2 * B + lifted).all()),
        "pairs": len(order) ** 2,
        "hausdorff_discrete": True,  # finite metric space
        "complete": True,  # finite
        "delta_quotient": four_point_delta_matrix(Dp),
    }
    checks["passed"] = (tri == 0 and checks["metric_axioms"]["symmetric"]
                        and checks["metric_axioms"]["separation"]
                        and checks["projection_1_lipschitz"] and checks["lower_qi"])
    class_of = {x: i for i, c in enumerate(classes) for x in c}
    return QuotientSpace(order, classes, class_of, Dp, B, checks)
