"""Empirical acylindricity: coarse-stabilizer tables, violation witnesses and
factor elimination for product actions."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .action import MarkedGroup, classify_action, coarse_stabilizer, safe_region, word_str
from .errors import FactorNotDroppable, HorizonExceeded, InvalidIsometry
from .isometry import _jsonable
from .spaces import Product, to_json

DEFAULT_EPS = (0, 1, 2, 4)
DEFAULT_R = (1, 2, 4)


NET_CAP = 400


def net_points(G: MarkedGroup, n: int, cap: int | None = NET_CAP) -> list:
    """Every second vertex of the safe region (even distance from the base).
    Nets larger than ``cap`` are thinned to every k-th point in sorted order."""
    sp = G.space
    o = sp.base
    net = [x for x in safe_region(G, n) if sp.dist(x, o) % 2 == 0]
    if cap is not None and len(net) > cap:
        k = -(-len(net) // cap)
        net = net[::k]
    return net


def _displacements(G: MarkedGroup, n: int, net: Sequence) -> tuple[np.ndarray, np.ndarray, list]:
    sp = G.space
    ball = G.ball(n)
    D = np.empty((len(ball), len(net)), dtype=np.int64)
    for i, (_, g) in enumerate(ball):
        D[i] = [sp.dist(g.image(x), x) for x in net]
    lengths = np.array([len(w) for w, _ in ball], dtype=np.int64)
    return D, lengths, ball


def _pairs(G: MarkedGroup, net: Sequence, budget: int | None) -> list[tuple[int, int, int]]:
    """Net pairs, farthest first. Under a budget, pairs are taken round-robin
    over depth classes min(d(x,o), d(y,o)) so deep pairs are never crowded out."""
    sp = G.space
    pairs = [(sp.dist(net[i], net[j]), i, j) for i, j in itertools.combinations(range(len(net)), 2)]
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))
    if budget is None or len(pairs) <= budget:
        return pairs
    o = sp.base
    depth = [sp.dist(x, o) for x in net]
    classes: dict[int, list] = {}
    for p in pairs:
        classes.setdefault(min(depth[p[1]], depth[p[2]]), []).append(p)
    queues = [classes[k] for k in sorted(classes)]
    chosen = []
    pos = 0
    while len(chosen) < budget:
        progressed = False
        for q in queues:
            if pos < len(q):
                chosen.append(q[pos])
                progressed = True
                if len(chosen) == budget:
                    break
        if not progressed:
            break
        pos += 1
    chosen.sort(key=lambda t: (-t[0], t[1], t[2]))
    return chosen


@dataclass
class AcylProfile:
    eps_grid: list
    R_grid: list
    n: int
    table: dict  # (eps, R) -> N-hat at horizon n, None when no scanned pair reaches R
    history: dict  # horizon -> table
    trend: dict  # eps -> "stable" | "growing"
    verdict: str
    pairs_scanned: int
    net_size: int
    witness: dict | None = None

    def row(self, eps) -> list:
        return [self.table[(eps, R)] for R in self.R_grid]

    def to_json(self) -> dict:
        return {"eps_grid": self.eps_grid, "R_grid": self.R_grid, "n": self.n,
                "table": {str(e): self.row(e) for e in self.eps_grid},
                "trend": {str(k): v for k, v in self.trend.items()},
                "history": {str(h): {str(e): [t[(e, R)] for R in self.R_grid] for e in self.eps_grid}
                            for h, t in self.history.items()},
                "verdict": self.verdict, "pairs_scanned": self.pairs_scanned,
                "net_size": self.net_size, "witness": _jsonable(self.witness),
                "label": "evidence"}


def _table(D: np.ndarray, mask: np.ndarray, pairs, eps_grid, R_grid) -> dict:
    table = {}
    Dm = D[mask]
    counts = {}
    for d, i, j in pairs:
        m = np.maximum(Dm[:, i], Dm[:, j])
        counts[(i, j)] = (d, [int((m <= e).sum()) for e in eps_grid])
    for k, e in enumerate(eps_grid):
        for R in R_grid:
            vals = [c[k] for d, c in counts.values() if d >= R]
            table[(e, R)] = max(vals) if vals else None
    return table


def acyl_profile(G: MarkedGroup, eps_grid: Sequence = DEFAULT_EPS, R_grid: Sequence = DEFAULT_R,
                 n: int | None = None, pair_budget: int | None = 2000,
                 witness_search: bool = True) -> AcylProfile:
    n = G.horizon if n is None else n
    if n > G.horizon:
        raise HorizonExceeded(f"ball radius {n} exceeds horizon {G.horizon}")
    eps_grid, R_grid = sorted(eps_grid), sorted(R_grid)
    net = net_points(G, n)
    D, lengths, _ = _displacements(G, n, net)
    pairs = _pairs(G, net, pair_budget)
    history = {}
    for h in range(max(0, n - 2), n + 1):
        history[h] = _table(D, lengths <= h, pairs, eps_grid, R_grid)
    table = history[n]
    prev = history.get(n - 1, table)
    trend = {e: "stable" if all(prev[(e, R)] == table[(e, R)] for R in R_grid) else "growing"
             for e in eps_grid}
    witness = None
    if all(v == "stable" for v in trend.values()):
        verdict = "bounded-evidence"
    else:
        verdict = "inconclusive"
        if witness_search:
            for e in reversed(eps_grid):
                if trend[e] == "growing":
                    witness = acyl_witness(G, e, n)
                    if witness is not None:
                        verdict = "violation"
                        break
    return AcylProfile(eps_grid, R_grid, n, table, history, trend, verdict, len(pairs), len(net),
                       witness)


def _runs(depths: list, best: dict) -> list:
    """Longest run of consecutive scanned depths with strictly increasing counts."""
    run, top = [], []
    for k in depths:
        if run and best[k][0] > best[run[-1]][0]:
            run.append(k)
        else:
            run = [k]
        if len(run) > len(top):
            top = list(run)
    return top


def acyl_witness(G: MarkedGroup, eps, n: int | None = None, min_run: int = 3,
                 pair_cap: int = 50_000) -> dict | None:
    """Search pairs of net points grouped by depth min(d(x,o), d(y,o)) for a
    family whose coarse stabilizers strictly grow with depth, all pairs at
    distance at least R_w. The largest R_w admitting such a run is used."""
    n = G.horizon if n is None else n
    sp = G.space
    net = net_points(G, n)
    if len(net) < 2:
        return None
    D, _, ball = _displacements(G, n, net)
    o = sp.base
    depth = [sp.dist(x, o) for x in net]
    pairs = _pairs(G, net, pair_cap)
    counts = {}
    for d, i, j in pairs:
        m = np.maximum(D[:, i], D[:, j])
        counts[(i, j)] = int((m <= eps).sum())
    dmax = pairs[0][0] if pairs else 0
    for Rw in range(dmax, 0, -1):
        best: dict = {}
        for d, i, j in pairs:
            if d < Rw:
                continue
            k = min(depth[i], depth[j])
            c = counts[(i, j)]
            if k not in best or c > best[k][0]:
                best[k] = (c, i, j)
        depths = sorted(best)
        run = _runs(depths, best)
        if len(run) >= min_run:
            family = []
            for k in run:
                c, i, j = best[k]
                x, y = net[i], net[j]
                brute = len(coarse_stabilizer(G, [x, y], eps, n))
                elems = [word_str(w) for w, g in ball
                         if max(sp.dist(g.image(x), x), sp.dist(g.image(y), y)) <= eps]
                family.append({"depth": k, "x": to_json(x), "y": to_json(y),
                               "distance": sp.dist(x, y), "count": c, "recount": brute,
                               "stabilizer_sample": elems[:20]})
            verified = all(f["count"] == f["recount"] for f in family)
            return {"eps": eps, "n": n, "R": Rw, "family": family, "verified": verified}
    return None


def probe_kernel(G: MarkedGroup, n: int | None = None) -> list:
    """Ball elements acting as the identity on the probe."""
    return [w for w, g in G.ball(n) if all(g.image(p) == p for p in G.probe)]


# --------------------------------------------------------------------------
# factor elimination


@dataclass
class DropReport:
    group: MarkedGroup
    dropped: int
    projection: object
    before: AcylProfile | None
    after: AcylProfile | None

    def to_json(self) -> dict:
        return {"dropped": self.dropped, "projection": self.projection.to_json(),
                "space": self.group.space.describe(),
                "before": self.before.to_json() if self.before else None,
                "after": self.after.to_json() if self.after else None}


def drop_factor(G: MarkedGroup, i: int, eps_grid: Sequence = DEFAULT_EPS,
                R_grid: Sequence = DEFAULT_R, n: int | None = None,
                profiles: bool = True, pair_budget: int | None = 2000) -> DropReport:
    """Remove factor ``i`` (1-based) when the projected action has no loxodromics."""
    sp = G.space
    if not isinstance(sp, Product):
        raise InvalidIsometry("drop_factor needs a product space")
    if not 1 <= i <= sp.D:
        raise InvalidIsometry(f"factor index {i} out of range 1..{sp.D}")
    if sp.D < 2:
        raise FactorNotDroppable("cannot drop the only factor")
    n = G.horizon if n is None else n
    proj = classify_action(G.project([i - 1]), n)
    if proj.kind not in ("elliptic", "parabolic"):
        raise FactorNotDroppable(f"factor {i} projection is {proj.label}")
    keep = [k for k in range(sp.D) if k != i - 1]
    reduced = G.project(keep)
    before = after = None
    if profiles:
        before = acyl_profile(G, eps_grid, R_grid, n, pair_budget)
        after = acyl_profile(reduced, eps_grid, R_grid, n, pair_budget)
    return DropReport(reduced, i, proj, before, after)
