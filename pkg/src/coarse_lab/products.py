"""Higher-rank analysis for actions on products: factor-type matrices,
regular elements, elementary subgroups and their Busemann rank, and a
ping-pong probe for free subgroups."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .action import (
    MarkedGroup,
    classify_action,
    iso_key,
    loxodromics,
    raw_busemann,
    safe_region,
    word_str,
)
from .errors import NotRegularDirection, PreconditionViolation
from .isometry import (
    BoundaryDirection,
    Isometry,
    _jsonable,
    axis,
    fixes,
    translation_length,
    unbounded,
)
from .metric_core import hyperbolicity_estimate
from .spaces import Product, Space, to_json


def _factor_spaces(G: MarkedGroup) -> list[Space]:
    return list(G.space.factors) if isinstance(G.space, Product) else [G.space]


def _factor_group(G: MarkedGroup, i: int) -> MarkedGroup:
    return G.project([i]) if isinstance(G.space, Product) else G


def _factor_map(g: Isometry, i: int) -> Isometry:
    return g.factors[i] if hasattr(g, "factors") else g


# --------------------------------------------------------------------------
# factor partitions


@dataclass
class PartitionReport:
    matrix: list  # rows = declared factors, cols = space factors, labels
    partition: list | None
    violations: list
    F: int | None
    D: int

    @property
    def ok(self) -> bool:
        return self.partition is not None

    def violating_cells(self) -> list:
        cells = set()
        for v in self.violations:
            cells.update(tuple(c) for c in v["cells"])
        return sorted(cells)

    def to_json(self) -> dict:
        return {"matrix": self.matrix, "partition": self.partition, "F": self.F, "D": self.D,
                "violations": self.violations, "violating_cells": [list(c) for c in self.violating_cells()]}


def factor_partition(G: MarkedGroup, n: int | None = None) -> PartitionReport:
    """Classify each declared internal factor K_j on each space factor X_i.

    Success needs every row to contain a general-type entry and every column
    exactly one. Indices in the report are 1-based.
    """
    if not isinstance(G.space, Product):
        raise PreconditionViolation("factor_partition needs a product space")
    if not G.factors:
        raise PreconditionViolation("no internal factors declared")
    n = G.horizon if n is None else n
    D = G.space.D
    matrix = []
    for j, names in enumerate(G.factors):
        K = G.subgroup(names, name=f"K{j + 1}")
        matrix.append([classify_action(K.project([i]), n).label for i in range(D)])
    gt = [[lab == "general_type" for lab in row] for row in matrix]
    bad_rows = [j for j, row in enumerate(gt) if not any(row)]
    multi_cols = [i for i in range(D) if sum(gt[j][i] for j in range(len(gt))) > 1]
    uncovered = [i for i in range(D) if not any(gt[j][i] for j in range(len(gt)))]
    violations = []
    for j in bad_rows:
        cols = uncovered or list(range(D))
        violations.append({"type": "row_without_general_type", "row": j + 1,
                           "cells": [[j + 1, i + 1] for i in cols]})
    for i in multi_cols:
        violations.append({"type": "column_with_several_general_type", "col": i + 1,
                           "cells": [[j + 1, i + 1] for j in range(len(gt)) if gt[j][i]]})
    for i in uncovered:
        rows = bad_rows or list(range(len(gt)))
        violations.append({"type": "uncovered_column", "col": i + 1,
                           "cells": [[j + 1, i + 1] for j in rows]})
    if violations:
        return PartitionReport(matrix, None, violations, None, D)
    partition = [[i + 1 for i in range(D) if gt[j][i]] for j in range(len(gt))]
    return PartitionReport(matrix, partition, [], len(partition), D)


# --------------------------------------------------------------------------
# regular elements


@dataclass
class RegularWitness:
    word: tuple
    element: Isometry
    taus: list
    walk_steps: int
    seed: int
    trial: int

    def to_json(self) -> dict:
        return {"word": word_str(self.word), "element": self.element.describe(),
                "taus": [str(t) for t in self.taus], "walk_steps": self.walk_steps,
                "seed": self.seed, "trial": self.trial}


def _rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, stream]))


def per_factor_taus(G: MarkedGroup, g: Isometry, horizon: int = 8) -> list[Fraction]:
    if isinstance(G.space, Product):
        return [translation_length(f, gi, horizon) for f, gi in zip(G.space.factors, g.factors)]
    return [translation_length(G.space, g, horizon)]


def find_regular(G: MarkedGroup, trials: int = 1, max_steps: int = 100,
                 seed: int = 0) -> tuple[RegularWitness | None, list]:
    """Simple random walk on generators and inverses until every factor
    translation length is positive. Returns (witness or None, steps per trial)."""
    names = list(G.gens)
    if isinstance(G.space, Product) and not all(G.gens[k].factor_preserving() for k in names):
        raise PreconditionViolation("regular elements need a factor-preserving action")
    steps_log = []
    found = None
    for trial in range(trials):
        rng = _rng(seed, trial)
        g = G.eval_word(())
        word: tuple = ()
        hit = None
        for step in range(1, max_steps + 1):
            k = names[int(rng.integers(len(names)))]
            g = g.compose(G.gens[k])
            word = word + (k,)
            taus = per_factor_taus(G, g)
            if all(t > 0 for t in taus):
                hit = RegularWitness(word, g, taus, step, seed, trial)
                break
        steps_log.append(hit.walk_steps if hit else None)
        if hit and found is None:
            found = hit
    return found, steps_log


# --------------------------------------------------------------------------
# elementary subgroups


def lattice_rank(rows: Sequence[Sequence]) -> int:
    """Rank of the lattice spanned by rational vectors (exact elimination)."""
    M = [[Fraction(v) for v in r] for r in rows]
    rank = 0
    cols = len(M[0]) if M else 0
    for c in range(cols):
        piv = next((r for r in range(rank, len(M)) if M[r][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for r in range(len(M)):
            if r != rank and M[r][c] != 0:
                f = M[r][c] / M[rank][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[rank])]
        rank += 1
    return rank


def beta_vector(G: MarkedGroup, g: Isometry, xi: BoundaryDirection, power: int = 5,
                ray_len: int = 64) -> list[Fraction]:
    """Per-factor homogenized Busemann values toward xi (product direction)."""
    out = []
    spaces = _factor_spaces(G)
    parts = xi.data if xi.kind == "product" else (xi,)
    for i, (f, d) in enumerate(zip(spaces, parts)):
        gi = _factor_map(g, i) if isinstance(G.space, Product) else g
        gk = gi.power(power)
        out.append(Fraction(raw_busemann(f, gk, d, ray_len), power))
    return out


@dataclass
class ElementaryReport:
    xi_plus: BoundaryDirection
    xi_minus: BoundaryDirection
    generators: list
    beta_matrix: list
    rank: int
    rank_prev: int
    D: int

    def to_json(self) -> dict:
        return {"xi_plus": str(self.xi_plus), "xi_minus": str(self.xi_minus),
                "elements": self.generators,
                "beta_matrix": [[str(v) for v in r] for r in self.beta_matrix],
                "rank": self.rank, "rank_prev": self.rank_prev, "D": self.D}


def _check_regular(G: MarkedGroup, xp: BoundaryDirection, xm: BoundaryDirection):
    D = len(_factor_spaces(G))
    if isinstance(G.space, Product):
        if xp.kind != "product" or xm.kind != "product" or len(xp.data) != D or len(xm.data) != D:
            raise NotRegularDirection("directions must be product directions of arity D")
        if any(a is None or b is None for a, b in zip(xp.data, xm.data)):
            raise NotRegularDirection("a regular direction needs an end in every factor")
        if any(a == b for a, b in zip(xp.data, xm.data)):
            raise NotRegularDirection("xi+ and xi- must differ in every factor")
    elif xp == xm:
        raise NotRegularDirection("xi+ and xi- must differ")


def _stabilizer_rows(G: MarkedGroup, xp, xm, n: int):
    gens, rows = [], []
    for w, g in G.ball(n):
        if not w:
            continue
        if fixes(g, xp) and fixes(g, xm):
            gens.append(word_str(w))
            rows.append(beta_vector(G, g, xp))
    return gens, rows


def elementary_subgroup(G: MarkedGroup, xi_plus: BoundaryDirection, xi_minus: BoundaryDirection,
                        n: int | None = None) -> ElementaryReport:
    n = G.horizon if n is None else n
    _check_regular(G, xi_plus, xi_minus)
    gens, rows = _stabilizer_rows(G, xi_plus, xi_minus, n)
    _, prev_rows = _stabilizer_rows(G, xi_plus, xi_minus, max(n - 1, 0))
    D = len(_factor_spaces(G))
    rank = lattice_rank(rows) if rows else 0
    rank_prev = lattice_rank(prev_rows) if prev_rows else 0
    return ElementaryReport(xi_plus, xi_minus, gens, rows, rank, rank_prev, D)


# --------------------------------------------------------------------------
# Tits alternative probe


@dataclass
class TitsResult:
    kind: str  # free_pair | abelian_evidence | unresolved
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, "detail": _jsonable(self.detail)}


def _gromov(sp: Space, x, y, o) -> Fraction:
    return Fraction(sp.dist(x, o) + sp.dist(y, o) - sp.dist(x, y), 2)


def _half_spaces(sp: Space, g: Isometry, N: int, p, net, slack) -> tuple[set, set]:
    """H+ = {x : <x, g^N p>_p - <x, g^-N p>_p >= slack}, H- symmetric."""
    gN = g.power(N)
    a, b = gN.image(p), gN.inverse().image(p)
    plus, minus = set(), set()
    for x in net:
        s = _gromov(sp, x, a, p) - _gromov(sp, x, b, p)
        if s >= slack:
            plus.add(x)
        elif -s >= slack:
            minus.add(x)
    return plus, minus


def _ping_pong(f: Space, g: Isometry, h: Isometry, N: int, net: list, delta) -> dict | None:
    model = f.unbounded()
    gu, hu = g.on(model) if model is not f else g, h.on(model) if model is not f else h
    p = f.base
    tg = translation_length(f, g)
    th = translation_length(f, h)
    Hg = _half_spaces(model, gu, N, p, net, tg / 2 + 2 * delta)
    Hh = _half_spaces(model, hu, N, p, net, th / 2 + 2 * delta)
    sets = [Hg[0], Hg[1], Hh[0], Hh[1]]
    if any(not s for s in sets):
        return None
    if any(sets[i] & sets[j] for i, j in itertools.combinations(range(4), 2)):
        return None
    netset = set(net)
    checks = 0
    for elt, src_excl, dst in ((gu.power(N), Hg[1], Hg[0]), (gu.power(-N), Hg[0], Hg[1]),
                               (hu.power(N), Hh[1], Hh[0]), (hu.power(-N), Hh[0], Hh[1])):
        for x in net:
            if x in src_excl:
                continue
            y = elt.image(x)
            if y not in netset:
                continue
            checks += 1
            if y not in dst:
                return None
    return {"N": N, "half_space_sizes": [len(s) for s in sets], "mapping_checks": checks,
            "sets": sets, "base": p}


def _replay(f: Space, g: Isometry, h: Isometry, cert: dict, seed: int, count: int = 10) -> dict:
    """Apply random alternating words to the base point and check that each
    lands in the half-space of its leftmost letter (by Gromov-product sign)."""
    model = f.unbounded()
    gu, hu = (g.on(model), h.on(model)) if model is not f else (g, h)
    N, p = cert["N"], cert["base"]
    letters = {("g", 1): gu.power(N), ("g", -1): gu.power(-N),
               ("h", 1): hu.power(N), ("h", -1): hu.power(-N)}
    tg, th = translation_length(f, g), translation_length(f, h)
    rng = _rng(seed, 99)
    failures = 0
    words = []
    for _ in range(count):
        length = int(rng.integers(2, 7))
        first = "g" if rng.integers(2) == 0 else "h"
        seq = []
        cur = first
        for _ in range(length):
            seq.append((cur, 1 if rng.integers(2) == 0 else -1))
            cur = "h" if cur == "g" else "g"
        x = p
        for key in reversed(seq):
            x = letters[key].image(x)
        lead, sign = seq[0]
        elt = gu if lead == "g" else hu
        tau = tg if lead == "g" else th
        a, b = elt.power(N).image(p), elt.power(-N).image(p)
        s = _gromov(model, x, a, p) - _gromov(model, x, b, p)
        ok = s * sign >= tau / 2
        failures += not ok
        words.append("".join(f"{k}{'' if e > 0 else '^-1'}" for k, e in seq))
    return {"words": words, "failures": failures}


def tits_probe(G: MarkedGroup, n: int | None = None, seed: int = 0, max_power: int = 4) -> TitsResult:
    n = G.horizon if n is None else n
    cls = classify_action(G, n)
    if cls.kind == "elliptic":
        raise PreconditionViolation("the Tits probe needs a non-elliptic action")
    spaces = _factor_spaces(G)
    for i, f in enumerate(spaces):
        Gi = _factor_group(G, i)
        lox = loxodromics(Gi, min(n, 3))
        seen: dict = {}
        for w, g, tau, fwd, bwd in lox:
            seen.setdefault(frozenset((fwd, bwd)), (w, g))
        cands = list(seen.items())
        net = safe_region(Gi, min(n, 3)) if getattr(f, "truncated", False) else f.points()
        delta = 0 if f.is_tree else hyperbolicity_estimate(f, net[:40]).delta_tripod
        for (ka, (wa, ga)), (kb, (wb, gb)) in itertools.combinations(cands, 2):
            if ka & kb:
                continue
            for N in range(1, max_power + 1):
                cert = _ping_pong(f, ga, gb, N, net, delta)
                if cert is None:
                    continue
                replay = _replay(f, ga, gb, cert, seed)
                if replay["failures"]:
                    continue
                detail = {"factor": i + 1, "g": word_str(wa), "h": word_str(wb), "power": N,
                          "half_space_sizes": cert["half_space_sizes"],
                          "mapping_checks": cert["mapping_checks"], "delta": delta,
                          "replay": replay}
                return TitsResult("free_pair", detail)
    # abelian evidence
    ball = G.ball(n)
    for (_, g), (_, h) in itertools.combinations(ball, 2):
        if iso_key(g.compose(h)) != iso_key(h.compose(g)):
            return TitsResult("unresolved", {"reason": "non-commuting elements without a ping-pong pair"})
    ends = []
    for i, f in enumerate(spaces):
        lox = loxodromics(_factor_group(G, i), n)
        ends.append(lox[0][3] if lox else None)
    if isinstance(G.space, Product):
        xi = BoundaryDirection("product", tuple(ends))
    else:
        xi = ends[0]
    rows = []
    for w, g in ball:
        if w:
            vec = [Fraction(0) if e is None else v for v, e in zip(beta_vector(G, g, xi), ends)] \
                if all(e is not None for e in ends) else _partial_beta(G, g, ends)
            rows.append(vec)
    k = lattice_rank(rows) if rows else 0
    return TitsResult("abelian_evidence", {"rank": k, "D": len(spaces)})


def _partial_beta(G: MarkedGroup, g: Isometry, ends: list) -> list:
    out = []
    for i, (f, e) in enumerate(zip(_factor_spaces(G), ends)):
        if e is None:
            out.append(Fraction(0))
            continue
        gi = _factor_map(g, i) if isinstance(G.space, Product) else g
        out.append(Fraction(raw_busemann(f, gi.power(5), e, 64), 5))
    return out
