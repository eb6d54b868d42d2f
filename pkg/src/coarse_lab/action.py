"""Marked groups, ball enumeration, coarse stabilizers, whole-action
classification and Busemann quasimorphisms."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import DoesNotFixDirection, HorizonExceeded, InvalidIsometry
from .isometry import (
    CUSP,
    AffineIso,
    BoundaryDirection,
    BSAffine,
    GraphPermutation,
    Isometry,
    ProductIso,
    TreeIso,
    _has_cusp,
    _jsonable,
    adic_mod,
    axis,
    census_two_scales,
    fixes,
    identity,
    translation_length,
    unbounded,
)
from .spaces import (
    BSTree,
    Horoball,
    HoroballModel,
    Line,
    Product,
    RegularTree,
    Space,
    to_json,
)


def iso_key(g: Isometry):
    """Exact normal form of an isometry (faithful on every shipped family)."""
    if isinstance(g, TreeIso):
        return ("tree", g.word, tuple(sorted(g.perm.items())))
    if isinstance(g, AffineIso):
        cyc = getattr(g.space, "cycle", None)
        return ("affine", g.eps, g.k % cyc if cyc else g.k)
    if isinstance(g, BSAffine):
        return ("bs", g.m, g.b)
    if isinstance(g, GraphPermutation):
        return ("graph", tuple(sorted(g.mapping.items())))
    if isinstance(g, ProductIso):
        return ("product", g.sigma, tuple(iso_key(h) for h in g.factors))
    raise InvalidIsometry(f"no normal form for {g!r}")


def word_str(word: Sequence[str]) -> str:
    return "e" if not word else ".".join(word)


def inverse_name(name: str) -> str:
    return name[:-3] if name.endswith("^-1") else name + "^-1"


class MarkedGroup:
    """A group given by named generating isometries of one space.

    Formal inverses ``name^-1`` are added. Words are tuples of generator
    names. Two words name the same element iff their normal forms agree;
    they then also agree on the probe (the radius-2 ball about the base).
    """

    def __init__(self, space: Space, gens, horizon: int = 6, probe=None,
                 factors: Sequence[Sequence[str]] | None = None, name: str = "G"):
        if isinstance(gens, dict):
            gens = list(gens.items())
        gens = list(gens)
        for n, g in gens:
            if g.space.space_id != space.space_id:
                raise InvalidIsometry(f"generator {n} acts on {g.space.space_id}, not {space.space_id}")
        self.space = space
        self.name = name
        self.horizon = horizon
        self.base_gens = [n for n, _ in gens]
        self.gens: dict[str, Isometry] = {}
        for n, g in gens:
            self.gens[n] = g
            inv = g.inverse()
            if iso_key(inv) != iso_key(g):
                self.gens[inverse_name(n)] = inv
        self.probe = list(probe) if probe is not None else _default_probe(space)
        self.factors = [list(f) for f in factors] if factors else None
        self._ball = None

    def __repr__(self) -> str:
        return f"<MarkedGroup {self.name} on {self.space.space_id}: {self.base_gens}>"

    def _build(self):
        e = identity(self.space)
        seen = {iso_key(e): 0}
        out = [((), e)]
        layer = [((), e)]
        names = list(self.gens)
        for _ in range(self.horizon):
            nxt = []
            for word, g in layer:
                for n in names:
                    h = g.compose(self.gens[n])
                    k = iso_key(h)
                    if k not in seen:
                        seen[k] = len(out)
                        out.append((word + (n,), h))
                        nxt.append((word + (n,), h))
            layer = nxt
        self._ball = out
        self._index = seen

    def ball(self, n: int | None = None) -> list[tuple[tuple, Isometry]]:
        n = self.horizon if n is None else n
        if n > self.horizon or n < 0:
            raise HorizonExceeded(f"ball radius {n} exceeds horizon {self.horizon}")
        if self._ball is None:
            self._build()
        return [(w, g) for w, g in self._ball if len(w) <= n]

    def lookup(self, g: Isometry):
        if self._ball is None:
            self._build()
        i = self._index.get(iso_key(g))
        return None if i is None else self._ball[i][0]

    def agree_on_probe(self, g: Isometry, h: Isometry) -> bool:
        return all(g.image(p) == h.image(p) for p in self.probe)

    def eval_word(self, word: Sequence[str]) -> Isometry:
        g = identity(self.space)
        for n in word:
            g = g.compose(self.gens[n])
        return g

    def with_horizon(self, horizon: int) -> "MarkedGroup":
        return MarkedGroup(self.space, [(n, self.gens[n]) for n in self.base_gens], horizon,
                           self.probe, self.factors, self.name)

    def on(self, space: Space) -> "MarkedGroup":
        """The same generators acting on another truncation of the space."""
        return MarkedGroup(space, [(n, self.gens[n].on(space)) for n in self.base_gens],
                           self.horizon, None, self.factors, self.name)

    def project(self, keep: Sequence[int]) -> "MarkedGroup":
        """Project a factor-preserving product action onto the factors ``keep``."""
        sp = self.space
        if not isinstance(sp, Product):
            raise InvalidIsometry("projection needs a product space")
        keep = list(keep)
        if len(keep) == 1:
            target = sp.factors[keep[0]]
            gens = [(n, self.gens[n].factors[keep[0]]) for n in self.base_gens]
        else:
            target = Product([sp.factors[i] for i in keep], sp.p)
            gens = [(n, ProductIso(target, [self.gens[n].factors[i] for i in keep]))
                    for n in self.base_gens]
        for n in self.base_gens:
            if not self.gens[n].factor_preserving():
                raise InvalidIsometry("projection needs factor-preserving generators")
        return MarkedGroup(target, gens, self.horizon, None, None, self.name)

    def subgroup(self, names: Sequence[str], name: str | None = None) -> "MarkedGroup":
        return MarkedGroup(self.space, [(n, self.gens[n]) for n in names], self.horizon,
                           self.probe, None, name or self.name)


def _default_probe(space: Space) -> list:
    return sorted(space.ball(space.base, 2))


def group_ball(G: MarkedGroup, n: int):
    return G.ball(n)


# --------------------------------------------------------------------------
# safe region


def _max_root_displacement(space: Space, elems: Sequence[Isometry]) -> int:
    o = space.base
    rho = 0
    for g in elems:
        h = unbounded(g)
        rho = max(rho, h.space.dist(h.image(o), o))
    return rho


def safe_points(space: Space, elems: Sequence[Isometry]) -> list:
    """Points of the truncation where every element is defined, away from the
    frontier, sorted. Tree-like truncations use the ball of radius R - rho."""
    if isinstance(space, Product) and all(g.factor_preserving() for g in elems):
        parts = [safe_points(f, [g.factors[i] for g in elems]) for i, f in enumerate(space.factors)]
        return [tuple(c) for c in itertools.product(*parts)]
    if isinstance(space, (RegularTree, Line, BSTree)) and space.truncated:
        R = space.margin(space.base)
        rho = _max_root_displacement(space, elems)
        if R - rho < 0:
            return []
        return sorted(space.ball(space.base, R - rho))
    out = []
    for x in space.points():
        if space.on_frontier(x):
            continue
        if all(g.defined(x) for g in elems):
            out.append(x)
    return out


def safe_region(G: MarkedGroup, n: int | None = None) -> list:
    return safe_points(G.space, [g for _, g in G.ball(n)])


# --------------------------------------------------------------------------
# coarse stabilizers


def coarse_stabilizer(G: MarkedGroup, pts: Sequence, eps, n: int) -> list:
    """Ball elements moving every point of ``pts`` by at most ``eps``."""
    sp = G.space
    pts = [sp.payload(p) for p in pts]
    out = []
    for w, g in G.ball(n):
        ok = True
        for x in pts:
            y = g.image(x)
            if not sp.contains(y):
                ok = False
                break
            if sp.dist(y, x) > eps:
                ok = False
                break
        if ok:
            out.append((w, g))
    return out


# --------------------------------------------------------------------------
# classification of actions


@dataclass
class ActionClass:
    kind: str
    sub: str | None
    horizon: int
    evidence: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return f"{self.kind}({self.sub})" if self.sub else self.kind

    def to_json(self) -> dict:
        return {"kind": self.kind, "sub": self.sub, "label": self.label,
                "horizon": self.horizon, "evidence": _jsonable(self.evidence)}


def loxodromics(G: MarkedGroup, n: int) -> list[tuple[tuple, Isometry, Fraction, BoundaryDirection, BoundaryDirection]]:
    out = []
    for w, g in G.ball(n):
        tau = translation_length(G.space, g, max(n, 2))
        if tau > 0:
            _, fwd, bwd = axis(G.space, g, max(n, 2))
            out.append((w, g, tau, fwd, bwd))
    return out


def orbit_radius(G: MarkedGroup, n: int) -> int:
    """max d(g o, o) over the ball of radius n, on the untruncated model."""
    return _max_root_displacement(G.space, [g for _, g in G.ball(n)])


def unbounded_looking(G: MarkedGroup, n: int) -> bool:
    """The orbit radius still grows between ball radii ceil(n/2) and n."""
    return orbit_radius(G, n) > orbit_radius(G, math.ceil(n / 2))


def classify_action(G: MarkedGroup, n: int | None = None,
                    L_grid: Sequence = (0, 1, 2, 4, 8)) -> ActionClass:
    n = G.horizon if n is None else n
    ball = G.ball(n)
    lox = loxodromics(G, n)
    ev: dict = {"ball_size": len(ball), "limit_set_proxy": "witnessed loxodromic endpoints"}
    if lox:
        pairs: dict[frozenset, tuple] = {}
        for w, g, tau, fwd, bwd in lox:
            pairs.setdefault(frozenset((fwd, bwd)), (w, tau, fwd, bwd))
        keys = list(pairs)
        ev["endpoint_pairs"] = len(keys)
        for a, b in itertools.combinations(keys, 2):
            if not a & b:
                wa, wb = pairs[a], pairs[b]
                ev["independent_pair"] = [
                    {"word": word_str(wa[0]), "tau": wa[1], "ends": [wa[2], wa[3]]},
                    {"word": word_str(wb[0]), "tau": wb[1], "ends": [wb[2], wb[3]]}]
                return ActionClass("general_type", None, n, ev)
        w0, tau0, fwd, bwd = pairs[keys[0]]
        ev["witness"] = {"word": word_str(w0), "tau": tau0, "ends": [fwd, bwd]}
        if len(keys) == 1:
            swap = [w for w, g in ball if fixes_swapped(g, fwd, bwd)]
            ev["swapping_elements"] = len(swap)
            return ActionClass("lineal", "oriented" if not swap else "non-oriented", n, ev)
        common = frozenset.intersection(*keys)
        if len(common) == 1:
            xi = next(iter(common))
            others = {e for k in keys for e in k if e != xi}
            ev["fixed_direction"] = xi
            ev["other_endpoints"] = sorted(str(e) for e in others)
            if len(others) >= 2:
                return ActionClass("quasiparabolic", None, n, ev)
        ev["low_confidence"] = True
        return ActionClass("lineal", "oriented", n, ev)
    grows = unbounded_looking(G, n)
    ev["orbit_radius"] = [orbit_radius(G, math.ceil(n / 2)), orbit_radius(G, n)]
    if grows:
        if _has_cusp(G.space):
            ev["fixed_direction"] = CUSP
            return ActionClass("parabolic", None, n, ev)
        return ActionClass("unresolved", None, n, ev)
    elems = [g for w, g in ball if w]
    collar = _max_root_displacement(G.space, elems)
    verdict, census = census_two_scales(G.space, elems, L_grid, collar)
    ev["census"] = census
    ev["rift_rule"] = "frontier-ray proxy"
    return ActionClass("elliptic", verdict, n, ev)


def fixes_swapped(g: Isometry, a: BoundaryDirection, b: BoundaryDirection) -> bool:
    try:
        return g.end_image(a) == b and g.end_image(b) == a
    except InvalidIsometry:
        return False


# --------------------------------------------------------------------------
# Busemann quasimorphisms


def ray_point(space: Space, xi: BoundaryDirection, m: int):
    """The point at distance m from the base along the standard ray to xi."""
    if xi.kind == "tree":
        u, c = xi.data
        word = u + c * (m // len(c) + 1)
        return word[:m]
    if xi.kind == "line":
        return xi.data * m
    if xi.kind == "cusp":
        if isinstance(space, BSTree):
            return BSTree.normal(-m, 0)
        return (m, 0)
    if xi.kind == "adic":
        return BSTree.normal(m, adic_mod(xi.data, m))
    if xi.kind == "product":
        return tuple(f.base if d is None else ray_point(f, d, m)
                     for f, d in zip(space.factors, xi.data))
    raise DoesNotFixDirection(f"no ray toward {xi}")


def _model(space: Space) -> Space:
    return space.unbounded()


def raw_busemann(space: Space, g: Isometry, xi: BoundaryDirection, m: int) -> int:
    h = unbounded(g)
    sp = h.space
    x0 = sp.base
    xm = ray_point(sp, xi, m)
    return sp.dist(h.image(x0), xm) - sp.dist(x0, xm)


@dataclass
class BusemannTable:
    direction: BoundaryDirection
    raw: dict
    homog: dict
    defect_bound: Fraction
    ray_len: int
    certified: bool
    stable: bool
    shift_constant: int = 0

    def to_json(self) -> dict:
        return {"direction": str(self.direction),
                "raw": {k: str(v) for k, v in self.raw.items()},
                "homog": {k: str(v) for k, v in self.homog.items()},
                "defect_bound": str(self.defect_bound), "ray_len": self.ray_len,
                "certified": self.certified, "stable": self.stable,
                "shift_constant": self.shift_constant}


def _check_fixes(G: MarkedGroup, xi: BoundaryDirection, n: int):
    for w, g in G.ball(n):
        if not fixes(g, xi):
            raise DoesNotFixDirection(f"{word_str(w)} does not fix {xi}")


def busemann(G: MarkedGroup, xi: BoundaryDirection, n: int, ray_len: int | None = None,
             pair_cap: int = 200) -> BusemannTable:
    _check_fixes(G, xi, n)
    ball = G.ball(n)
    sp = G.space
    m = ray_len if ray_len is not None else 6 * n + 8
    raw, homog = {}, {}
    certified = stable = True
    cache = {}

    def b(g):
        k = iso_key(g)
        if k not in cache:
            v1 = raw_busemann(sp, g, xi, m - 1)
            v2 = raw_busemann(sp, g, xi, m)
            cache[k] = (v2, v1 == v2)
        return cache[k]

    for w, g in ball:
        val, ok = b(g)
        certified &= ok
        raw[word_str(w)] = Fraction(val)
        vals = []
        gk = g
        for k in range(1, 6):
            vk, ok = b(gk)
            certified &= ok
            vals.append(Fraction(vk, k))
            gk = gk.compose(g)
        stable &= vals[-1] == vals[-2]
        homog[word_str(w)] = vals[-1]
    defect = Fraction(0)
    sample = ball[:pair_cap]
    for (wg, g), (wh, h) in itertools.product(sample, repeat=2):
        d = abs(b(g.compose(h))[0] - b(g)[0] - b(h)[0])
        defect = max(defect, Fraction(d))
    E = shift_constant(sp, [g for _, g in sample], xi, homog=[homog[word_str(w)] for w, _ in sample])
    return BusemannTable(xi, raw, homog, defect, m, certified, stable, E)


def shift_constant(space: Space, elems: Sequence[Isometry], xi: BoundaryDirection,
                   homog: Sequence[Fraction], s_max: int = 12) -> int:
    """max over elements and integer s of d(q(s - beta(g)), g q(s)) along the ray q."""
    E = 0
    for g, beta in zip(elems, homog):
        if beta.denominator != 1:
            continue
        h = unbounded(g)
        sp = h.space
        shift = int(beta)
        for s in range(max(0, shift), s_max + max(0, shift) + 1):
            a = ray_point(sp, xi, s - shift)
            bpt = h.image(ray_point(sp, xi, s))
            E = max(E, sp.dist(a, bpt))
    return E


def busemann_spread(G: MarkedGroup, xi: BoundaryDirection, x, r, n: int) -> Fraction:
    """max |beta(g)| over ball elements with d(x, gx) <= r."""
    table = busemann(G, xi, n)
    sp = G.space
    x = sp.payload(x)
    best = Fraction(0)
    for w, g in G.ball(n):
        h = unbounded(g)
        if h.space.dist(h.image(x), x) <= r:
            best = max(best, abs(table.homog[word_str(w)]))
    return best


# --------------------------------------------------------------------------
# diagnostics


def unif_bound_check(G: MarkedGroup, n: int, M: int = 0, lam: int = 0) -> dict:
    """For a lineal action: every element fixing both ends of the quasi-line q
    satisfies d(g q(t), q(t)) <= 2M + 3 lam + 3 d(g q(0), q(0)) along q."""
    lox = loxodromics(G, n)
    if not lox:
        raise DoesNotFixDirection("no loxodromic quasi-line in the ball")
    w0, g0, tau, fwd, bwd = lox[0]
    path, _, _ = axis(G.space, g0, max(n, 2))
    q0 = path.points[len(path.points) // 2]
    sp = G.space
    checked = violations = skipped = 0
    worst = None
    for w, g in G.ball(n):
        if not (fixes(g, fwd) and fixes(g, bwd)):
            skipped += 1
            continue
        h = unbounded(g)
        C0 = 2 * M + 3 * lam + 3 * h.space.dist(h.image(q0), q0)
        for x in path.points:
            d = h.space.dist(h.image(x), x)
            checked += 1
            if d > C0:
                violations += 1
                worst = (word_str(w), to_json(x), d, C0)
    return {"checked": checked, "violations": violations, "skipped_swapping": skipped,
            "worst": worst, "M": M, "lambda": lam}


def parabolic_depth_profile(E: int, t_max: int, m_max: int = 4096) -> list[int]:
    """M(t): largest m such that every shift by |k| <= m moves (t, 0) by at most E
    on the untruncated full horoball."""
    model = HoroballModel()
    out = []
    for t in range(t_max + 1):
        m = 0
        while m < m_max and model.dist((t, 0), (t, m + 1)) <= E:
            m += 1
        out.append(m)
    return out
