"""Finite descriptions of isometries, boundary directions, translation lengths,
axes, and the single-isometry classification (tremble / rotation / rift).

Every isometry knows its space and offers two evaluations: ``image`` on the
untruncated model (no checks) and ``apply`` on the truncation, which raises
``HorizonExceeded`` when the image leaves it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import HorizonExceeded, InvalidIsometry, NotLoxodromic
from .spaces import (
    BSTree,
    GraphSpace,
    Horoball,
    HoroballModel,
    Line,
    Point,
    Product,
    RegularTree,
    Space,
    dyadic_mod,
    to_json,
)

# --------------------------------------------------------------------------
# boundary directions


@dataclass(frozen=True)
class BoundaryDirection:
    """A point at infinity.

    kind "tree": data = (prefix, period), the end prefix.period^inf in normal form
    kind "line": data = +1 or -1
    kind "cusp": data = None (horoball cusp, or the fixed end of BS(1,2))
    kind "adic": data = Fraction x, the BS(1,2) end of nested cosets containing x
    kind "product": data = tuple of factor directions (None for a bounded coordinate)
    """

    kind: str
    data: object = None

    def __str__(self) -> str:
        if self.kind == "tree":
            return f"{self.data[0]}({self.data[1]})^inf"
        if self.kind == "line":
            return "+inf" if self.data > 0 else "-inf"
        if self.kind == "adic":
            return f"adic({self.data})"
        if self.kind == "product":
            return "(" + ", ".join("-" if d is None else str(d) for d in self.data) + ")"
        return self.kind

    def to_json(self):
        return str(self)


def _primitive_root(c: str) -> str:
    n = len(c)
    for k in range(1, n + 1):
        if n % k == 0 and c[:k] * (n // k) == c:
            return c[:k]
    return c


def tree_end(space: RegularTree, prefix: str, period: str) -> BoundaryDirection:
    """Normal form of the end prefix.period^inf (period nonempty, cyclically reduced)."""
    if not period:
        raise InvalidIsometry("an end needs a nonempty period")
    period = _primitive_root(period)
    inv = space.inv
    if inv[period[-1]] == period[0]:
        raise InvalidIsometry(f"period {period!r} is not cyclically reduced")
    word = space.reduce(prefix + period * 3)
    if not word.endswith(period * 2):
        raise InvalidIsometry(f"{prefix}({period})^inf is not a valid end")
    return _normal_end(space, word, period)


def _normal_end(space: RegularTree, word: str, period: str) -> BoundaryDirection:
    p = len(period)
    while len(word) >= p and word.endswith(period):
        word = word[:-p]
    while word and word[-1] == period[-1]:
        word = word[:-1]
        period = period[-1] + period[:-1]
    return BoundaryDirection("tree", (word, period))


def line_end(sign: int) -> BoundaryDirection:
    return BoundaryDirection("line", 1 if sign > 0 else -1)


CUSP = BoundaryDirection("cusp")


def adic_end(x) -> BoundaryDirection:
    return BoundaryDirection("adic", Fraction(x))


def product_end(parts: Sequence) -> BoundaryDirection:
    return BoundaryDirection("product", tuple(parts))


def adic_mod(x: Fraction, k: int) -> Fraction:
    """Representative in [0, 2^k) of the 2-adic number x modulo 2^k Z."""
    num, den = x.numerator, x.denominator
    e = (den & -den).bit_length() - 1
    odd = den >> e
    # x = num / (odd * 2^e); work modulo 2^(k+e) with integers
    m = k + e
    if m <= 0:
        return Fraction(0)
    mod = 1 << m
    val = (num * pow(odd, -1, mod)) % mod
    return Fraction(val, 1 << e) if e >= 0 else Fraction(val * (1 << -e))


# --------------------------------------------------------------------------
# isometries


class Isometry:
    space: Space
    family = "isometry"

    def image(self, x):
        raise NotImplementedError

    def apply(self, x):
        """Evaluate on the truncation; raises HorizonExceeded outside it."""
        wrap = isinstance(x, Point)
        p = self.space.payload(x)
        y = self.image(p)
        if not self.space.contains(y):
            raise HorizonExceeded(f"{self.name()} moves {to_json(p)} outside {self.space.space_id}")
        return Point(self.space.space_id, y) if wrap else y

    def defined(self, x) -> bool:
        return self.space.contains(self.image(x))

    def compose(self, other: "Isometry") -> "Isometry":
        """self o other."""
        raise NotImplementedError

    def inverse(self) -> "Isometry":
        raise NotImplementedError

    def end_image(self, xi: BoundaryDirection) -> BoundaryDirection:
        raise InvalidIsometry(f"{self.family} has no action on directions")

    def is_identity(self) -> bool:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    def name(self) -> str:
        d = self.describe()
        return d.get("type", self.family)

    def on(self, space: Space) -> "Isometry":
        """The same formula acting on another model of the same space family."""
        raise NotImplementedError

    def power(self, n: int) -> "Isometry":
        base = self if n >= 0 else self.inverse()
        out = identity(self.space)
        for _ in range(abs(n)):
            out = out.compose(base)
        return out

    def __repr__(self) -> str:
        return f"<{self.family} {self.describe()}>"


def _check_same(a: Isometry, b: Isometry):
    if a.space.space_id != b.space.space_id:
        raise InvalidIsometry(f"cannot compose across {a.space.space_id} and {b.space.space_id}")


def parse_cycles(text: str, alphabet: Sequence[str]) -> dict:
    """Letter permutation from cycle notation such as "(abAB)" or "(ab)(AB)"."""
    perm = {ch: ch for ch in alphabet}
    text = text.replace(" ", "")
    i = 0
    while i < len(text):
        if text[i] != "(":
            raise InvalidIsometry(f"bad cycle notation {text!r}")
        j = text.find(")", i)
        if j < 0:
            raise InvalidIsometry(f"unclosed cycle in {text!r}")
        cyc = text[i + 1:j]
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            if a not in perm:
                raise InvalidIsometry(f"letter {a!r} outside the alphabet")
            perm[a] = b
        i = j + 1
    if sorted(perm.values()) != sorted(alphabet):
        raise InvalidIsometry(f"{text!r} is not a permutation")
    return perm


class TreeIso(Isometry):
    """x -> reduce(word . sigma(x)) on a regular tree; sigma permutes letters
    and commutes with inversion."""

    family = "tree"

    def __init__(self, space: RegularTree, word: str = "", perm: dict | None = None,
                 label: str | None = None):
        if not isinstance(space, RegularTree):
            raise InvalidIsometry("tree isometries need a regular tree")
        inv = space.inv
        perm = dict(perm) if perm else {ch: ch for ch in space.alphabet}
        if sorted(perm) != space.alphabet or sorted(perm.values()) != space.alphabet:
            raise InvalidIsometry("letter map is not a permutation of the alphabet")
        if any(perm[inv[ch]] != inv[perm[ch]] for ch in space.alphabet):
            raise InvalidIsometry("letter permutation must commute with inversion")
        if not all(ch in inv for ch in word):
            raise InvalidIsometry(f"word {word!r} uses letters outside the alphabet")
        self.space = space
        self.word = space.reduce(word)
        self.perm = perm
        self.label = label

    def sigma(self, w: str) -> str:
        return "".join(self.perm[ch] for ch in w)

    def image(self, x):
        w, leaf = self.space.split(x)
        return self.space.reduce(self.word + self.sigma(w)) + ("*" if leaf else "")

    def compose(self, other):
        _check_same(self, other)
        perm = {ch: self.perm[other.perm[ch]] for ch in self.space.alphabet}
        return TreeIso(self.space, self.word + self.sigma(other.word), perm)

    def inverse(self):
        pinv = {v: k for k, v in self.perm.items()}
        w = "".join(pinv[ch] for ch in self.space.invert(self.word))
        return TreeIso(self.space, w, pinv)

    def perm_order(self) -> int:
        k, p = 1, dict(self.perm)
        while any(p[ch] != ch for ch in p):
            p = {ch: self.perm[p[ch]] for ch in p}
            k += 1
        return k

    def is_identity(self) -> bool:
        return self.word == "" and all(k == v for k, v in self.perm.items())

    def on(self, space):
        return TreeIso(space, self.word, self.perm, self.label)

    def end_image(self, xi):
        if xi.kind != "tree":
            raise InvalidIsometry("tree isometries act on tree ends only")
        u, c = xi.data
        sc = self.sigma(c)
        k = len(self.word) // len(c) + 3
        word = self.space.reduce(self.word + self.sigma(u) + sc * k)
        return _normal_end(self.space, word, sc)

    def describe(self):
        moved = {k: v for k, v in sorted(self.perm.items()) if k != v}
        return {"type": "tree", "word": self.word, "perm": moved}


class AffineIso(Isometry):
    """x -> eps*x + k on a line, or on the base coordinate of a horoball."""

    family = "affine"

    def __init__(self, space: Space, eps: int = 1, k: int = 0):
        if eps not in (1, -1):
            raise InvalidIsometry("eps must be +1 or -1")
        if isinstance(space, Horoball):
            if space.model == "dyadic" and not (eps == 1 and k % (2 ** space.depth) == 0):
                raise InvalidIsometry("dyadic horoballs only admit shifts by multiples of 2^depth")
        elif not isinstance(space, (Line, HoroballModel)):
            raise InvalidIsometry("affine maps need a line or a horoball")
        self.space = space
        self.eps = eps
        self.k = k

    def _base(self, x: int) -> int:
        y = self.eps * x + self.k
        cyc = getattr(self.space, "cycle", None)
        return y % cyc if cyc else y

    def image(self, x):
        if isinstance(self.space, Line):
            return self._base(x)
        return (x[0], self._base(x[1]))

    def compose(self, other):
        _check_same(self, other)
        return AffineIso(self.space, self.eps * other.eps, self.eps * other.k + self.k)

    def inverse(self):
        return AffineIso(self.space, self.eps, -self.eps * self.k)

    def is_identity(self) -> bool:
        cyc = getattr(self.space, "cycle", None)
        k = self.k % cyc if cyc else self.k
        return self.eps == 1 and k == 0

    def on(self, space):
        return AffineIso(space, self.eps, self.k)

    def end_image(self, xi):
        if xi.kind == "line":
            return line_end(self.eps * xi.data)
        if xi.kind == "cusp":
            return xi
        raise InvalidIsometry("affine maps act on line ends and the cusp only")

    def describe(self):
        return {"type": "affine", "eps": self.eps, "k": self.k}


class BSAffine(Isometry):
    """x -> 2^m x + b acting on the Bass-Serre tree of BS(1,2)."""

    family = "bs"

    def __init__(self, space: BSTree, m: int = 0, b=0):
        if not isinstance(space, BSTree):
            raise InvalidIsometry("BS(1,2) elements act on the bs_tree space")
        b = Fraction(b)
        if b.denominator & (b.denominator - 1):
            raise InvalidIsometry("translation part must be a dyadic rational")
        self.space = space
        self.m = m
        self.b = b

    def image(self, x):
        k, r = x
        m, b = self.m, self.b
        # 2^m r + b over the common denominator, then reduce mod 2^(k+m)
        p1, q1, p2, q2 = r.numerator, r.denominator, b.numerator, b.denominator
        if m >= 0:
            num, den = (p1 << m) * q2 + p2 * q1, q1 * q2
        else:
            num, den = p1 * q2 + (p2 * q1 << -m), (q1 * q2) << -m
        return (k + m, dyadic_mod(num, den, k + m))

    def compose(self, other):
        _check_same(self, other)
        return BSAffine(self.space, self.m + other.m, Fraction(2) ** self.m * other.b + self.b)

    def inverse(self):
        return BSAffine(self.space, -self.m, -self.b * Fraction(2) ** (-self.m))

    def is_identity(self) -> bool:
        return self.m == 0 and self.b == 0

    def on(self, space):
        return BSAffine(space, self.m, self.b)

    def fixed_adic(self) -> Fraction | None:
        if self.m == 0:
            return None
        return self.b / (1 - Fraction(2) ** self.m)

    def end_image(self, xi):
        if xi.kind == "cusp":
            return xi
        if xi.kind == "adic":
            return adic_end(Fraction(2) ** self.m * xi.data + self.b)
        raise InvalidIsometry("BS(1,2) elements act on the cusp and adic ends only")

    def describe(self):
        return {"type": "bs", "m": self.m, "b": str(self.b)}


class GraphPermutation(Isometry):
    family = "graph"

    def __init__(self, space: GraphSpace, mapping: dict, validate: bool = True):
        if not isinstance(space, GraphSpace):
            raise InvalidIsometry("graph permutations need an explicit graph")
        full = {v: mapping.get(v, v) for v in space.points()}
        if validate:
            if sorted(full.values()) != sorted(full):
                raise InvalidIsometry("vertex map is not a bijection")
            for u in full:
                img = {full[w] for w in space.neighbors(u)}
                if img != set(space.neighbors(full[u])):
                    raise InvalidIsometry("vertex map does not preserve edges")
        self.space = space
        self.mapping = full

    def image(self, x):
        return self.mapping[x]

    def compose(self, other):
        _check_same(self, other)
        return GraphPermutation(self.space, {v: self.mapping[other.mapping[v]] for v in self.mapping},
                                validate=False)

    def inverse(self):
        return GraphPermutation(self.space, {w: v for v, w in self.mapping.items()}, validate=False)

    def is_identity(self) -> bool:
        return all(k == v for k, v in self.mapping.items())

    def on(self, space):
        return self

    def describe(self):
        moved = {str(to_json(k)): to_json(v) for k, v in self.mapping.items() if k != v}
        return {"type": "graph", "moved": moved}


class ProductIso(Isometry):
    """(g x)_i = g_i(x_sigma(i)); factor g_i acts on factor i."""

    family = "product"

    def __init__(self, space: Product, factors: Sequence[Isometry], sigma: Sequence[int] | None = None):
        if not isinstance(space, Product):
            raise InvalidIsometry("product isometries need a product space")
        factors = list(factors)
        if len(factors) != space.D:
            raise InvalidIsometry(f"expected {space.D} factor maps, got {len(factors)}")
        sigma = tuple(range(space.D)) if sigma is None else tuple(sigma)
        if sorted(sigma) != list(range(space.D)):
            raise InvalidIsometry("sigma is not a permutation of the factors")
        for i, (g, f) in enumerate(zip(factors, space.factors)):
            if g.space.space_id != f.space_id:
                raise InvalidIsometry(f"factor map {i + 1} acts on {g.space.space_id}, not {f.space_id}")
            if space.factors[sigma[i]].space_id != f.space_id:
                raise InvalidIsometry("sigma may only permute identical factors")
        self.space = space
        self.factors = factors
        self.sigma = sigma

    def image(self, x):
        return tuple(g.image(x[s]) for g, s in zip(self.factors, self.sigma))

    def compose(self, other):
        _check_same(self, other)
        fs = [g.compose(other.factors[s]) for g, s in zip(self.factors, self.sigma)]
        sig = tuple(other.sigma[s] for s in self.sigma)
        return ProductIso(self.space, fs, sig)

    def inverse(self):
        D = self.space.D
        sinv = [0] * D
        for i, s in enumerate(self.sigma):
            sinv[s] = i
        fs = [self.factors[sinv[j]].inverse() for j in range(D)]
        return ProductIso(self.space, fs, sinv)

    def is_identity(self) -> bool:
        return self.sigma == tuple(range(self.space.D)) and all(g.is_identity() for g in self.factors)

    def on(self, space):
        return ProductIso(space, [g.on(f) for g, f in zip(self.factors, space.factors)], self.sigma)

    def factor_preserving(self) -> bool:
        return self.sigma == tuple(range(self.space.D))

    def end_image(self, xi):
        if xi.kind != "product":
            raise InvalidIsometry("product isometries act on product directions")
        return product_end([None if xi.data[s] is None else g.end_image(xi.data[s])
                            for g, s in zip(self.factors, self.sigma)])

    def describe(self):
        out = {"type": "product", "factors": [g.describe() for g in self.factors]}
        if not self.factor_preserving():
            out["sigma"] = [s + 1 for s in self.sigma]
        return out


# constructors


def identity(space: Space) -> Isometry:
    if isinstance(space, RegularTree):
        return TreeIso(space)
    if isinstance(space, (Line, Horoball, HoroballModel)):
        return AffineIso(space)
    if isinstance(space, BSTree):
        return BSAffine(space)
    if isinstance(space, GraphSpace):
        return GraphPermutation(space, {}, validate=False)
    if isinstance(space, Product):
        return ProductIso(space, [identity(f) for f in space.factors])
    raise InvalidIsometry(f"no identity for {space.space_id}")


def left_mult(space: Space, word) -> Isometry:
    if isinstance(space, RegularTree):
        if not all(ch in space.inv for ch in word):
            raise InvalidIsometry(f"word {word!r} uses letters outside the alphabet")
        return TreeIso(space, word, label=word)
    if isinstance(space, Line):
        return AffineIso(space, 1, int(word))
    raise InvalidIsometry("left multiplication needs a regular tree or a line")


def rooted_automorphism(space: RegularTree, perm) -> TreeIso:
    if isinstance(perm, str):
        perm = parse_cycles(perm, space.alphabet)
    return TreeIso(space, "", perm)


def reflection(space: RegularTree, axis: str) -> TreeIso:
    """Flip fixing the axis of ``axis``: letters of the axis are fixed, every
    other letter is swapped with its inverse."""
    if not isinstance(space, RegularTree) or space.valence % 2:
        raise InvalidIsometry("reflections need an even-valence regular tree")
    keep = set(axis) | {space.inv[ch] for ch in axis}
    if not keep or not keep <= set(space.alphabet):
        raise InvalidIsometry(f"axis {axis!r} is not a word in the alphabet")
    perm = {ch: ch if ch in keep else space.inv[ch] for ch in space.alphabet}
    return TreeIso(space, "", perm)


def base_shift(space: Horoball, k: int) -> AffineIso:
    if not isinstance(space, (Horoball, HoroballModel)):
        raise InvalidIsometry("base_shift needs a horoball")
    return AffineIso(space, 1, k)


def translate(space: Line, k: int) -> AffineIso:
    return AffineIso(space, 1, k)


def bs_element(space: BSTree, m: int = 0, b=0) -> BSAffine:
    return BSAffine(space, m, b)


def graph_permutation(space: GraphSpace, mapping: dict) -> GraphPermutation:
    return GraphPermutation(space, mapping)


def product_tuple(space: Product, factors: Sequence[Isometry], sigma=None) -> ProductIso:
    return ProductIso(space, factors, sigma)


def unbounded(g: Isometry) -> Isometry:
    """The same isometry on the untruncated model of its space."""
    model = g.space.unbounded()
    return g if model is g.space else g.on(model)


# --------------------------------------------------------------------------
# translation length


@dataclass
class TranslationReport:
    tau: Fraction
    method: str
    certified: bool
    argmin: object = None
    error_bar: Fraction = Fraction(0)

    def to_json(self) -> dict:
        return {"tau": str(self.tau), "method": self.method, "certified": self.certified,
                "argmin": to_json(self.argmin), "error_bar": str(self.error_bar)}


def _tree_like(space: Space) -> bool:
    return isinstance(space, (RegularTree, Line, BSTree))


def min_displacement_point(g: Isometry, start=None, max_steps: int = 10_000):
    """Convex descent of x -> d(gx, x) on the untruncated tree model."""
    h = unbounded(g)
    sp = h.space
    x = sp.base if start is None else start
    f = sp.dist(h.image(x), x)
    for _ in range(max_steps):
        best = None
        for y in sp.neighbors(x):
            fy = sp.dist(h.image(y), y)
            if fy < f and (best is None or fy < best[0]):
                best = (fy, y)
        if best is None:
            return x, f
        f, x = best
    raise HorizonExceeded("descent did not stabilize")


def translation_report(space: Space, g: Isometry, horizon: int = 8) -> TranslationReport:
    if horizon < 2:
        raise HorizonExceeded("horizon must be at least 2")
    if _tree_like(space):
        x, _ = min_displacement_point(g)
        h = unbounded(g)
        tau = Fraction(h.space.dist(h.image(h.image(x)), x), 2)
        if space.contains(x):
            return TranslationReport(tau, "descent", True, x)
        # fall back to the Fekete estimate from the base point
        x0 = space.base
        y = x0
        for _ in range(horizon):
            y = h.image(y)
        est = Fraction(h.space.dist(y, x0), horizon)
        bar = Fraction(2 * h.space.dist(x0, x), horizon)
        return TranslationReport(est, "fekete", False, x, bar)
    if isinstance(space, GraphSpace) and not isinstance(space, Horoball):
        return TranslationReport(Fraction(0), "finite", True, space.base)
    if isinstance(space, Horoball):
        if g.eps == -1 or space.cycle is not None or g.k == 0:
            return TranslationReport(Fraction(0), "finite_order_or_bounded", True, space.base)
        # doubling certificate: a(2m) <= a(m) + 2 forces a(n)/n -> 0
        model = HoroballModel()
        o = model.base
        for i in range(horizon):
            m = 1 << i
            a1 = model.dist(o, (0, m * g.k))
            a2 = model.dist(o, (0, 2 * m * g.k))
            if a2 - a1 <= 2:
                return TranslationReport(Fraction(0), "doubling", True, o)
        return TranslationReport(Fraction(model.dist(o, (0, g.k * horizon)), horizon), "fekete",
                                 False, o)
    if isinstance(space, Product):
        if g.factor_preserving():
            parts = [translation_report(f, gi, horizon) for f, gi in zip(space.factors, g.factors)]
            taus = [p.tau for p in parts]
            tau = sum(taus) if space.p == 1 else max(taus)
            return TranslationReport(tau, "factors", all(p.certified for p in parts),
                                     tuple(p.argmin for p in parts))
        k = _perm_order(g.sigma)
        rep = translation_report(space, g.power(k), horizon)
        return TranslationReport(rep.tau / k, "power", rep.certified, rep.argmin, rep.error_bar / k)
    raise InvalidIsometry(f"no translation length for {space.space_id}")


def _perm_order(sigma: Sequence[int]) -> int:
    n = 1
    seen = set()
    for i in range(len(sigma)):
        if i in seen:
            continue
        j, k = i, 0
        while j not in seen:
            seen.add(j)
            j = sigma[j]
            k += 1
        n = n * k // math.gcd(n, k)
    return n


def translation_length(space: Space, g: Isometry, horizon: int = 8) -> Fraction:
    return translation_report(space, g, horizon).tau


def factor_taus(space: Product, g: ProductIso, horizon: int = 8) -> list[Fraction]:
    return [translation_length(f, gi, horizon) for f, gi in zip(space.factors, g.factors)]


# --------------------------------------------------------------------------
# axes


def axis(space: Space, g: Isometry, horizon: int = 8):
    """(Path of the axis inside the truncation, forward end, backward end)."""
    from .metric_core import Path, geodesic

    tau = translation_length(space, g, horizon)
    if tau <= 0:
        raise NotLoxodromic(f"{g.name()} is not loxodromic")
    if isinstance(space, RegularTree):
        m = g.perm_order()
        W = g.power(m).word
        u = ""
        while len(W) >= 2 and space.inv[W[0]] == W[-1]:
            u += W[0]
            W = W[1:-1]
        c = W
        fwd = tree_end(space, u, c)
        bwd = tree_end(space, u, space.invert(c))
        R = space.radius if space.radius is not None else len(u) + 4 * len(c)
        back = [u + (space.invert(c) * (R // len(c) + 2))[:i] for i in range(1, R + 1)]
        forw = [u + (c * (R // len(c) + 2))[:i] for i in range(1, R + 1)]
        line = [w for w in reversed(back)] + [u] + forw
        pts = [w for w in line if space.contains(w)]
        return Path(tuple(pts)), fwd, bwd
    if isinstance(space, Line):
        pts = tuple(space.points()) if space.radius is not None else tuple(range(-8, 9))
        s = 1 if g.k > 0 else -1
        return Path(pts if s > 0 else pts[::-1]), line_end(s), line_end(-s)
    if isinstance(space, BSTree):
        x = g.fixed_adic()
        R = space.radius if space.radius is not None else 8
        pts = [BSTree.normal(k, adic_mod(x, k)) for k in range(-R, R + 1)]
        pts = [p for p in pts if space.contains(p)]
        if g.m > 0:
            return Path(tuple(pts)), adic_end(x), CUSP
        return Path(tuple(pts[::-1])), CUSP, adic_end(x)
    if isinstance(space, Product):
        fw, bw = [], []
        for f, gi in zip(space.factors, g.factors):
            if g.factor_preserving() and translation_length(f, gi, horizon) > 0:
                _, a, b = axis(f, gi, horizon)
            else:
                a = b = None
            fw.append(a)
            bw.append(b)
        if not g.factor_preserving():
            raise NotLoxodromic("axes are only computed for factor-preserving elements")
        x = translation_report(space, g, horizon).argmin
        x = tuple(x)
        pts = [x]
        y = x
        for _ in range(horizon):
            try:
                y2 = g.apply(y)
            except HorizonExceeded:
                break
            pts.extend(geodesic(space, y, y2).points[1:])
            y = y2
        return Path(tuple(pts)), product_end(fw), product_end(bw)
    raise NotLoxodromic(f"no loxodromics on {space.space_id}")


def fixes(g: Isometry, xi: BoundaryDirection) -> bool:
    try:
        return g.end_image(xi) == xi
    except InvalidIsometry:
        return False


# --------------------------------------------------------------------------
# classification


@dataclass
class IsoClass:
    kind: str
    sub: str | None
    tau: Fraction
    horizon: int
    evidence: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return f"{self.kind}({self.sub})" if self.sub else self.kind

    def to_json(self) -> dict:
        return {"kind": self.kind, "sub": self.sub, "tau": str(self.tau),
                "horizon": self.horizon, "evidence": _jsonable(self.evidence)}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if hasattr(v, "to_json"):
        return v.to_json()
    return v


def space_radius(space: Space):
    """Largest margin in the space (inf when nothing is truncated)."""
    return space.margin(space.base)


def effective_grid(space: Space, L_grid: Sequence) -> list:
    """Grid values small enough for the truncation to separate the three cases."""
    R = space_radius(space)
    grid = sorted(set(L_grid))
    if math.isinf(R):
        return grid
    keep = [L for L in grid if L <= R - 1]
    return keep or grid[:1]


def elliptic_census(space: Space, elements: Sequence[Isometry], L_grid: Sequence,
                    collar: int = 0) -> dict:
    """O^L census of a finite family of isometries on one truncation.

    S: points where every element is defined; D(x): max displacement; the
    frontier of S is the truncation frontier plus points with a neighbour
    outside S.
    """
    pts = space.points()
    S = [x for x in pts if all(h.defined(x) for h in elements)]
    Sset = set(S)
    D = {x: max((space.dist(h.image(x), x) for h in elements), default=0) for x in S}
    front = {x for x in S if space.on_frontier(x) or any(y not in Sset for y in space.neighbors(x))}
    if front:
        # collar: points of S within ``collar`` of the frontier of S
        near = set(front)
        layer = set(front)
        for _ in range(collar):
            layer = {y for x in layer for y in space.neighbors(x) if y in Sset} - near
            near |= layer
    else:
        near = set()
    interior = [x for x in S if x not in near]
    base = space.base
    rows = {}
    for L in effective_grid(space, L_grid):
        O = [x for x in S if D[x] <= L]
        rows[L] = {
            "size": len(O),
            "covers": all(D[x] <= L for x in interior),
            "meets_frontier": any(x in front for x in O),
            "radius": max((space.dist(x, base) for x in O), default=-1),
        }
    if any(r["covers"] for r in rows.values()):
        verdict = "tremble"
    elif all(not r["meets_frontier"] for r in rows.values()):
        verdict = "rotation"
    else:
        verdict = "rift"
    return {"verdict": verdict, "safe_size": len(S), "rows": rows}


def census_two_scales(space: Space, elements: Sequence[Isometry], L_grid: Sequence,
                      collar: int = 0) -> tuple[str, dict]:
    """Run the census on the truncation and on the next smaller one; agree or unresolved."""
    top = elliptic_census(space, elements, L_grid, collar)
    if not space.truncated:
        return top["verdict"], {"top": top}
    small = space.shrink(1)
    lower = elliptic_census(small, [h.on(small) for h in elements], L_grid, collar)
    verdict = top["verdict"]
    if verdict != lower["verdict"]:
        verdict = "unresolved"
    elif verdict == "rotation":
        radii_top = {L: r["radius"] for L, r in top["rows"].items()}
        radii_low = {L: r["radius"] for L, r in lower["rows"].items()}
        if any(radii_top[L] != radii_low.get(L, radii_top[L]) for L in radii_top):
            verdict = "unresolved"
    return verdict, {"top": top, "lower": lower}


def finite_order(g: Isometry, limit: int) -> int | None:
    h = g
    for k in range(1, limit + 1):
        if h.is_identity():
            return k
        h = h.compose(g)
    return None


def orbit_radii(space: Space, g: Isometry, horizon: int) -> list:
    """d(g^m o, o) on the untruncated model for m = 1, 2, 4, ..., 2^horizon."""
    h = unbounded(g)
    sp = h.space
    o = sp.base
    radii = []
    y = h.image(o)
    gm = h
    for _ in range(horizon + 1):
        radii.append(sp.dist(y, o))
        gm = gm.compose(gm)
        y = gm.image(o)
    return radii


def leaves_truncation(space: Space, g: Isometry, horizon: int) -> bool:
    h = unbounded(g)
    y = space.base
    for _ in range(1 << min(horizon, 12)):
        y = h.image(y)
        if not space.contains(y):
            return True
    return False


def _has_cusp(space: Space) -> bool:
    if isinstance(space, Horoball):
        return space.cycle is None
    if isinstance(space, Product):
        return any(_has_cusp(f) for f in space.factors)
    return False


def classify_isometry(space: Space, g: Isometry, horizon: int = 8,
                      L_grid: Sequence = (0, 1, 2, 4, 8)) -> IsoClass:
    rep = translation_report(space, g, max(horizon, 2))
    ev: dict = {"translation": rep}
    if rep.tau > 0:
        return IsoClass("loxodromic", None, rep.tau, horizon, ev)
    radii = orbit_radii(space, g, horizon)
    growing = len(radii) >= 3 and radii[-1] > radii[-2] > radii[-3]
    escapes = leaves_truncation(space, g, horizon)
    ev["orbit_radii"] = radii
    if growing and escapes:
        if _has_cusp(space) and rep.method in ("doubling", "factors"):
            sub = [radii[i + 1] - radii[i] for i in range(len(radii) - 1)]
            ev["sublinear"] = all(s <= 2 for s in sub[1:])
            if ev["sublinear"]:
                ev["fixed_direction"] = "cusp"
                return IsoClass("parabolic", None, rep.tau, horizon, ev)
        return IsoClass("unresolved", None, rep.tau, horizon, ev)
    order = finite_order(g, horizon)
    powers = [g.power(j) for j in range(1, (order or horizon) + 1)]
    collar = space.dist(g.image(space.base), space.base) if space.contains(g.image(space.base)) else 0
    verdict, census = census_two_scales(space, powers, L_grid, collar)
    ev["census"] = census
    ev["order"] = order
    ev["rift_rule"] = "frontier-ray proxy"
    return IsoClass("elliptic", verdict, rep.tau, horizon, ev)
