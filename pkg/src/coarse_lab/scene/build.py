"""Static checking: evaluate declarations into spaces, isometries and groups,
and bind task arguments against their signatures."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .. import isometry as iso_mod
from .. import spaces as sp_mod
from ..action import MarkedGroup
from ..errors import CoarseLabError, TypeMismatch, UnknownName
from ..isometry import BoundaryDirection
from .parser import Call, Decl, GroupDecl, ListV, Num, Ref, Scene, Str, Task

REQUIRED = object()


@dataclass
class Sig:
    positional: tuple
    params: dict  # name -> (type, default)


def _sig(positional: str, **params) -> Sig:
    return Sig(tuple(positional.split()) if positional else (), params)


SPACES = {
    "tree": _sig("valence radius", valence=("int", REQUIRED), radius=("int", REQUIRED),
                 letters=("str", None), pendant=("bool", False)),
    "line": _sig("radius", radius=("int", REQUIRED)),
    "bs_tree": _sig("radius", radius=("int", REQUIRED)),
    "horoball": _sig("", base=("base", "line"), depth=("int", 3), width=("int", None),
                     model=("str", "full")),
    "cycle": _sig("n", n=("int", REQUIRED)),
    "path": _sig("n", n=("int", REQUIRED)),
    "grid": _sig("rows cols", rows=("int", REQUIRED), cols=("int", REQUIRED)),
    "graph": _sig("edges", edges=("pairs", REQUIRED), bounded=("bool", False)),
    "product": _sig("factors", factors=("spacelist", REQUIRED), p=("pnum", 1)),
}

ISOS = {
    "identity": _sig("space", space=("space", REQUIRED)),
    "left_mult": _sig("space word", space=("space", REQUIRED), word=("word", REQUIRED)),
    "rotation": _sig("space perm", space=("space", REQUIRED), perm=("str", REQUIRED)),
    "reflection": _sig("space axis", space=("space", REQUIRED), axis=("str", REQUIRED)),
    "base_shift": _sig("space k", space=("space", REQUIRED), k=("int", REQUIRED)),
    "translate": _sig("space k", space=("space", REQUIRED), k=("int", REQUIRED)),
    "bs": _sig("space m b", space=("space", REQUIRED), m=("int", 0), b=("frac", 0)),
    "perm": _sig("space mapping", space=("space", REQUIRED), mapping=("pairs", REQUIRED)),
    "tuple": _sig("space factors", space=("space", REQUIRED), factors=("isolist", REQUIRED),
                  sigma=("intlist", None)),
}

_H = ("int", None)
TASKS = {
    "classify": _sig("group", group=("group", REQUIRED), horizon=_H),
    "classify_iso": _sig("iso", iso=("iso", REQUIRED), horizon=("int", 8)),
    "hyperbolicity": _sig("space", space=("space", REQUIRED), exhaustive=("bool", True),
                          sample=("int", None)),
    "acyl_profile": _sig("group", group=("group", REQUIRED), eps=("intlist", [0, 1, 2, 4]),
                         R=("intlist", [1, 2, 4]), horizon=_H, budget=("int", 2000)),
    "acyl_witness": _sig("group", group=("group", REQUIRED), eps=("int", 2), horizon=_H),
    "drop_factor": _sig("group", group=("group", REQUIRED), factor=("int", REQUIRED), horizon=_H,
                        eps=("intlist", [0, 1, 2]), R=("intlist", [1, 2, 4]),
                        budget=("int", 2000)),
    "busemann": _sig("group", group=("group", REQUIRED), direction=("dir", REQUIRED), horizon=_H),
    "find_regular": _sig("group", group=("group", REQUIRED), trials=("int", 1),
                         max_steps=("int", 100), runs=("int", 1)),
    "elementary": _sig("group", group=("group", REQUIRED), plus=("dir", REQUIRED),
                       minus=("dir", REQUIRED), horizon=_H),
    "partition": _sig("group", group=("group", REQUIRED), horizon=_H),
    "tits": _sig("group", group=("group", REQUIRED), horizon=_H),
    "core": _sig("group", group=("group", REQUIRED), horizon=_H, r=("int", 0)),
    "quotient": _sig("space", space=("space", REQUIRED), by=("isolist", REQUIRED)),
    "tree_approx": _sig("space", space=("space", REQUIRED), size=("int", 5), samples=("int", 1)),
}

GROUP_OPTIONS = {"horizon": "int"}


@dataclass
class Env:
    spaces: dict = field(default_factory=dict)
    isos: dict = field(default_factory=dict)
    groups: dict = field(default_factory=dict)

    def kind_of(self, name: str) -> str | None:
        for kind, table in (("space", self.spaces), ("iso", self.isos), ("group", self.groups)):
            if name in table:
                return kind
        return None


def _mismatch(msg: str, node) -> TypeMismatch:
    return TypeMismatch(msg, getattr(node, "line", 0), getattr(node, "col", 0))


def _article(kind: str) -> str:
    return "an" if kind[0] in "aeiou" else "a"


def _lookup(env: Env, node, kind: str):
    if not isinstance(node, Ref):
        raise _mismatch(f"expected {_article(kind)} {kind} name", node)
    have = env.kind_of(node.name)
    if have is None:
        raise UnknownName(f"{node.name!r} is not declared", node.line, node.col)
    if have != kind:
        raise _mismatch(f"{node.name!r} is {_article(have)} {have}, expected {_article(kind)} {kind}", node)
    return {"space": env.spaces, "iso": env.isos, "group": env.groups}[kind][node.name]


def _int(node) -> int:
    if isinstance(node, Num) and isinstance(node.value, int):
        return node.value
    raise _mismatch("expected an integer", node)


def _list(node) -> tuple:
    if not isinstance(node, ListV):
        raise _mismatch("expected a list", node)
    return node.items


def evaluate(env: Env, node, typ: str):
    if isinstance(node, Ref) and node.name == "none" and typ not in ("space", "iso", "group"):
        return None
    if typ == "int":
        return _int(node)
    if typ in ("str", "word"):
        if not isinstance(node, Str):
            raise _mismatch("expected a quoted string", node)
        return node.value
    if typ == "bool":
        if isinstance(node, Ref) and node.name in ("true", "false"):
            return node.name == "true"
        raise _mismatch("expected true or false", node)
    if typ in ("space", "iso", "group"):
        return _lookup(env, node, typ)
    if typ == "intlist":
        return [_int(x) for x in _list(node)]
    if typ == "spacelist":
        return [_lookup(env, x, "space") for x in _list(node)]
    if typ == "isolist":
        return [_lookup(env, x, "iso") for x in _list(node)]
    if typ == "pairs":
        out = []
        for item in _list(node):
            pair = _list(item)
            if len(pair) != 2:
                raise _mismatch("expected a pair [u, v]", item)
            out.append((_int(pair[0]), _int(pair[1])))
        return out
    if typ == "pnum":
        if isinstance(node, Ref) and node.name == "inf":
            return math.inf
        v = _int(node)
        if v != 1:
            raise _mismatch("p must be 1 or inf", node)
        return v
    if typ == "base":
        if isinstance(node, Str) and node.value == "line":
            return "line"
        return _int(node)
    if typ == "frac":
        if isinstance(node, Num):
            return Fraction(node.value)
        raise _mismatch("expected a rational number", node)
    if typ == "dir":
        if not isinstance(node, (Call, ListV, Ref)):
            raise _mismatch("expected a boundary direction", node)
        return node
    raise AssertionError(typ)


def bind(env: Env, call: Call, sig: Sig) -> dict:
    if len(call.args) > len(sig.positional):
        raise _mismatch(f"{call.fn} takes at most {len(sig.positional)} positional arguments",
                        call.args[len(sig.positional)])
    given = dict(zip(sig.positional, call.args))
    for key, v in call.kwargs:
        if key not in sig.params:
            raise _mismatch(f"{call.fn} has no parameter {key!r}", v)
        if key in given:
            raise _mismatch(f"{key!r} given twice", v)
        given[key] = v
    out = {}
    for key, (typ, default) in sig.params.items():
        if key in given:
            out[key] = evaluate(env, given[key], typ)
        elif default is REQUIRED:
            raise _mismatch(f"{call.fn} needs argument {key!r}", call)
        else:
            out[key] = default
    return out


def _node_for(call: Call, sig: Sig, key: str):
    for k, v in call.kwargs:
        if k == key:
            return v
    if key in sig.positional:
        i = sig.positional.index(key)
        if i < len(call.args):
            return call.args[i]
    return call


def make_space(kind: str, a: dict):
    if kind == "tree":
        return sp_mod.make_regular_tree(a["valence"], a["radius"], a["letters"], a["pendant"])
    if kind == "line":
        return sp_mod.make_line(a["radius"])
    if kind == "bs_tree":
        return sp_mod.make_bs_tree(a["radius"])
    if kind == "horoball":
        return sp_mod.make_horoball(a["base"], a["depth"], a["width"], a["model"])
    if kind == "cycle":
        return sp_mod.make_cycle(a["n"])
    if kind == "path":
        return sp_mod.make_path(a["n"])
    if kind == "grid":
        return sp_mod.make_grid(a["rows"], a["cols"])
    if kind == "graph":
        return (sp_mod.make_bounded_graph if a["bounded"] else sp_mod.make_finite_graph)(a["edges"])
    if kind == "product":
        return sp_mod.make_product(a["factors"], a["p"])
    raise AssertionError(kind)


def make_iso(kind: str, a: dict):
    S = a["space"]
    if kind == "identity":
        return iso_mod.identity(S)
    if kind == "left_mult":
        return iso_mod.left_mult(S, a["word"])
    if kind == "rotation":
        return iso_mod.rooted_automorphism(S, a["perm"])
    if kind == "reflection":
        return iso_mod.reflection(S, a["axis"])
    if kind == "base_shift":
        return iso_mod.base_shift(S, a["k"])
    if kind == "translate":
        return iso_mod.translate(S, a["k"])
    if kind == "bs":
        return iso_mod.bs_element(S, a["m"], a["b"])
    if kind == "perm":
        return iso_mod.graph_permutation(S, dict(a["mapping"]))
    if kind == "tuple":
        sigma = None if a["sigma"] is None else [s - 1 for s in a["sigma"]]
        return iso_mod.product_tuple(S, a["factors"], sigma)
    raise AssertionError(kind)


def _precheck_iso(kind: str, call: Call, a: dict):
    """Checks that point at a specific argument token."""
    S = a["space"]
    sig = ISOS[kind]
    if kind == "left_mult" and isinstance(S, sp_mod.RegularTree):
        bad = [ch for ch in a["word"] if ch not in S.inv]
        if bad:
            raise _mismatch(f"letter {bad[0]!r} is outside the alphabet {''.join(S.alphabet)}",
                            _node_for(call, sig, "word"))
    if kind == "tuple":
        if not isinstance(S, sp_mod.Product):
            raise _mismatch("tuple needs a product space", _node_for(call, sig, "space"))
        if len(a["factors"]) != S.D:
            raise _mismatch(f"product arity mismatch: {S.D} factors, {len(a['factors'])} maps",
                            _node_for(call, sig, "factors"))


def build_env(scene: Scene) -> Env:
    env = Env()
    for d in scene.declarations:
        if env.kind_of(d.name) is not None:
            raise _mismatch(f"{d.name!r} is already declared", d)
        if isinstance(d, Decl):
            table = SPACES if d.kind == "space" else ISOS
            if d.call.fn not in table:
                raise UnknownName(f"unknown {d.kind} constructor {d.call.fn!r}", d.call.line, d.call.col)
            a = bind(env, d.call, table[d.call.fn])
            try:
                if d.kind == "space":
                    env.spaces[d.name] = make_space(d.call.fn, a)
                else:
                    _precheck_iso(d.call.fn, d.call, a)
                    env.isos[d.name] = make_iso(d.call.fn, a)
            except CoarseLabError as e:
                if isinstance(e, (TypeMismatch, UnknownName)):
                    raise
                raise _mismatch(f"{e.code}: {e}", d.call) from None
        else:
            env.groups[d.name] = _make_group(env, d)
    return env


def _make_group(env: Env, d: GroupDecl) -> MarkedGroup:
    gens = [(r.name, _lookup(env, r, "iso")) for r in d.gens]
    space = gens[0][1].space
    for r, (_, g) in zip(d.gens, gens):
        if g.space.space_id != space.space_id:
            raise _mismatch(f"{r.name!r} acts on {g.space.space_id}, not {space.space_id}", r)
    opts = {}
    for key, v in d.options:
        if key not in GROUP_OPTIONS:
            raise _mismatch(f"unknown group option {key!r}", v)
        opts[key] = evaluate(env, v, GROUP_OPTIONS[key])
    factors = None
    if d.factors is not None:
        names = {r.name for r in d.gens}
        for block in d.factors:
            for r in block:
                if r.name not in names:
                    if env.kind_of(r.name) is None:
                        raise UnknownName(f"{r.name!r} is not declared", r.line, r.col)
                    raise _mismatch(f"{r.name!r} is not a generator of {d.name}", r)
        factors = [[r.name for r in block] for block in d.factors]
    return MarkedGroup(space, gens, opts.get("horizon", 6), factors=factors, name=d.name)


# --------------------------------------------------------------------------
# directions


def direction(node, space) -> BoundaryDirection:
    """Evaluate a direction literal against the space it lives in."""
    if isinstance(node, ListV):
        if not isinstance(space, sp_mod.Product) or len(node.items) != space.D:
            raise _mismatch("product direction arity mismatch", node)
        parts = [None if isinstance(x, Ref) and x.name == "none" else direction(x, f)
                 for x, f in zip(node.items, space.factors)]
        return iso_mod.product_end(parts)
    if isinstance(node, Ref) and node.name == "cusp":
        return iso_mod.CUSP
    if isinstance(node, Call):
        try:
            if node.fn == "end" and isinstance(space, sp_mod.RegularTree):
                a = bind(Env(), node, _sig("period prefix", period=("str", REQUIRED),
                                           prefix=("str", "")))
                return iso_mod.tree_end(space, a["prefix"], a["period"])
            if node.fn == "end" and isinstance(space, sp_mod.Line):
                a = bind(Env(), node, _sig("sign", sign=("int", REQUIRED)))
                if a["sign"] not in (1, -1):
                    raise _mismatch("line ends are end(1) and end(-1)", node)
                return iso_mod.line_end(a["sign"])
            if node.fn == "adic":
                a = bind(Env(), node, _sig("x", x=("frac", REQUIRED)))
                return iso_mod.adic_end(a["x"])
        except TypeMismatch:
            raise
        except CoarseLabError as e:
            raise _mismatch(f"{e.code}: {e}", node) from None
    raise _mismatch(f"not a direction of {space.space_id}", node)


def check_task(env: Env, task: Task) -> dict:
    if task.name not in TASKS:
        raise UnknownName(f"unknown task {task.name!r}", task.call.line, task.call.col)
    sig = TASKS[task.name]
    a = bind(env, task.call, sig)
    for key, (typ, _) in sig.params.items():
        if typ == "dir":
            a[key] = direction(a[key], a["group"].space)
    if task.name == "drop_factor":
        S = a["group"].space
        if not isinstance(S, sp_mod.Product) or not 1 <= a["factor"] <= S.D:
            raise _mismatch("factor index out of range", _node_for(task.call, sig, "factor"))
    if task.name == "partition" and a["group"].factors is None:
        raise _mismatch("partition needs a group with declared factors", _node_for(task.call, sig, "group"))
    if task.name == "quotient":
        for node, g in zip(_list(_node_for(task.call, sig, "by")), a["by"]):
            if g.space.space_id != a["space"].space_id:
                raise _mismatch(f"{node.name!r} does not act on this space", node)
    return a


def check_scene(scene: Scene) -> tuple[Env, list]:
    env = build_env(scene)
    bound = [check_task(env, t) for t in scene.tasks]
    meta = scene.meta
    for key, v in meta.items():
        if key != "seed":
            raise _mismatch(f"unknown meta key {key!r}", v)
        _int(v)
    return env, bound
