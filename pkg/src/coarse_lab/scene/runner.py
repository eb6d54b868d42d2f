"""Execute checked scenes and emit deterministic JSON reports."""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..acylindricity import acyl_profile, acyl_witness, drop_factor
from ..action import busemann, classify_action
from ..coarsify import essential_core, tremble_quotient
from ..errors import CoarseLabError
from ..isometry import _jsonable, classify_isometry
from ..metric_core import (
    hyperbolicity_estimate,
    measured_morse_constant,
    tree_approx,
    tree_approx_bound,
)
from ..products import elementary_subgroup, factor_partition, find_regular, tits_probe
from ..spaces import to_json
from .build import check_scene
from .parser import Scene, format_value


def rng_for(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, stream]))


@dataclass
class Context:
    seed: int
    default_horizon: int | None = None
    _delta_cache: dict = field(default_factory=dict)

    def horizon(self, a: dict):
        G = a["group"]
        h = a.get("horizon")
        if h is None:
            h = self.default_horizon if self.default_horizon is not None else G.horizon
        return (G if h == G.horizon else G.with_horizon(h)), h


def _t_classify(a, ctx, stream):
    G, h = ctx.horizon(a)
    c = classify_action(G, h)
    return {"label": c.label}, c.to_json()


def _t_classify_iso(a, ctx, stream):
    g = a["iso"]
    c = classify_isometry(g.space, g, a["horizon"])
    return {"label": c.label, "tau": str(c.tau)}, c.to_json()


def _t_hyperbolicity(a, ctx, stream):
    S = a["space"]
    if a["sample"] is not None:
        pts = S.points()
        k = min(a["sample"], len(pts))
        idx = sorted(rng_for(ctx.seed, stream).choice(len(pts), size=k, replace=False).tolist())
        rep = hyperbolicity_estimate(S, [pts[i] for i in idx])
    else:
        rep = hyperbolicity_estimate(S, exhaustive=a["exhaustive"]) if a["exhaustive"] \
            else hyperbolicity_estimate(S, S.points())
    bundle = rep.to_json()
    bundle["worst_triangle"] = None if rep.worst_triangle is None else [to_json(x) for x in rep.worst_triangle]
    return {"delta_four_point": str(rep.delta_four_point), "delta_tripod": str(rep.delta_tripod)}, bundle


def _t_acyl_profile(a, ctx, stream):
    G, h = ctx.horizon(a)
    p = acyl_profile(G, a["eps"], a["R"], h, a["budget"])
    return {"verdict": p.verdict, "table": p.to_json()["table"]}, p.to_json()


def _t_acyl_witness(a, ctx, stream):
    G, h = ctx.horizon(a)
    w = acyl_witness(G, a["eps"], h)
    if w is None:
        return {"found": False}, None
    return ({"found": True, "verified": w["verified"], "R": w["R"],
             "counts": [f["count"] for f in w["family"]]}, _jsonable(w))


def _t_drop_factor(a, ctx, stream):
    G, h = ctx.horizon(a)
    r = drop_factor(G, a["factor"], a["eps"], a["R"], h, pair_budget=a["budget"])
    return ({"projection": r.projection.label, "before": r.before.verdict, "after": r.after.verdict},
            r.to_json())


def _t_busemann(a, ctx, stream):
    G, h = ctx.horizon(a)
    b = busemann(G, a["direction"], h)
    gens = {k: str(b.homog[k]) for k in sorted(b.homog) if k in G.base_gens}
    return {"generators": gens, "defect_bound": str(b.defect_bound), "certified": b.certified}, b.to_json()


def _t_find_regular(a, ctx, stream):
    G = a["group"]
    runs = []
    first = None
    for r in range(a["runs"]):
        w, steps = find_regular(G, a["trials"], a["max_steps"], ctx.seed + r)
        runs.append(steps)
        if w is not None and first is None:
            first = w
    ok = sum(any(s is not None for s in steps) for steps in runs)
    res = {"successes": ok, "runs": a["runs"]}
    if first is not None:
        res["word"] = first.to_json()["word"]
        res["taus"] = first.to_json()["taus"]
    return res, {"steps": runs, "witness": first.to_json() if first else None}


def _t_elementary(a, ctx, stream):
    G, h = ctx.horizon(a)
    e = elementary_subgroup(G, a["plus"], a["minus"], h)
    return {"rank": e.rank, "rank_prev": e.rank_prev, "D": e.D}, e.to_json()


def _t_partition(a, ctx, stream):
    G, h = ctx.horizon(a)
    p = factor_partition(G, h)
    return ({"partition": p.partition, "violating_cells": [list(c) for c in p.violating_cells()]},
            p.to_json())


def _t_tits(a, ctx, stream):
    G, h = ctx.horizon(a)
    t = tits_probe(G, h, seed=ctx.seed)
    return {"kind": t.kind}, t.to_json()


def _t_core(a, ctx, stream):
    G, h = ctx.horizon(a)
    c = essential_core(G, h, a["r"])
    return ({"core_size": len(c.core_points), "region_size": c.region_size,
             "quasiconvexity_gap": c.quasiconvexity_gap, "invariance_gap": c.invariance_gap},
            c.to_json())


def _t_quotient(a, ctx, stream):
    q = tremble_quotient(a["space"], a["by"])
    return ({"classes": len(q.classes), "B": q.B, "passed": q.checks["passed"],
             "delta_quotient": str(q.checks["delta_quotient"])},
            {"classes": [[to_json(x) for x in c] for c in q.classes], "checks": _jsonable(q.checks)})


def _t_tree_approx(a, ctx, stream):
    S = a["space"]
    pts = S.points()
    key = S.space_id
    if key not in ctx._delta_cache:
        ctx._delta_cache[key] = hyperbolicity_estimate(S, exhaustive=True).delta_tripod
    delta = ctx._delta_cache[key]
    rng = rng_for(ctx.seed, stream)
    rows = []
    for _ in range(a["samples"]):
        idx = sorted(rng.choice(len(pts), size=min(a["size"], len(pts)), replace=False).tolist())
        sample = [pts[i] for i in idx]
        t = tree_approx(S, sample)
        M = measured_morse_constant(S, sample, 20 * delta)
        bound = tree_approx_bound(M, delta, len(sample))
        rows.append({"points": [to_json(x) for x in sample], "distortion": t.distortion,
                     "M": M, "bound": round(bound, 6), "ok": t.distortion <= bound})
    return ({"max_distortion": max(r["distortion"] for r in rows), "delta": str(delta),
             "exceptions": sum(not r["ok"] for r in rows)}, {"samples": rows})


TASK_FUNCS = {
    "classify": _t_classify, "classify_iso": _t_classify_iso, "hyperbolicity": _t_hyperbolicity,
    "acyl_profile": _t_acyl_profile, "acyl_witness": _t_acyl_witness,
    "drop_factor": _t_drop_factor, "busemann": _t_busemann, "find_regular": _t_find_regular,
    "elementary": _t_elementary, "partition": _t_partition, "tits": _t_tits, "core": _t_core,
    "quotient": _t_quotient, "tree_approx": _t_tree_approx,
}


def _params(task) -> dict:
    c = task.call
    out = {f"#{i}": format_value(v) for i, v in enumerate(c.args)}
    out.update({k: format_value(v) for k, v in c.kwargs})
    return out


@dataclass
class Report:
    data: dict
    exit_code: int

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2) + "\n"


def run_scene(scene: Scene, seed: int = 0, default_horizon: int | None = None,
              timings: bool = False) -> Report:
    env, bound = check_scene(scene)
    ctx = Context(seed, default_horizon)
    records = []
    failed = False
    for stream, (task, a) in enumerate(zip(scene.tasks, bound)):
        rec = {"name": task.name, "params": _params(task)}
        t0 = time.perf_counter()
        try:
            result, bundle = TASK_FUNCS[task.name](a, ctx, stream)
            rec["result"] = _jsonable(result)
            rec["bundle"] = _jsonable(bundle)
        except CoarseLabError as e:
            rec["result"] = None
            rec["bundle"] = None
            rec["error"] = e.to_record()
            failed = True
        if timings:
            rec["wall_time"] = round(time.perf_counter() - t0, 4)
        records.append(rec)
    data = {"version": __version__,
            "scene_sha256": hashlib.sha256(scene.text.encode("utf-8")).hexdigest(),
            "seed": seed, "tasks": records}
    return Report(data, 1 if failed else 0)
