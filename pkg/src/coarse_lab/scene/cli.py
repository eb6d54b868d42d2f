"""Command line entry point: run, check and corpus."""
from __future__ import annotations

import argparse
import json
import os
import sys

from ..errors import SceneError
from .build import check_scene
from .corpus import corpus_summary
from .parser import parse
from .runner import run_scene


def _seed(flag: int | None, scene_meta: dict) -> int:
    if flag is not None:
        return flag
    env = os.environ.get("COARSE_LAB_SEED")
    if env is not None:
        return int(env)
    v = scene_meta.get("seed")
    return v.value if v is not None else 0


def _load(path: str):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    scene = parse(text)
    check_scene(scene)
    return scene


def _report_error(path: str, e: SceneError) -> int:
    rec = e.to_record()
    print(f"{path}:{e.line}:{e.col}: {e.code}: {e}", file=sys.stderr)
    print(json.dumps(rec, sort_keys=True))
    return 2


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="coarse-lab")
    sub = ap.add_subparsers(dest="cmd", required=True)
    run = sub.add_parser("run", help="run a scene and write a JSON report")
    run.add_argument("scene")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None)
    run.add_argument("--horizon", type=int, default=None)
    run.add_argument("--timings", action="store_true", help="add per-task wall times")
    chk = sub.add_parser("check", help="parse and typecheck only")
    chk.add_argument("scene")
    sub.add_parser("corpus", help="classify the built-in labeled corpus")
    args = ap.parse_args(argv)

    if args.cmd == "corpus":
        return 0 if corpus_summary() else 1
    try:
        scene = _load(args.scene)
    except SceneError as e:
        return _report_error(args.scene, e)
    if args.cmd == "check":
        print(f"{args.scene}: ok ({len(scene.declarations)} declarations, {len(scene.tasks)} tasks)")
        return 0
    report = run_scene(scene, _seed(args.seed, scene.meta), args.horizon, args.timings)
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
