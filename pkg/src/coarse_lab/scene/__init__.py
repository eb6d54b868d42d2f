"""Scene language: parse, check, run and print."""
from __future__ import annotations

from .build import check_scene
from .parser import Scene, parse, print_scene
from .runner import Report, run_scene


def parse_scene(text: str) -> Scene:
    """Parse and statically check a scene."""
    scene = parse(text)
    check_scene(scene)
    return scene


__all__ = ["Scene", "Report", "parse", "parse_scene", "print_scene", "run_scene", "check_scene"]
