"""The built-in labeled corpora of isometries and actions."""
from __future__ import annotations

import time

from ..action import MarkedGroup, classify_action
from ..isometry import (
    base_shift,
    bs_element,
    classify_isometry,
    graph_permutation,
    identity,
    left_mult,
    product_tuple,
    reflection,
    rooted_automorphism,
)
from ..spaces import make_bs_tree, make_cycle, make_horoball, make_product, make_regular_tree


def _swap_product(T):
    P = make_product([T, make_cycle(2)], 1)
    swap = graph_permutation(P.factors[1], {0: 1, 1: 0})
    return P, product_tuple(P, [identity(T), swap])


def isometry_corpus(radius: int) -> list[tuple[str, str, object, object]]:
    """(name, expected label, space, isometry) at truncation radius ``radius``."""
    T = make_regular_tree(4, radius)
    P, swap = _swap_product(T)
    H = make_horoball("line", radius, width=32)
    return [
        ("root rotation", "elliptic(rotation)", T, rooted_automorphism(T, "(abAB)")),
        ("axis flip", "elliptic(rift)", T, reflection(T, "a")),
        ("bounded-factor swap", "elliptic(tremble)", P, swap),
        ("left_mult a", "loxodromic", T, left_mult(T, "a")),
        ("horoball base_shift", "parabolic", H, base_shift(H, 1)),
    ]


def action_corpus(radius: int = 6) -> list[tuple[str, str, MarkedGroup]]:
    T = make_regular_tree(4, radius)
    a, b = left_mult(T, "a"), left_mult(T, "b")
    P, swap = _swap_product(T)
    B = make_bs_tree(radius)
    H = make_horoball("line", radius, width=32)
    return [
        ("tremble", "elliptic(tremble)", MarkedGroup(P, [("s", swap)], radius)),
        ("rotation", "elliptic(rotation)", MarkedGroup(T, [("r", rooted_automorphism(T, "(abAB)"))], radius)),
        ("rift", "elliptic(rift)", MarkedGroup(T, [("f", reflection(T, "a"))], radius)),
        ("lineal oriented", "lineal(oriented)", MarkedGroup(T, [("a", a)], radius)),
        ("lineal non-oriented", "lineal(non-oriented)",
         MarkedGroup(T, [("a", a), ("f", reflection(T, "b"))], radius)),
        ("quasiparabolic BS(1,2)", "quasiparabolic",
         MarkedGroup(B, [("t", bs_element(B, 1, 0)), ("a", bs_element(B, 0, 1))], radius)),
        ("parabolic Z on horoball", "parabolic", MarkedGroup(H, [("s", base_shift(H, 1))], radius)),
        ("general-type F2", "general_type", MarkedGroup(T, [("a", a), ("b", b)], radius)),
    ]


def corpus_summary(out=print) -> bool:
    """Classify both corpora and print one line per item; True if all agree."""
    ok = True
    for radius in (6, 8):
        for name, want, space, g in isometry_corpus(radius):
            t0 = time.perf_counter()
            got = classify_isometry(space, g, 8).label
            good = got == want
            ok &= good
            out(f"{'PASS' if good else 'FAIL'} isometry R={radius} {name}: {got} "
                f"(expected {want}, {time.perf_counter() - t0:.2f}s)")
    for name, want, G in action_corpus(6):
        t0 = time.perf_counter()
        got = classify_action(G, 6).label
        good = got == want
        ok &= good
        out(f"{'PASS' if good else 'FAIL'} action {name}: {got} "
            f"(expected {want}, {time.perf_counter() - t0:.2f}s)")
    return ok
