from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarse_lab.action import MarkedGroup
from coarse_lab.errors import NotRegularDirection, PreconditionViolation
from coarse_lab.isometry import (
    identity,
    left_mult,
    line_end,
    product_end,
    product_tuple,
    rooted_automorphism,
    translate,
    tree_end,
)
from coarse_lab.products import elementary_subgroup, factor_partition, find_regular, lattice_rank, tits_probe
from coarse_lab.spaces import make_line, make_product, make_regular_tree

T = make_regular_tree(4, 5)
P = make_product([T, T])
e = identity(T)
ta, tb = left_mult(T, "a"), left_mult(T, "b")


def _ff(factors=(("a", "b"), ("c", "d"))):
    gens = [("a", product_tuple(P, [ta, e])), ("b", product_tuple(P, [tb, e])),
            ("c", product_tuple(P, [e, ta])), ("d", product_tuple(P, [e, tb]))]
    return MarkedGroup(P, gens, horizon=3, factors=[list(f) for f in factors])


def _diag():
    return MarkedGroup(P, [("a", product_tuple(P, [ta, ta])), ("b", product_tuple(P, [tb, tb]))],
                       horizon=3, factors=[["a", "b"]])


def test_partition_product():
    r = factor_partition(_ff())
    assert r.partition == [[1], [2]] and r.F == 2 and r.D == 2


def test_partition_diagonal():
    assert factor_partition(_diag()).partition == [[1, 2]]


def test_partition_failure_cell():
    G = MarkedGroup(P, [("a", product_tuple(P, [ta, e])), ("b", product_tuple(P, [tb, e])),
                        ("z", product_tuple(P, [e, e]))], horizon=3, factors=[["a", "b"], ["z"]])
    r = factor_partition(G)
    assert r.partition is None
    assert r.violating_cells() == [(2, 2)]


def test_partition_needs_factors():
    with pytest.raises(PreconditionViolation):
        factor_partition(MarkedGroup(P, [("a", product_tuple(P, [ta, e]))], horizon=2))


@pytest.mark.parametrize("make", [_ff, _diag], ids=["FxF", "diagonal"])
def test_find_regular_seeds(make):
    G = make()
    hits = 0
    for seed in range(20):
        w, _ = find_regular(G, 1, 100, seed)
        if w is not None:
            hits += 1
            assert all(t >= 1 for t in w.taus)
    assert hits >= 19


def test_find_regular_deterministic():
    a, _ = find_regular(_ff(), 1, 100, 7)
    b, _ = find_regular(_ff(), 1, 100, 7)
    assert a.word == b.word


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.integers(-4, 4), min_size=3, max_size=3), min_size=1, max_size=5))
def test_lattice_rank_matches_numpy(rows):
    assert lattice_rank(rows) == np.linalg.matrix_rank(np.array(rows, dtype=float))


def test_elementary_ranks():
    L = make_line(20)
    PL = make_product([L, L])
    s = translate(L, 1)
    plus, minus = product_end([line_end(1), line_end(1)]), product_end([line_end(-1), line_end(-1)])
    Z2 = MarkedGroup(PL, [("s", product_tuple(PL, [s, identity(L)])), ("u", product_tuple(PL, [identity(L), s]))], 4)
    assert elementary_subgroup(Z2, plus, minus).rank == 2
    Zd = MarkedGroup(PL, [("s", product_tuple(PL, [s, s]))], 4)
    r = elementary_subgroup(Zd, plus, minus)
    assert r.rank == r.rank_prev == 1 and r.rank <= r.D
    xp = product_end([tree_end(T, "", "a"), tree_end(T, "", "a")])
    xm = product_end([tree_end(T, "", "A"), tree_end(T, "", "B")])
    assert elementary_subgroup(_ff(), xp, xm).rank == 1


def test_elementary_needs_regular_pair():
    xp = product_end([tree_end(T, "", "a"), None])
    xm = product_end([tree_end(T, "", "A"), tree_end(T, "", "B")])
    with pytest.raises(NotRegularDirection):
        elementary_subgroup(_ff(), xp, xm)
    same = product_end([tree_end(T, "", "a"), tree_end(T, "", "a")])
    with pytest.raises(NotRegularDirection):
        elementary_subgroup(_ff(), same, product_end([tree_end(T, "", "A"), tree_end(T, "", "a")]))


def test_tits_probe():
    F = MarkedGroup(T, [("a", ta), ("b", tb)], horizon=3)
    r = tits_probe(F)
    assert r.kind == "free_pair" and r.detail["replay"]["failures"] == 0
    L = make_line(20)
    PL = make_product([L, L])
    s = translate(L, 1)
    Z2 = MarkedGroup(PL, [("s", product_tuple(PL, [s, identity(L)])), ("u", product_tuple(PL, [identity(L), s]))], 3)
    r = tits_probe(Z2)
    assert r.kind == "abelian_evidence" and r.detail["rank"] == 2
    with pytest.raises(PreconditionViolation):
        tits_probe(MarkedGroup(T, [("r", rooted_automorphism(T, "(abAB)"))], horizon=3))
