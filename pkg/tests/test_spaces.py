from __future__ import annotations

import math
from collections import deque
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from coarse_lab.errors import BadDepth, BadValence, Disconnected, InvalidPoint, InvalidSpace, MismatchedSpace
from coarse_lab.spaces import (
    HoroballModel,
    Point,
    dyadic_mod,
    make_bounded_graph,
    make_bs_tree,
    make_cycle,
    make_finite_graph,
    make_grid,
    make_horoball,
    make_line,
    make_path,
    make_product,
    make_regular_tree,
    reduce_word,
)


def _matrix(space, pts):
    return np.array([[space.dist(x, y) for y in pts] for x in pts])


def _bfs(adj, src):
    d = {src: 0}
    q = deque([src])
    while q:
        x = q.popleft()
        for y in adj(x):
            if y not in d:
                d[y] = d[x] + 1
                q.append(y)
    return d


@pytest.mark.parametrize("valence,radius,count", [(4, 2, 17), (3, 2, 10), (4, 3, 53), (6, 1, 7)])
def test_tree_vertex_counts(valence, radius, count):
    # by hand: 1 + v * sum (v-1)^i
    assert len(make_regular_tree(valence, radius).points()) == count


def test_tree_metric_matches_floyd_warshall():
    T = make_regular_tree(4, 3)
    words, edges = oracles.free_tree(2, 3)
    assert sorted(words) == sorted(T.points())
    assert (_matrix(T, words) == oracles.floyd_warshall(words, edges)).all()


@pytest.mark.parametrize("make,oracle", [
    (lambda: make_cycle(12), lambda: oracles.cycle_graph(12)),
    (lambda: make_grid(3, 4), lambda: oracles.grid_graph(3, 4)),
])
def test_graph_metric_matches_floyd_warshall(make, oracle):
    S = make()
    v, e = oracle()
    assert (_matrix(S, v) == oracles.floyd_warshall(v, e)).all()


def _horoball_edges(w, d):
    verts = [(k, x) for k in range(d + 1) for x in range(-w, w + 1)]
    edges = [((k, x), (k, y)) for k in range(d + 1) for x in range(-w, w + 1)
             for y in range(x + 1, w + 1) if y - x <= 2 ** k]
    edges += [((k, x), (k + 1, x)) for k in range(d) for x in range(-w, w + 1)]
    return verts, edges


def test_horoball_full_model_matches_floyd_warshall():
    H = make_horoball("line", 3, width=4)
    v, e = _horoball_edges(4, 3)
    assert (_matrix(H, v) == oracles.floyd_warshall(v, e)).all()
    # brute force: top-level shortcut: up 2, across 2 hops of 4, down 2
    assert H.dist((0, -4), (0, 4)) == 6


def test_horoball_dyadic_level():
    # model definition: level-1 representatives over [-4, 4]
    H = make_horoball("line", 3, width=4, model="dyadic")
    assert H.level_sets[1] == [-4, -2, 0, 2, 4]


def test_horoball_model_closed_form_matches_bfs():
    H = make_horoball("line", 7, width=64)
    M = HoroballModel()
    for src in [(0, 0), (1, 3), (2, -5)]:
        d = _bfs(H.neighbors, src)
        for k in range(4):
            for x in range(-12, 13):
                assert M.dist(src, (k, x)) == d[(k, x)]


def test_line_and_product_metrics():
    L = make_line(5)
    C = make_cycle(6)
    P1 = make_product([L, C], 1)
    Pinf = make_product([L, C], math.inf)
    for x, y in [((0, 0), (3, 3)), ((-5, 1), (5, 4)), ((2, 5), (2, 0))]:
        parts = [L.dist(x[0], y[0]), C.dist(x[1], y[1])]
        assert P1.dist(x, y) == sum(parts)
        assert Pinf.dist(x, y) == max(parts)


def test_linf_neighbours_are_distance_one():
    P = make_product([make_line(3), make_cycle(5)], math.inf)
    for x in P.points()[::7]:
        assert all(P.dist(x, y) == 1 for y in P.neighbors(x))


@pytest.mark.parametrize("space", [make_bs_tree(4), make_regular_tree(3, 3),
                                   make_regular_tree(4, 3, pendant=True)],
                         ids=["bs", "tree3", "pendant"])
def test_distance_agrees_with_neighbour_graph(space):
    pts = space.points()
    for src in pts[:: max(1, len(pts) // 6)]:
        d = _bfs(space.neighbors, src)
        assert all(space.dist(src, y) == d[y] for y in pts)


def test_bs_tree_is_trivalent():
    B = make_bs_tree(5)
    assert all(len(B.neighbors(x)) == 3 for x in B.points() if not B.on_frontier(x))


def test_pendant_leaves():
    T = make_regular_tree(4, 2, pendant=True)
    leaves = [x for x in T.points() if x.endswith("*")]
    assert len(leaves) == 17
    assert T.dist("a*", "b*") == 4


def test_points_and_errors():
    T = make_regular_tree(4, 2)
    C = make_cycle(5)
    assert T.payload(Point(T.space_id, "ab")) == "ab"
    with pytest.raises(MismatchedSpace):
        T.payload(Point(C.space_id, 0))
    with pytest.raises(InvalidPoint):
        T.payload("aA")
    with pytest.raises(InvalidPoint):
        T.payload("aaa")
    with pytest.raises(BadValence):
        make_regular_tree(2, 3)
    with pytest.raises(BadDepth):
        make_horoball("line", 0)
    with pytest.raises(Disconnected):
        make_finite_graph([(0, 1), (2, 3)])
    with pytest.raises(InvalidSpace):
        make_product([make_line(2)], 2)
    with pytest.raises(InvalidSpace):
        make_line(None).points()


def test_bounded_graph_and_path():
    G = make_bounded_graph([(0, 1), (1, 2), (2, 0)])
    assert G.diameter() == 1
    assert make_path(4).dist(0, 3) == 3


def test_dyadic_mod():
    # by hand: 3/4 mod 2^-1 = 1/4 ; 5 mod 2^2 = 1
    assert dyadic_mod(3, 4, -1) == Fraction(1, 4)
    assert dyadic_mod(5, 1, 2) == Fraction(1)


words = st.text(alphabet="aAbB", max_size=12)


@given(words)
def test_reduce_word_idempotent(w):
    inv = {"a": "A", "A": "a", "b": "B", "B": "b"}
    r = reduce_word(w, inv)
    assert reduce_word(r, inv) == r
    assert r == oracles.word_reduce(w)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_metric_axioms_random_triples(data):
    space = data.draw(st.sampled_from([make_regular_tree(4, 4), make_bs_tree(5),
                                       make_horoball("line", 4, width=8),
                                       make_product([make_regular_tree(3, 2), make_cycle(5)], math.inf)]))
    pts = space.points()
    x, y, z = (data.draw(st.sampled_from(pts)) for _ in range(3))
    assert space.dist(x, y) == space.dist(y, x)
    assert (space.dist(x, y) == 0) == (x == y)
    assert space.dist(x, z) <= space.dist(x, y) + space.dist(y, z)
