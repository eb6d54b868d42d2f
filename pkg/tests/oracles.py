"""Independent brute-force oracles. Nothing here imports the package."""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def floyd_warshall(vertices: list, edges: list) -> np.ndarray:
    idx = {v: i for i, v in enumerate(vertices)}
    n = len(vertices)
    D = np.full((n, n), 10**6, dtype=np.int64)
    np.fill_diagonal(D, 0)
    for u, v in edges:
        D[idx[u], idx[v]] = D[idx[v], idx[u]] = 1
    for k in range(n):
        D = np.minimum(D, D[:, k][:, None] + D[k, :][None, :])
    return D


def free_tree(rank: int, radius: int) -> tuple[list, list]:
    """Reduced words of length <= radius in a, b, ... (inverses uppercase) and tree edges."""
    letters = "abcdefgh"[:rank]
    gens = list(letters) + [c.upper() for c in letters]
    words, edges = [""], []
    frontier = [""]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for c in gens:
                if w and w[-1] == c.swapcase():
                    continue
                nxt.append(w + c)
                edges.append((w, w + c))
        words += nxt
        frontier = nxt
    return words, edges


def cycle_graph(n: int) -> tuple[list, list]:
    return list(range(n)), [(i, (i + 1) % n) for i in range(n)]


def grid_graph(r: int, c: int) -> tuple[list, list]:
    verts = [(i, j) for i in range(r) for j in range(c)]
    edges = [((i, j), (i + 1, j)) for i in range(r - 1) for j in range(c)]
    edges += [((i, j), (i, j + 1)) for i in range(r) for j in range(c - 1)]
    return verts, edges


def four_point(D: np.ndarray) -> Fraction:
    n = len(D)
    best = Fraction(0)
    for w, x, y, z in itertools.product(range(n), repeat=4):
        g = lambda a, b: Fraction(int(D[a, w] + D[b, w] - D[a, b]), 2)  # noqa: E731
        best = max(best, min(g(x, z), g(z, y)) - g(x, y))
    return best


def all_geodesics(vertices: list, edges: list, D: np.ndarray, p, q) -> list[tuple]:
    idx = {v: i for i, v in enumerate(vertices)}
    adj = {v: [] for v in vertices}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    out = []

    def walk(path):
        x = path[-1]
        if x == q:
            out.append(tuple(path))
            return
        for y in adj[x]:
            if D[idx[y], idx[q]] == D[idx[x], idx[q]] - 1:
                walk(path + [y])

    walk([p])
    return out


def tripod_delta(vertices: list, edges: list) -> Fraction:
    """Tripod-centre diameter over all ordered triangles whose sides are the
    lexicographically least geodesics, computed on the edge subdivision so
    that every centre is a vertex."""
    D = floyd_warshall(vertices, edges)
    idx = {v: i for i, v in enumerate(vertices)}
    sub_v = [("v", v) for v in vertices] + [("e", frozenset(e)) for e in edges]
    sub_e = [(("v", u), ("e", frozenset((u, v)))) for u, v in edges]
    sub_e += [(("v", v), ("e", frozenset((u, v)))) for u, v in edges]
    S = floyd_warshall(sub_v, sub_e)
    sidx = {v: i for i, v in enumerate(sub_v)}
    side = {}
    for p, q in itertools.product(vertices, repeat=2):
        g = min(all_geodesics(vertices, edges, D, p, q))
        walk = [("v", g[0])]
        for a, b in zip(g, g[1:]):
            walk += [("e", frozenset((a, b))), ("v", b)]
        side[p, q] = walk
    best = 0
    for a, b, c in itertools.product(vertices, repeat=3):
        cs = []
        for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
            pos2 = int(D[idx[u], idx[v]] + D[idx[u], idx[w]] - D[idx[v], idx[w]])  # doubled
            cs.append(side[u, v][pos2])
        for x, y in itertools.combinations(cs, 2):
            best = max(best, int(S[sidx[x], sidx[y]]))
    return Fraction(best, 2)


def word_reduce(w: str) -> str:
    out = []
    for c in w:
        if out and out[-1] == c.swapcase():
            out.pop()
        else:
            out.append(c)
    return "".join(out)


def free_translation_length(w: str) -> int:
    """Length of the cyclic reduction of a free-group word."""
    w = word_reduce(w)
    while len(w) >= 2 and w[0] == w[-1].swapcase():
        w = w[1:-1]
    return len(w)


def permutation_closure(gens: list[dict]) -> list[dict]:
    """All elements of the finite permutation group generated by ``gens``."""
    keys = sorted(gens[0])
    ident = tuple(keys)
    seen = {ident}
    frontier = [ident]
    as_t = [tuple(g[k] for k in keys) for g in gens]
    pos = {k: i for i, k in enumerate(keys)}
    while frontier:
        nxt = []
        for p in frontier:
            for g in as_t:
                q = tuple(g[pos[p[i]]] for i in range(len(keys)))
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return [dict(zip(keys, p)) for p in seen]
