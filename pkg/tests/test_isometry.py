from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from coarse_lab.action import iso_key
from coarse_lab.errors import HorizonExceeded, InvalidIsometry
from coarse_lab.isometry import (
    CUSP,
    adic_end,
    axis,
    base_shift,
    bs_element,
    classify_isometry,
    fixes,
    graph_permutation,
    identity,
    left_mult,
    line_end,
    product_end,
    product_tuple,
    reflection,
    rooted_automorphism,
    translate,
    translation_length,
    translation_report,
    tree_end,
)
from coarse_lab.spaces import make_bs_tree, make_cycle, make_horoball, make_line, make_product, make_regular_tree

T = make_regular_tree(4, 6)
words = st.text(alphabet="aAbB", max_size=8).map(oracles.word_reduce)


def test_rotation_image():
    # by hand: (a b A B) sends a -> b, b -> A
    assert rooted_automorphism(T, "(abAB)").apply("ab") == "bA"


def test_axis_ends_of_ab():
    _, fwd, bwd = axis(T, left_mult(T, "ab"))
    assert fwd == tree_end(T, "", "ab") and bwd == tree_end(T, "", "BA")


@settings(max_examples=80, deadline=None)
@given(words)
def test_tree_translation_length_is_cyclic_length(w):
    assert translation_length(T, left_mult(T, w)) == oracles.free_translation_length(w)


@settings(max_examples=60, deadline=None)
@given(words, words, words)
def test_tree_maps_are_isometries(w, x, y):
    g = left_mult(T, w).compose(rooted_automorphism(T, "(ab)(AB)"))
    model = T.unbounded()
    h = g.on(model)
    assert model.dist(h.image(x), h.image(y)) == model.dist(x, y)


@settings(max_examples=60, deadline=None)
@given(words, words)
def test_compose_inverse(w, v):
    g = left_mult(T, w).compose(reflection(T, "a"))
    h = left_mult(T, v)
    assert g.compose(g.inverse()).is_identity()
    assert iso_key(g.compose(h).inverse()) == iso_key(h.inverse().compose(g.inverse()))


@settings(max_examples=60, deadline=None)
@given(st.integers(-3, 3), st.integers(-8, 8), st.integers(-3, 3), st.integers(-8, 8))
def test_bs_affine_group_law(m1, b1, m2, b2):
    B = make_bs_tree(6)
    g, h = bs_element(B, m1, b1), bs_element(B, m2, b2)
    gh = g.compose(h)
    M = B.unbounded()
    for x in [(0, Fraction(0)), (2, Fraction(1)), (-1, Fraction(1, 2))]:
        assert gh.on(M).image(x) == g.on(M).image(h.on(M).image(x))
    assert M.dist(g.on(M).image((0, Fraction(0))), g.on(M).image((3, Fraction(1)))) == \
        M.dist((0, Fraction(0)), (3, Fraction(1)))


def test_bs_translation_lengths():
    B = make_bs_tree(6)
    t, a = bs_element(B, 1, 0), bs_element(B, 0, 1)
    assert translation_length(B, t) == 1 and translation_length(B, a) == 0
    _, fwd, bwd = axis(B, a.compose(t).compose(a.inverse()))
    assert (fwd, bwd) == (adic_end(1), CUSP)


def test_line_and_horoball_maps():
    L = make_line(10)
    assert translation_length(L, translate(L, 3)) == 3
    assert fixes(translate(L, 3), line_end(1))
    H = make_horoball("line", 4, width=16)
    rep = translation_report(H, base_shift(H, 1))
    assert rep.tau == 0
    assert fixes(base_shift(H, 1), CUSP)


def test_product_translation_is_l1_sum():
    P = make_product([T, make_line(10)], 1)
    g = product_tuple(P, [left_mult(T, "ab"), translate(P.factors[1], 1)])
    assert translation_length(P, g) == 3
    assert fixes(g, product_end([tree_end(T, "", "ab"), line_end(1)]))


def test_apply_outside_truncation():
    with pytest.raises(HorizonExceeded):
        left_mult(T, "a").apply("aaaaaa")


@pytest.mark.parametrize("bad", [
    lambda: rooted_automorphism(T, "(ab"),
    lambda: rooted_automorphism(T, "(ab)"),
    lambda: left_mult(T, "z"),
    lambda: tree_end(T, "", "aA"),
    lambda: tree_end(T, "", "ba"[0:0]),
    lambda: graph_permutation(make_cycle(5), {0: 1, 1: 0, 2: 2, 3: 3, 4: 4}),
    lambda: base_shift(make_horoball("line", 3, width=8, model="dyadic"), 1),
    lambda: product_tuple(make_product([T, T]), [identity(T)]),
], ids=["syntax", "inversion", "letter", "end", "empty", "graph", "dyadic", "arity"])
def test_invalid_isometries(bad):
    with pytest.raises(InvalidIsometry):
        bad()


@pytest.mark.parametrize("radius", [6, 8])
@pytest.mark.parametrize("name,make,want", [
    ("rotation", lambda T: (T, rooted_automorphism(T, "(abAB)")), "elliptic(rotation)"),
    ("flip", lambda T: (T, reflection(T, "a")), "elliptic(rift)"),
    ("loxodromic", lambda T: (T, left_mult(T, "a")), "loxodromic"),
])
def test_classify_tree_isometries(radius, name, make, want):
    space, g = make(make_regular_tree(4, radius))
    assert classify_isometry(space, g).label == want


def test_classify_odd_valence_inversion():
    T3 = make_regular_tree(3, 5)
    c = classify_isometry(T3, left_mult(T3, "a"))
    assert c.kind == "elliptic"
    assert classify_isometry(T3, left_mult(T3, "ab")).label == "loxodromic"
