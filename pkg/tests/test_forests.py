"""Even-degree leaf-labelled forests: enumeration, canonical form, the
composition-poset Mobius weights, and the two-row (stretched/bowtie)
variants."""

import itertools
import math

import pytest

from momentforge import (
    GoodForest,
    RibbonForest,
    enumerate_good_forests,
    enumerate_ribbon_forests,
    star_forest,
    star_mobius_recursion,
    stretched_forests,
    stretched_mu_sum,
    transport_mu_sum,
    verify_mobius,
    verify_xi,
)
from momentforge.forests import down_set, poset_leq


# ---------------------------------------------------------------------------
# enumeration


def test_forest_counts():
    assert len(enumerate_good_forests(2)) == 1
    assert len(enumerate_good_forests(4)) == 4
    f6 = enumerate_good_forests(6)
    assert len(f6) == 41
    assert sum(1 for f in f6 if f.is_tree()) == 11


def test_enumerated_forests_are_good_and_distinct():
    for m in (2, 4, 6):
        forests = enumerate_good_forests(m)
        assert len(set(forests)) == len(forests)
        for f in forests:
            assert f.n_leaves == m
            assert f.is_good()


def test_odd_leaf_count_has_no_forests():
    assert enumerate_good_forests(3) == ()
    assert enumerate_good_forests(5) == ()


# ---------------------------------------------------------------------------
# canonical form


def test_canonicalization_is_internal_label_invariant():
    star = star_forest(6)
    # swap internal id with a fresh one via from_edges round trip
    rebuilt = GoodForest.from_edges(
        6, [("hub", i) for i in range(6)])
    assert rebuilt == star
    # double star: leaves 0-2 on one hub, 3-5 on another, both namings equal
    a = GoodForest.from_edges(6, [("p", 0), ("p", 1), ("p", 2), ("p", 3),
                                  ("q", 4), ("q", 5), ("q", 0), ("q", 1)])
    b = GoodForest.from_edges(6, [("z9", 0), ("z9", 1), ("z9", 2), ("z9", 3),
                                  ("a", 4), ("a", 5), ("a", 0), ("a", 1)])
    assert a == b and hash(a) == hash(b)


def test_star_structure_and_weight():
    for m in (4, 6, 8):
        s = star_forest(m)
        assert s.is_tree()
        assert s.n_internal == 1
        hub = next(iter(s.internal_vertices))
        assert s.degree(hub) == m
        assert s.mu() == -math.factorial(m - 2)
    with pytest.raises(ValueError):
        star_forest(2)


def test_mu_is_product_over_internal_degrees():
    for f in enumerate_good_forests(6):
        expect = 1
        for v, d in f.internal_degrees().items():
            expect *= -math.factorial(d - 2)
        assert f.mu() == expect


# ---------------------------------------------------------------------------
# composition poset


def test_total_weight_is_one():
    for m in (2, 4, 6):
        assert sum(f.mu() for f in enumerate_good_forests(m)) == 1


def test_verify_mobius_small():
    for m in (2, 4, 6):
        rep = verify_mobius(m)
        assert rep.ok and rep.counterexample is None
        assert rep.checked == rep.n_forests


def test_down_set_contains_self_and_respects_order():
    f6 = enumerate_good_forests(6)
    star = star_forest(6)
    ds = down_set(star)
    assert star in ds
    # membership in the down-set and the order relation must agree
    for f in f6:
        assert poset_leq(f, star) == (f in ds)
    # the star is the unique top among trees: everything lies below it
    assert ds == frozenset(f6)


def test_star_mobius_recursion_values():
    assert star_mobius_recursion(2) == -1
    assert [star_mobius_recursion(m) for m in (4, 6, 8)] == [2, 24, 720]
    with pytest.raises(ValueError):
        star_mobius_recursion(3)


# ---------------------------------------------------------------------------
# two-row forests


def test_ribbon_forest_counts_are_split_invariant():
    # the underlying forests do not depend on how leaves split into rows
    f4 = set(enumerate_good_forests(4))
    for l in (1, 2, 3):
        ribbons = enumerate_ribbon_forests(l, 4 - l)
        assert {r.forest for r in ribbons} == f4


def test_stretched_tie_is_bowtie():
    for l, m in ((1, 1), (2, 2), (1, 3), (3, 3), (2, 4)):
        for r in stretched_forests(l, m):
            t = r.tie()
            assert t.is_bowtie()
            assert t.n_left == r.n_left and t.n_right == r.n_right


def test_bowties_are_stretched():
    for l, m in ((2, 2), (3, 3)):
        for r in enumerate_ribbon_forests(l, m):
            if r.is_bowtie():
                assert r.is_stretched()


def test_verify_xi_small():
    for l in range(1, 6):
        for m in range(l, 6):
            if l + m > 6:
                continue
            rep = verify_xi(l, m)
            assert rep.ok, (l, m, rep.counterexample)


def test_stretched_weight_equals_transport_double_sum():
    for l in range(1, 5):
        for m in range(1, 5):
            got = stretched_mu_sum(l, m)
            want = transport_mu_sum(l, m)
            assert got == want, (l, m, got, want)
            assert isinstance(got, int)


def test_sided_pair_is_not_stretched():
    # both leaves of a pair on the same row
    pair = GoodForest(2, 0, [(0, 1)])
    assert not RibbonForest(2, 0, pair).is_stretched()
    assert RibbonForest(1, 1, pair).is_stretched()


def test_ribbon_leaf_count_validation():
    pair = GoodForest(2, 0, [(0, 1)])
    with pytest.raises(ValueError):
        RibbonForest(2, 1, pair)
