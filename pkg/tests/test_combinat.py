"""Partitions, subset/partition Mobius functions, alternating weights, and
transport plans, checked against lattice-theoretic defining relations and an
independent series oracle."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentforge import (
    Partition,
    double_factorial,
    enumerate_partitions,
    enumerate_transport_plans,
    mobius_even_bottom,
    mobius_partition,
    mobius_subset,
    nu,
)

from oracles import bell_number, nu_oracle


# ---------------------------------------------------------------------------
# partitions


def test_partition_counts_match_bell_numbers():
    for n in range(0, 7):
        assert len(enumerate_partitions(n)) == bell_number(n)


def test_parity_filters_match_postfiltering():
    for n in range(0, 7):
        allp = enumerate_partitions(n)
        assert len(set(allp)) == len(allp)
        even = [p for p in allp if all(len(b) % 2 == 0 for b in p.blocks)]
        odd = [p for p in allp if all(len(b) % 2 == 1 for b in p.blocks)]
        assert list(enumerate_partitions(n, parity="even")) == even
        assert list(enumerate_partitions(n, parity="odd")) == odd
        big = [p for p in allp if all(len(b) >= 2 for b in p.blocks)]
        assert list(enumerate_partitions(n, min_block=2)) == big


def test_partition_blocks_cover_ground_set():
    for n in range(1, 6):
        for p in enumerate_partitions(n):
            seen = sorted(i for b in p.blocks for i in b)
            assert seen == list(range(n))


def test_refinement_extremes():
    n = 4
    singletons = Partition(tuple((i,) for i in range(n)))
    top = Partition((tuple(range(n)),))
    for p in enumerate_partitions(n):
        assert singletons.refines(p)
        assert p.refines(top)
        assert p.refines(p)


def test_unknown_parity_rejected():
    with pytest.raises(ValueError):
        enumerate_partitions(3, parity="prime")


# ---------------------------------------------------------------------------
# subset-lattice Mobius function


def test_mobius_subset_closed_form_and_inversion():
    t = frozenset(range(4))
    for r in range(5):
        for s in itertools.combinations(range(4), r):
            assert mobius_subset(s, t) == (-1) ** (4 - r)
    # sum over the interval [s, t] vanishes unless s == t
    for r in range(5):
        for s in map(frozenset, itertools.combinations(range(4), r)):
            rest = tuple(t - s)
            total = sum(
                mobius_subset(s | set(extra), t)
                for k in range(len(rest) + 1)
                for extra in itertools.combinations(rest, k)
            )
            assert total == (1 if s == t else 0)


def test_mobius_subset_rejects_non_subset():
    with pytest.raises(ValueError):
        mobius_subset({0, 5}, {0, 1})


# ---------------------------------------------------------------------------
# partition-lattice Mobius function


def test_mobius_partition_defining_recursion():
    # sum of mu(pi, sigma) over pi <= sigma <= rho is [pi == rho]
    for n in (2, 3, 4):
        parts = enumerate_partitions(n)
        for pi in parts:
            for rho in parts:
                if not pi.refines(rho):
                    continue
                total = sum(
                    mobius_partition(pi, sigma)
                    for sigma in parts
                    if pi.refines(sigma) and sigma.refines(rho)
                )
                assert total == (1 if pi == rho else 0)


def test_mobius_partition_rejects_incomparable():
    a = Partition(((0, 1), (2,)))
    b = Partition(((0, 2), (1,)))
    with pytest.raises(ValueError):
        mobius_partition(a, b)


# ---------------------------------------------------------------------------
# alternating weights and the even-partition poset


def test_nu_against_series_oracle():
    for k in range(0, 13):
        assert nu(k) == nu_oracle(k)


def test_nu_known_values():
    assert [nu(k) for k in (2, 4, 6, 8)] == [1, -2, 16, -272]
    assert all(nu(k) == 0 for k in (1, 3, 5, 7))
    assert isinstance(nu(4), Fraction)


def test_even_bottom_mobius_defining_relation():
    # with a formal bottom below every even partition, cumulative Mobius
    # sums over each closed interval [bottom, rho] must vanish
    for n in (2, 4, 6):
        evens = enumerate_partitions(n, parity="even")
        for rho in evens:
            below = [s for s in evens if s.refines(rho)]
            assert 1 + sum(mobius_even_bottom(s) for s in below) == 0


def test_even_bottom_mobius_rejects_odd_blocks():
    with pytest.raises(ValueError):
        mobius_even_bottom(Partition(((0,), (1, 2))))


# ---------------------------------------------------------------------------
# transport plans


def _brute_plans(row_sums, col_sums):
    cells = [range(min(r, c) + 1) for r in row_sums for c in col_sums]
    ncols = len(col_sums)
    out = []
    for flat in itertools.product(*cells):
        rows = tuple(flat[i * ncols:(i + 1) * ncols]
                     for i in range(len(row_sums)))
        if (tuple(map(sum, rows)) == tuple(row_sums)
                and tuple(map(sum, zip(*rows))) == tuple(col_sums)):
            out.append(rows)
    return out


@pytest.mark.parametrize("rows,cols", [
    ((2, 1), (1, 1, 1)),
    ((3,), (1, 2)),
    ((2, 2), (2, 2)),
    ((1, 1, 1), (3,)),
    ((4, 2), (3, 3)),
])
def test_transport_plans_match_bruteforce(rows, cols):
    plans = enumerate_transport_plans(rows, cols)
    got = {p.entries for p in plans}
    expect = set(_brute_plans(rows, cols))
    assert got == expect
    assert len(plans) == len(got)
    for p in plans:
        assert p.row_sums == rows
        assert p.col_sums == cols


def test_transport_plans_mismatched_margins_empty():
    assert enumerate_transport_plans((2,), (1,)) == []


def test_transport_plan_factorial():
    plans = enumerate_transport_plans((3, 1), (2, 2))
    for p in plans:
        expect = 1
        for row in p.entries:
            for v in row:
                expect *= math.factorial(v)
        assert p.factorial() == expect


# ---------------------------------------------------------------------------
# double factorial


def test_double_factorial_values():
    assert [double_factorial(n) for n in (-1, 0, 1, 2, 3, 4, 5, 7)] == [
        1, 1, 1, 2, 3, 8, 15, 105]
    # number of perfect matchings of 2k points
    for k in range(1, 6):
        pairs = double_factorial(2 * k - 1)
        assert pairs == math.factorial(2 * k) // (2 ** k * math.factorial(k))
    with pytest.raises(ValueError):
        double_factorial(-2)


# ---------------------------------------------------------------------------
# property-based checks


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=5), st.data())
def test_refinement_is_transitive(n, data):
    parts = enumerate_partitions(n)
    a = data.draw(st.sampled_from(parts))
    b = data.draw(st.sampled_from(parts))
    c = data.draw(st.sampled_from(parts))
    if a.refines(b) and b.refines(c):
        assert a.refines(c)


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(min_value=0, max_value=8), max_size=6))
def test_mobius_subset_multiplicative(t):
    # mu(s, t) factors over the elements added one at a time
    t = frozenset(t)
    for s in map(frozenset, itertools.combinations(sorted(t), max(len(t) - 2, 0))):
        prod = 1
        cur = s
        for x in sorted(t - s):
            prod *= mobius_subset(cur, cur | {x})
            cur = cur | {x}
        assert prod == mobius_subset(s, t)
