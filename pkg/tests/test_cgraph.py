"""Contraction of leaf-pinned forests against literal assignment sums, the
tight/loose split, batching, set-indexed blocks, and backend agreement."""

import itertools

import numpy as np
import pytest

from momentforge import (
    DegreeTwoInput,
    RibbonForest,
    cgs,
    cgs_batch,
    cgs_tight,
    delta,
    delta_batch,
    enumerate_good_forests,
    max_span,
    naive_cgs,
)
from momentforge.cgraph import cgm_block, cgm_entries, naive_cgs_tight
from momentforge.contract import BACKEND

from oracles import random_unit_diag

RNG = np.random.default_rng(7)


def _tuples(n, m, rng, count):
    out = [tuple(rng.integers(0, n, size=m)) for _ in range(count)]
    # force some repeated-index patterns into the mix
    out.append((0,) * m)
    if m >= 2:
        out.append(tuple([1, 1] + list(rng.integers(0, n, size=m - 2))))
    return out


# ---------------------------------------------------------------------------
# scalar contraction vs the literal sum


@pytest.mark.parametrize("m", [2, 4, 6])
def test_cgs_matches_naive(m):
    n = 4
    M = random_unit_diag(RNG, n)
    for f in enumerate_good_forests(m):
        for s in _tuples(n, m, RNG, 3):
            assert cgs(f, M, s) == pytest.approx(naive_cgs(f, M, s),
                                                 abs=1e-10)


@pytest.mark.parametrize("m", [4, 6])
def test_tight_restriction_matches_naive(m):
    n = 4
    M = random_unit_diag(RNG, n)
    for f in enumerate_good_forests(m):
        for s in _tuples(n, m, RNG, 3):
            assert cgs_tight(f, M, s) == pytest.approx(
                naive_cgs_tight(f, M, s), abs=1e-10)


def test_loose_part_is_full_minus_tight():
    n = 5
    M = random_unit_diag(RNG, n)
    for f in enumerate_good_forests(6):
        for s in _tuples(n, 6, RNG, 2):
            assert delta(f, M, s) == pytest.approx(
                cgs(f, M, s) - cgs_tight(f, M, s), abs=1e-10)


def test_loose_part_vanishes_when_indices_distinct():
    # distinct leaves give an empty spanning collection: nothing to loosen
    n = 8
    M = random_unit_diag(RNG, n)
    for f in enumerate_good_forests(6):
        s = (2, 5, 0, 7, 4, 1)
        assert max_span(f, s).subtrees == ()
        assert delta(f, M, s) == 0.0


# ---------------------------------------------------------------------------
# batching


def test_cgs_batch_matches_scalar():
    n = 5
    M = random_unit_diag(RNG, n)
    for f in enumerate_good_forests(4):
        S = np.array(_tuples(n, 4, RNG, 8))
        vals = cgs_batch(f, M, S)
        for row, v in zip(S, vals):
            assert v == pytest.approx(cgs(f, M, tuple(row)), abs=1e-12)


def test_delta_batch_matches_scalar():
    n = 5
    M = random_unit_diag(RNG, n)
    for f in enumerate_good_forests(6):
        S = np.array(_tuples(n, 6, RNG, 6))
        vals = delta_batch(f, M, S)
        for row, v in zip(S, vals):
            assert v == pytest.approx(delta(f, M, tuple(row)), abs=1e-10)


def test_zero_leaf_forest_contracts_to_one():
    f0 = enumerate_good_forests(0)[0]
    assert cgs(f0, np.eye(3), ()) == 1.0


# ---------------------------------------------------------------------------
# backend agreement


def test_backends_agree():
    n = 5
    M = random_unit_diag(RNG, n)
    for f in enumerate_good_forests(6):
        S = np.array(_tuples(n, 6, RNG, 4))
        py = cgs_batch(f, M, S, backend="python")
        co = cgs_batch(f, M, S, backend="compiled")
        np.testing.assert_allclose(py, co, rtol=0, atol=1e-12)


def test_compiled_backend_is_active():
    # the build ships a compiled kernel; the fallback stays importable
    assert BACKEND in ("compiled", "python")
    from momentforge import _contract_py  # noqa: F401


# ---------------------------------------------------------------------------
# spanning collections


def test_max_span_subtrees_are_disjoint_and_cover_equal_leaves():
    n = 3
    for f in enumerate_good_forests(6):
        for s in _tuples(n, 6, RNG, 4):
            span = max_span(f, s)
            seen = set()
            for i, verts in span.subtrees:
                assert not (seen & verts)
                seen |= verts
                leaves = [x for x in verts if x < f.n_leaves]
                assert len(leaves) >= 2
                assert all(s[x] == i for x in leaves)


def test_is_tight_matches_pin_dictionary():
    n = 3
    f = [g for g in enumerate_good_forests(6) if g.is_tree()][0]
    for s in _tuples(n, 6, RNG, 4):
        span = max_span(f, s)
        pins = span.internal_pins(f)
        for a in itertools.product(range(n), repeat=f.n_internal):
            expect = all(a[v - f.n_leaves] == i for v, i in pins.items())
            assert span.is_tight(f, a) == expect


# ---------------------------------------------------------------------------
# set-indexed blocks


def test_cgm_entries_pin_rows_to_sets():
    n = 5
    M = random_unit_diag(RNG, n)
    forest = [g for g in enumerate_good_forests(4) if g.is_tree()][0]
    rib = RibbonForest(2, 2, forest)
    left = list(itertools.combinations(range(n), 2))
    right = left
    vals = cgm_entries(rib, M, left, right)
    for a, S in enumerate(left):
        for b, T in enumerate(right):
            assert vals[a, b] == pytest.approx(
                cgs(forest, M, S + T), abs=1e-12)


def test_cgm_block_is_symmetric_for_symmetric_diagrams():
    n = 4
    M = random_unit_diag(RNG, n)
    forest = [g for g in enumerate_good_forests(4) if g.is_tree()][0]
    rib = RibbonForest(2, 2, forest)
    blk = cgm_block(rib, M)
    assert blk.values.shape == (6, 6)
    assert blk.left_sets == tuple(itertools.combinations(range(n), 2))
    np.testing.assert_allclose(blk.values, blk.values.T, atol=1e-12)


def test_cgm_entries_validates_set_sizes():
    M = np.eye(4)
    forest = [g for g in enumerate_good_forests(4) if g.is_tree()][0]
    rib = RibbonForest(2, 2, forest)
    with pytest.raises(ValueError):
        cgm_entries(rib, M, [(0, 1, 2)], [(0, 1)])


# ---------------------------------------------------------------------------
# degree-two input wrapper


def test_degree_two_input_summaries():
    M = np.array([[1.0, 0.5], [0.5, 1.0]])
    D = DegreeTwoInput(M)
    assert D.n == 2
    assert D.min_eig == pytest.approx(0.5)
    assert D.op_norm == pytest.approx(1.5)
    assert D.frob_norm == pytest.approx(np.linalg.norm(M))
    assert D.unit_diagonal_residual() == 0.0
    G = D.gram_factor()
    np.testing.assert_allclose(G.T @ G, M, atol=1e-12)


def test_degree_two_input_rejects_indefinite_by_default():
    M = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(ValueError):
        DegreeTwoInput(M)
    D = DegreeTwoInput(M, allow_indefinite=True)
    assert D.min_eig == pytest.approx(-1.0)
