"""Labelled-diagram evaluation and the value-preserving rewrites: component
tensorization, edge splitting, row/column intersection splitting, pinned-cut
removal, direct-sum decomposition, three-layer factorization, and the
layered operator-norm bound."""

import numpy as np
import pytest

from momentforge import (
    LabelledDiagram,
    RibbonForest,
    direct_sum_decompose,
    enumerate_good_forests,
    eval_generalized,
    factorize,
    forest_to_diagram,
    norm_bound,
    pin_cut,
    split_edge,
    split_intersection,
    tensorize,
)
from momentforge.diagram_algebra import to_dot

from oracles import brute_diagram_eval, random_diagram

RNG = np.random.default_rng(0)


# ---------------------------------------------------------------------------
# evaluation


def test_eval_matches_bruteforce():
    for k in range(60):
        D = random_diagram(RNG)
        np.testing.assert_allclose(D.eval(), brute_diagram_eval(D),
                                   atol=1e-10, err_msg=str(k))


def test_eval_generalized_is_eval():
    D = random_diagram(RNG)
    np.testing.assert_allclose(eval_generalized(D), D.eval(), atol=0)


def test_diagram_validation():
    with pytest.raises(ValueError):
        LabelledDiagram(["a"], ["a"], [], [("a", "a", np.eye(2))],
                        dims={"a": 3})  # self loop
    with pytest.raises(ValueError):
        LabelledDiagram(["a"], ["b"], [], [("a", "b", np.eye(3))],
                        dims={"a": 2, "b": 3})  # dim mismatch


# ---------------------------------------------------------------------------
# rewrites preserve the evaluated matrix


def test_tensorize_reassembles_eval():
    for k in range(30):
        D = random_diagram(RNG)
        comps, (row_map, col_map) = tensorize(D)
        K = np.ones((1, 1))
        for c in comps:
            K = np.kron(K, c.eval())
        np.testing.assert_allclose(D.eval(), K[np.ix_(row_map, col_map)],
                                   atol=1e-10, err_msg=str(k))


def test_split_edge_preserves_eval():
    hit = 0
    for k in range(40):
        D = random_diagram(RNG)
        if not D.edges:
            continue
        hit += 1
        idx = int(RNG.integers(len(D.edges)))
        M = np.asarray(D.edges[idx].matrix)
        u, s, vt = np.linalg.svd(M, full_matrices=False)
        D2 = split_edge(D, idx, u * s, vt)
        np.testing.assert_allclose(D.eval(), D2.eval(), atol=1e-10,
                                   err_msg=str(k))
        D3 = split_edge(D, idx)  # identity factorization default
        np.testing.assert_allclose(D.eval(), D3.eval(), atol=1e-10,
                                   err_msg=str(k))
    assert hit >= 10


def test_split_intersection_removes_overlap():
    for k in range(30):
        D = random_diagram(RNG)
        D2 = split_intersection(D)
        np.testing.assert_allclose(D.eval(), D2.eval(), atol=1e-10,
                                   err_msg=str(k))
        assert not D2.overlap


def test_pin_cut_preserves_eval():
    hit = 0
    for k in range(60):
        D = random_diagram(RNG)
        pinned = [v for v in D.internal if D.dims[v] == 1]
        if not pinned:
            continue
        hit += 1
        D2 = pin_cut(D, pinned[0])
        np.testing.assert_allclose(D.eval(), D2.eval(), atol=1e-10,
                                   err_msg=str(k))
    assert hit >= 5


def test_direct_sum_decompose_reassembles_entrywise():
    hit = 0
    for k in range(40):
        D = random_diagram(RNG)
        if not D.overlap:
            continue
        hit += 1
        Z = D.eval()
        parts = direct_sum_decompose(D)
        ldims, rdims = D.row_shape()
        shared = D.overlap
        lpos = {v: i for i, v in enumerate(D.left)}
        rpos = {v: i for i, v in enumerate(D.right)}
        total = np.zeros_like(Z)
        for assign, Dp in parts:
            Zp = Dp.eval()
            pin = dict(zip(shared, assign))
            rows_keep = [i for i, v in enumerate(D.left) if v not in pin]
            cols_keep = [i for i, v in enumerate(D.right) if v not in pin]
            for sp_flat in range(Zp.shape[0]):
                sp = np.unravel_index(
                    sp_flat, [D.dims[D.left[i]] for i in rows_keep]) \
                    if rows_keep else ()
                full_s = [0] * len(D.left)
                for i, a in zip(rows_keep, sp):
                    full_s[i] = a
                for v, a in pin.items():
                    if v in lpos:
                        full_s[lpos[v]] = a
                row = (np.ravel_multi_index(tuple(full_s), ldims)
                       if ldims else 0)
                for tp_flat in range(Zp.shape[1]):
                    tp = np.unravel_index(
                        tp_flat, [D.dims[D.right[i]] for i in cols_keep]) \
                        if cols_keep else ()
                    full_t = [0] * len(D.right)
                    for i, a in zip(cols_keep, tp):
                        full_t[i] = a
                    for v, a in pin.items():
                        if v in rpos:
                            full_t[rpos[v]] = a
                    col = (np.ravel_multi_index(tuple(full_t), rdims)
                           if rdims else 0)
                    total[row, col] += Zp[sp_flat, tp_flat]
        np.testing.assert_allclose(Z, total, atol=1e-10, err_msg=str(k))
    assert hit >= 5


def test_factorize_chain_into_three_layers():
    N = 3
    rng = np.random.default_rng(7)
    M1, M2, M3, M4 = (rng.standard_normal((N, N)) for _ in range(4))
    D = LabelledDiagram(
        left=["l0"], right=["r0"], internal=["a", "b"],
        edges=[("l0", "a", M1), ("a", "b", M2), ("a", "b", M3),
               ("b", "r0", M4)])
    DA, DB, DC = factorize(D, A={"l0"}, B={"a", "b"}, C={"r0"})
    np.testing.assert_allclose(D.eval(), DA.eval() @ DB.eval() @ DC.eval(),
                               atol=1e-10)
    D2 = LabelledDiagram(
        left=["l0"], right=["r0"], internal=["a", "b", "c"],
        edges=[("l0", "a", M1), ("a", "b", M2), ("b", "c", M3),
               ("c", "r0", M4)])
    DA, DB, DC = factorize(D2, A={"l0", "a"}, B={"b"}, C={"c", "r0"})
    np.testing.assert_allclose(D2.eval(), DA.eval() @ DB.eval() @ DC.eval(),
                               atol=1e-10)


# ---------------------------------------------------------------------------
# norm bound


def test_norm_bound_dominates_chain_value():
    N = 3
    rng = np.random.default_rng(7)
    M1, M2, M3, M4 = (rng.standard_normal((N, N)) for _ in range(4))
    D = LabelledDiagram(
        left=["l0"], right=["r0"], internal=["a", "b", "c"],
        edges=[("l0", "a", M1), ("a", "b", M2), ("b", "c", M3),
               ("c", "r0", M4)])
    assert np.abs(D.eval()).max() <= norm_bound(D) + 1e-9


def test_norm_bound_rejects_isolated_row_vertex():
    bad = LabelledDiagram(["l0"], ["r0"], [], [], dims={"l0": 3, "r0": 3})
    with pytest.raises(ValueError):
        norm_bound(bad)


def test_norm_bound_dominates_forest_spectra():
    rng = np.random.default_rng(3)
    for m in (2, 4):
        for f in enumerate_good_forests(m):
            for n_left in range(1, m):
                rib = RibbonForest(n_left, m - n_left, f)
                A = rng.standard_normal((4, 4))
                D = forest_to_diagram(rib, (A + A.T) / 2)
                try:
                    nb = norm_bound(D)
                except ValueError:
                    continue
                assert np.linalg.norm(D.eval(), 2) <= nb * (1 + 1e-9), \
                    (m, n_left)


def test_to_dot_emits_graph():
    f = enumerate_good_forests(4)[0]
    rib = RibbonForest(2, 2, f)
    D = forest_to_diagram(rib, np.eye(3))
    text = to_dot(D)
    assert text.startswith("digraph") or text.startswith("graph")
