"""Pure-numpy tree contraction kernel. Same contract as the compiled
version in _contract_c: batched message passing up a rooted tree, with
optional per-row pinning of internal summation variables."""

from __future__ import annotations

import numpy as np


def contract_trees(M, order, root, leaf_off, leaf_idx, child_off, child_idx,
                   leaf_values, pins, out):
    """Evaluate, for every row b, the sum over assignments a of internal
    vertices of prod over edges of M entries.

    M: (N, N) symmetric float64.
    order: internal vertices, children before parents, ending at root.
    leaf_off/leaf_idx: CSR-style lists of leaf-slot children per internal.
    child_off/child_idx: internal children per internal.
    leaf_values: (B, n_slots) int64, the pinned leaf assignments.
    pins: (B, n_internal) int64 with -1 for free, or shape (0, 0) for none.
    out: (B,) float64, written in place.
    """
    B = leaf_values.shape[0]
    N = M.shape[0]
    n_internal = len(order)
    have_pins = pins.shape[0] == B and pins.shape[1] > 0
    msgs = [None] * n_internal
    rows = np.arange(B)
    for v in order:
        inner = np.ones((B, N))
        for c in leaf_idx[leaf_off[v]:leaf_off[v + 1]]:
            inner *= M[leaf_values[:, c], :]
        for w in child_idx[child_off[v]:child_off[v + 1]]:
            inner *= msgs[w]
            msgs[w] = None
        if have_pins:
            pv = pins[:, v]
            sel = pv >= 0
            if sel.any():
                keep = inner[rows[sel], pv[sel]]
                inner[sel] = 0.0
                inner[rows[sel], pv[sel]] = keep
        if v == root:
            out[:] = inner.sum(axis=1)
        else:
            msgs[v] = inner @ M
    return out
