"""Backend selection and contraction plans for tree-structured sums.

A plan fixes a rooted traversal of one tree component: which leaf slots and
which internal children feed each internal vertex. The same plan drives both
the compiled kernel and the numpy fallback; the backend is chosen once at
import time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _contract_py

try:
    from . import _contract_c
    _COMPILED = _contract_c
except ImportError:
    _COMPILED = None

BACKEND = "compiled" if _COMPILED is not None else "python"

_EMPTY_PINS = np.empty((0, 0), dtype=np.int64)


@dataclass(frozen=True)
class TreePlan:
    """Rooted traversal of one tree component with at least one internal
    vertex. Leaf slots index columns of the batch value array."""

    n_slots: int
    n_internal: int
    root: int
    order: np.ndarray
    leaf_off: np.ndarray
    leaf_idx: np.ndarray
    child_off: np.ndarray
    child_idx: np.ndarray


def make_plan(n_slots: int, n_internal: int, edges) -> TreePlan:
    """Build a plan from edges over ('L', slot) and ('I', k) vertex names.

    The component must be a tree containing every internal vertex
    0..n_internal-1 and every leaf slot 0..n_slots-1.
    """
    if n_internal < 1:
        raise ValueError("plans require at least one internal vertex")
    leaf_children: list[list[int]] = [[] for _ in range(n_internal)]
    adj: list[list[int]] = [[] for _ in range(n_internal)]
    for a, b in edges:
        if a[0] == "I" and b[0] == "I":
            adj[a[1]].append(b[1])
            adj[b[1]].append(a[1])
        elif a[0] == "I" and b[0] == "L":
            leaf_children[a[1]].append(b[1])
        elif a[0] == "L" and b[0] == "I":
            leaf_children[b[1]].append(a[1])
        else:
            raise ValueError("leaf-leaf edges cannot appear in a plan; "
                             "pair components are contracted directly")
    root = 0
    parent = [-1] * n_internal
    order_rev = [root]
    seen = {root}
    queue = [root]
    while queue:
        v = queue.pop(0)
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                parent[w] = v
                order_rev.append(w)
                queue.append(w)
    if len(seen) != n_internal:
        raise ValueError("internal vertices are not connected as one tree")
    order = list(reversed(order_rev))
    child_lists: list[list[int]] = [[] for _ in range(n_internal)]
    for v in range(n_internal):
        if parent[v] >= 0:
            child_lists[parent[v]].append(v)

    def csr(lists):
        off = np.zeros(n_internal + 1, dtype=np.int32)
        for v in range(n_internal):
            off[v + 1] = off[v] + len(lists[v])
        idx = np.array([x for l in lists for x in l], dtype=np.int32)
        return off, idx

    leaf_off, leaf_idx = csr(leaf_children)
    child_off, child_idx = csr(child_lists)
    return TreePlan(
        n_slots=n_slots,
        n_internal=n_internal,
        root=root,
        order=np.array(order, dtype=np.int32),
        leaf_off=leaf_off,
        leaf_idx=leaf_idx,
        child_off=child_off,
        child_idx=child_idx,
    )


def contract_tree(M, plan: TreePlan, leaf_values, pins=None,
                  backend: str | None = None):
    """Batched contraction of one tree component.

    leaf_values: (B, n_slots) integer matrix of leaf assignments.
    pins: optional (B, n_internal) integer matrix, entry -1 for an
    unconstrained internal vertex, else the single index it is held at.
    Returns (B,) float64.
    """
    M = np.ascontiguousarray(M, dtype=np.float64)
    leaf_values = np.ascontiguousarray(leaf_values, dtype=np.int64)
    B = leaf_values.shape[0]
    if pins is None:
        pins_arr = _EMPTY_PINS
    else:
        pins_arr = np.ascontiguousarray(pins, dtype=np.int64)
    out = np.empty(B)
    if backend is None:
        backend = BACKEND
    if backend == "compiled" and _COMPILED is not None:
        _COMPILED.contract_trees(
            M, plan.order, int(plan.root), plan.leaf_off, plan.leaf_idx,
            plan.child_off, plan.child_idx, leaf_values, pins_arr, out)
    else:
        _contract_py.contract_trees(
            M, plan.order, int(plan.root), plan.leaf_off, plan.leaf_idx,
            plan.child_off, plan.child_idx, leaf_values, pins_arr, out)
    return out
