"""Contractive graphical scalars and matrices over a fixed symmetric matrix:
forest contractions, the maximal spanning construction for repeated indices,
tight/loose splitting of internal sums, and set-indexed block assembly.

Conventions: a forest on m leaves is evaluated at a tuple s of length m; leaf
j is pinned to index s[j]. Sets and multisets are converted to ascending
tuples. Internal vertices are summed over range(N).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .combinat import MonomialIndex
from .contract import TreePlan, contract_tree, make_plan
from .forests import GoodForest, RibbonForest

_DENSE_EIG_LIMIT = 2000


def _sym_extreme_eigs(arr):
    """(min, max) eigenvalues of a symmetric matrix, dense below the size
    cutoff and Lanczos above it."""
    n = arr.shape[0]
    if n <= _DENSE_EIG_LIMIT:
        w = np.linalg.eigvalsh(arr)
        return float(w[0]), float(w[-1])
    from scipy.sparse.linalg import eigsh
    lo = float(eigsh(arr, k=1, which="SA", return_eigenvectors=False)[0])
    hi = float(eigsh(arr, k=1, which="LA", return_eigenvectors=False)[0])
    return lo, hi


def sym_op_norm(arr) -> float:
    lo, hi = _sym_extreme_eigs(np.asarray(arr))
    return max(abs(lo), abs(hi))


class DegreeTwoInput:
    """A symmetric matrix with cached spectral data, the degree-2 input that
    every contraction references.

    PSD is required by default (the extension pipeline assumes it); pass
    allow_indefinite=True to skip that check for diagnostics.
    """

    def __init__(self, matrix, *, allow_indefinite: bool = False,
                 sym_tol: float = 1e-8):
        arr = np.array(matrix, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("matrix must be square")
        if not np.isfinite(arr).all():
            raise ValueError("matrix must be finite")
        scale = max(1.0, float(np.abs(arr).max()))
        asym = float(np.abs(arr - arr.T).max())
        if asym > sym_tol * scale:
            raise ValueError(f"matrix asymmetry {asym:g} exceeds tolerance")
        arr = np.ascontiguousarray((arr + arr.T) / 2.0)
        arr.flags.writeable = False
        self.matrix = arr
        self._eigs = None
        self._extremes = None
        if not allow_indefinite:
            lo = self.min_eig
            if lo < -1e-8 * max(1.0, self.op_norm):
                raise ValueError(
                    f"matrix is not positive semidefinite "
                    f"(min eigenvalue {lo:g})")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self):
        if self._eigs is None:
            self._eigs = np.linalg.eigvalsh(self.matrix)
        return self._eigs

    def _extreme(self):
        if self._extremes is None:
            if self._eigs is not None or self.n <= _DENSE_EIG_LIMIT:
                w = self.eigenvalues
                self._extremes = (float(w[0]), float(w[-1]))
            else:
                self._extremes = _sym_extreme_eigs(self.matrix)
        return self._extremes

    @property
    def min_eig(self) -> float:
        return self._extreme()[0]

    @property
    def op_norm(self) -> float:
        lo, hi = self._extreme()
        return max(abs(lo), abs(hi))

    @property
    def frob_norm(self) -> float:
        return float(np.linalg.norm(self.matrix, "fro"))

    def unit_diagonal_residual(self) -> float:
        return float(np.abs(np.diag(self.matrix) - 1.0).max())

    def gram_factor(self, clip_tol: float = 1e-10):
        """V with V^T V = M (rows r <= N), from the eigendecomposition with
        tiny negative eigenvalues clipped to zero."""
        w, Q = np.linalg.eigh(self.matrix)
        if w[0] < -clip_tol * max(1.0, abs(w[-1])):
            raise ValueError("Gram factor requires a PSD matrix")
        w = np.clip(w, 0.0, None)
        keep = w > clip_tol * max(1.0, abs(w[-1]))
        V = (np.sqrt(w[keep])[:, None] * Q[:, keep].T)
        return V

    def __repr__(self):
        return f"DegreeTwoInput(n={self.n})"


@dataclass(frozen=True)
class IndexAssignment:
    """A full assignment of indices: leaves pinned by s, internal by a."""

    leaf_tuple: tuple[int, ...]
    internal_tuple: tuple[int, ...]

    def value(self, forest: GoodForest, v: int) -> int:
        if v < forest.n_leaves:
            return self.leaf_tuple[v]
        return self.internal_tuple[v - forest.n_leaves]


@dataclass(frozen=True)
class MaxSpanForest:
    """Vertex-disjoint spanning subtrees of repeated-index leaves, each
    tagged with its index; built by the ascending-index greedy loop."""

    subtrees: tuple[tuple[int, frozenset], ...]

    def internal_pins(self, forest: GoodForest) -> dict[int, int]:
        pins = {}
        for idx, verts in self.subtrees:
            for v in verts:
                if v >= forest.n_leaves:
                    pins[v] = idx
        return pins

    def is_tight(self, forest: GoodForest, a: tuple[int, ...]) -> bool:
        """Whether internal assignment a (indexed by internal position)
        agrees with every subtree's index on its internal vertices."""
        for v, idx in self.internal_pins(forest).items():
            if a[v - forest.n_leaves] != idx:
                return False
        return True


def _as_tuple(forest_leaves: int, s) -> tuple[int, ...]:
    if isinstance(s, MonomialIndex):
        out = s.values
    elif isinstance(s, (set, frozenset)):
        out = tuple(sorted(s))
    else:
        out = tuple(s)
    if len(out) != forest_leaves:
        raise ValueError(
            f"index tuple length {len(out)} != leaf count {forest_leaves}")
    return out


def _as_matrix(M) -> np.ndarray:
    if isinstance(M, DegreeTwoInput):
        return M.matrix
    return np.ascontiguousarray(np.asarray(M, dtype=np.float64))


_PLAN_CACHE: dict = {}


def component_plans(forest: GoodForest):
    """Per component: ('pair', (i, j)) for a bare edge between leaves i, j,
    or ('tree', plan, internal_ids) with plan leaf slots indexing the full
    leaf tuple and internal ids listed in plan order 0..t-1."""
    cached = _PLAN_CACHE.get(forest)
    if cached is not None:
        return cached
    out = []
    for verts, edges in forest.components():
        internal = sorted(v for v in verts if v >= forest.n_leaves)
        if not internal:
            (a, b), = edges
            out.append(("pair", (a, b)))
            continue
        imap = {v: k for k, v in enumerate(internal)}
        plan_edges = []
        for a, b in edges:
            ta = ("I", imap[a]) if a in imap else ("L", a)
            tb = ("I", imap[b]) if b in imap else ("L", b)
            plan_edges.append((ta, tb))
        plan = make_plan(forest.n_leaves, len(internal), plan_edges)
        out.append(("tree", plan, tuple(internal)))
    out = tuple(out)
    _PLAN_CACHE[forest] = out
    return out


def _batch_chunk(n: int) -> int:
    return max(1, int(4_000_000 // max(n, 1)))


def cgs_batch(forest: GoodForest, M, S, pins: dict | None = None,
              backend: str | None = None) -> np.ndarray:
    """Contraction values for a batch of leaf tuples S of shape (B, m).

    pins optionally maps internal vertex ids to either a scalar index or a
    length-B array of per-row indices; pinned vertices are summed over just
    that index.
    """
    arr = _as_matrix(M)
    S = np.ascontiguousarray(np.asarray(S, dtype=np.int64))
    if S.ndim != 2 or S.shape[1] != forest.n_leaves:
        raise ValueError("S must have shape (B, n_leaves)")
    B = S.shape[0]
    out = np.ones(B)
    for comp in component_plans(forest):
        if comp[0] == "pair":
            a, b = comp[1]
            out *= arr[S[:, a], S[:, b]]
            continue
        _, plan, internal_ids = comp
        pin_arr = None
        if pins:
            cols = []
            any_pin = False
            for v in internal_ids:
                p = pins.get(v)
                if p is None:
                    cols.append(np.full(B, -1, dtype=np.int64))
                else:
                    any_pin = True
                    cols.append(np.broadcast_to(
                        np.asarray(p, dtype=np.int64), (B,)))
            if any_pin:
                pin_arr = np.ascontiguousarray(np.stack(cols, axis=1))
        vals = np.empty(B)
        step = _batch_chunk(arr.shape[0])
        for lo in range(0, B, step):
            hi = min(B, lo + step)
            vals[lo:hi] = contract_tree(
                arr, plan, S[lo:hi],
                None if pin_arr is None else pin_arr[lo:hi],
                backend=backend)
        out *= vals
    return out


def cgs(forest: GoodForest, M, s, backend: str | None = None) -> float:
    """Scalar contraction: sum over internal assignments of the product of
    M entries along edges, leaves pinned at s."""
    t = _as_tuple(forest.n_leaves, s)
    if forest.n_leaves == 0:
        return 1.0
    return float(cgs_batch(forest, M, np.asarray([t]), backend=backend)[0])


def max_span(forest: GoodForest, s) -> MaxSpanForest:
    """Greedy maximal vertex-disjoint collection of minimal spanning
    subtrees of same-index leaves, indices ascending.

    For each index, earlier subtrees are removed from the component and
    each remaining connected piece with two or more leaves of that index
    contributes the spanning subtree of those leaves. (Spanning a piece's
    leaf group rather than skipping a blocked full group is what makes the
    loose sums cancel against pair reduction; see the error-decomposition
    identity checked in the tests.)"""
    s = _as_tuple(forest.n_leaves, s)
    taken: set[int] = set()
    spans = []
    for verts, edges in forest.components():
        for i in sorted(set(s)):
            avail = set(verts) - taken
            adj: dict[int, list[int]] = {v: [] for v in avail}
            for a, b in edges:
                if a in avail and b in avail:
                    adj[a].append(b)
                    adj[b].append(a)
            unseen = set(avail)
            while unseen:
                start = unseen.pop()
                piece = {start}
                stack = [start]
                while stack:
                    v = stack.pop()
                    for w in adj[v]:
                        if w not in piece:
                            piece.add(w)
                            stack.append(w)
                unseen -= piece
                leaves_i = sorted(x for x in piece
                                  if x < forest.n_leaves and s[x] == i)
                if len(leaves_i) < 2:
                    continue
                root = leaves_i[0]
                parent: dict[int, int | None] = {root: None}
                queue = [root]
                while queue:
                    v = queue.pop()
                    for w in adj[v]:
                        if w not in parent:
                            parent[w] = v
                            queue.append(w)
                subtree: set[int] = set()
                for leaf in leaves_i:
                    v = leaf
                    while v is not None and v not in subtree:
                        subtree.add(v)
                        v = parent[v]
                taken |= subtree
                spans.append((i, frozenset(subtree)))
    return MaxSpanForest(tuple(spans))


def cgs_tight(forest: GoodForest, M, s, backend: str | None = None) -> float:
    """Contraction restricted to tight internal assignments: every internal
    vertex covered by a spanning subtree is held at that subtree's index."""
    t = _as_tuple(forest.n_leaves, s)
    if forest.n_leaves == 0:
        return 1.0
    pins = max_span(forest, t).internal_pins(forest)
    return float(cgs_batch(forest, M, np.asarray([t]), pins=pins,
                           backend=backend)[0])


def delta(forest: GoodForest, M, s, backend: str | None = None) -> float:
    """Loose part of the contraction: cgs minus the tight-restricted sum."""
    t = _as_tuple(forest.n_leaves, s)
    pins = max_span(forest, t).internal_pins(forest)
    if not pins:
        return 0.0
    full = cgs(forest, M, t, backend=backend)
    tight = float(cgs_batch(forest, M, np.asarray([t]), pins=pins,
                            backend=backend)[0])
    return full - tight


def rank_patterns(S: np.ndarray) -> np.ndarray:
    """Relabel each row's values by ascending rank among its distinct
    values; rows with the same pattern share their spanning structure."""
    order_idx = np.argsort(S, axis=1, kind="stable")
    sorted_S = np.take_along_axis(S, order_idx, axis=1)
    newgrp = np.ones(S.shape, dtype=np.int64)
    newgrp[:, 1:] = (sorted_S[:, 1:] != sorted_S[:, :-1]).astype(np.int64)
    rank_sorted = np.cumsum(newgrp, axis=1) - 1
    ranks = np.empty_like(S)
    np.put_along_axis(ranks, order_idx, rank_sorted, axis=1)
    return ranks


def delta_batch(forest: GoodForest, M, S,
                backend: str | None = None) -> np.ndarray:
    """Loose sums for a batch of tuples, grouping rows by rank pattern so
    the spanning construction runs once per pattern."""
    arr = _as_matrix(M)
    S = np.ascontiguousarray(np.asarray(S, dtype=np.int64))
    B, m = S.shape
    ranks = rank_patterns(S)
    codes = ranks @ ((m + 1) ** np.arange(m, dtype=np.int64))
    uniq, inverse = np.unique(codes, return_inverse=True)
    out = np.zeros(B)
    for g in range(len(uniq)):
        rows = np.nonzero(inverse == g)[0]
        pat = tuple(int(x) for x in ranks[rows[0]])
        pins_by_rank = max_span(forest, pat).internal_pins(forest)
        if not pins_by_rank:
            continue
        rank_pos = {r: pat.index(r) for r in set(pins_by_rank.values())}
        sub = S[rows]
        pins = {v: sub[:, rank_pos[r]] for v, r in pins_by_rank.items()}
        full = cgs_batch(forest, arr, sub, backend=backend)
        tight = cgs_batch(forest, arr, sub, pins=pins, backend=backend)
        out[rows] = full - tight
    return out


@dataclass(frozen=True)
class CgmBlock:
    """Set-indexed block of contraction values for a two-sided forest."""

    left_sets: tuple[tuple[int, ...], ...]
    right_sets: tuple[tuple[int, ...], ...]
    values: np.ndarray


def cgm_entries(diagram: RibbonForest, M, left_sets, right_sets,
                backend: str | None = None) -> np.ndarray:
    """Values at explicit (left set, right set) pairs: entry (S, T) pins the
    left row to ascending S and the right row to ascending T."""
    left = [tuple(sorted(s)) for s in left_sets]
    right = [tuple(sorted(t)) for t in right_sets]
    if any(len(s) != diagram.n_left for s in left):
        raise ValueError("left set size mismatch")
    if any(len(t) != diagram.n_right for t in right):
        raise ValueError("right set size mismatch")
    la = np.asarray(left, dtype=np.int64).reshape(len(left), diagram.n_left)
    ra = np.asarray(right, dtype=np.int64).reshape(len(right),
                                                   diagram.n_right)
    S = np.concatenate([
        np.repeat(la, len(right), axis=0),
        np.tile(ra, (len(left), 1)),
    ], axis=1)
    vals = cgs_batch(diagram.forest, M, S, backend=backend)
    return vals.reshape(len(left), len(right))


def cgm_block(diagram: RibbonForest, M, max_entries: int = 20_000_000,
              backend: str | None = None) -> CgmBlock:
    """Full block over all ascending subsets of the index range."""
    arr = _as_matrix(M)
    n = arr.shape[0]
    n_left = math.comb(n, diagram.n_left)
    n_right = math.comb(n, diagram.n_right)
    if n_left * n_right > max_entries:
        raise ValueError(
            f"block of {n_left}x{n_right} entries exceeds the guard "
            f"({max_entries})")
    left = list(itertools.combinations(range(n), diagram.n_left))
    right = list(itertools.combinations(range(n), diagram.n_right))
    vals = cgm_entries(diagram, arr, left, right, backend=backend)
    return CgmBlock(tuple(left), tuple(right), vals)


# ---------------------------------------------------------------------------
# naive reference evaluators (oracles for small N)

def naive_cgs(forest: GoodForest, M, s, cap: int = 2_000_000) -> float:
    """Literal sum over all internal assignments. Oracle only."""
    arr = _as_matrix(M)
    n = arr.shape[0]
    t = _as_tuple(forest.n_leaves, s)
    n_int = forest.n_internal
    if n ** n_int > cap:
        raise ValueError("naive evaluation too large")
    total = 0.0
    for a in itertools.product(range(n), repeat=n_int):
        assign = IndexAssignment(t, a)
        term = 1.0
        for u, v in forest.edges:
            term *= arr[assign.value(forest, u), assign.value(forest, v)]
        total += term
    return total


def naive_cgs_tight(forest: GoodForest, M, s,
                    cap: int = 2_000_000) -> float:
    """Literal sum over tight internal assignments. Oracle only."""
    arr = _as_matrix(M)
    n = arr.shape[0]
    t = _as_tuple(forest.n_leaves, s)
    span = max_span(forest, t)
    n_int = forest.n_internal
    if n ** n_int > cap:
        raise ValueError("naive evaluation too large")
    total = 0.0
    for a in itertools.product(range(n), repeat=n_int):
        if not span.is_tight(forest, a):
            continue
        assign = IndexAssignment(t, a)
        term = 1.0
        for u, v in forest.edges:
            term *= arr[assign.value(forest, u), assign.value(forest, v)]
        total += term
    return total
