"""Generalized ribbon diagrams: left/right rows that may overlap, per-edge
oriented matrix labels of varying dimensions, tuple-indexed evaluation, and
the rewrite toolkit (tensorization, splitting, pinning/cutting, direct-sum
decomposition, three-factor factorization, layered norm bound). Every
rewrite preserves the evaluated matrix; tests enforce this numerically.

Diagrams are immutable; rewrites return new diagrams.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np


def _frozen(arr) -> np.ndarray:
    a = np.array(arr, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Edge:
    u: object
    v: object
    matrix: np.ndarray  # shape (N(u), N(v)); reversed orientation transposes

    def label(self, x, y) -> np.ndarray:
        if (x, y) == (self.u, self.v):
            return self.matrix
        if (x, y) == (self.v, self.u):
            return self.matrix.T
        raise KeyError((x, y))


class LabelledDiagram:
    """Vertices split into an ordered left row, an ordered right row
    (possibly sharing vertices with the left), and internal vertices; each
    edge carries a matrix whose shape matches its endpoint dimensions."""

    __slots__ = ("left", "right", "internal", "edges", "dims")

    def __init__(self, left, right, internal, edges, dims=None):
        self.left = tuple(left)
        self.right = tuple(right)
        self.internal = tuple(internal)
        if len(set(self.left)) != len(self.left):
            raise ValueError("left row repeats a vertex")
        if len(set(self.right)) != len(self.right):
            raise ValueError("right row repeats a vertex")
        row_verts = set(self.left) | set(self.right)
        if row_verts & set(self.internal):
            raise ValueError("internal vertices cannot sit in a row")
        known = dict(dims or {})
        norm_edges = []
        for e in edges:
            if isinstance(e, Edge):
                u, v, mat = e.u, e.v, e.matrix
            else:
                u, v, mat = e
            if u == v:
                raise ValueError("self-loops are not allowed")
            mat = mat if (isinstance(mat, np.ndarray)
                          and not mat.flags.writeable) else _frozen(mat)
            if mat.ndim != 2:
                raise ValueError("edge labels must be matrices")
            for w, d in ((u, mat.shape[0]), (v, mat.shape[1])):
                if known.setdefault(w, d) != d:
                    raise ValueError(
                        f"incompatible dimensions at vertex {w!r}: "
                        f"{known[w]} vs {d}")
            norm_edges.append(Edge(u, v, mat))
        self.edges = tuple(norm_edges)
        all_verts = row_verts | set(self.internal)
        missing = all_verts - set(known)
        if missing:
            raise ValueError(
                f"dimension unknown for isolated vertices {missing!r}; "
                f"pass dims")
        extra = set(known) - all_verts
        if extra:
            raise ValueError(f"dims given for unknown vertices {extra!r}")
        self.dims = dict(known)

    # -- basic structure ----------------------------------------------------

    @property
    def vertices(self) -> tuple:
        return tuple(self.left) + tuple(
            v for v in self.right if v not in self.left) + self.internal

    @property
    def overlap(self) -> tuple:
        return tuple(v for v in self.left if v in self.right)

    def degree(self, v) -> int:
        return sum(1 for e in self.edges if v in (e.u, e.v))

    def neighbors(self, v) -> list:
        out = []
        for e in self.edges:
            if e.u == v:
                out.append(e.v)
            elif e.v == v:
                out.append(e.u)
        return out

    def row_shape(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return (tuple(self.dims[v] for v in self.left),
                tuple(self.dims[v] for v in self.right))

    def __repr__(self):
        return (f"LabelledDiagram(left={self.left}, right={self.right}, "
                f"internal={self.internal}, edges={len(self.edges)})")

    # -- evaluation ----------------------------------------------------------

    def eval(self, max_entries: int = 20_000_000) -> np.ndarray:
        """Tuple-indexed matrix: rows over assignments of the left row (first
        slot slowest), columns over the right row; overlapping vertices force
        agreement, contributing zero entries elsewhere."""
        ldims, rdims = self.row_shape()
        n_rows = int(np.prod(ldims)) if ldims else 1
        n_cols = int(np.prod(rdims)) if rdims else 1
        if n_rows * n_cols > max_entries:
            raise ValueError("tuple-indexed evaluation exceeds entry guard")
        out_verts = list(dict.fromkeys(list(self.left) + list(self.right)))
        axis = {v: k for k, v in enumerate(
            out_verts + list(self.internal))}
        operands = []
        touched = set()
        for e in self.edges:
            operands.append(np.asarray(e.matrix))
            operands.append([axis[e.u], axis[e.v]])
            touched.add(e.u)
            touched.add(e.v)
        for v in axis:
            if v not in touched:
                operands.append(np.ones(self.dims[v]))
                operands.append([axis[v]])
        out_axes = [axis[v] for v in out_verts]
        if operands:
            tensor = np.einsum(*operands, out_axes, optimize="greedy")
        else:
            tensor = np.ones(() if not out_axes else tuple())
        tensor = np.asarray(tensor)
        if not out_verts:
            return np.full((1, 1), float(tensor))
        # scatter the shared-vertex tensor into the full (rows, cols) matrix
        grids = np.meshgrid(*[np.arange(self.dims[v]) for v in out_verts],
                            indexing="ij", sparse=False)
        coord = {v: g for v, g in zip(out_verts, grids)}
        if ldims:
            row_idx = np.ravel_multi_index(
                tuple(coord[v] for v in self.left), ldims)
        else:
            row_idx = np.zeros_like(grids[0])
        if rdims:
            col_idx = np.ravel_multi_index(
                tuple(coord[v] for v in self.right), rdims)
        else:
            col_idx = np.zeros_like(grids[0])
        Z = np.zeros((n_rows, n_cols))
        Z[row_idx.ravel(), col_idx.ravel()] = tensor.ravel()
        return Z


def eval_generalized(D: LabelledDiagram,
                     max_entries: int = 20_000_000) -> np.ndarray:
    return D.eval(max_entries=max_entries)


# ---------------------------------------------------------------------------
# rewrites

def _connected_parts(D: LabelledDiagram) -> list[set]:
    verts = set(D.vertices)
    parent = {v: v for v in verts}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in D.edges:
        ra, rb = find(e.u), find(e.v)
        if ra != rb:
            parent[ra] = rb
    groups: dict = {}
    for v in verts:
        groups.setdefault(find(v), set()).add(v)
    return sorted(groups.values(), key=lambda g: min(str(v) for v in g))


def tensorize(D: LabelledDiagram):
    """Connected components as diagrams plus the row/column index maps
    realizing the permutation identity: with K the Kronecker product of the
    component matrices in order, Z[i, j] = K[row_map[i], col_map[j]]."""
    parts = _connected_parts(D)
    comps = []
    for g in parts:
        left = tuple(v for v in D.left if v in g)
        right = tuple(v for v in D.right if v in g)
        internal = tuple(v for v in D.internal if v in g)
        edges = tuple(e for e in D.edges if e.u in g)
        dims = {v: D.dims[v] for v in g}
        comps.append(LabelledDiagram(left, right, internal, edges, dims))
    ldims, rdims = D.row_shape()

    def index_map(row_attr, global_order, global_dims):
        slots = [v for c in comps for v in getattr(c, row_attr)]
        slot_dims = [D.dims[v] for v in slots]
        pos = {v: k for k, v in enumerate(slots)}
        n = int(np.prod(global_dims)) if global_dims else 1
        out = np.empty(n, dtype=np.int64)
        for flat in range(n):
            tup = np.unravel_index(flat, global_dims) if global_dims else ()
            reordered = tuple(tup[global_order.index(v)] for v in slots)
            out[flat] = (np.ravel_multi_index(reordered, slot_dims)
                         if slots else 0)
        return out

    row_map = index_map("left", list(D.left), ldims)
    col_map = index_map("right", list(D.right), rdims)
    return comps, (row_map, col_map)


def split_edge(D: LabelledDiagram, edge_index: int, A=None,
               B=None) -> LabelledDiagram:
    """Subdivide one edge with a new internal vertex carrying a declared
    factorization of its matrix; defaults to identity times the matrix."""
    e = D.edges[edge_index]
    if A is None and B is None:
        A = np.eye(e.matrix.shape[0])
        B = e.matrix
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape[0] != e.matrix.shape[0] or B.shape[1] != e.matrix.shape[1] \
            or A.shape[1] != B.shape[0]:
        raise ValueError("factor shapes incompatible with the edge label")
    if not np.allclose(A @ B, e.matrix, atol=1e-12 * max(
            1.0, float(np.abs(e.matrix).max()))):
        raise ValueError("A @ B does not reproduce the edge label")
    new = ("split", len(D.internal), edge_index)
    edges = list(D.edges)
    edges[edge_index:edge_index + 1] = [Edge(e.u, new, _frozen(A)),
                                        Edge(new, e.v, _frozen(B))]
    return LabelledDiagram(D.left, D.right, D.internal + (new,), edges,
                           D.dims | {new: A.shape[1]})


def split_intersection(D: LabelledDiagram) -> LabelledDiagram:
    """Duplicate every vertex shared between the rows, moving the duplicate
    to the right row joined by an identity edge."""
    shared = D.overlap
    if not shared:
        return D
    twin = {v: ("twin", v) for v in shared}
    right = tuple(twin.get(v, v) for v in D.right)
    edges = list(D.edges) + [
        Edge(v, twin[v], _frozen(np.eye(D.dims[v]))) for v in shared]
    dims = D.dims | {twin[v]: D.dims[v] for v in shared}
    return LabelledDiagram(D.left, right, D.internal, edges, dims)


def pin_cut(D: LabelledDiagram, v) -> LabelledDiagram:
    """Cut at a pinned internal vertex (dimension 1): each incident edge
    moves to its own fresh pinned leaf."""
    if v not in D.internal:
        raise ValueError("pin_cut applies to internal vertices")
    if D.dims[v] != 1:
        raise ValueError("pin_cut requires a pinned vertex (dimension 1)")
    edges = []
    new_vs = []
    k = 0
    for e in D.edges:
        if v not in (e.u, e.v):
            edges.append(e)
            continue
        nv = ("cut", v, k)
        k += 1
        new_vs.append(nv)
        if e.u == v:
            edges.append(Edge(nv, e.v, e.matrix))
        else:
            edges.append(Edge(e.u, nv, e.matrix))
    internal = tuple(w for w in D.internal if w != v) + tuple(new_vs)
    dims = {w: d for w, d in D.dims.items() if w != v}
    dims.update({nv: 1 for nv in new_vs})
    return LabelledDiagram(D.left, D.right, internal, edges, dims)


def direct_sum_decompose(D: LabelledDiagram):
    """For each assignment of the shared row vertices, the diagram with
    those vertices pinned and incident labels sliced. Returns a list of
    (assignment tuple, diagram); the original matrix is zero off the shared
    agreement set and block-decomposes along these."""
    shared = D.overlap
    if not shared:
        return [((), D)]
    out = []
    for assign in itertools.product(*[range(D.dims[v]) for v in shared]):
        pin = dict(zip(shared, assign))
        left = tuple(v for v in D.left if v not in pin)
        right = tuple(v for v in D.right if v not in pin)
        edges = []
        for e in D.edges:
            mat = np.asarray(e.matrix)
            u_p, v_p = e.u in pin, e.v in pin
            if u_p and v_p:
                mat = mat[pin[e.u]:pin[e.u] + 1, pin[e.v]:pin[e.v] + 1]
            elif u_p:
                mat = mat[pin[e.u]:pin[e.u] + 1, :]
            elif v_p:
                mat = mat[:, pin[e.v]:pin[e.v] + 1]
            edges.append(Edge(e.u, e.v, _frozen(mat)))
        internal = D.internal + shared
        dims = dict(D.dims)
        dims.update({v: 1 for v in shared})
        out.append((assign,
                    LabelledDiagram(left, right, internal, edges, dims)))
    return out


def factorize(D: LabelledDiagram, A, B, C, edge_assignment=None):
    """Three-factor product decomposition across a vertex partition
    (A, B, C) with the rows at the two ends: returns diagrams whose
    evaluated matrices multiply to the original.

    edge_assignment optionally maps indices of edges internal to B onto
    'A', 'B', or 'C' subject to the boundary containment conditions; by
    default such edges go to 'B'.
    """
    A, B, C = set(A), set(B), set(C)
    allv = set(D.vertices)
    if A | B | C != allv or A & B or A & C or B & C:
        raise ValueError("A, B, C must partition the vertex set")
    if not set(D.left) <= A:
        raise ValueError("left row must lie in A")
    if not set(D.right) <= C:
        raise ValueError("right row must lie in C")

    def out_boundary(S):
        return {v for v in allv - S
                if any((e.u in S) != (e.v in S) and v in (e.u, e.v)
                       for e in D.edges)}

    bA = out_boundary(A)
    bC = out_boundary(C)
    if not bA <= B:
        raise ValueError("outer boundary of A must lie in B")
    if not bC <= B:
        raise ValueError("outer boundary of C must lie in B")
    border_A = sorted(bA, key=str)
    border_C = sorted(bC, key=str)

    eA, eB, eC = [], [], []
    for k, e in enumerate(D.edges):
        endpoints = {e.u, e.v}
        if endpoints & A:
            if not endpoints <= A | bA:
                raise ValueError(
                    f"edge {k} leaves A without landing on its boundary")
            eA.append(e)
        elif endpoints & C:
            if not endpoints <= C | bC:
                raise ValueError(
                    f"edge {k} leaves C without landing on its boundary")
            eC.append(e)
        else:
            where = (edge_assignment or {}).get(k, "B")
            if where == "A":
                if not endpoints <= bA:
                    raise ValueError(
                        f"edge {k} assigned to A must join boundary-of-A "
                        f"vertices")
                eA.append(e)
            elif where == "C":
                if not endpoints <= bC:
                    raise ValueError(
                        f"edge {k} assigned to C must join boundary-of-C "
                        f"vertices")
                eC.append(e)
            else:
                eB.append(e)

    def dims_for(verts):
        return {v: D.dims[v] for v in verts}

    DA = LabelledDiagram(
        D.left, border_A, tuple(sorted(A - set(D.left), key=str)), eA,
        dims_for(A | bA))
    DB = LabelledDiagram(
        border_A, border_C,
        tuple(sorted(B - bA - bC, key=str)), eB, dims_for(B))
    DC = LabelledDiagram(
        border_C, D.right, tuple(sorted(C - set(D.right), key=str)), eC,
        dims_for(C | bC))
    return DA, DB, DC


def _distance_layers(D: LabelledDiagram):
    left = list(D.left)
    right = set(D.right)
    dist = {v: 0 for v in left}
    frontier = list(left)
    while frontier:
        nxt = []
        for v in frontier:
            for w in D.neighbors(v):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    if set(D.vertices) - set(dist):
        raise ValueError(
            "norm bound hypothesis fails: vertices unreachable from the "
            "left row")
    depth = max((dist[v] for v in D.vertices), default=0)
    layers = [[] for _ in range(depth + 2)]
    for v in D.vertices:
        if v in right:
            layers[depth + 1].append(v)
        else:
            layers[dist[v]].append(v)
    return [l for l in layers if l]


def norm_bound(D: LabelledDiagram, layers=None) -> float:
    """Product of edge-label spectral norms, valid once a layered partition
    (left row first, right row last, middle vertices adjacent both ways)
    certifies the diagram's structure. layers defaults to breadth-first
    distance from the left row."""
    if set(D.left) & set(D.right):
        raise ValueError("norm bound hypothesis fails: rows overlap")
    if layers is None:
        layers = _distance_layers(D)
    layers = [list(l) for l in layers]
    if len(layers) < 2:
        raise ValueError("norm bound needs at least two layers")
    flat = [v for l in layers for v in l]
    if sorted(map(str, flat)) != sorted(map(str, D.vertices)) \
            or len(flat) != len(set(flat)):
        raise ValueError("layers must partition the vertex set")
    if set(layers[0]) != set(D.left):
        raise ValueError("first layer must be the left row")
    if set(layers[-1]) != set(D.right):
        raise ValueError("last layer must be the right row")
    where = {}
    for k, l in enumerate(layers):
        for v in l:
            where[v] = k
    m = len(layers)
    for v in D.vertices:
        ks = {where[w] for w in D.neighbors(v)}
        j = where[v]
        if j == 0:
            if not any(k > 0 for k in ks):
                raise ValueError(
                    f"norm bound hypothesis fails: left vertex {v!r} has "
                    f"no neighbor in a later layer")
        elif j == m - 1:
            if not any(k < m - 1 for k in ks):
                raise ValueError(
                    f"norm bound hypothesis fails: right vertex {v!r} has "
                    f"no neighbor in an earlier layer")
        else:
            if not (any(k < j for k in ks) and any(k > j for k in ks)):
                raise ValueError(
                    f"norm bound hypothesis fails: middle vertex {v!r} "
                    f"lacks neighbors on both sides")
    out = 1.0
    for e in D.edges:
        out *= float(np.linalg.norm(np.asarray(e.matrix), 2))
    return out


def forest_to_diagram(ribbon, M) -> LabelledDiagram:
    """View a two-sided forest as a labelled diagram with every edge
    carrying the same matrix."""
    M = _frozen(np.asarray(M, dtype=np.float64))
    f = ribbon.forest
    left = tuple(("l", x) for x in range(ribbon.n_left))
    right = tuple(("r", x) for x in range(ribbon.n_right))

    def name(v):
        if v < ribbon.n_left:
            return ("l", v)
        if v < f.n_leaves:
            return ("r", v - ribbon.n_left)
        return ("q", v)

    internal = tuple(("q", v) for v in f.internal_vertices)
    edges = [Edge(name(a), name(b), M) for a, b in f.edges]
    dims = {v: M.shape[0] for v in left + right + internal}
    return LabelledDiagram(left, right, internal, edges, dims)


def to_dot(D: LabelledDiagram) -> str:
    out = ["graph diagram {", "  rankdir=LR;"]
    for v in D.vertices:
        if v in D.left and v in D.right:
            shape = "doublecircle"
        elif v in D.left or v in D.right:
            shape = "circle"
        else:
            shape = "square" if D.dims[v] > 1 else "point"
        out.append(f'  "{v}" [shape={shape}, label="{v}  ({D.dims[v]})"];')
    for e in D.edges:
        out.append(f'  "{e.u}" -- "{e.v}";')
    out.append("}")
    return "\n".join(out)
