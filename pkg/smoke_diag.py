import itertools

import numpy as np

from momentforge.diagram_algebra import (
    Edge, LabelledDiagram, direct_sum_decompose, eval_generalized, factorize,
    forest_to_diagram, norm_bound, pin_cut, split_edge, split_intersection,
    tensorize, to_dot)
from momentforge.forests import RibbonForest, enumerate_good_forests


def brute_eval(D):
    ldims, rdims = D.row_shape()
    n_rows = int(np.prod(ldims)) if ldims else 1
    n_cols = int(np.prod(rdims)) if rdims else 1
    Z = np.zeros((n_rows, n_cols))
    for s_flat in range(n_rows):
        s = np.unravel_index(s_flat, ldims) if ldims else ()
        for t_flat in range(n_cols):
            t = np.unravel_index(t_flat, rdims) if rdims else ()
            assign = {}
            ok = True
            for v, a in list(zip(D.left, s)) + list(zip(D.right, t)):
                if assign.setdefault(v, a) != a:
                    ok = False
                    break
            if not ok:
                continue
            tot = 0.0
            for rest in itertools.product(
                    *[range(D.dims[v]) for v in D.internal]):
                assign.update(zip(D.internal, rest))
                prod = 1.0
                for e in D.edges:
                    prod *= e.matrix[assign[e.u], assign[e.v]]
                tot += prod
            Z[s_flat, t_flat] = tot
    return Z


rng = np.random.default_rng(0)


def random_diagram(rng, n_max=4):
    n_left = rng.integers(0, 3)
    n_right = rng.integers(0, 3)
    n_int = rng.integers(0, 3)
    left = [("L", i) for i in range(n_left)]
    right = [("R", i) for i in range(n_right)]
    # chance of overlap: move a right vertex into left's list
    if n_left and n_right and rng.random() < 0.3:
        right[0] = left[0]
    internal = [("I", i) for i in range(n_int)]
    verts = left + [v for v in right if v not in left] + internal
    dims = {v: int(rng.integers(1, n_max + 1)) for v in verts}
    edges = []
    n_edges = rng.integers(0, 6)
    for _ in range(n_edges):
        if len(verts) < 2:
            break
        i, j = rng.choice(len(verts), size=2, replace=False)
        u, v = verts[i], verts[j]
        edges.append((u, v, rng.standard_normal((dims[u], dims[v]))))
    return LabelledDiagram(left, right, internal, edges, dims)


# 1. eval vs brute force on random diagrams
for k in range(200):
    D = random_diagram(rng)
    assert np.allclose(D.eval(), brute_eval(D), atol=1e-10), k
print("eval vs brute: ok")

# 2. tensorize: kron of components + index maps reproduces eval
for k in range(100):
    D = random_diagram(rng)
    comps, (row_map, col_map) = tensorize(D)
    K = np.ones((1, 1))
    for c in comps:
        K = np.kron(K, c.eval())
    Z = D.eval()
    assert np.allclose(Z, K[np.ix_(row_map, col_map)], atol=1e-10), k
print("tensorize: ok")

# 3. split_edge preserves eval (random factorization via SVD)
for k in range(50):
    D = random_diagram(rng)
    if not D.edges:
        continue
    idx = int(rng.integers(len(D.edges)))
    M = np.asarray(D.edges[idx].matrix)
    u, s, vt = np.linalg.svd(M, full_matrices=False)
    D2 = split_edge(D, idx, u * s, vt)
    assert np.allclose(D.eval(), D2.eval(), atol=1e-10), k
    D3 = split_edge(D, idx)  # identity default
    assert np.allclose(D.eval(), D3.eval(), atol=1e-10), k
print("split_edge: ok")

# 4. split_intersection: diag-embed identity
for k in range(100):
    D = random_diagram(rng)
    D2 = split_intersection(D)
    assert np.allclose(D.eval(), D2.eval(), atol=1e-10), k
    assert not D2.overlap
print("split_intersection: ok")

# 5. pin_cut on a pinned internal vertex
for k in range(100):
    D = random_diagram(rng)
    pinned = [v for v in D.internal if D.dims[v] == 1]
    if not pinned:
        continue
    D2 = pin_cut(D, pinned[0])
    assert np.allclose(D.eval(), D2.eval(), atol=1e-10), k
print("pin_cut: ok")

# 6. direct_sum_decompose: entrywise identity
for k in range(100):
    D = random_diagram(rng)
    if not D.overlap:
        continue
    Z = D.eval()
    parts = direct_sum_decompose(D)
    ldims, rdims = D.row_shape()
    shared = D.overlap
    lpos = {v: i for i, v in enumerate(D.left)}
    rpos = {v: i for i, v in enumerate(D.right)}
    total = np.zeros_like(Z)
    for assign, Dp in parts:
        Zp = Dp.eval()
        # rebuild the rows/cols of the full matrix this block occupies
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
            row = np.ravel_multi_index(tuple(full_s), ldims) if ldims else 0
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
                col = np.ravel_multi_index(tuple(full_t), rdims) \
                    if rdims else 0
                total[row, col] += Zp[sp_flat, tp_flat]
    assert np.allclose(Z, total, atol=1e-10), k
print("direct_sum_decompose: ok")

# 7. factorize on a layered chain diagram
N = 3
rngl = np.random.default_rng(7)
M1 = rngl.standard_normal((N, N))
M2 = rngl.standard_normal((N, N))
M3 = rngl.standard_normal((N, N))
M4 = rngl.standard_normal((N, N))
D = LabelledDiagram(
    left=["l0"], right=["r0"], internal=["a", "b"],
    edges=[("l0", "a", M1), ("a", "b", M2), ("a", "b", M3), ("b", "r0", M4)])
DA, DB, DC = factorize(D, A={"l0"}, B={"a", "b"}, C={"r0"})
assert np.allclose(D.eval(), DA.eval() @ DB.eval() @ DC.eval(), atol=1e-10)
# now put the parallel a-b edges into separated factors via a bigger split
D2 = LabelledDiagram(
    left=["l0"], right=["r0"], internal=["a", "b", "c"],
    edges=[("l0", "a", M1), ("a", "b", M2), ("b", "c", M3), ("c", "r0", M4)])
DA, DB, DC = factorize(D2, A={"l0", "a"}, B={"b"}, C={"c", "r0"})
assert np.allclose(D2.eval(), DA.eval() @ DB.eval() @ DC.eval(), atol=1e-10)
print("factorize: ok")

# 8. norm_bound: valid on chains, rejects isolated leaf, never violated
Z = np.abs(D2.eval()).max()
nb = norm_bound(D2)
assert Z <= nb + 1e-9, (Z, nb)
try:
    bad = LabelledDiagram(["l0"], ["r0"], [], [], dims={"l0": 3, "r0": 3})
    norm_bound(bad)
    raise SystemExit("should have rejected isolated rows")
except ValueError as e:
    print("rejected:", e)

# spectral norm comparison: ||Z|| <= prod ||M_e|| on forests
from momentforge.forests import enumerate_good_forests
rng2 = np.random.default_rng(3)
for m in (2, 4):
    for f in enumerate_good_forests(m):
        for n_left in range(1, m):
            rib = RibbonForest(n_left, m - n_left, f)
            A = rng2.standard_normal((4, 4))
            Msym = (A + A.T) / 2
            D = forest_to_diagram(rib, Msym)
            try:
                nb = norm_bound(D)
            except ValueError:
                continue
            Z = D.eval()
            assert np.linalg.norm(Z, 2) <= nb * (1 + 1e-9), (m, n_left)
print("norm_bound: ok")
print(to_dot(D).splitlines()[0])
