"""Independent oracles and random generators shared by the test suite.

Everything here recomputes its target by a route different from the package
implementation: explicit assignment sums for diagram values, power-series
division for the alternating-weight coefficients, empirical moments of
genuine sign distributions for the certifier, and textbook closed forms.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from momentforge import LabelledDiagram, Pseudoexpectation


# ---------------------------------------------------------------------------
# random inputs


def random_unit_diag(rng, n, scale=0.3):
    """Random symmetric matrix with exact unit diagonal."""
    A = rng.standard_normal((n, n)) * scale / np.sqrt(n)
    M = (A + A.T) / 2.0
    np.fill_diagonal(M, 1.0)
    return M


def random_psd_unit_diag(rng, n, ridge=0.4):
    """Random positive-definite matrix rescaled to exact unit diagonal."""
    V = rng.standard_normal((n, n)) / np.sqrt(n)
    A = V @ V.T + ridge * np.eye(n)
    d = 1.0 / np.sqrt(np.diag(A))
    M = d[:, None] * A * d[None, :]
    np.fill_diagonal(M, 1.0)
    return M


def random_diagram(rng, n_max=4):
    """Random small labelled diagram; rows and columns may share vertices."""
    n_left = rng.integers(0, 3)
    n_right = rng.integers(0, 3)
    n_int = rng.integers(0, 3)
    left = [("L", i) for i in range(n_left)]
    right = [("R", i) for i in range(n_right)]
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


# ---------------------------------------------------------------------------
# brute-force diagram evaluation


def brute_diagram_eval(D):
    """Evaluate a labelled diagram by the explicit sum over all assignments
    to internal vertices (exponential; small dimensions only)."""
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


# ---------------------------------------------------------------------------
# series oracle for the alternating weights


def tanh_series(order):
    """Exact Taylor coefficients c with tanh x = sum_k c[k] x^k, computed by
    power-series division of sinh by cosh."""
    sinh = [Fraction(0)] * (order + 1)
    cosh = [Fraction(0)] * (order + 1)
    fact = 1
    for k in range(order + 1):
        if k:
            fact *= k
        if k % 2 == 1:
            sinh[k] = Fraction(1, fact)
        else:
            cosh[k] = Fraction(1, fact)
    out = [Fraction(0)] * (order + 1)
    for k in range(order + 1):
        acc = sinh[k]
        for j in range(k):
            acc -= out[j] * cosh[k - j]
        out[k] = acc
    return out


def nu_oracle(k):
    """Weight of the even block size k from the series expansion
    tanh x = sum_j nu(2j) x^(2j-1) / (2j-1)!."""
    if k < 2 or k % 2 == 1:
        return Fraction(0)
    return tanh_series(k)[k - 1] * math.factorial(k - 1)


# ---------------------------------------------------------------------------
# genuine-distribution moments


def empirical_sign_pseudoexpectation(points, degree):
    """Exact moment functional of a finite distribution over sign vectors.

    Being realizable, its pseudomoment matrix is a Gram matrix and therefore
    positive semidefinite at every degree -- an unconditional oracle for the
    certifier.
    """
    pts = np.asarray(points, dtype=float)
    _, n = pts.shape
    values = {}
    for size in range(2, degree + 1, 2):
        for S in itertools.combinations(range(n), size):
            col = np.ones(pts.shape[0])
            for i in S:
                col = col * pts[:, i]
            values[S] = float(col.mean())
    return Pseudoexpectation(n, degree, "custom", values=values)


# ---------------------------------------------------------------------------
# closed forms


def degree4_formula(M, i, j, k, l):
    """Three pair products minus twice the common-neighbor correction."""
    n = M.shape[0]
    return (M[i, j] * M[k, l] + M[i, k] * M[j, l] + M[i, l] * M[j, k]
            - 2.0 * sum(M[a, i] * M[a, j] * M[a, k] * M[a, l]
                        for a in range(n)))


def laurent_value_oracle(N, m):
    """Exact value of the equicorrelated extremal functional on a set of
    size m: (-1)^(m/2) (m-1)!! / prod_{k=1}^{m/2} (N - 2k + 1)."""
    if m == 0:
        return Fraction(1)
    if m % 2 == 1:
        return Fraction(0)
    num = Fraction((-1) ** (m // 2))
    for j in range(1, m, 2):
        num *= j
    den = 1
    for k in range(1, m // 2 + 1):
        den *= N - 2 * k + 1
    return num / den


def bell_number(n):
    """Bell numbers via the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]
