"""Degree-2 to degree-2d pseudoexpectation extension: forest-sum values
with closed-form vectorized fills for sizes 2/4/6, the main/error value
split, pseudomoment matrices in the monomial and multiharmonic bases, the
stretched-forest assembly of the main term, certification, and the
degree-6 low-rank variant."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .cgraph import DegreeTwoInput, _as_matrix, cgs, cgs_batch, delta, \
    sym_op_norm, cgm_entries
from .combinat import MonomialIndex
from .forests import (MAX_LEAVES_DEFAULT, enumerate_good_forests,
                      stretched_forests)
from .poly import degree_sets, harmonic_polynomial


class ConstructionError(RuntimeError):
    """A construction's validity budget is exhausted (not a bug: the input
    is outside the regime the construction can handle)."""


# ---------------------------------------------------------------------------
# vectorized value fills

_GEMM_BUDGET_BYTES = 1_600_000_000


def _pair_ranks(n: int) -> np.ndarray:
    R = np.full((n, n), -1, dtype=np.int64)
    for r, (i, j) in enumerate(itertools.combinations(range(n), 2)):
        R[i, j] = R[j, i] = r
    return R


def _triple_ranks(n: int) -> np.ndarray:
    T = np.zeros((n, n, n), dtype=np.int64)
    for r, (i, j, k) in enumerate(itertools.combinations(range(n), 3)):
        T[i, j, k] = r
    return T


_MATCHINGS = {
    2: (((0, 1),),),
    4: (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))),
}


def _perfect_matchings(m: int):
    if m in _MATCHINGS:
        return _MATCHINGS[m]
    if m % 2 or m < 2:
        return ()
    out = []
    rest = _perfect_matchings(m - 2)

    def rec(avail, acc):
        if not avail:
            out.append(tuple(acc))
            return
        a = avail[0]
        for k in range(1, len(avail)):
            b = avail[k]
            acc.append((a, b))
            rec(avail[1:k] + avail[k + 1:], acc)
            acc.pop()

    rec(tuple(range(m)), [])
    _MATCHINGS[m] = tuple(out)
    return _MATCHINGS[m]


def _matchings_sum(A: np.ndarray, sets_arr: np.ndarray) -> np.ndarray:
    """Sum over perfect matchings of the product of pair entries, for each
    row of index sets."""
    m = sets_arr.shape[1]
    out = np.zeros(sets_arr.shape[0])
    for matching in _perfect_matchings(m):
        term = np.ones(sets_arr.shape[0])
        for a, b in matching:
            term *= A[sets_arr[:, a], sets_arr[:, b]]
        out += term
    return out


def _values_size4(A: np.ndarray, sets_arr: np.ndarray) -> np.ndarray:
    """Three matchings minus twice the one-hub star sum."""
    n = A.shape[0]
    vals = _matchings_sum(A, sets_arr)
    i, j, k, l = (sets_arr[:, c] for c in range(4))
    star = np.einsum("ia,ia->i", A[i] * A[j], A[k] * A[l])
    return vals - 2.0 * star


def _values_size6(A: np.ndarray, sets_arr: np.ndarray) -> np.ndarray:
    """Fifteen matchings, minus twice star-times-pair over the fifteen
    (4,2) splits, minus twenty-four times the one-hub star, plus four times
    the two-hub tree sum over the ten (3,3) splits."""
    n = A.shape[0]
    n_sets = sets_arr.shape[0]
    vals = _matchings_sum(A, sets_arr)
    pr = _pair_ranks(n)
    pairs = np.array(list(itertools.combinations(range(n), 2)),
                     dtype=np.int64)
    P2 = A[pairs[:, 0]] * A[pairs[:, 1]]  # (C(n,2), n)
    B2 = P2 @ P2.T  # dots of pair rows: star sums over one hub
    # (4,2) splits: positions of the detached pair
    for pa, pb in itertools.combinations(range(6), 2):
        quad = [c for c in range(6) if c not in (pa, pb)]
        q0, q1, q2, q3 = (sets_arr[:, c] for c in quad)
        star4 = B2[pr[q0, q1], pr[q2, q3]]
        vals -= 2.0 * star4 * A[sets_arr[:, pa], sets_arr[:, pb]]
    del B2
    triples = np.array(list(itertools.combinations(range(n), 3)),
                       dtype=np.int64)
    P3 = A[triples[:, 0]] * A[triples[:, 1]] * A[triples[:, 2]]
    tr = _triple_ranks(n)

    def triple_rank_rows(cols):
        key = sets_arr[:, sorted(cols)]
        return tr[key[:, 0], key[:, 1], key[:, 2]]

    # two hubs joined by one edge ((3,3) splits), and the one-hub star as
    # the dot of complementary triple rows
    use_gram = P3.shape[0] ** 2 * 8 <= _GEMM_BUDGET_BYTES
    B1 = (P3 @ A @ P3.T) if use_gram else None
    r_left = triple_rank_rows((0, 1, 2))
    r_right = triple_rank_rows((3, 4, 5))
    vals -= 24.0 * np.einsum("ia,ia->i", P3[r_left], P3[r_right])
    for cols in itertools.combinations(range(6), 3):
        if 0 not in cols:
            continue  # unordered splits: keep position 0 on the left
        other = tuple(c for c in range(6) if c not in cols)
        rl = triple_rank_rows(cols)
        rr = triple_rank_rows(other)
        if use_gram:
            vals += 4.0 * B1[rl, rr]
        else:
            chunk = max(1, int(2e7) // n)
            for lo in range(0, n_sets, chunk):
                hi = min(n_sets, lo + chunk)
                X = P3[rl[lo:hi]] @ A
                vals[lo:hi] += 4.0 * np.einsum("ia,ia->i", X, P3[rr[lo:hi]])
    return vals


def _value_single(A: np.ndarray, S: tuple) -> float:
    """Closed forms for one set of size 2/4/6; forest sum otherwise."""
    m = len(S)
    if m == 0:
        return 1.0
    if m == 2:
        return float(A[S[0], S[1]])
    if m == 4:
        i, j, k, l = S
        val = (A[i, j] * A[k, l] + A[i, k] * A[j, l] + A[i, l] * A[j, k])
        val -= 2.0 * float(np.dot(A[i] * A[j], A[k] * A[l]))
        return float(val)
    if m == 6:
        rows = A[list(S)]
        val = 0.0
        for matching in _perfect_matchings(6):
            term = 1.0
            for a, b in matching:
                term *= A[S[a], S[b]]
            val += term
        for pa, pb in itertools.combinations(range(6), 2):
            quad = [c for c in range(6) if c not in (pa, pb)]
            star4 = float(np.dot(rows[quad[0]] * rows[quad[1]],
                                 rows[quad[2]] * rows[quad[3]]))
            val -= 2.0 * star4 * A[S[pa], S[pb]]
        val -= 24.0 * float(rows.prod(axis=0).sum())
        for cols in itertools.combinations(range(6), 3):
            if 0 not in cols:
                continue
            other = [c for c in range(6) if c not in cols]
            u = rows[list(cols)].prod(axis=0)
            w = rows[other].prod(axis=0)
            val += 4.0 * float(u @ A @ w)
        return float(val)
    return sum(f.mu() * cgs(f, A, S) for f in enumerate_good_forests(m))


# ---------------------------------------------------------------------------
# pseudoexpectation container


PROVENANCES = ("extension", "laurent_closed_form", "degree6_lowrank",
               "identity", "custom")


def _set_mask(S) -> int:
    mask = 0
    for i in S:
        mask |= 1 << int(i)
    return mask


class Pseudoexpectation:
    """Linear functional on polynomials of degree <= 2d over the hypercube:
    values live on even-size index sets, multisets reduce by removing index
    pairs, odd supports vanish. Values are computed lazily, either one set
    at a time or in bulk per size."""

    def __init__(self, n: int, degree: int, provenance: str,
                 values: dict | None = None, set_value_fn=None,
                 bulk_fill_fn=None):
        if degree % 2 or degree < 0:
            raise ValueError("degree must be even and nonnegative")
        if provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {provenance!r}")
        self.n = int(n)
        self.degree = int(degree)
        self.provenance = provenance
        self._set_fn = set_value_fn
        self._bulk_fn = bulk_fill_fn
        self._dict: dict[tuple, float] = {(): 1.0}
        self._bulk: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._combined: tuple[np.ndarray, np.ndarray] | None = None
        for S, v in (values or {}).items():
            S = tuple(sorted(int(i) for i in S))
            if len(set(S)) != len(S):
                raise ValueError(f"value key {S} repeats an index")
            if len(S) % 2:
                raise ValueError(f"value key {S} has odd size")
            if len(S) > self.degree:
                raise ValueError(f"value key {S} exceeds the degree")
            self._dict[S] = float(v)
        if abs(self._dict[()] - 1.0) > 0:
            raise ValueError("the empty set must map to 1")

    # -- storage ------------------------------------------------------------

    def ensure_size(self, size: int) -> None:
        """Bulk-fill every set of one size (ascending-combination order,
        keyed by bitmask)."""
        if size % 2 or size > self.degree:
            raise ValueError("sizes are even and at most the degree")
        if size in self._bulk or size == 0:
            return
        if self.n > 64:
            raise ValueError("bulk value tables require n <= 64")
        if self._bulk_fn is None:
            raise ValueError("this pseudoexpectation has no bulk filler")
        vals = np.asarray(self._bulk_fn(size), dtype=np.float64)
        if vals.shape != (math.comb(self.n, size),):
            raise AssertionError("bulk filler returned a bad shape")
        keys = np.array([_set_mask(S) for S in
                         itertools.combinations(range(self.n), size)],
                        dtype=np.uint64)
        order = np.argsort(keys)
        self._bulk[size] = (keys[order], vals[order])
        self._combined = None

    def _combined_table(self):
        if self._combined is None:
            sizes = sorted(self._bulk)
            keys = np.concatenate(
                [np.array([np.uint64(0)])] + [self._bulk[s][0]
                                              for s in sizes])
            vals = np.concatenate(
                [np.array([1.0])] + [self._bulk[s][1] for s in sizes])
            order = np.argsort(keys)
            self._combined = (keys[order], vals[order])
        return self._combined

    def lookup_masks(self, masks: np.ndarray) -> np.ndarray:
        """Vectorized value lookup by set bitmask; odd-size masks give 0,
        every even-size mask must belong to a bulk-filled size."""
        keys, vals = self._combined_table()
        masks = np.asarray(masks, dtype=np.uint64)
        out = np.zeros(masks.shape)
        even = (np.bitwise_count(masks) % 2) == 0
        queries = masks[even]
        idx = np.searchsorted(keys, queries)
        if (idx >= keys.shape[0]).any() or (keys[idx] != queries).any():
            raise KeyError("mask query outside the filled value table")
        out[even] = vals[idx]
        return out

    def value_on_set(self, S) -> float:
        S = tuple(sorted(int(i) for i in S))
        if len(set(S)) != len(S):
            raise ValueError("value_on_set takes a set (no repeats)")
        if len(S) % 2:
            return 0.0
        if len(S) > self.degree:
            raise ValueError(
                f"set size {len(S)} exceeds degree {self.degree}")
        if any(i < 0 or i >= self.n for i in S):
            raise ValueError("index out of range")
        size = len(S)
        if size in self._bulk:
            keys, vals = self._bulk[size]
            mask = np.uint64(_set_mask(S))
            k = int(np.searchsorted(keys, mask))
            return float(vals[k])
        if S in self._dict:
            return self._dict[S]
        if self._set_fn is None:
            raise KeyError(f"no value stored for {S}")
        v = float(self._set_fn(S))
        self._dict[S] = v
        return v

    def evaluate(self, monomial) -> float:
        """Reduce the multiset modulo the hypercube ideal (drop index
        pairs), then look up; odd supports give zero."""
        if not isinstance(monomial, MonomialIndex):
            monomial = MonomialIndex(monomial)
        reduced = monomial.reduce_pairs()
        if reduced.size > self.degree:
            raise ValueError(
                f"reduced degree {reduced.size} exceeds {self.degree}")
        if reduced.size % 2:
            return 0.0
        return self.value_on_set(reduced.values)

    def materialize(self) -> None:
        """Force every value up to the degree into storage."""
        for size in range(2, self.degree + 1, 2):
            if size in self._bulk:
                continue
            if self._bulk_fn is not None and self.n <= 64:
                self.ensure_size(size)
            else:
                for S in itertools.combinations(range(self.n), size):
                    self.value_on_set(S)

    def known_values(self) -> dict[tuple, float]:
        """Everything materialized so far (bulk sizes expanded)."""
        out = dict(self._dict)
        for size, (keys, vals) in self._bulk.items():
            for mask, v in zip(keys.tolist(), vals.tolist()):
                S = tuple(i for i in range(self.n) if (mask >> i) & 1)
                out[S] = v
        return out

    def __repr__(self):
        return (f"Pseudoexpectation(n={self.n}, degree={self.degree}, "
                f"provenance={self.provenance!r})")


def identity_pseudoexpectation(n: int, degree: int) -> Pseudoexpectation:
    """Moments of the uniform measure on the hypercube."""
    return Pseudoexpectation(
        n, degree, "identity",
        set_value_fn=lambda S: 1.0 if not S else 0.0,
        bulk_fill_fn=lambda size: np.zeros(math.comb(n, size)))


# ---------------------------------------------------------------------------
# the extension


def _check_unit_diagonal(A: np.ndarray) -> None:
    resid = float(np.abs(np.diag(A) - 1.0).max())
    if resid > 1e-10:
        raise ValueError(
            f"extension requires a unit diagonal (residual {resid:.2e})")


def extend(M, d: int) -> Pseudoexpectation:
    """Pseudoexpectation with degree-2 values M: on each even set, the
    Mobius-weighted sum of forest contractions."""
    A = M.matrix if isinstance(M, DegreeTwoInput) else \
        np.asarray(M, dtype=np.float64)
    _check_unit_diagonal(A)
    n = A.shape[0]
    if 2 * d > MAX_LEAVES_DEFAULT:
        raise ValueError(
            f"degree 2d={2 * d} exceeds the forest cap "
            f"{MAX_LEAVES_DEFAULT}")

    def bulk(size: int) -> np.ndarray:
        sets_arr = np.array(
            list(itertools.combinations(range(n), size)), dtype=np.int64)
        if size == 2:
            return A[sets_arr[:, 0], sets_arr[:, 1]].copy()
        if size == 4:
            return _values_size4(A, sets_arr)
        if size == 6:
            return _values_size6(A, sets_arr)
        vals = np.zeros(sets_arr.shape[0])
        for f in enumerate_good_forests(size):
            vals += f.mu() * cgs_batch(f, A, sets_arr)
        return vals

    return Pseudoexpectation(
        n, 2 * d, "extension",
        set_value_fn=lambda S: _value_single(A, S),
        bulk_fill_fn=bulk)


def main_value(M, s) -> float:
    """Forest-contraction sum on a multiset, repeats kept (no ideal
    reduction)."""
    A = _as_matrix(M)
    s = tuple(sorted(int(x) for x in s))
    if len(s) % 2:
        return 0.0
    return sum(f.mu() * cgs(f, A, s) for f in enumerate_good_forests(len(s)))


def err_value(M, s) -> float:
    """Negated Mobius-weighted sum of loose contraction parts; equals the
    reduced value minus the main value."""
    A = _as_matrix(M)
    s = tuple(sorted(int(x) for x in s))
    if len(s) % 2:
        return 0.0
    return -sum(f.mu() * delta(f, A, s)
                for f in enumerate_good_forests(len(s)))


# ---------------------------------------------------------------------------
# pseudomoment matrices


@dataclass
class PseudomomentMatrix:
    basis: str
    degree: int
    sets: tuple
    matrix: np.ndarray
    _eigs: np.ndarray | None = field(default=None, repr=False)

    def _offsets(self):
        out = {}
        for idx, S in enumerate(self.sets):
            out.setdefault(len(S), [idx, idx + 1])[1] = idx + 1
        return out

    def block(self, row_size: int, col_size: int) -> np.ndarray:
        off = self._offsets()
        r = off[row_size]
        c = off[col_size]
        return self.matrix[r[0]:r[1], c[0]:c[1]]

    def block_norms(self) -> dict:
        off = self._offsets()
        out = {}
        for l in off:
            for m in off:
                out[(l, m)] = sym_op_norm(self.block(l, m)) if l == m \
                    else float(np.linalg.norm(self.block(l, m), 2))
        return out

    @property
    def side(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        if self._eigs is None:
            self._eigs = np.linalg.eigvalsh(self.matrix)
        return self._eigs

    @property
    def min_eig(self) -> float:
        return float(self.eigenvalues()[0])


def _monomial_matrix(E: Pseudoexpectation, d: int,
                     max_side: int) -> PseudomomentMatrix:
    n = E.n
    if n > 64:
        raise ValueError("monomial assembly is limited to n <= 64")
    sets = degree_sets(n, d)
    side = len(sets)
    if side > max_side:
        raise ValueError(f"matrix side {side} exceeds the guard {max_side}")
    for size in range(0, 2 * d + 1, 2):
        E.ensure_size(size)
    masks = np.array([_set_mask(S) for S in sets], dtype=np.uint64)
    Z = np.empty((side, side))
    chunk = max(1, int(4e6) // max(side, 1))
    for lo in range(0, side, chunk):
        hi = min(side, lo + chunk)
        X = masks[lo:hi, None] ^ masks[None, :]
        Z[lo:hi] = E.lookup_masks(X.ravel()).reshape(hi - lo, side)
    return PseudomomentMatrix("monomial", d, tuple(sets), Z)


def _multiharmonic_matrix(E: Pseudoexpectation, M, d: int,
                          max_side: int) -> PseudomomentMatrix:
    A = M.matrix if isinstance(M, DegreeTwoInput) else \
        np.asarray(M, dtype=np.float64)
    n = E.n
    sets = degree_sets(n, d)
    side = len(sets)
    if side > max_side:
        raise ValueError(f"matrix side {side} exceeds the guard {max_side}")
    polys = [harmonic_polynomial(S, A) for S in sets]
    Z = np.zeros((side, side))
    for i in range(side):
        pi = polys[i]
        for j in range(i, side):
            prod = pi * polys[j]
            tot = 0.0
            for alpha, coeff in prod.coeffs.items():
                support = tuple(k for k, e in enumerate(alpha) if e % 2)
                if len(support) % 2:
                    continue
                tot += coeff * E.value_on_set(support)
            Z[i, j] = Z[j, i] = tot
    return PseudomomentMatrix("multiharmonic", d, tuple(sets), Z)


def pseudomoment_matrix(E: Pseudoexpectation, basis: str = "monomial",
                        M=None, d: int | None = None,
                        max_side: int = 6000) -> PseudomomentMatrix:
    """Matrix of values on products of basis polynomials, over all index
    sets of size at most d."""
    if d is None:
        d = E.degree // 2
    if 2 * d > E.degree:
        raise ValueError("matrix degree exceeds the pseudoexpectation's")
    if basis == "monomial":
        return _monomial_matrix(E, d, max_side)
    if basis == "multiharmonic":
        if M is None:
            raise ValueError("the multiharmonic basis needs the degree-2 "
                             "input")
        return _multiharmonic_matrix(E, M, d, max_side)
    raise ValueError(f"unknown basis {basis!r}")


def z_main_stretched(M, d: int, max_side: int = 6000) -> PseudomomentMatrix:
    """Main-term matrix in the multiharmonic basis, assembled purely from
    stretched two-row forest contractions."""
    A = _as_matrix(M)
    n = A.shape[0]
    sets = degree_sets(n, d)
    side = len(sets)
    if side > max_side:
        raise ValueError(f"matrix side {side} exceeds the guard {max_side}")
    by_size: dict[int, list] = {}
    for S in sets:
        by_size.setdefault(len(S), []).append(S)
    offsets = {}
    pos = 0
    for size in sorted(by_size):
        offsets[size] = pos
        pos += len(by_size[size])
    Z = np.zeros((side, side))
    for l, left in by_size.items():
        for m, right in by_size.items():
            if (l + m) % 2:
                continue
            block = np.zeros((len(left), len(right)))
            for rib in stretched_forests(l, m):
                block += rib.mu() * cgm_entries(rib, A, left, right)
            Z[offsets[l]:offsets[l] + len(left),
              offsets[m]:offsets[m] + len(right)] = block
    return PseudomomentMatrix("multiharmonic", d, tuple(sets), Z)


# ---------------------------------------------------------------------------
# certification


@dataclass
class CertificationReport:
    normalization_ok: bool
    normalization_residual: float
    ideal_ok: bool
    ideal_residual: float
    ideal_checks: int
    symmetry_ok: bool
    symmetry_residual: float
    psd_ok: bool
    min_eigenvalue: float | None
    matrix_norm: float
    tolerance: float
    basis: str
    method: str
    matrix_side: int

    @property
    def ok(self) -> bool:
        return (self.normalization_ok and self.ideal_ok
                and self.symmetry_ok and self.psd_ok)

    def to_json_dict(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "normalization_ok", "normalization_residual", "ideal_ok",
            "ideal_residual", "ideal_checks", "symmetry_ok",
            "symmetry_residual", "psd_ok", "min_eigenvalue", "matrix_norm",
            "tolerance", "basis", "method", "matrix_side")}
        out["ok"] = self.ok
        return out


def _power_iteration_norm(Z: np.ndarray, iters: int = 60,
                          seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(Z.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = Z @ v
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
    return lam


def _symmetry_residual(Z: np.ndarray) -> float:
    side = Z.shape[0]
    chunk = max(1, int(2e7) // max(side, 1))
    worst = 0.0
    for lo in range(0, side, chunk):
        hi = min(side, lo + chunk)
        worst = max(worst, float(
            np.abs(Z[lo:hi, :] - Z[:, lo:hi].T).max()))
    return worst


def certify(E: Pseudoexpectation, M=None, basis: str = "monomial",
            tol: float = 1e-8, d: int | None = None,
            dense_eig_limit: int = 6000, max_side: int = 1_000_000,
            ideal_samples: int = 200, seed: int = 0,
            matrix: PseudomomentMatrix | None = None) -> CertificationReport:
    """Check normalization, ideal annihilation (spot checks, exhaustive for
    n <= 4), symmetry, and positive semidefiniteness of the chosen-basis
    pseudomoment matrix. Positivity uses a dense eigensolve up to
    dense_eig_limit and otherwise a Cholesky witness for
    min eigenvalue >= -tol * norm."""
    norm_resid = abs(E.evaluate(()) - 1.0)
    rng = np.random.default_rng(seed)
    worst_ideal = 0.0
    checks = 0
    if E.n <= 4:
        small_sets = [S for S in degree_sets(E.n, E.degree)
                      if len(S) % 2 == 0]
        for S in small_sets:
            for i in range(E.n):
                lhs = E.evaluate(tuple(S) + (i, i))
                rhs = E.evaluate(S)
                worst_ideal = max(worst_ideal, abs(lhs - rhs))
                checks += 1
    for _ in range(ideal_samples):
        size = 2 * int(rng.integers(0, E.degree // 2 + 1))
        S = tuple(sorted(rng.choice(E.n, size=size, replace=False))) \
            if size else ()
        i = int(rng.integers(E.n))
        reps = 2 * int(rng.integers(1, 3))
        lhs = E.evaluate(tuple(S) + (i,) * reps)
        rhs = E.evaluate(S)
        worst_ideal = max(worst_ideal, abs(lhs - rhs))
        checks += 1
    if matrix is None:
        matrix = pseudomoment_matrix(E, basis=basis, M=M, d=d,
                                     max_side=max_side)
    Z = matrix.matrix
    sym_resid = _symmetry_residual(Z)
    side = Z.shape[0]
    if side <= dense_eig_limit:
        w = np.linalg.eigvalsh((Z + Z.T) / 2)
        min_eig = float(w[0])
        z_norm = float(max(abs(w[0]), abs(w[-1])))
        psd_ok = min_eig >= -tol * max(1.0, z_norm)
        method = "dense_eigensolve"
    else:
        z_norm = _power_iteration_norm(Z, seed=seed)
        shifted = (Z + Z.T) / 2
        shifted[np.diag_indices(side)] += tol * max(1.0, z_norm)
        try:
            from scipy.linalg import cholesky
            cholesky(shifted, lower=True, overwrite_a=True,
                     check_finite=False)
            psd_ok = True
        except Exception:
            psd_ok = False
        min_eig = None
        method = "cholesky_witness"
    return CertificationReport(
        normalization_ok=norm_resid == 0.0,
        normalization_residual=float(norm_resid),
        ideal_ok=worst_ideal == 0.0,
        ideal_residual=float(worst_ideal),
        ideal_checks=checks,
        symmetry_ok=sym_resid <= tol,
        symmetry_residual=sym_resid,
        psd_ok=bool(psd_ok),
        min_eigenvalue=min_eig,
        matrix_norm=z_norm,
        tolerance=tol,
        basis=matrix.basis,
        method=method,
        matrix_side=side)


# ---------------------------------------------------------------------------
# degree-6 low-rank variant


def extend_degree6_lowrank(M, t_pow: float,
                           constant: float = 250.0) -> Pseudoexpectation:
    """Degree-6 pseudoexpectation for inputs whose second Hadamard power is
    near a rank-one shift: the plain extension plus a pair-forest
    correction contracted with the matrix square, mixed toward the uniform
    moments with weight c computed from the stated budget formula."""
    from .incoherence import adjustment_weight
    Min = M if isinstance(M, DegreeTwoInput) else DegreeTwoInput(M)
    A = Min.matrix
    _check_unit_diagonal(A)
    n = Min.n
    if t_pow < 0:
        raise ValueError("t_pow must be nonnegative")
    A2 = A @ A
    c = adjustment_weight(Min, t_pow, constant=constant)
    if c >= 1.0:
        raise ConstructionError(
            f"adjustment weight c={c:.4g} >= 1; the input is outside the "
            f"low-rank construction's budget")

    def pairs_single(S: tuple) -> float:
        if len(S) not in (4, 6):
            return 0.0
        tot = 0.0
        for matching in _perfect_matchings(len(S)):
            term = 1.0
            for a, b in matching:
                term *= A2[S[a], S[b]]
            tot += term
        return tot

    def set_fn(S: tuple) -> float:
        base = _value_single(A, S)
        v = (1.0 - c) * (base + 2.0 * t_pow * pairs_single(S))
        if not S:
            v += c
        return v

    def bulk(size: int) -> np.ndarray:
        sets_arr = np.array(
            list(itertools.combinations(range(n), size)), dtype=np.int64)
        if size == 2:
            base = A[sets_arr[:, 0], sets_arr[:, 1]].astype(np.float64)
        elif size == 4:
            base = _values_size4(A, sets_arr)
        elif size == 6:
            base = _values_size6(A, sets_arr)
        else:
            raise ValueError("degree-6 construction fills sizes 2, 4, 6")
        if size in (4, 6):
            base = base + 2.0 * t_pow * _matchings_sum(A2, sets_arr)
        return (1.0 - c) * base

    E = Pseudoexpectation(n, 6, "degree6_lowrank", set_value_fn=set_fn,
                          bulk_fill_fn=bulk)
    E.adjustment_weight = c
    return E


# ---------------------------------------------------------------------------
# serialization


def pseudoexpectation_to_json(E: Pseudoexpectation,
                              max_values: int = 5_000_000) -> str:
    total = sum(math.comb(E.n, s) for s in range(0, E.degree + 1, 2))
    if total > max_values:
        raise ValueError("value table too large to serialize")
    E.materialize()
    vals = E.known_values()
    payload = {
        "schema": "momentforge.pseudoexpectation.v1",
        "n": E.n,
        "degree": E.degree,
        "provenance": E.provenance,
        "values": {",".join(map(str, S)): v
                   for S, v in sorted(vals.items())},
    }
    return json.dumps(payload, indent=1)


def pseudoexpectation_from_json(text: str) -> Pseudoexpectation:
    payload = json.loads(text)
    if payload.get("schema") != "momentforge.pseudoexpectation.v1":
        raise ValueError("unrecognized schema")
    values = {}
    for key, v in payload["values"].items():
        S = tuple(int(x) for x in key.split(",")) if key else ()
        values[S] = float(v)
    prov = payload["provenance"]
    if prov not in PROVENANCES:
        prov = "custom"
    return Pseudoexpectation(int(payload["n"]), int(payload["degree"]),
                             prov, values=values)
