"""Incoherence quantities of a unit-diagonal symmetric matrix: entry and
correlation maxima, Hadamard-power spectral norms, tree-contraction and
loose-sum maxima over index tuples, and evaluation of the extension
theorems' hypotheses at degree 2d and in the degree-6 low-rank regime."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .cgraph import DegreeTwoInput, _as_matrix, cgs_batch, delta_batch
from .forests import enumerate_good_forests

_DENSE_NORM_LIMIT = 2048
_EXACT_TUPLE_LIMIT = 10_000_000
_DEFAULT_SAMPLES = 10_000


def _op_norm_sym(B: np.ndarray) -> float:
    if B.shape[0] <= _DENSE_NORM_LIMIT:
        w = np.linalg.eigvalsh(B)
        return float(max(abs(w[0]), abs(w[-1])))
    from scipy.sparse.linalg import eigsh
    val = eigsh(B, k=1, which="LM", return_eigenvectors=False,
                maxiter=5000)
    return float(abs(val[0]))


def eps_offdiag(M) -> float:
    """Largest off-diagonal entry in absolute value."""
    A = _as_matrix(M)
    if A.shape[0] < 2:
        return 0.0
    off = A - np.diag(np.diag(A))
    return float(np.abs(off).max())


def eps_corr(M) -> float:
    """Square root of the largest off-diagonal entry of the Gram matrix of
    squared rows."""
    A = _as_matrix(M)
    if A.shape[0] < 2:
        return 0.0
    A2 = A * A
    B = A2 @ A2.T
    B -= np.diag(np.diag(B))
    return float(np.sqrt(max(B.max(), 0.0)))


def eps_pow(M, k_cap: int = 40) -> float:
    """Largest spectral norm of a Hadamard power minus the identity, over
    powers k >= 2.

    Powers are scanned up to k_cap; the scan stops early once the
    Gershgorin bound N * eps_offdiag^k certifies that later powers cannot
    exceed the maximum found. If the entries do not decay (eps_offdiag
    >= 1) the cap itself truncates the scan."""
    A = _as_matrix(M)
    n = A.shape[0]
    off = eps_offdiag(A)
    P = A.copy()
    best = 0.0
    for k in range(2, k_cap + 1):
        P = P * A
        best = max(best, _op_norm_sym(P - np.eye(n)))
        if off < 1.0 and n * off ** (k + 1) <= best:
            break
    return best


def eps_pow_tilde(M, t_pow: float, k_cap: int = 40) -> float:
    """Variant of eps_pow whose k=2 term subtracts a rank-one shift
    t_pow * ones*ones^T before taking the norm."""
    A = _as_matrix(M)
    n = A.shape[0]
    off = eps_offdiag(A)
    best = _op_norm_sym(A * A - np.eye(n)
                        - t_pow * np.ones((n, n)))
    P = A * A
    for k in range(3, k_cap + 1):
        P = P * A
        best = max(best, _op_norm_sym(P - np.eye(n)))
        if off < 1.0 and n * off ** (k + 1) <= best:
            break
    return best


# ---------------------------------------------------------------------------
# tuple maxima


def _good_trees(m: int):
    return [f for f in enumerate_good_forests(m) if f.is_tree()]


def _all_tuples_chunks(n: int, m: int, chunk: int = 200_000):
    total = n ** m
    shape = (n,) * m
    for lo in range(0, total, chunk):
        hi = min(total, lo + chunk)
        yield np.stack(np.unravel_index(np.arange(lo, hi), shape),
                       axis=1).astype(np.int64)


def _distinct_rows(rng, n: int, m: int, k: int) -> np.ndarray:
    if m > n:
        return np.empty((0, m), dtype=np.int64)
    if n <= 64:
        scores = rng.random((k, n))
        return np.argsort(scores, axis=1)[:, :m].astype(np.int64)
    rows = rng.integers(0, n, size=(k, m), dtype=np.int64)
    ok = (np.sort(rows, axis=1)[:, 1:] != np.sort(rows, axis=1)[:, :-1]) \
        .all(axis=1)
    rows = rows[ok]
    while rows.shape[0] < k:
        extra = rng.integers(0, n, size=(k, m), dtype=np.int64)
        s = np.sort(extra, axis=1)
        extra = extra[(s[:, 1:] != s[:, :-1]).all(axis=1)]
        rows = np.vstack([rows, extra])
    return rows[:k]


def _structured_tuples(rng, n: int, m: int, samples: int) -> np.ndarray:
    """All-equal tuples, plus sampled all-distinct, one-repeat, and
    uniform tuples."""
    parts = [np.repeat(np.arange(min(n, samples), dtype=np.int64),
                       m).reshape(-1, m)]
    k = max(samples // 4, 1)
    if m <= n:
        parts.append(_distinct_rows(rng, n, m, k))
    if m >= 2 and m - 1 <= n:
        base = _distinct_rows(rng, n, m - 1, k)
        if base.shape[0]:
            rep = np.concatenate([base, base[:, :1]], axis=1)
            parts.append(rng.permuted(rep, axis=1))
    parts.append(rng.integers(0, n, size=(samples, m), dtype=np.int64))
    return np.vstack(parts)


def _tree_max(A: np.ndarray, tree, tuples: np.ndarray) -> float:
    vals = cgs_batch(tree, A, tuples)
    const = (tuples == tuples[:, :1]).all(axis=1)
    return float(np.abs(vals - const.astype(np.float64)).max())


def _err_max(A: np.ndarray, tree, tuples: np.ndarray) -> float:
    n = A.shape[0]
    vals = delta_batch(tree, A, tuples)
    srt = np.sort(tuples, axis=1)
    distinct = 1 + (srt[:, 1:] != srt[:, :-1]).sum(axis=1)
    return float((np.abs(vals)
                  * float(n) ** (distinct / 2.0)).max())


def _tuple_scan(M, cap: int, per_tuple, mode: str, samples: int,
                seed: int) -> tuple[float, str, int]:
    """Maximize a per-batch statistic over trees with up to cap leaves and
    index tuples, exactly or on structured samples."""
    A = _as_matrix(M)
    n = A.shape[0]
    if mode == "auto":
        mode = "exact" if n ** max(cap, 1) <= _EXACT_TUPLE_LIMIT \
            else "sampled"
    if mode not in ("exact", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    best = 0.0
    count = 0
    for m in range(2, cap + 1, 2):
        trees = _good_trees(m)
        if mode == "exact":
            for chunk in _all_tuples_chunks(n, m):
                count += chunk.shape[0]
                for tree in trees:
                    best = max(best, per_tuple(A, tree, chunk))
        else:
            tuples = _structured_tuples(rng, n, m, samples)
            count += tuples.shape[0]
            for tree in trees:
                best = max(best, per_tuple(A, tree, tuples))
    return best, mode, count


def eps_tree(M, cap: int, mode: str = "auto",
             samples: int = _DEFAULT_SAMPLES, seed: int = 0) -> float:
    """Largest deviation of a tree contraction from the all-equal
    indicator, over good trees with at most cap leaves."""
    return _tuple_scan(M, cap, _tree_max, mode, samples, seed)[0]


def eps_err(M, cap: int, mode: str = "auto",
            samples: int = _DEFAULT_SAMPLES, seed: int = 0) -> float:
    """Largest loose contraction sum weighted by N^(distinct/2), over good
    trees with at most cap leaves."""
    return _tuple_scan(M, cap, _err_max, mode, samples, seed)[0]


# ---------------------------------------------------------------------------
# reports


@dataclass
class IncoherenceReport:
    eps_offdiag: float
    eps_corr: float
    eps_pow: float
    eps_tree: float
    eps_err: float
    eps_total: float
    eps_tree_mode: str
    eps_tree_samples: int
    eps_err_mode: str
    eps_err_samples: int
    degree: int
    thm_condition_lhs: float
    thm_condition_rhs: float
    verdict: bool

    def to_json_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def to_json(self) -> str:
        return json.dumps(
            {"schema": "momentforge.incoherence.v1",
             **self.to_json_dict()}, indent=1)


def check_theorem1(M, degree: int, mode: str = "auto",
                   samples: int = _DEFAULT_SAMPLES, k_cap: int = 40,
                   seed: int = 0) -> IncoherenceReport:
    """Evaluate the degree-2d extension hypothesis: the minimum eigenvalue
    against (12d)^32 * norm^5 * eps^(1/d), with eps the sum of the five
    incoherence quantities (tree maxima capped at d leaves, loose-sum
    maxima at 2d)."""
    if degree % 2 or degree < 2:
        raise ValueError("degree must be even and at least 2")
    Min = M if isinstance(M, DegreeTwoInput) \
        else DegreeTwoInput(M, allow_indefinite=True)
    d = degree // 2
    e_off = eps_offdiag(Min.matrix)
    e_corr = eps_corr(Min.matrix)
    e_pow = eps_pow(Min.matrix, k_cap=k_cap)
    e_tree, tree_mode, tree_count = _tuple_scan(
        Min.matrix, d, _tree_max, mode, samples, seed)
    e_err, err_mode, err_count = _tuple_scan(
        Min.matrix, degree, _err_max, mode, samples, seed)
    total = e_off + e_corr + e_pow + e_tree + e_err
    lhs = Min.min_eig
    rhs = (12.0 * d) ** 32 * Min.op_norm ** 5 * total ** (1.0 / d)
    return IncoherenceReport(
        eps_offdiag=e_off, eps_corr=e_corr, eps_pow=e_pow,
        eps_tree=e_tree, eps_err=e_err, eps_total=total,
        eps_tree_mode=tree_mode, eps_tree_samples=tree_count,
        eps_err_mode=err_mode, eps_err_samples=err_count,
        degree=degree, thm_condition_lhs=lhs, thm_condition_rhs=rhs,
        verdict=bool(lhs >= rhs))


@dataclass
class Degree6Report:
    eps_offdiag: float
    eps_pow_tilde: float
    eps_err: float
    eps_err_mode: str
    eps_err_samples: int
    eps_tilde_total: float
    t_pow: float
    c: float
    thm_condition_lhs: float
    thm_condition_rhs: float
    verdict: bool

    def to_json_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def to_json(self) -> str:
        return json.dumps(
            {"schema": "momentforge.degree6.v1",
             **self.to_json_dict()}, indent=1)


def adjustment_weight(M, t_pow: float, constant: float = 250.0) -> float:
    """Mixing weight toward the uniform moments in the degree-6 low-rank
    construction."""
    Min = M if isinstance(M, DegreeTwoInput) \
        else DegreeTwoInput(M, allow_indefinite=True)
    A = Min.matrix
    n = Min.n
    A2 = A @ A
    off2 = eps_offdiag(A2)
    return constant * t_pow * (
        Min.op_norm ** 6 * float(np.linalg.norm(A2, "fro"))
        + n * off2 + n ** 2 * off2 ** 3)


def check_theorem_deg6(M, t_pow: float, mode: str = "auto",
                       samples: int = _DEFAULT_SAMPLES, k_cap: int = 40,
                       seed: int = 0,
                       constant: float = 250.0) -> Degree6Report:
    """Evaluate the degree-6 low-rank hypothesis: the minimum eigenvalue
    against 10^50 * norm^5 * eps_tilde^(1/3), where eps_tilde replaces the
    second Hadamard power's norm with the rank-one-shifted version and
    scales the loose-sum maximum by N^(-1/2)."""
    Min = M if isinstance(M, DegreeTwoInput) \
        else DegreeTwoInput(M, allow_indefinite=True)
    n = Min.n
    e_off = eps_offdiag(Min.matrix)
    e_powt = eps_pow_tilde(Min.matrix, t_pow, k_cap=k_cap)
    e_err, err_mode, err_count = _tuple_scan(
        Min.matrix, 6, _err_max, mode, samples, seed)
    total = e_off + e_powt + e_err / math.sqrt(n)
    lhs = Min.min_eig
    rhs = 1e50 * Min.op_norm ** 5 * total ** (1.0 / 3.0)
    return Degree6Report(
        eps_offdiag=e_off, eps_pow_tilde=e_powt, eps_err=e_err,
        eps_err_mode=err_mode, eps_err_samples=err_count,
        eps_tilde_total=total, t_pow=t_pow,
        c=adjustment_weight(Min, t_pow, constant=constant),
        thm_condition_lhs=lhs, thm_condition_rhs=rhs,
        verdict=bool(lhs >= rhs))
