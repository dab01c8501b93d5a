"""Instance generators and experiment drivers: the Laurent matrix and its
exact pseudomoments, random projector-like inputs of high and low rank,
GOE samples, and the end-to-end degree-6 run on a GOE objective.

All randomness flows through numpy's default_rng (the PCG64 generator),
so seeds are portable across platforms and releases of this package."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cgraph import DegreeTwoInput
from .extend import (ConstructionError, extend_degree6_lowrank,
                     identity_pseudoexpectation, certify,
                     pseudomoment_matrix)
from .incoherence import adjustment_weight


def laurent_matrix(N: int, alpha: float = 0.0) -> DegreeTwoInput:
    """Unit-diagonal matrix with constant off-diagonal -(1-alpha)/(N-1),
    the degree-2 moments of the near-balanced distribution on the cube."""
    if N < 2:
        raise ValueError("N must be at least 2")
    g = (1.0 - alpha) / (N - 1)
    M = (1.0 + g) * np.eye(N) - g * np.ones((N, N))
    return DegreeTwoInput(M, allow_indefinite=True)


def laurent_closed_form(N: int, S) -> float:
    """Exact pseudomoment of a squarefree monomial on distinct indices S
    under the balanced-cube functional: zero for odd |S|, and otherwise
    (-1)^(|S|/2) (|S|-1)!! / prod_{k=1}^{|S|/2} (N-2k+1).

    S may be the size itself or a collection of distinct indices."""
    if isinstance(S, (int, np.integer)):
        m = int(S)
    else:
        idx = list(S)
        if len(set(idx)) != len(idx):
            raise ValueError("S must have distinct indices")
        m = len(idx)
    if m < 0:
        raise ValueError("|S| must be nonnegative")
    if m % 2:
        return 0.0
    if m > N:
        raise ValueError("|S| cannot exceed N")
    half = m // 2
    num = math.prod(range(1, m, 2))  # (m-1)!!
    den = math.prod(N - 2 * k + 1 for k in range(1, half + 1))
    return (-1.0) ** half * num / den


def goe_sample(N: int, seed_or_rng=0) -> np.ndarray:
    """Symmetric Gaussian matrix with entry variance 1/N off the diagonal
    and 2/N on it."""
    rng = seed_or_rng if isinstance(seed_or_rng, np.random.Generator) \
        else np.random.default_rng(seed_or_rng)
    A = rng.standard_normal((N, N))
    return (A + A.T) / math.sqrt(2.0 * N)


def projector_instance(N: int, n: int, alpha: float, kind: str,
                       seed: int = 0) -> DegreeTwoInput:
    """Unit-diagonal matrix close to a scaled projector built from n
    seeded Gaussian vectors.

    kind="high": identity minus a scaled rank-n Wishart,
    M = I + D - M0 with M0 = (1-alpha/2)(1/N) sum g_i g_i^T over raw
    Gaussian g_i. kind="low": M = I - D + M0 where the g_i are confined
    to their own n-dimensional span — g_i = Q z_i with Q an orthonormal
    basis of span(g_1..g_n) and fresh z_i ~ N(0, I_n) — so that
    M0 = (1-alpha/2)(1/n) sum g_i g_i^T concentrates on
    (1-alpha/2) P_span and its diagonal stays near n/N instead of
    fluctuating at unit scale. D is the diagonal of M0, so diag(M) = 1
    exactly either way."""
    if not 1 <= n <= N:
        raise ValueError("need 1 <= n <= N")
    if not 0 <= alpha < 1:
        raise ValueError("need 0 <= alpha < 1")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((N, n))
    if kind == "high":
        M0 = (1.0 - alpha / 2.0) * (G @ G.T) / N
        M = -M0
    elif kind == "low":
        Q, _ = np.linalg.qr(G)
        Z = rng.standard_normal((n, n))
        M0 = (1.0 - alpha / 2.0) * (Q @ (Z @ Z.T) @ Q.T) / n
        M = M0.copy()
    else:
        raise ValueError(f"kind must be 'high' or 'low', got {kind!r}")
    np.fill_diagonal(M, 1.0)
    return DegreeTwoInput(M, allow_indefinite=True)


def projector_t_pow(n: int, alpha: float) -> float:
    """Rank-one shift weight matched to the low-rank projector instance:
    (1-alpha/2)^2 / n."""
    return (1.0 - alpha / 2.0) ** 2 / n


@dataclass
class SkInstance:
    """A GOE sample with its spectral decomposition, eigenvalues
    descending."""
    N: int
    seed: int
    W: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_seed(cls, N: int, seed: int) -> "SkInstance":
        W = goe_sample(N, seed)
        w, Q = np.linalg.eigh(W)
        order = np.argsort(w)[::-1]
        return cls(N=N, seed=seed, W=W, eigenvalues=w[order],
                   eigenvectors=Q[:, order])

    @classmethod
    def from_matrix(cls, W, seed: int = -1) -> "SkInstance":
        W = np.asarray(W, dtype=np.float64)
        w, Q = np.linalg.eigh((W + W.T) / 2.0)
        order = np.argsort(w)[::-1]
        return cls(N=W.shape[0], seed=seed, W=W, eigenvalues=w[order],
                   eigenvectors=Q[:, order])


sk_instance = SkInstance.from_seed


@dataclass
class InstanceConfig:
    """Declarative description of a degree-2 input for the CLI and
    experiment drivers."""
    kind: str  # laurent | projector_high_rank | projector_low_rank | goe | file
    N: int = 0
    alpha: float = 0.0
    n: int = 0
    seed: int = 0
    degree: int = 4
    t_pow: float | None = None
    path: str | None = None

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise ValueError("need 0 <= alpha < 1")

    def build(self):
        if self.kind == "laurent":
            return laurent_matrix(self.N, self.alpha)
        if self.kind == "projector_high_rank":
            return projector_instance(self.N, self.n, self.alpha,
                                      "high", self.seed)
        if self.kind == "projector_low_rank":
            return projector_instance(self.N, self.n, self.alpha,
                                      "low", self.seed)
        if self.kind == "goe":
            return sk_instance(self.N, self.seed)
        if self.kind == "file":
            M, _ = load_matrix(self.path)
            return DegreeTwoInput(M, allow_indefinite=True)
        raise ValueError(f"unknown instance kind {self.kind!r}")


def sk_run(N: int, seed: int, alpha: float = 0.1, delta: float = 0.05,
           t_pow: float | None = None, c_cap: float = 0.97,
           tol: float = 1e-6, certify_matrix: bool = True,
           max_side: int = 40_000, W=None) -> dict:
    """Degree-6 lower-bound experiment on a GOE objective.

    Builds the unit-diagonal input M whose off-diagonal part is a scaled
    rank-r Wishart confined to the top delta*N eigenspace of W (Gaussian
    vectors g_i = Q z_i with Q the top eigenvectors and z_i ~ N(0, I_r),
    as in projector_instance kind="low"), runs the degree-6 low-rank
    construction, certifies the pseudomoment matrix, and reports the
    objective <E[xx^T], W> next to the spectral bound N*lambda_max(W).

    The matched rank-one shift weight is t_pow = (1-alpha/2)^2/r; when
    the nominal adjustment weight 250*t_pow*(budget) would reach c_cap,
    t_pow is shrunk to the largest affordable value c_cap/(250*budget)
    so the construction completes with c = c_cap < 1 (the nominal value
    is still reported, and the shrink goes inactive at large N where
    the nominal c is small). A flat spectrum (W proportional to I) has
    no distinguished eigenspace, so the run falls back to the uniform
    moments (M = I). The same fallback absorbs a construction failure
    instead of raising.

    An explicit W bypasses the GOE draw (the seed still drives the
    Gaussian vectors of the construction)."""
    inst = sk_instance(N, seed) if W is None \
        else SkInstance.from_matrix(W, seed)
    lam = inst.eigenvalues
    r = max(1, int(round(delta * N)))
    out = {
        "N": N, "seed": seed, "alpha": alpha, "delta": delta, "r": r,
        "lambda_max": float(lam[0]),
        "spectral_benchmark": float(N * lam[0]),
        "eigenvalue_threshold": float(lam[r - 1]),
    }
    rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
    flat = lam[0] - lam[-1] <= 1e-12 * max(1.0, abs(lam[0]))
    construction = "identity" if flat else "lowrank"
    if not flat:
        Q = inst.eigenvectors[:, :r]
        Z_ = rng.standard_normal((r, r))
        M0 = (1.0 - alpha / 2.0) * (Q @ (Z_ @ Z_.T) @ Q.T) / r
        M = M0.copy()
        np.fill_diagonal(M, 1.0)
        Min = DegreeTwoInput(M, allow_indefinite=True)
        budget = adjustment_weight(Min, 1.0, constant=1.0)
        t_paper = projector_t_pow(r, alpha)
        if t_pow is not None:
            t_used = t_pow
        elif 250.0 * t_paper * budget >= c_cap and budget > 0:
            t_used = c_cap / (250.0 * budget)
        else:
            t_used = t_paper
        out["t_pow"] = t_used
        out["t_pow_paper"] = t_paper
        out["c_nominal"] = float(250.0 * t_paper * budget)
        out["overlap_W_M0"] = float(np.sum(inst.W * M0))
        out["min_eig_M"] = float(Min.min_eig)
        try:
            E = extend_degree6_lowrank(Min, t_used)
        except ConstructionError as exc:
            out["construction_error"] = str(exc)
            construction = "identity"
    if construction == "identity":
        E = identity_pseudoexpectation(N, 6)
        E.adjustment_weight = 0.0
        out["t_pow"] = 0.0
    c = E.adjustment_weight
    Mdeg2 = (1.0 - c) * (np.eye(N) if construction == "identity"
                         else Min.matrix) + c * np.eye(N)
    out["construction"] = construction
    out["c"] = float(c)
    out["objective"] = float(np.sum(Mdeg2 * inst.W))
    out["objective_per_N"] = out["objective"] / N
    if certify_matrix:
        Z = pseudomoment_matrix(E, basis="monomial", max_side=max_side)
        report = certify(E, tol=tol, matrix=Z)
        out["certification"] = report.to_json_dict()
        out["psd_ok"] = report.psd_ok
        out["matrix_side"] = Z.side
    return out


# ---------------------------------------------------------------------------
# matrix file I/O


def save_matrix(path: str, M) -> None:
    """Write a square matrix as a header line N followed by N rows of N
    whitespace-separated decimals."""
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("matrix must be square")
    with open(path, "w") as fh:
        fh.write(f"{arr.shape[0]}\n")
        for row in arr:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")


class MatrixFileError(ValueError):
    """Malformed matrix file, with the offending location in the message."""


def load_matrix(path: str) -> tuple[np.ndarray, float]:
    """Read the matrix format written by save_matrix.

    Returns the symmetrized matrix (averaged with its transpose) together
    with the largest absolute asymmetry found. Malformed content raises
    MatrixFileError naming the row and column."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    rows = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
    if not rows:
        raise MatrixFileError(f"{path}: empty file")
    header_line, header = rows[0]
    try:
        N = int(header.strip())
    except ValueError:
        raise MatrixFileError(
            f"{path}: line {header_line}: header must be the dimension, "
            f"got {header.strip()!r}") from None
    if N < 1:
        raise MatrixFileError(
            f"{path}: line {header_line}: dimension must be positive")
    if len(rows) - 1 != N:
        raise MatrixFileError(
            f"{path}: expected {N} matrix rows after the header, "
            f"found {len(rows) - 1}")
    out = np.empty((N, N))
    for r, (lineno, ln) in enumerate(rows[1:]):
        parts = ln.split()
        if len(parts) != N:
            raise MatrixFileError(
                f"{path}: line {lineno} (matrix row {r + 1}): expected "
                f"{N} entries, found {len(parts)}")
        for cidx, tok in enumerate(parts):
            try:
                out[r, cidx] = float(tok)
            except ValueError:
                raise MatrixFileError(
                    f"{path}: line {lineno} (matrix row {r + 1}), column "
                    f"{cidx + 1}: not a number: {tok!r}") from None
    if not np.isfinite(out).all():
        bad = np.argwhere(~np.isfinite(out))[0]
        raise MatrixFileError(
            f"{path}: matrix row {bad[0] + 1}, column {bad[1] + 1}: "
            f"non-finite value")
    residual = float(np.abs(out - out.T).max())
    return (out + out.T) / 2.0, residual
