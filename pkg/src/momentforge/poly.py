"""Sparse multivariate polynomial calculus: apolar and differential inner
products on homogeneous polynomials, the multiharmonic basis attached to a
unit-diagonal matrix, and its Gram matrix computed by two independent
routes (direct differentiation of substituted polynomials, and a weighted
sum of transport-diagram contractions)."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .combinat import (Partition, enumerate_partitions,
                       enumerate_transport_plans)
from .diagram_algebra import LabelledDiagram


class Poly:
    """Sparse polynomial: map from exponent tuples (length n_vars) to
    coefficients. Not necessarily homogeneous."""

    __slots__ = ("n_vars", "coeffs")

    def __init__(self, n_vars: int, coeffs=None):
        self.n_vars = int(n_vars)
        clean = {}
        for alpha, c in (coeffs or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.n_vars or any(a < 0 for a in alpha):
                raise ValueError(f"bad exponent tuple {alpha!r}")
            c = float(c)
            if c != 0.0:
                clean[alpha] = clean.get(alpha, 0.0) + c
        self.coeffs = {a: c for a, c in clean.items() if c != 0.0}

    @classmethod
    def zero(cls, n_vars: int) -> "Poly":
        return cls(n_vars, {})

    @classmethod
    def constant(cls, n_vars: int, c: float) -> "Poly":
        return cls(n_vars, {(0,) * n_vars: c})

    @classmethod
    def monomial(cls, n_vars: int, alpha, c: float = 1.0) -> "Poly":
        return cls(n_vars, {tuple(alpha): c})

    @classmethod
    def variable(cls, n_vars: int, i: int) -> "Poly":
        alpha = [0] * n_vars
        alpha[i] = 1
        return cls(n_vars, {tuple(alpha): 1.0})

    @classmethod
    def linear_form(cls, vec) -> "Poly":
        vec = np.asarray(vec, dtype=np.float64)
        n = vec.shape[0]
        out = {}
        for i in range(n):
            if vec[i] != 0.0:
                alpha = [0] * n
                alpha[i] = 1
                out[tuple(alpha)] = float(vec[i])
        return cls(n, out)

    def degree(self) -> int:
        return max((sum(a) for a in self.coeffs), default=0)

    def is_homogeneous(self) -> bool:
        degs = {sum(a) for a in self.coeffs}
        return len(degs) <= 1

    def coefficient(self, alpha) -> float:
        return self.coeffs.get(tuple(alpha), 0.0)

    def homogeneous_part(self, d: int) -> "Poly":
        return Poly(self.n_vars,
                    {a: c for a, c in self.coeffs.items() if sum(a) == d})

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(self.n_vars, other)
        if other.n_vars != self.n_vars:
            raise ValueError("variable counts differ")
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            out[a] = out.get(a, 0.0) + c
        return Poly(self.n_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.n_vars, {a: -c for a, c in self.coeffs.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(self.n_vars, other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly(self.n_vars,
                        {a: c * other for a, c in self.coeffs.items()})
        if other.n_vars != self.n_vars:
            raise ValueError("variable counts differ")
        out = {}
        for a, ca in self.coeffs.items():
            for b, cb in other.coeffs.items():
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, 0.0) + ca * cb
        return Poly(self.n_vars, out)

    __rmul__ = __mul__

    def __pow__(self, m: int):
        if m < 0:
            raise ValueError("negative power")
        out = Poly.constant(self.n_vars, 1.0)
        for _ in range(m):
            out = out * self
        return out

    def evaluate(self, point) -> float:
        point = np.asarray(point, dtype=np.float64)
        tot = 0.0
        for a, c in self.coeffs.items():
            term = c
            for i, e in enumerate(a):
                if e:
                    term *= point[i] ** e
            tot += term
        return tot

    def subst_linear(self, V) -> "Poly":
        """Compose with a linear change of variables: variable i becomes the
        linear form with coefficients V[i, :] in the new variables."""
        V = np.asarray(V, dtype=np.float64)
        if V.shape[0] != self.n_vars:
            raise ValueError("substitution matrix has wrong row count")
        r = V.shape[1]
        forms = [Poly.linear_form(V[i]) for i in range(self.n_vars)]
        powers: dict[tuple[int, int], Poly] = {}

        def form_power(i, m):
            if (i, m) not in powers:
                powers[(i, m)] = forms[i] ** m
            return powers[(i, m)]

        out = Poly.zero(r)
        for a, c in self.coeffs.items():
            term = Poly.constant(r, c)
            for i, e in enumerate(a):
                if e:
                    term = term * form_power(i, e)
            out = out + term
        return out

    def __eq__(self, other):
        return (isinstance(other, Poly) and self.n_vars == other.n_vars
                and self.coeffs == other.coeffs)

    def __repr__(self):
        terms = sorted(self.coeffs.items())[:6]
        body = " + ".join(f"{c:.3g}*{a}" for a, c in terms)
        more = "" if len(self.coeffs) <= 6 else f" (+{len(self.coeffs)-6})"
        return f"Poly({self.n_vars} vars: {body or '0'}{more})"


class HomogeneousPoly(Poly):
    """Polynomial whose monomials all share one total degree."""

    __slots__ = ("hom_degree",)

    def __init__(self, n_vars: int, degree: int, coeffs=None):
        super().__init__(n_vars, coeffs)
        self.hom_degree = int(degree)
        for a in self.coeffs:
            if sum(a) != self.hom_degree:
                raise ValueError(
                    f"monomial {a} has degree {sum(a)}, expected "
                    f"{self.hom_degree}")

    @classmethod
    def from_poly(cls, p: Poly, degree: int | None = None):
        if degree is None:
            if not p.is_homogeneous():
                raise ValueError("polynomial is not homogeneous")
            degree = p.degree()
        return cls(p.n_vars, degree, p.coeffs)


def _exp_factorial(alpha) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def apolar(p: Poly, q: Poly) -> float:
    """Apolar inner product: sum over monomials of the coefficient product
    weighted by the inverse multinomial coefficient of the exponents."""
    if p.n_vars != q.n_vars:
        raise ValueError("variable counts differ")
    dp, dq = p.degree(), q.degree()
    if not (p.is_homogeneous() and q.is_homogeneous()):
        raise ValueError("apolar inner product requires homogeneous inputs")
    if p.coeffs and q.coeffs and dp != dq:
        raise ValueError(f"degree mismatch: {dp} vs {dq}")
    d = dp if p.coeffs else dq
    fact_d = math.factorial(d)
    tot = 0.0
    small, big = (p.coeffs, q.coeffs) if len(p.coeffs) <= len(q.coeffs) \
        else (q.coeffs, p.coeffs)
    for a, c in small.items():
        cb = big.get(a)
        if cb is not None:
            tot += (_exp_factorial(a) / fact_d) * c * cb
    return tot


def apply_diff(q: Poly, r: Poly) -> Poly:
    """q(d/dy) applied to r, by the multinomial contraction on coefficients."""
    if q.n_vars != r.n_vars:
        raise ValueError("variable counts differ")
    out: dict = {}
    for beta, cq in q.coeffs.items():
        for full, cr in r.coeffs.items():
            gamma = tuple(f - b for f, b in zip(full, beta))
            if any(g < 0 for g in gamma):
                continue
            w = 1.0
            for f, g in zip(full, gamma):
                w *= math.factorial(f) / math.factorial(g)
            out[gamma] = out.get(gamma, 0.0) + cq * cr * w
    return Poly(q.n_vars, out)


def apolar_partial(p: Poly, q: Poly) -> float:
    """Differential inner product p(d/dy)q for equal-degree homogeneous
    polynomials; agrees with degree-factorial times the apolar product, and
    the two routes are cross-checked on every call."""
    applied = apply_diff(p, q)
    scalar = applied.coefficient((0,) * p.n_vars)
    if p.coeffs and q.coeffs:
        d = p.degree()
        via_apolar = math.factorial(d) * apolar(p, q)
        scale = max(1.0, abs(scalar), abs(via_apolar))
        if abs(scalar - via_apolar) > 1e-9 * scale:
            raise AssertionError(
                "differential and apolar inner products disagree: "
                f"{scalar} vs {via_apolar}")
    return scalar


# ---------------------------------------------------------------------------
# multiharmonic basis


def _q_power(S, M: np.ndarray, m: int) -> Poly:
    """Building block: for a singleton the m-th power of its variable, else
    the hub-summed product of matrix entries times the hub variable's m-th
    power."""
    S = tuple(sorted(S))
    n = M.shape[0]
    if len(S) == 0:
        raise ValueError("empty index set")
    if len(S) == 1:
        alpha = [0] * n
        alpha[S[0]] = m
        return Poly(n, {tuple(alpha): 1.0})
    weights = np.prod(M[list(S), :], axis=0)
    out: dict = {}
    zero = (0,) * n
    for a in range(n):
        w = float(weights[a])
        if w == 0.0:
            continue
        if m == 0:
            out[zero] = out.get(zero, 0.0) + w
        else:
            alpha = [0] * n
            alpha[a] = m
            out[tuple(alpha)] = out.get(tuple(alpha), 0.0) + w
    return Poly(n, out)


def build_q_down(S, M, variant: str = "lowered") -> Poly:
    """The q building-block polynomial for an index set: 'lowered' reduces
    hub-variable powers modulo the hypercube ideal (power 1 for odd sizes,
    the plain matrix entry for pairs, power 0 for even sizes >= 4); 'full'
    keeps the homogeneous size-th power."""
    M = np.asarray(M, dtype=np.float64)
    S = tuple(sorted(S))
    if not S:
        raise ValueError("empty index set")
    if variant == "full":
        return _q_power(S, M, len(S))
    if variant != "lowered":
        raise ValueError(f"unknown variant {variant!r}")
    if len(S) == 1:
        return _q_power(S, M, 1)
    if len(S) == 2:
        return Poly.constant(M.shape[0], float(M[S[0], S[1]]))
    if len(S) % 2 == 1:
        return _q_power(S, M, 1)
    return _q_power(S, M, 0)


class MultiharmonicBasisElement:
    """One basis polynomial: the partition-sum mixture for an index set,
    with its per-block building blocks kept for inspection."""

    __slots__ = ("index_set", "poly", "components")

    def __init__(self, index_set, poly: Poly, components: dict):
        self.index_set = tuple(sorted(index_set))
        self.poly = poly
        self.components = components

    def __repr__(self):
        return (f"MultiharmonicBasisElement(S={self.index_set}, "
                f"{len(self.poly.coeffs)} terms)")


def harmonic_polynomial(S, M, variant: str = "lowered") -> Poly:
    """Partition sum with signed-factorial coefficients over the blocks."""
    M = np.asarray(M, dtype=np.float64)
    S = tuple(sorted(S))
    n = M.shape[0]
    if not S:
        return Poly.constant(n, 1.0)
    out = Poly.zero(n)
    for sigma in enumerate_partitions(len(S)):
        term = Poly.constant(n, 1.0)
        coeff = 1.0
        for block in sigma.blocks:
            A = tuple(S[i] for i in block)
            coeff *= (-1.0) ** (len(A) - 1) * math.factorial(len(A) - 1)
            term = term * build_q_down(A, M, variant=variant)
        out = out + coeff * term
    return out


def build_harmonic_basis(M, d: int) -> list[MultiharmonicBasisElement]:
    """Basis elements for every index set of size at most d, ordered by
    (size, lexicographic)."""
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    out = []
    for size in range(d + 1):
        for S in itertools.combinations(range(n), size):
            comps = {}
            for sigma in enumerate_partitions(size):
                for block in sigma.blocks:
                    A = tuple(S[i] for i in block)
                    if A not in comps:
                        comps[A] = build_q_down(A, M, variant="lowered")
            out.append(MultiharmonicBasisElement(
                S, harmonic_polynomial(S, M), comps))
    return out


# ---------------------------------------------------------------------------
# Gram matrix, two routes


def degree_sets(n: int, d: int) -> list[tuple[int, ...]]:
    """All index sets of size at most d, ordered by (size, lexicographic)."""
    return [S for size in range(d + 1)
            for S in itertools.combinations(range(n), size)]


def gram_direct(M, d: int, gram_tol: float = 1e-10):
    """Gram matrix of the non-lowered basis polynomials after substituting
    a Gram factor of M, under the differential inner product. Returns
    (matrix over degree_sets(n, d), sets). Cross-degree entries vanish by
    degree mismatch and are set to zero directly."""
    from .cgraph import DegreeTwoInput
    if not isinstance(M, DegreeTwoInput):
        M = DegreeTwoInput(M)
    V = M.gram_factor(clip_tol=gram_tol).T  # rows are the Gram vectors
    A = M.matrix
    n = M.n
    r = V.shape[1]
    sets = degree_sets(n, d)
    forms = [HomogeneousPoly(r, 1, Poly.linear_form(V[a]).coeffs)
             for a in range(n)]
    power_cache: dict[tuple[int, int], Poly] = {}

    def hub_power(a, m):
        if (a, m) not in power_cache:
            power_cache[(a, m)] = forms[a] ** m
        return power_cache[(a, m)]

    def q_substituted(block):
        if len(block) == 1:
            return forms[block[0]]
        weights = np.prod(A[list(block), :], axis=0)
        out = Poly.zero(r)
        for a in range(n):
            w = float(weights[a])
            if w != 0.0:
                out = out + w * hub_power(a, len(block))
        return out

    polys = []
    for S in sets:
        h = Poly.zero(r)
        for sigma in enumerate_partitions(len(S)):
            term = Poly.constant(r, 1.0)
            coeff = 1.0
            for block in sigma.blocks:
                Ablk = tuple(S[i] for i in block)
                coeff *= ((-1.0) ** (len(Ablk) - 1)
                          * math.factorial(len(Ablk) - 1))
                term = term * q_substituted(Ablk)
            h = h + coeff * term
        polys.append(h)
    Y = np.zeros((len(sets), len(sets)))
    for i, S in enumerate(sets):
        for j in range(i, len(sets)):
            if len(S) != len(sets[j]):
                continue
            Y[i, j] = Y[j, i] = apolar_partial(polys[i], polys[j])
    return Y, sets


def build_transport_diagram(sigma: Partition, tau: Partition, plan,
                            M) -> LabelledDiagram:
    """Two leaf rows joined through hub vertices for the non-singleton
    blocks: leaves attach to their own block's hub, plan entries give
    parallel hub-hub edges, and unit plan cells involving singletons attach
    leaves directly."""
    M = np.asarray(M, dtype=np.float64)
    entries = plan.entries if hasattr(plan, "entries") else tuple(
        tuple(int(v) for v in row) for row in plan)
    sizes_l = sigma.block_sizes
    sizes_r = tau.block_sizes
    row_sums = tuple(sum(r) for r in entries)
    col_sums = tuple(sum(c) for c in zip(*entries)) if entries else ()
    if row_sums != sizes_l:
        raise ValueError("plan row sums do not match the left block sizes")
    if col_sums != sizes_r:
        raise ValueError("plan column sums do not match the right block "
                         "sizes")
    left = [("l", i) for i in range(sigma.ground_size)]
    right = [("r", j) for j in range(tau.ground_size)]
    hubs_l = {k: ("hl", k) for k, b in enumerate(sigma.blocks)
              if len(b) >= 2}
    hubs_r = {k: ("hr", k) for k, b in enumerate(tau.blocks)
              if len(b) >= 2}
    edges = []
    for k, b in enumerate(sigma.blocks):
        if k in hubs_l:
            for i in b:
                edges.append((("l", i), hubs_l[k], M))
    for k, b in enumerate(tau.blocks):
        if k in hubs_r:
            for j in b:
                edges.append((hubs_r[k], ("r", j), M))
    for ka, a_blk in enumerate(sigma.blocks):
        for kb, b_blk in enumerate(tau.blocks):
            dab = entries[ka][kb]
            if dab == 0:
                continue
            if ka in hubs_l and kb in hubs_r:
                for _ in range(dab):
                    edges.append((hubs_l[ka], hubs_r[kb], M))
            elif ka not in hubs_l and kb in hubs_r:
                if dab != 1:
                    raise ValueError("singleton block cell must be 0 or 1")
                edges.append((("l", a_blk[0]), hubs_r[kb], M))
            elif ka in hubs_l and kb not in hubs_r:
                if dab != 1:
                    raise ValueError("singleton block cell must be 0 or 1")
                edges.append((hubs_l[ka], ("r", b_blk[0]), M))
            else:
                if dab != 1:
                    raise ValueError("singleton block cell must be 0 or 1")
                edges.append((("l", a_blk[0]), ("r", b_blk[0]), M))
    dims = {v: M.shape[0] for v in left + right}
    dims.update({h: M.shape[0] for h in hubs_l.values()})
    dims.update({h: M.shape[0] for h in hubs_r.values()})
    return LabelledDiagram(left, right, list(hubs_l.values())
                           + list(hubs_r.values()), edges, dims)


def transport_weight(sigma: Partition, tau: Partition) -> int:
    out = 1
    for b in list(sigma.blocks) + list(tau.blocks):
        k = len(b)
        out *= (-1) ** (k - 1) * math.factorial(k - 1) * math.factorial(k)
    return out


def gram_via_transport(M, d: int, max_entries: int = 20_000_000):
    """Same Gram matrix as gram_direct, assembled per degree block as the
    weighted sum of transport-diagram contractions."""
    from .cgraph import DegreeTwoInput
    if isinstance(M, DegreeTwoInput):
        M = M.matrix
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    sets = degree_sets(n, d)
    offsets = {}
    for idx, S in enumerate(sets):
        offsets.setdefault(len(S), idx)
    Y = np.zeros((len(sets), len(sets)))
    Y[0, 0] = 1.0
    for k in range(1, d + 1):
        ksets = list(itertools.combinations(range(n), k))
        tuple_dims = (n,) * k
        rows = np.array([np.ravel_multi_index(S, tuple_dims)
                         for S in ksets])
        block = np.zeros((len(ksets), len(ksets)))
        for sigma in enumerate_partitions(k):
            for tau in enumerate_partitions(k):
                w = transport_weight(sigma, tau)
                for plan in enumerate_transport_plans(sigma.block_sizes,
                                                      tau.block_sizes):
                    G = build_transport_diagram(sigma, tau, plan, M)
                    Z = G.eval(max_entries=max_entries)
                    block += (w / plan.factorial()) * Z[np.ix_(rows, rows)]
        o = offsets[k]
        Y[o:o + len(ksets), o:o + len(ksets)] = block
    return Y, sets


def transport_mu_sum(n_left: int, n_right: int) -> Fraction:
    """Exact double sum over partition pairs and plans of the signed
    factorial weights; matches the total Mobius weight of stretched
    two-row forests."""
    total = Fraction(0)
    for sigma in enumerate_partitions(n_left):
        for tau in enumerate_partitions(n_right):
            w = transport_weight(sigma, tau)
            if w == 0:
                continue
            plan_sum = Fraction(0)
            for plan in enumerate_transport_plans(sigma.block_sizes,
                                                  tau.block_sizes):
                plan_sum += Fraction(1, plan.factorial())
            total += w * plan_sum
    return total
