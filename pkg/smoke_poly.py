import itertools
import math
from fractions import Fraction

import numpy as np

from momentforge.cgraph import DegreeTwoInput
from momentforge.forests import stretched_mu_sum
from momentforge.poly import (HomogeneousPoly, Poly, apolar, apolar_partial,
                              apply_diff, build_harmonic_basis, build_q_down,
                              degree_sets, gram_direct, gram_via_transport,
                              harmonic_polynomial, transport_mu_sum)

rng = np.random.default_rng(11)

# apolar examples
p = Poly(2, {(1, 1): 1.0})
assert abs(apolar(p, p) - 0.5) < 1e-15
assert abs(apolar_partial(p, p) - 1.0) < 1e-15
p1 = Poly(2, {(2, 0): 1.0})
p2 = Poly(2, {(0, 2): 1.0})
assert apolar(p1, p2) == 0.0
print("apolar examples: ok")


def random_homog(n, d, rng, terms=4):
    coeffs = {}
    for _ in range(terms):
        alpha = [0] * n
        for _ in range(d):
            alpha[rng.integers(n)] += 1
        coeffs[tuple(alpha)] = float(rng.standard_normal())
    return Poly(n, coeffs)


# adjoint property: <pq, r>_o = (a!/(a+b)!) <p, q(d)r>_o
for _ in range(50):
    n = int(rng.integers(1, 4))
    a = int(rng.integers(1, 4))
    b = int(rng.integers(1, 4))
    p = random_homog(n, a, rng)
    q = random_homog(n, b, rng)
    r = random_homog(n, a + b, rng)
    lhs = apolar(p * q, r)
    rhs = (math.factorial(a) / math.factorial(a + b)) * apolar(
        p, apply_diff(q, r))
    assert abs(lhs - rhs) < 1e-9 * max(1, abs(lhs)), (lhs, rhs)
print("adjoint property: ok")

# orthogonal invariance
for _ in range(20):
    n = int(rng.integers(2, 5))
    d = int(rng.integers(1, 5))
    A = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(A)
    Q = Q * np.sign(np.diag(R))
    p = random_homog(n, d, rng)
    q = random_homog(n, d, rng)
    lhs = apolar(p.subst_linear(Q), q.subst_linear(Q))
    rhs = apolar(p, q)
    assert abs(lhs - rhs) < 1e-9 * max(1, abs(rhs)), (lhs, rhs)
print("orthogonal invariance: ok")


def random_unit_diag(n, rng, scale=0.3):
    A = rng.standard_normal((n, 2 * n)) / np.sqrt(2 * n)
    M = A @ A.T
    d = np.sqrt(np.diag(M))
    M = M / np.outer(d, d)
    M = (1 - scale) * np.eye(n) + scale * M
    d = np.sqrt(np.diag(M))
    M = M / np.outer(d, d)
    return (M + M.T) / 2


# harmonic closed forms
N = 5
M = random_unit_diag(N, rng)
x = [Poly.variable(N, i) for i in range(N)]
i, j, k = 0, 2, 4
hij = harmonic_polynomial((i, j), M)
expect = x[i] * x[j] - Poly.constant(N, M[i, j])
assert hij == expect or all(
    abs(hij.coefficient(a) - expect.coefficient(a)) < 1e-12
    for a in set(hij.coeffs) | set(expect.coeffs))
hijk = harmonic_polynomial((i, j, k), M)
expect3 = (x[i] * x[j] * x[k] - M[i, j] * x[k] - M[i, k] * x[j]
           - M[j, k] * x[i])
for a in range(N):
    expect3 = expect3 + 2.0 * float(M[a, i] * M[a, j] * M[a, k]) * x[a]
diff = hijk - expect3
assert all(abs(c) < 1e-12 for c in diff.coeffs.values()), diff
print("harmonic closed forms: ok")

# multilinear-part invariant: only multilinear monomial is x^S, coeff 1
basis = build_harmonic_basis(M, 3)
for el in basis:
    S = el.index_set
    for alpha, c in el.poly.coeffs.items():
        if all(e <= 1 for e in alpha) and sum(alpha) == len(S):
            support = tuple(i for i, e in enumerate(alpha) if e)
            if support == S:
                assert abs(c - 1.0) < 1e-12, (S, alpha, c)
            else:
                assert abs(c) < 1e-12, (S, alpha, c)
print("multilinear invariant: ok")

# gram dual path
for n, d, trial in [(3, 2, 0), (4, 2, 1), (5, 3, 2), (3, 3, 3)]:
    rng2 = np.random.default_rng(100 + trial)
    M = random_unit_diag(n, rng2)
    Y1, sets1 = gram_direct(M, d)
    Y2, sets2 = gram_via_transport(M, d)
    assert sets1 == sets2
    err = np.abs(Y1 - Y2).max()
    assert err < 1e-8, (n, d, err)
    lam_M = float(np.linalg.eigvalsh(M).min())
    lam_Y = float(np.linalg.eigvalsh((Y1 + Y1.T) / 2).min())
    assert lam_Y >= lam_M ** d - 1e-8, (lam_Y, lam_M ** d)
    # d=1 block is M itself
    sets = degree_sets(n, 1)
    assert np.allclose(Y1[1:n + 1, 1:n + 1], M, atol=1e-10)
    print(f"gram dual path n={n} d={d}: max err {err:.2e}, "
          f"lam_Y={lam_Y:.4f} >= lam_M^d={lam_M**d:.4f}")

# mu-sum identity, all l+m <= 8
for l in range(0, 5):
    for m in range(0, 5):
        if l + m > 8:
            continue
        a = stretched_mu_sum(l, m)
        b = transport_mu_sum(l, m)
        assert b.denominator == 1, (l, m, b)
        assert a == int(b), (l, m, a, b)
print("stretched mu sum == transport mu sum for l,m <= 4: ok")
