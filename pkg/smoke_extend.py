import itertools
import math
import time

import numpy as np

from momentforge.cgraph import DegreeTwoInput, cgs
from momentforge.extend import (
    ConstructionError, Pseudoexpectation, certify, extend,
    extend_degree6_lowrank, err_value, identity_pseudoexpectation,
    main_value, pseudoexpectation_from_json, pseudoexpectation_to_json,
    pseudomoment_matrix, z_main_stretched)
from momentforge.forests import enumerate_good_forests
from momentforge.poly import degree_sets, harmonic_polynomial

rng = np.random.default_rng(7)


def random_unit_diag(n, scale=0.6):
    G = rng.standard_normal((n, n + 2))
    A = G @ G.T
    d = np.sqrt(np.diag(A))
    A = A / np.outer(d, d)
    A = np.eye(n) + scale * (A - np.eye(n))
    return (A + A.T) / 2


def naive_value(A, S):
    return sum(f.mu() * cgs(f, A, S) for f in enumerate_good_forests(len(S)))


# closed forms vs forest sums, single and bulk
n = 7
A = random_unit_diag(n)
E = extend(A, 3)
for size in (2, 4, 6):
    sets = list(itertools.combinations(range(n), size))
    E.ensure_size(size)
    worst = 0.0
    for S in sets:
        ref = naive_value(A, S)
        got_single = E._set_fn(S)
        got_bulk = E.value_on_set(S)
        worst = max(worst, abs(ref - got_single), abs(ref - got_bulk))
    print(f"size {size}: closed-form vs forest sum worst {worst:.3e}")
    assert worst < 1e-11

# evaluate handles multisets via pair reduction
v1 = E.evaluate((0, 0, 1, 2, 2, 3))
v2 = E.value_on_set((1, 3))
assert v1 == v2
assert E.evaluate((0, 1, 2)) == 0.0
assert E.evaluate(()) == 1.0
try:
    E.evaluate((0, 1, 2, 3, 4, 5, 6))
    raise SystemExit("degree overflow not caught")
except ValueError as e:
    print("overflow message:", e)

# main + err equals the reduced-set value (multisets with repeats)
n = 4
A = random_unit_diag(n, scale=0.5)
E = extend(A, 3)
worst = 0.0
for trial in range(60):
    size = 2 * rng.integers(1, 4)
    s = tuple(sorted(rng.integers(0, n, size=size).tolist()))
    red = [i for i in set(s) if s.count(i) % 2]
    ref = E.value_on_set(tuple(sorted(red)))
    got = main_value(A, s) + err_value(A, s)
    worst = max(worst, abs(ref - got))
print(f"main+err vs reduced value worst {worst:.3e}")
assert worst < 1e-10

# monomial matrix entries
P = pseudomoment_matrix(E, basis="monomial", d=2)
sets = P.sets
for i, S in enumerate(sets):
    for j, T in enumerate(sets):
        ref = E.evaluate(tuple(S) + tuple(T))
        assert abs(P.matrix[i, j] - ref) < 1e-14
assert np.abs(P.matrix - P.matrix.T).max() == 0.0
print("monomial matrix entries OK, side", P.side)
print("block norms sample:", {k: round(v, 4) for k, v in
                              list(P.block_norms().items())[:4]})

# multiharmonic matrix entries vs direct polynomial evaluation
n = 3
A = random_unit_diag(n, scale=0.45)
E = extend(A, 2)
Pm = pseudomoment_matrix(E, basis="multiharmonic", M=A, d=2)
polys = [harmonic_polynomial(S, A) for S in Pm.sets]
worst = 0.0
for i in range(len(polys)):
    for j in range(len(polys)):
        prod = polys[i] * polys[j]
        ref = 0.0
        for alpha, c in prod.coeffs.items():
            sup = tuple(k for k, e in enumerate(alpha) if e % 2)
            if len(sup) % 2 == 0:
                ref += c * E.value_on_set(sup)
        worst = max(worst, abs(ref - Pm.matrix[i, j]))
print(f"multiharmonic entries worst {worst:.3e}")
assert worst < 1e-12

# stretched assembly of the main term vs direct expansion
for nn, d in ((3, 2), (4, 2), (3, 3)):
    A = random_unit_diag(nn, scale=0.5)
    Zs = z_main_stretched(A, d)
    polys = [harmonic_polynomial(S, A) for S in Zs.sets]
    direct = np.zeros_like(Zs.matrix)
    for i in range(len(polys)):
        for j in range(len(polys)):
            tot = 0.0
            for alpha, ca in (polys[i] * polys[j]).coeffs.items():
                s = tuple(sorted(sum(([k] * e for k, e in
                                      enumerate(alpha)), [])))
                tot += ca * main_value(A, s)
            direct[i, j] = tot
    worst = np.abs(Zs.matrix - direct).max()
    print(f"z_main_stretched vs direct (n={nn}, d={d}): {worst:.3e}")
    assert worst < 1e-10

# certification: identity and a mild extension
Eid = identity_pseudoexpectation(5, 4)
rep = certify(Eid)
assert rep.ok and rep.min_eigenvalue == 1.0
print("identity certify:", rep.to_json_dict())

n = 5
gamma = 0.7 / (n - 1)
A = (1 + gamma) * np.eye(n) - gamma * np.ones((n, n))
E = extend(A, 2)
rep = certify(E, M=A, basis="monomial")
print("equicorrelated certify psd:", rep.psd_ok,
      "min eig", rep.min_eigenvalue)
assert rep.normalization_ok and rep.ideal_ok and rep.symmetry_ok
assert rep.psd_ok

# cholesky path agrees on a small PSD case
rep2 = certify(E, M=A, basis="monomial", dense_eig_limit=2)
assert rep2.method == "cholesky_witness" and rep2.psd_ok
print("cholesky witness OK")

# degree-6 low-rank construction
n = 6
A = random_unit_diag(n, scale=0.25)
t_pow = 1e-4
E6 = extend_degree6_lowrank(A, t_pow)
c = E6.adjustment_weight
print(f"lowrank c = {c:.3e}")
assert 0 < c < 1
assert E6.evaluate(()) == 1.0
A2 = A @ A
for size in (2, 4, 6):
    E6.ensure_size(size)
    for S in itertools.combinations(range(n), size):
        single = E6._set_fn(S)
        bulk = E6.value_on_set(S)
        assert abs(single - bulk) < 1e-12, (S, single, bulk)
S = (0, 1, 2, 3)
base = naive_value(A, S)
pairs = (A2[0, 1] * A2[2, 3] + A2[0, 2] * A2[1, 3] + A2[0, 3] * A2[1, 2])
ref = (1 - c) * (base + 2 * t_pow * pairs)
assert abs(E6.value_on_set(S) - ref) < 1e-12
assert abs(E6.value_on_set((0, 1)) - (1 - c) * A[0, 1]) < 1e-15
try:
    extend_degree6_lowrank(A, 1e6)
    raise SystemExit("budget failure not caught")
except ConstructionError as e:
    print("lowrank budget message:", e)

# serialization round trip
E = extend(random_unit_diag(4, 0.4), 2)
for size in (2, 4):
    E.ensure_size(size)
text = pseudoexpectation_to_json(E)
E2 = pseudoexpectation_from_json(text)
for S, v in E.known_values().items():
    assert E2.value_on_set(S) == v
print("json round trip OK,", len(E.known_values()), "values")

# timing probe: N=40 degree-6 bulk fill + monomial assembly lookups
n = 40
A = random_unit_diag(n, scale=0.15)
t0 = time.time()
E = extend(A, 3)
for size in (2, 4, 6):
    E.ensure_size(size)
t_fill = time.time() - t0
print(f"N=40 bulk fill sizes 2/4/6: {t_fill:.1f}s")

t0 = time.time()
P = pseudomoment_matrix(E, basis="monomial", d=3, max_side=20000)
t_asm = time.time() - t0
side = P.side
print(f"N=40 monomial assembly side={side}: {t_asm:.1f}s")
t0 = time.time()
rep = certify(E, basis="monomial", tol=1e-6, matrix=P, ideal_samples=50)
t_cert = time.time() - t0
print(f"N=40 certify ({rep.method}): {t_cert:.1f}s psd_ok={rep.psd_ok} "
      f"norm={rep.matrix_norm:.3f}")
print("total budget per seed ~", round(t_fill + t_asm + t_cert, 1), "s")
print("ALL EXTEND SMOKE TESTS PASSED")
