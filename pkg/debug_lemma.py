import itertools

import numpy as np

from momentforge.cgraph import cgs, cgs_tight, delta, max_span
from momentforge.extend import extend
from momentforge.forests import enumerate_good_forests

rng = np.random.default_rng(3)
n = 3
G = rng.standard_normal((n, n + 2))
A = G @ G.T
d = np.sqrt(np.diag(A))
A = A / np.outer(d, d)
A = np.eye(n) + 0.5 * (A - np.eye(n))

E = extend(A, 3)


def brute_cgs_parts(f, s):
    """(full, tight, loose) by direct enumeration of internal assignments."""
    internal = list(f.internal_vertices)
    spans = max_span(f, s).subtrees
    full = tight = 0.0
    for a in itertools.product(range(n), repeat=len(internal)):
        assign = dict(zip(internal, a))
        term = 1.0
        for u, v in f.edges:
            iu = s[u] if u < f.n_leaves else assign[u]
            iv = s[v] if v < f.n_leaves else assign[v]
            term *= A[iu, iv]
        full += term
        ok = True
        for idx, subtree in spans:
            for v in subtree:
                if v >= f.n_leaves and assign[v] != idx:
                    ok = False
        if ok:
            tight += term
    return full, tight, full - tight


bad = []
for size in (2, 4, 6):
    for s in itertools.combinations_with_replacement(range(n), size):
        red = tuple(sorted(i for i in set(s) if s.count(i) % 2))
        lhs = E.value_on_set(red)
        main = sum(f.mu() * cgs(f, A, s)
                   for f in enumerate_good_forests(size))
        err = -sum(f.mu() * delta(f, A, s)
                   for f in enumerate_good_forests(size))
        resid = abs(lhs - (main + err))
        if resid > 1e-10:
            bad.append((s, resid))
print("failing multisets:", len(bad))
for s, r in bad[:6]:
    print("  ", s, f"{r:.3e}")

if bad:
    s = bad[0][0]
    print("\nper-forest check on", s)
    for k, f in enumerate(enumerate_good_forests(len(s))):
        bf, bt, bl = brute_cgs_parts(f, s)
        ic = cgs(f, A, s)
        it = cgs_tight(f, A, s)
        idl = delta(f, A, s)
        flag = ""
        if abs(bf - ic) > 1e-10 or abs(bt - it) > 1e-10 \
                or abs(bl - idl) > 1e-10:
            flag = "  <-- MISMATCH"
            print(f"forest {k}: edges={sorted(f.edges)} "
                  f"spans={max_span(f, s).subtrees}")
            print(f"  brute full={bf:.6f} tight={bt:.6f} loose={bl:.6f}")
            print(f"  impl  full={ic:.6f} tight={it:.6f} loose={idl:.6f}"
                  + flag)
    # also: does the brute-force tight sum satisfy the lemma?
    red = tuple(sorted(i for i in set(s) if s.count(i) % 2))
    lhs = E.value_on_set(red)
    tight_sum = sum(f.mu() * brute_cgs_parts(f, s)[1]
                    for f in enumerate_good_forests(len(s)))
    print(f"\nlemma via brute tight: lhs={lhs:.6f} sum={tight_sum:.6f} "
          f"diff={abs(lhs - tight_sum):.3e}")
