import numpy as np

from momentforge import incoherence as inc

def laurent(N, alpha):
    g = (1.0 - alpha) / (N - 1)
    return (1 + g) * np.eye(N) - g * np.ones((N, N))

# identity: everything zero, verdict true
rep = inc.check_theorem1(np.eye(8), 4)
assert rep.eps_total == 0.0, rep.eps_total
assert rep.verdict and rep.thm_condition_lhs == 1.0, rep
print("identity report OK", rep.to_json_dict())

# laurent quantities
N, alpha = 10, 0.3
g = (1.0 - alpha) / (N - 1)
M = laurent(N, alpha)
off = inc.eps_offdiag(M)
assert abs(off - g) < 1e-15, (off, g)
corr = inc.eps_corr(M)
expect_corr = np.sqrt(2 * g ** 2 + (N - 2) * g ** 4)
assert abs(corr - expect_corr) < 1e-14, (corr, expect_corr)
pw = inc.eps_pow(M)
bound = 1.0 / (N - 1)
print(f"eps_pow={pw:.6g} laurent bound={bound:.6g}")
assert pw <= bound + 1e-12
# exact expected: max_k ||(-g)^k (J - I)|| = g^2 (N-1)
assert abs(pw - g * g * (N - 1)) < 1e-12, (pw, g * g * (N - 1))

# tree maxima at caps 2 and 3 both reduce to the pair case = eps_offdiag
t2 = inc.eps_tree(M, 2, mode="exact")
t3 = inc.eps_tree(M, 3, mode="exact")
assert abs(t2 - off) < 1e-15 and abs(t3 - off) < 1e-15, (t2, t3, off)
print("eps_tree caps 2/3 equal eps_offdiag OK")

# sampled never exceeds exact
rng = np.random.default_rng(3)
for trial in range(3):
    V = rng.standard_normal((6, 6)) / np.sqrt(6)
    A = V @ V.T + 0.5 * np.eye(6)
    Dh = 1.0 / np.sqrt(np.diag(A))
    A = Dh[:, None] * A * Dh[None, :]
    for cap in (2, 4):
        ex = inc.eps_tree(A, cap, mode="exact")
        sm = inc.eps_tree(A, cap, mode="sampled", samples=400, seed=trial)
        assert sm <= ex + 1e-12, (cap, sm, ex)
        ex = inc.eps_err(A, cap, mode="exact")
        sm = inc.eps_err(A, cap, mode="sampled", samples=400, seed=trial)
        assert sm <= ex + 1e-12, (cap, sm, ex)
print("sampled <= exact OK")

# full degree-4 report on laurent
rep = inc.check_theorem1(M, 4)
print("laurent degree-4:", {k: round(v, 6) if isinstance(v, float) else v
                            for k, v in rep.to_json_dict().items()})
assert rep.eps_tree_mode == "exact"
assert not rep.verdict  # (12d)^32 is astronomically conservative at N=10

# degree-6 low-rank report
rep6 = inc.check_theorem_deg6(M, t_pow=1e-3)
assert rep6.c == inc.adjustment_weight(M, 1e-3)
print("degree-6:", {k: (round(v, 6) if isinstance(v, float) else v)
                    for k, v in rep6.to_json_dict().items()})
j = rep6.to_json()
assert "momentforge.degree6.v1" in j

# big-N path exercises Lanczos + sampled mode
N = 2500
Mb = laurent(N, 0.3)
pw = inc.eps_pow(Mb)
gb = 0.7 / (N - 1)
assert abs(pw - gb * gb * (N - 1)) < 1e-10
e_t = inc.eps_tree(Mb, 3, mode="auto", samples=500)
assert abs(e_t - gb) < 1e-15, (e_t, gb)
print("large-N OK")
print("ALL INCOHERENCE SMOKE TESTS PASSED")
