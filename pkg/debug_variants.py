import itertools

import numpy as np

from momentforge.extend import extend
from momentforge.forests import enumerate_good_forests

rng = np.random.default_rng(5)
n = 3
G = rng.standard_normal((n, n + 2))
A = G @ G.T
dg = np.sqrt(np.diag(A))
A = A / np.outer(dg, dg)
A = np.eye(n) + 0.5 * (A - np.eye(n))
E = extend(A, 3)


def steiner(adj, leaves):
    root = leaves[0]
    parent = {root: None}
    queue = [root]
    while queue:
        v = queue.pop()
        for w in adj[v]:
            if w not in parent:
                parent[w] = v
                queue.append(w)
    subtree = set()
    for leaf in leaves:
        v = leaf
        while v is not None and v not in subtree:
            subtree.add(v)
            v = parent[v]
    return subtree


def spans_variant(f, s, order="asc", blocked="skip"):
    comps = f.components()
    adjs = []
    for verts, edges in comps:
        adj = {v: [] for v in verts}
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        adjs.append(adj)
    idxs = sorted(set(s), reverse=(order == "desc"))
    taken = set()
    spans = []
    for i in idxs:
        for (verts, edges), adj in zip(comps, adjs):
            leaves_i = sorted(x for x in verts
                              if x < f.n_leaves and s[x] == i)
            if len(leaves_i) < 2:
                continue
            sub = steiner(adj, leaves_i)
            if sub & taken:
                if blocked == "skip":
                    continue
                if blocked == "sub":
                    free = [x for x in leaves_i if x not in taken]
                    ok = False
                    while len(free) >= 2 and not ok:
                        sub = steiner(adj, free)
                        if sub & taken:
                            free = free[:-1]
                        else:
                            ok = True
                    if not ok:
                        continue
            taken |= sub
            spans.append((i, frozenset(sub)))
    return spans


def tight_sum(f, s, spans):
    internal = list(f.internal_vertices)
    pins = {}
    for idx, sub in spans:
        for v in sub:
            if v >= f.n_leaves:
                pins[v] = idx
    tot = 0.0
    ranges = [range(n) if v not in pins else [pins[v]] for v in internal]
    for a in itertools.product(*ranges):
        assign = dict(zip(internal, a))
        term = 1.0
        for u, v in f.edges:
            iu = s[u] if u < f.n_leaves else assign[u]
            iv = s[v] if v < f.n_leaves else assign[v]
            term *= A[iu, iv]
        tot += term
    return tot


def lemma_check(order, blocked):
    worst = 0.0
    worst_s = None
    for size in (2, 4, 6):
        forests = list(enumerate_good_forests(size))
        for s in itertools.combinations_with_replacement(range(n), size):
            red = tuple(sorted(i for i in set(s) if s.count(i) % 2))
            lhs = E.value_on_set(red)
            tot = sum(f.mu() * tight_sum(f, s, spans_variant(
                f, s, order, blocked)) for f in forests)
            r = abs(lhs - tot)
            if r > worst:
                worst, worst_s = r, s
    return worst, worst_s


for order in ("asc", "desc"):
    for blocked in ("skip", "sub"):
        w, ws = lemma_check(order, blocked)
        print(f"order={order:4s} blocked={blocked:4s} worst={w:.3e} at {ws}")
