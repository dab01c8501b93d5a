"""Leaf-labelled forests with even internal degrees, their enumeration, the
Mobius function of their composition poset, and two-sided (ribbon) variants.

Vertex encoding: a forest on m leaves stores leaves as integers 0..m-1 and
internal vertices as m..m+t-1. Internal vertex identity carries no meaning;
forests are canonicalized by minimizing the sorted edge list over
permutations of internal ids, so equality is isomorphism fixing the leaves.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

from .combinat import enumerate_partitions, nu

MAX_LEAVES_DEFAULT = 12


class GoodForest:
    """A forest whose leaves are labelled 0..m-1, with no isolated vertices
    and every internal vertex of even degree at least 4."""

    __slots__ = ("n_leaves", "n_internal", "edges", "_hash")

    def __init__(self, n_leaves: int, n_internal: int, edges, _canonical=False):
        self.n_leaves = n_leaves
        self.n_internal = n_internal
        if _canonical:
            self.edges = edges
        else:
            self.edges = _canonical_edges(n_leaves, n_internal, edges)
        self._hash = hash((n_leaves, n_internal, self.edges))

    @classmethod
    def from_edges(cls, n_leaves: int, edges) -> "GoodForest":
        """Build from edges over arbitrary hashable vertex names; names that
        are ints below n_leaves are leaves, everything else is internal."""
        internal = sorted(
            {v for e in edges for v in e
             if not (isinstance(v, int) and 0 <= v < n_leaves)},
            key=repr,
        )
        relabel = {v: n_leaves + k for k, v in enumerate(internal)}
        mapped = []
        for a, b in edges:
            a = relabel.get(a, a)
            b = relabel.get(b, b)
            mapped.append((min(a, b), max(a, b)))
        return cls(n_leaves, len(internal), mapped)

    @property
    def internal_vertices(self) -> range:
        return range(self.n_leaves, self.n_leaves + self.n_internal)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def internal_degrees(self) -> dict[int, int]:
        deg = {v: 0 for v in self.internal_vertices}
        for a, b in self.edges:
            if a in deg:
                deg[a] += 1
            if b in deg:
                deg[b] += 1
        return deg

    def neighbors(self, v: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return sorted(out)

    def is_good(self) -> bool:
        deg = {}
        for a, b in self.edges:
            deg[a] = deg.get(a, 0) + 1
            deg[b] = deg.get(b, 0) + 1
        for leaf in range(self.n_leaves):
            if deg.get(leaf, 0) != 1:
                return False
        for v in self.internal_vertices:
            d = deg.get(v, 0)
            if d < 4 or d % 2 != 0:
                return False
        return _is_acyclic(self)

    def components(self) -> list[tuple[frozenset, tuple]]:
        """Connected components as (vertex set, edge tuple) pairs, ordered by
        smallest vertex."""
        parent = {}

        def find(x):
            while parent.get(x, x) != x:
                parent[x] = parent.get(parent[x], parent[x])
                x = parent[x]
            return x

        verts = set(range(self.n_leaves)) | set(self.internal_vertices)
        for v in verts:
            parent[v] = v
        for a, b in self.edges:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        groups: dict[int, set] = {}
        for v in verts:
            groups.setdefault(find(v), set()).add(v)
        out = []
        for g in sorted(groups.values(), key=min):
            ge = tuple(e for e in self.edges if e[0] in g)
            out.append((frozenset(g), ge))
        return out

    def is_tree(self) -> bool:
        return self.n_leaves > 0 and len(self.components()) == 1

    def mu(self) -> int:
        """Mobius-style weight: product over internal vertices of
        -(deg - 2)!; the empty forest has weight 1."""
        deg = self.internal_degrees()
        out = 1
        for v in self.internal_vertices:
            out *= -math.factorial(deg[v] - 2)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, GoodForest)
            and self.n_leaves == other.n_leaves
            and self.n_internal == other.n_internal
            and self.edges == other.edges
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return (f"GoodForest(leaves={self.n_leaves}, "
                f"internal={self.n_internal}, edges={list(self.edges)})")


def _canonical_edges(n_leaves: int, n_internal: int, edges) -> tuple:
    edges = [(min(a, b), max(a, b)) for a, b in edges]
    if n_internal <= 1:
        return tuple(sorted(edges))
    if n_internal > 8:
        raise ValueError("canonicalization over more than 8 internal "
                         "vertices is not supported")
    base = range(n_leaves, n_leaves + n_internal)
    best = None
    for perm in itertools.permutations(base):
        relabel = dict(zip(base, perm))
        cand = tuple(sorted(
            (min(relabel.get(a, a), relabel.get(b, b)),
             max(relabel.get(a, a), relabel.get(b, b)))
            for a, b in edges
        ))
        if best is None or cand < best:
            best = cand
    return best


def _is_acyclic(f: GoodForest) -> bool:
    n_edges = len(f.edges)
    verts = {v for e in f.edges for v in e}
    comps = f.components()
    nontrivial = sum(1 for g, _ in comps if len(g & verts) > 0 and len(g) > 1)
    # forest iff every component with k vertices has k-1 edges
    total = 0
    for g, ge in comps:
        if len(ge) != max(0, len(g) - 1):
            return False
        total += len(ge)
    return total == n_edges and nontrivial >= 0


EMPTY_FOREST = GoodForest(0, 0, ())


# ---------------------------------------------------------------------------
# enumeration

def enumerate_rooted_odd_trees(labels) -> list:
    """Rooted trees with the given leaf labels where every internal vertex
    has an odd number >= 3 of children. A single leaf is the rooted tree
    whose root is that leaf.

    Encoding: ('leaf', label) or ('node', (children...)).
    """
    labels = tuple(sorted(labels))
    return _rooted_odd_trees(labels)


@lru_cache(maxsize=None)
def _rooted_odd_trees(labels: tuple) -> list:
    if len(labels) == 1:
        return [("leaf", labels[0])]
    out = []
    for part in enumerate_partitions(len(labels)):
        if part.n_blocks < 3 or part.n_blocks % 2 == 0:
            continue
        blocks = part.restrict_values(labels)
        choices = [_rooted_odd_trees(b) for b in blocks]
        if any(not c for c in choices):
            continue
        for combo in itertools.product(*choices):
            out.append(("node", combo))
    return out


def _attach_leaf_at_root(tree, extra_leaf: int, n_leaves: int) -> GoodForest:
    """The bijection sending a rooted odd tree on m-1 leaves to a good tree
    on m leaves: hang one more leaf off the root."""
    edges = []
    counter = itertools.count()

    def build(node):
        kind, payload = node
        if kind == "leaf":
            return payload
        my_id = ("i", next(counter))
        for child in payload:
            edges.append((my_id, build(child)))
        return my_id

    root = build(tree)
    edges.append((root, extra_leaf))
    return GoodForest.from_edges(n_leaves, edges)


def enumerate_good_trees(labels) -> list[GoodForest]:
    """All good trees (one component, even internal degrees >= 4) on the
    given leaf labels, via the attach-at-root bijection with rooted odd
    trees. Labels must be 0..m-1 for standalone use; arbitrary subsets are
    used internally during forest assembly."""
    labels = tuple(sorted(labels))
    m = len(labels)
    if m % 2 != 0 or m == 0:
        return []
    n_leaves = max(labels) + 1
    if m == 2:
        return [GoodForest.from_edges(n_leaves, [tuple(labels)])]
    out = []
    for t in enumerate_rooted_odd_trees(labels[:-1]):
        out.append(_attach_leaf_at_root(t, labels[-1], n_leaves))
    return out


@lru_cache(maxsize=None)
def enumerate_good_forests(m: int, max_leaves: int = MAX_LEAVES_DEFAULT):
    """All isomorphism classes of good forests on leaves 0..m-1. Empty for
    odd m; the empty forest is the sole element at m = 0."""
    if m > max_leaves:
        raise ValueError(
            f"forest enumeration on {m} leaves exceeds the guard "
            f"({max_leaves}); pass a larger max_leaves explicitly")
    if m == 0:
        return (EMPTY_FOREST,)
    if m % 2 != 0:
        return ()
    out = []
    for part in enumerate_partitions(m, parity="even"):
        choices = [enumerate_good_trees(b) for b in part.blocks]
        for combo in itertools.product(*choices):
            edges = [e for t in combo for e in _offset_internals(t, m)]
            out.append(GoodForest.from_edges(m, edges))
    return tuple(out)


def _offset_internals(tree: GoodForest, m: int):
    """Edges of a tree component with internal ids made globally unique."""
    tag = object()
    out = []
    for a, b in tree.edges:
        a2 = (tag, a) if a >= tree.n_leaves else a
        b2 = (tag, b) if b >= tree.n_leaves else b
        out.append((a2, b2))
    return out


def enumerate_good_trees_on(m: int) -> tuple:
    """Good trees on leaves 0..m-1 (single component)."""
    return tuple(f for f in enumerate_good_forests(m) if f.is_tree())


# ---------------------------------------------------------------------------
# composition poset

def compose(forest: GoodForest, local: dict) -> GoodForest:
    """Substitute a good forest for each internal vertex.

    local maps each internal vertex v to a forest on deg(v) leaves; leaf j of
    local[v] is glued to the j-th incident edge of v (edges in sorted order).
    Chains of pair components are spliced through.
    """
    # tokens: ('L', x) forest leaf, ('I', v, u) internal vertex u of local[v],
    # ('P', v, i) the i-th port of v
    connections = []

    def port_token(v: int, i: int):
        return ("P", v, i)

    ports = {}
    for v in forest.internal_vertices:
        incident = sorted(e for e in forest.edges if v in e)
        lv = local[v]
        if lv.n_leaves != len(incident):
            raise ValueError(
                f"forest for internal vertex {v} must have {len(incident)} "
                f"leaves, got {lv.n_leaves}")
        for i, e in enumerate(incident):
            ports[(v, e)] = port_token(v, i)
        for a, b in lv.edges:
            ta = port_token(v, a) if a < lv.n_leaves else ("I", v, a)
            tb = port_token(v, b) if b < lv.n_leaves else ("I", v, b)
            connections.append((ta, tb))

    for e in forest.edges:
        a, b = e
        ta = ("L", a) if a < forest.n_leaves else ports[(a, e)]
        tb = ("L", b) if b < forest.n_leaves else ports[(b, e)]
        connections.append((ta, tb))

    adj: dict = {}
    for cid, (ta, tb) in enumerate(connections):
        adj.setdefault(ta, []).append((tb, cid))
        adj.setdefault(tb, []).append((ta, cid))

    def concrete(tok):
        return tok[0] != "P"

    visited = set()
    final = []
    for cid, (ta, tb) in enumerate(connections):
        if concrete(ta) and concrete(tb):
            visited.add(cid)
            final.append((ta, tb))
    for start in list(adj):
        if not concrete(start):
            continue
        for nxt, cid in adj[start]:
            if cid in visited or concrete(nxt):
                continue
            visited.add(cid)
            cur = nxt
            while not concrete(cur):
                steps = [(t, c) for t, c in adj[cur] if c not in visited]
                assert len(steps) == 1, "port chain must continue uniquely"
                cur, c = steps[0]
                visited.add(c)
            final.append((start, cur))

    def to_name(tok):
        if tok[0] == "L":
            return tok[1]
        return tok

    edges = [(to_name(a), to_name(b)) for a, b in final]
    return GoodForest.from_edges(forest.n_leaves, edges)


@lru_cache(maxsize=None)
def down_set(forest: GoodForest) -> frozenset:
    """All forests obtainable from this one by composition (including
    itself, via stars)."""
    internals = list(forest.internal_vertices)
    deg = forest.internal_degrees()
    choices = [enumerate_good_forests(deg[v]) for v in internals]
    out = set()
    for combo in itertools.product(*choices):
        out.add(compose(forest, dict(zip(internals, combo))))
    return frozenset(out)


def poset_leq(lo: GoodForest, hi: GoodForest) -> bool:
    """Order of the composition poset: lo <= hi when lo arises from hi by
    substituting forests for internal vertices."""
    if lo.n_leaves != hi.n_leaves:
        return False
    return lo in down_set(hi)


def star_forest(m: int) -> GoodForest:
    """The single star on m leaves (m even >= 4), the top element among
    trees on those leaves."""
    if m % 2 != 0 or m < 4:
        raise ValueError("star requires even m >= 4")
    hub = ("hub",)
    return GoodForest.from_edges(m, [(hub, i) for i in range(m)])


@dataclass(frozen=True)
class MobiusReport:
    n_leaves: int
    n_forests: int
    checked: int
    ok: bool
    counterexample: GoodForest | None


def verify_mobius(m: int, max_leaves: int = MAX_LEAVES_DEFAULT) -> MobiusReport:
    """Check that the forest weights interpolate the Mobius function of the
    composition poset extended by a formal bottom: for every forest F on m
    leaves, the weights of the down-set of F sum to 1."""
    forests = enumerate_good_forests(m, max_leaves)
    checked = 0
    for f in forests:
        total = sum(g.mu() for g in down_set(f))
        checked += 1
        if total != 1:
            return MobiusReport(m, len(forests), checked, False, f)
    return MobiusReport(m, len(forests), checked, True, None)


def star_mobius_recursion(m: int) -> int:
    """Mobius value from the formal bottom to the star on m leaves, computed
    by the recursion over odd partitions rather than read off as (m-2)!."""
    if m % 2 != 0 or m < 2:
        raise ValueError("star Mobius values are defined for even m >= 2")
    u = {2: -1}
    for k in range(4, m + 1, 2):
        acc = -2 * nu(k)
        for part in enumerate_partitions(k - 1, parity="odd"):
            if part.n_blocks == k - 1:
                continue
            term = -u[part.n_blocks + 1]
            for b in part.blocks:
                term *= nu(len(b) + 1)
            acc += term
        assert acc.denominator == 1
        u[k] = int(acc)
    return u[m]


# ---------------------------------------------------------------------------
# two-sided (ribbon) forests

class RibbonForest:
    """A good forest whose leaves are split into a left row 0..l-1 and a
    right row l..l+m-1."""

    __slots__ = ("n_left", "n_right", "forest")

    def __init__(self, n_left: int, n_right: int, forest: GoodForest):
        if forest.n_leaves != n_left + n_right:
            raise ValueError("leaf count mismatch")
        self.n_left = n_left
        self.n_right = n_right
        self.forest = forest

    def side(self, leaf: int) -> str:
        return "L" if leaf < self.n_left else "R"

    def _component_profile(self):
        """Per component: (leaf list, internal list, edges)."""
        out = []
        for verts, edges in self.forest.components():
            leaves = sorted(v for v in verts if v < self.forest.n_leaves)
            internal = sorted(v for v in verts if v >= self.forest.n_leaves)
            out.append((leaves, internal, edges))
        return out

    def is_stretched(self) -> bool:
        """No sided pairs, no skewed stars, and every terminal internal
        vertex (at most one internal neighbor, so a leaf of the induced
        internal tree) touches leaves on both sides. Inner internal
        vertices are unconstrained."""
        f = self.forest
        for leaves, internal, edges in self._component_profile():
            if not internal:
                sides = {self.side(x) for x in leaves}
                if len(sides) == 1:
                    return False  # sided pair
                continue
            if len(internal) == 1:
                nl = sum(1 for x in leaves if self.side(x) == "L")
                nr = len(leaves) - nl
                if (nl == 1 and nr > 1) or (nr == 1 and nl > 1):
                    return False  # skewed star
            for v in internal:
                nbrs = f.neighbors(v)
                if sum(1 for u in nbrs if u >= f.n_leaves) > 1:
                    continue
                sides = {self.side(x) for x in nbrs if x < f.n_leaves}
                if sides != {"L", "R"}:
                    return False
        return True

    def is_bowtie(self) -> bool:
        """Every component is a pair or a star, with leaves on both sides."""
        for leaves, internal, edges in self._component_profile():
            if len(internal) > 1:
                return False
            sides = {self.side(x) for x in leaves}
            if sides != {"L", "R"}:
                return False
        return True

    def is_balanced(self) -> bool:
        """Each component has equally many left and right leaves."""
        for leaves, _, _ in self._component_profile():
            nl = sum(1 for x in leaves if self.side(x) == "L")
            if 2 * nl != len(leaves):
                return False
        return True

    def tie(self) -> "RibbonForest":
        """Collapse each non-pair component to a star on the same leaves."""
        edges = []
        for k, (leaves, internal, comp_edges) in enumerate(
                self._component_profile()):
            if not internal:
                edges.append(tuple(leaves))
            else:
                hub = ("hub", k)
                edges.extend((hub, x) for x in leaves)
        return RibbonForest(
            self.n_left, self.n_right,
            GoodForest.from_edges(self.forest.n_leaves, edges))

    def xi(self) -> int:
        """Sum of weights of all stretched forests tying to this bowtie
        forest, in closed form: zero unless balanced, else a product of
        (-1)^(k-1) (k-1)! k! over components with k leaves per side."""
        if not self.is_bowtie():
            raise ValueError("xi is defined on bowtie forests")
        if not self.is_balanced():
            return 0
        out = 1
        for leaves, _, _ in self._component_profile():
            k = len(leaves) // 2
            out *= (-1) ** (k - 1) * math.factorial(k - 1) * math.factorial(k)
        return out

    def mu(self) -> int:
        return self.forest.mu()

    def __eq__(self, other):
        return (isinstance(other, RibbonForest)
                and self.n_left == other.n_left
                and self.n_right == other.n_right
                and self.forest == other.forest)

    def __hash__(self):
        return hash((self.n_left, self.n_right, self.forest))

    def __repr__(self):
        return (f"RibbonForest(left={self.n_left}, right={self.n_right}, "
                f"edges={list(self.forest.edges)})")


def enumerate_ribbon_forests(n_left: int, n_right: int,
                             max_leaves: int = MAX_LEAVES_DEFAULT):
    return tuple(RibbonForest(n_left, n_right, f)
                 for f in enumerate_good_forests(n_left + n_right, max_leaves))


def stretched_forests(n_left: int, n_right: int,
                      max_leaves: int = MAX_LEAVES_DEFAULT):
    return tuple(r for r in enumerate_ribbon_forests(n_left, n_right,
                                                     max_leaves)
                 if r.is_stretched())


@dataclass(frozen=True)
class XiReport:
    n_left: int
    n_right: int
    classes_checked: int
    ok: bool
    counterexample: RibbonForest | None


def verify_xi(n_left: int, n_right: int) -> XiReport:
    """Group stretched forests by their tie and compare summed weights to
    the closed form, including bowtie classes no stretched forest maps to."""
    groups: dict[RibbonForest, int] = {}
    for r in stretched_forests(n_left, n_right):
        t = r.tie()
        assert t.is_bowtie(), "tie of a stretched forest must be a bowtie"
        groups[t] = groups.get(t, 0) + r.mu()
    checked = 0
    for b in enumerate_ribbon_forests(n_left, n_right):
        if not b.is_bowtie():
            continue
        checked += 1
        if groups.get(b, 0) != b.xi():
            return XiReport(n_left, n_right, checked, False, b)
    return XiReport(n_left, n_right, checked, True, None)


def stretched_mu_sum(n_left: int, n_right: int) -> int:
    """Total Mobius weight of all stretched two-row forests; equals the
    exact transport-plan double sum computed in the poly module."""
    return sum(r.mu() for r in stretched_forests(n_left, n_right))


# ---------------------------------------------------------------------------
# export

def to_dot(obj) -> str:
    """Graphviz DOT text for a forest or ribbon forest."""
    if isinstance(obj, RibbonForest):
        f = obj
        forest = f.forest
        out = ["graph forest {", "  rankdir=LR;"]
        for x in range(forest.n_leaves):
            side = "left" if x < f.n_left else "right"
            label = x if x < f.n_left else x - f.n_left
            out.append(f'  v{x} [shape=circle, label="{side[0].upper()}'
                       f'{label}"];')
        for v in forest.internal_vertices:
            out.append(f'  v{v} [shape=square, label=""];')
        for a, b in forest.edges:
            out.append(f"  v{a} -- v{b};")
        out.append("}")
        return "\n".join(out)
    forest = obj
    out = ["graph forest {"]
    for x in range(forest.n_leaves):
        out.append(f'  v{x} [shape=circle, label="{x}"];')
    for v in forest.internal_vertices:
        out.append(f'  v{v} [shape=square, label=""];')
    for a, b in forest.edges:
        out.append(f"  v{a} -- v{b};")
    out.append("}")
    return "\n".join(out)
