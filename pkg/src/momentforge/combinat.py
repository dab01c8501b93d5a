"""Exact combinatorics underlying the graphical calculus: monomial index
multisets, position partitions with parity constraints, Mobius functions of
the subset and partition lattices, the log-cosh coefficient sequence, and
transport plans between partitions.

Everything in this module is exact (int / Fraction); nothing here touches
floating point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache


class MonomialIndex:
    """A multiset of variable indices, stored as an ascending tuple.

    Products of hypercube variables are indexed by these: squares cancel, so
    ``reduce_pairs`` maps a multiset to the set of indices with odd
    multiplicity.
    """

    __slots__ = ("values",)

    def __init__(self, values=()):
        self.values: tuple[int, ...] = tuple(sorted(values))

    @property
    def size(self) -> int:
        return len(self.values)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.values)))

    @property
    def is_set(self) -> bool:
        return len(set(self.values)) == len(self.values)

    def multiplicity(self, i: int) -> int:
        return self.values.count(i)

    def reduce_pairs(self) -> "MonomialIndex":
        odd = [i for i in set(self.values) if self.values.count(i) % 2 == 1]
        return MonomialIndex(odd)

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __eq__(self, other):
        return isinstance(other, MonomialIndex) and self.values == other.values

    def __hash__(self):
        return hash(("MonomialIndex", self.values))

    def __repr__(self):
        return f"MonomialIndex{self.values}"


@dataclass(frozen=True)
class Partition:
    """A partition of positions 0..n-1 into disjoint blocks.

    Blocks partition *positions*, not values, so ground multisets with
    repeated values keep their repeats distinct. Blocks are ascending tuples
    ordered by smallest element.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "blocks",
            tuple(sorted(tuple(sorted(b)) for b in self.blocks)),
        )

    @property
    def ground_size(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def block_sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def block_of(self, i: int) -> tuple[int, ...]:
        for b in self.blocks:
            if i in b:
                return b
        raise KeyError(i)

    def refines(self, other: "Partition") -> bool:
        """True when every block of self lies inside a block of other."""
        where = {}
        for k, b in enumerate(other.blocks):
            for i in b:
                where[i] = k
        for b in self.blocks:
            if len({where[i] for i in b}) != 1:
                return False
        return True

    def restrict_values(self, values) -> tuple[tuple, ...]:
        """Blocks as tuples of ground values instead of positions."""
        values = tuple(values)
        return tuple(tuple(values[i] for i in b) for b in self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self):
        return len(self.blocks)


def enumerate_partitions(n: int, parity: str = "all", min_block: int = 1):
    """All partitions of positions 0..n-1, in restricted-growth-string order.

    parity: 'all', 'even' (every block even), or 'odd' (every block odd).
    min_block: discard partitions with any block smaller than this.

    The order is deterministic: position 0 starts block 0, and each later
    position joins an existing block (in block order) before opening a new
    one.
    """
    if parity not in ("all", "even", "odd"):
        raise ValueError(f"unknown parity constraint {parity!r}")
    out = []

    def rec(pos: int, blocks: list[list[int]]):
        if pos == n:
            ok = all(len(b) >= min_block for b in blocks)
            if ok and parity == "even":
                ok = all(len(b) % 2 == 0 for b in blocks)
            elif ok and parity == "odd":
                ok = all(len(b) % 2 == 1 for b in blocks)
            if ok:
                out.append(Partition(tuple(tuple(b) for b in blocks)))
            return
        for b in blocks:
            b.append(pos)
            rec(pos + 1, blocks)
            b.pop()
        blocks.append([pos])
        rec(pos + 1, blocks)
        blocks.pop()

    rec(0, [])
    return out


def mobius_subset(s, t) -> int:
    """Mobius function of the subset lattice: (-1)^{|t| - |s|} for s <= t."""
    s, t = frozenset(s), frozenset(t)
    if not s <= t:
        raise ValueError("mobius_subset requires s to be a subset of t")
    return (-1) ** (len(t) - len(s))


def mobius_partition(pi: Partition, rho: Partition) -> int:
    """Mobius function of the partition lattice between pi <= rho.

    Equal to prod over blocks B of rho of (-1)^(c-1) (c-1)! where c counts
    the blocks of pi inside B.
    """
    if not pi.refines(rho):
        raise ValueError("mobius_partition requires pi to refine rho")
    where = {}
    for k, b in enumerate(rho.blocks):
        for i in b:
            where[i] = k
    counts = [0] * rho.n_blocks
    for b in pi.blocks:
        counts[where[b[0]]] += 1
    out = 1
    for c in counts:
        out *= (-1) ** (c - 1) * math.factorial(c - 1)
    return out


@lru_cache(maxsize=None)
def _log_cosh_coefficients(kmax: int) -> tuple[Fraction, ...]:
    # g = log(cosh) as a power series; n g_n = n a_n - sum_{j<n} j g_j a_{n-j}
    # with a_k the cosh coefficients.
    a = [Fraction(0)] * (kmax + 1)
    for k in range(0, kmax + 1, 2):
        a[k] = Fraction(1, math.factorial(k))
    g = [Fraction(0)] * (kmax + 1)
    for n in range(1, kmax + 1):
        acc = n * a[n]
        for j in range(1, n):
            acc -= j * g[j] * a[n - j]
        g[n] = acc / n
    return tuple(g)


def nu(k: int) -> Fraction:
    """k! times the x^k coefficient of log cosh x.

    Zero for odd k; the even values start nu(2)=1, nu(4)=-2, nu(6)=16,
    nu(8)=-272.
    """
    if k < 0:
        raise ValueError("nu is defined for k >= 0")
    g = _log_cosh_coefficients(max(k, 2))
    return g[k] * math.factorial(k)


def mobius_even_bottom(rho: Partition) -> Fraction:
    """Mobius value from the formal bottom of the even-partition poset up to
    rho: minus the product of nu over block sizes."""
    out = Fraction(-1)
    for b in rho.blocks:
        if len(b) % 2 != 0:
            raise ValueError("even-partition poset requires even blocks")
        out *= nu(len(b))
    return out


@dataclass(frozen=True)
class TransportPlan:
    """A nonnegative integer matrix with prescribed row and column sums."""

    entries: tuple[tuple[int, ...], ...]

    @property
    def row_sums(self) -> tuple[int, ...]:
        return tuple(sum(r) for r in self.entries)

    @property
    def col_sums(self) -> tuple[int, ...]:
        if not self.entries:
            return ()
        return tuple(sum(col) for col in zip(*self.entries))

    def factorial(self) -> int:
        """Product of the factorials of all entries."""
        out = 1
        for row in self.entries:
            for v in row:
                out *= math.factorial(v)
        return out

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]


def enumerate_transport_plans(row_sums, col_sums) -> list[TransportPlan]:
    """All nonnegative integer matrices with the given margins.

    Rows are filled one at a time; within a row, compositions are generated
    lexicographically, so the overall order is deterministic.
    """
    row_sums = tuple(row_sums)
    col_sums = tuple(col_sums)
    if sum(row_sums) != sum(col_sums):
        return []
    ncols = len(col_sums)
    if ncols == 0:
        return [TransportPlan(tuple(() for _ in row_sums))]
    out = []

    def compositions(total: int, caps: tuple[int, ...]):
        if len(caps) == 1:
            if total <= caps[0]:
                yield (total,)
            return
        for v in range(min(total, caps[0]) + 1):
            for rest in compositions(total - v, caps[1:]):
                yield (v,) + rest

    def rec(i: int, remaining: tuple[int, ...], rows: list):
        if i == len(row_sums):
            if all(r == 0 for r in remaining):
                out.append(TransportPlan(tuple(rows)))
            return
        for row in compositions(row_sums[i], remaining):
            rows.append(row)
            rec(i + 1, tuple(r - v for r, v in zip(remaining, row)), rows)
            rows.pop()

    rec(0, col_sums, [])
    return out


def multiset_tuples(n: int, m: int):
    """Ascending m-tuples over range(n), i.e. size-m multisets of [n]."""
    return itertools.combinations_with_replacement(range(n), m)


def double_factorial(n: int) -> int:
    if n < -1:
        raise ValueError("double factorial of n < -1")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out
