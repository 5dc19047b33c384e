"""Rank-indexed partition families and the two-agent PTAS share.

A rank-indexed (ordinal) maximin share fixes, per (m, n), a family of
partitions of the ranks 1..m and evaluates max over the family of the
minimum bundle value after sorting the valuation.  Every such share is
self-maximizing, and for two agents every such share is feasible via
cut-and-choose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .core import (
    Allocation,
    Partition,
    Rational,
    Valuation,
    bundle_value,
    order,
)
from . import oracle as _oracle
from . import nested as _nested
from . import picking as _picking

__all__ = [
    "PartitionFamily",
    "Ptas2Params",
    "eval_family",
    "ptas2_share",
    "ptas2_allocate",
]


@dataclass(frozen=True)
class PartitionFamily:
    """Deterministic finite enumeration of rank partitions for given (m, n).

    kinds: complete | single | roundrobin | picking | ns | ptas2.
    """

    kind: str
    partition: Partition | None = None
    omega: "_picking.PickingOrder | None" = None
    q: int | None = None
    epsilon: Rational | None = None

    @staticmethod
    def complete() -> "PartitionFamily":
        return PartitionFamily("complete")

    @staticmethod
    def single(p: Partition) -> "PartitionFamily":
        return PartitionFamily("single", partition=p)

    @staticmethod
    def round_robin() -> "PartitionFamily":
        return PartitionFamily("roundrobin")

    @staticmethod
    def picking(omega: "_picking.PickingOrder") -> "PartitionFamily":
        return PartitionFamily("picking", omega=omega)

    @staticmethod
    def ns(q: int) -> "PartitionFamily":
        return PartitionFamily("ns", q=q)

    @staticmethod
    def ptas2(epsilon) -> "PartitionFamily":
        return PartitionFamily("ptas2", epsilon=Fraction(epsilon))

    def enumerate(self, m: int, n: int, size_limit: int = 2_000_000) -> Iterator[Partition]:
        """Materialize the family; the ptas2 family enumerates its
        prefix-subset x suffix-cut structure explicitly."""
        if self.kind == "complete":
            count = 0
            for p in _oracle.complete_partition_family(m, n):
                count += 1
                if count > size_limit:
                    raise RuntimeError(
                        f"complete family exceeds {size_limit} partitions"
                    )
                yield p
        elif self.kind == "single":
            assert self.partition is not None
            if self.partition.m != m or self.partition.n != n:
                raise ValueError("fixed partition does not match (m, n)")
            yield self.partition
        elif self.kind == "roundrobin":
            yield _picking.round_robin_order(n, m).rank_partition()
        elif self.kind == "picking":
            assert self.omega is not None
            if self.omega.m != m or self.omega.n != n:
                raise ValueError("picking order does not match (m, n)")
            yield self.omega.rank_partition()
        elif self.kind == "ns":
            assert self.q is not None
            yield from _nested.ns_family(m, n, self.q, size_limit)
        elif self.kind == "ptas2":
            if n != 2:
                raise ValueError("the ptas2 family is defined only for n = 2")
            yield from _ptas2_family(m, self.epsilon, size_limit)
        else:  # pragma: no cover
            raise ValueError(f"unknown family kind {self.kind!r}")


@dataclass(frozen=True)
class Ptas2Params:
    """Prefix size for the two-agent PTAS: k = ceil(3 / (2 eps))."""

    epsilon: Rational
    k: int

    @staticmethod
    def for_epsilon(epsilon) -> "Ptas2Params":
        eps = Fraction(epsilon)
        if eps <= 0:
            raise ValueError("epsilon must be positive")
        k = int(math.ceil(Fraction(3, 2) / eps))
        return Ptas2Params(eps, max(k, 1))

    def exact_below(self, m: int) -> bool:
        """Small-m escape hatch: below 3/eps items the family is complete."""
        return m < Fraction(3, 1) / self.epsilon


def _ptas2_family(m: int, epsilon: Fraction, size_limit: int) -> Iterator[Partition]:
    params = Ptas2Params.for_epsilon(epsilon)
    if params.exact_below(m):
        yield from _oracle.complete_partition_family(m, 2)
        return
    k = min(params.k, m)
    count = 0
    for mask in range(1 << k):
        head = frozenset(r for r in range(k) if mask >> r & 1)
        for cut in range(k, m + 1):
            b1 = head | frozenset(range(cut, m))
            b2 = frozenset(range(m)) - b1
            count += 1
            if count > size_limit:
                raise RuntimeError(f"ptas2 family exceeds {size_limit} partitions")
            yield Partition((b1, b2), m)


def eval_family(
    v: Valuation, fam: PartitionFamily, n: int, size_limit: int = 2_000_000
) -> tuple[Rational, Partition]:
    """Max over the family of the minimum bundle value, on the sorted ranks.

    The ptas2 family is never materialized; its evaluation is delegated to
    the prefix-enumeration algorithm, which returns the same value.
    """
    if fam.kind == "ptas2":
        if n != 2:
            raise ValueError("the ptas2 family is defined only for n = 2")
        value, best = ptas2_share(v, fam.epsilon)
        return value, best
    return _oracle.family_eval_bruteforce(v, fam.enumerate(v.m, n, size_limit))


def ptas2_share(v: Valuation, epsilon) -> tuple[Rational, Partition]:
    """Two-agent share within (1 - eps) of the exact maximin share.

    Three mutually exclusive branches:
      * m < 3/eps: the family is complete, return the exact maximin value;
      * one item worth more than two thirds of the total: that item against
        everything else is maximin-optimal, return (total - top, partition);
      * otherwise split ranks into the top-k prefix and the suffix, try all
        2^k prefix subsets for bundle 1 and complete each with the best
        suffix tail, located by binary search on the monotone tail sums.

    The returned partition is over ranks and always belongs to the family
    (bundle 1 meets the suffix in a tail).
    """
    params = Ptas2Params.for_epsilon(epsilon)
    ov = order(v)
    m = ov.m
    total = ov.total()
    if params.exact_below(m):
        value, witness = _oracle.mms_exact(ov.to_valuation(), 2)
        # mms_exact on an already-sorted valuation: ids equal ranks
        return value, witness
    if m > 0 and ov.sorted_values[0] > Fraction(2, 3) * total:
        b1 = frozenset([0])
        b2 = frozenset(range(1, m))
        return total - ov.sorted_values[0], Partition((b1, b2), m)

    k = min(params.k, m)
    w = ov.sorted_values
    pre_ranks = list(range(k))
    tail_sum = [Fraction(0)] * (m - k + 1)  # tail_sum[t] = value of last t suffix items
    for t in range(1, m - k + 1):
        tail_sum[t] = tail_sum[t - 1] + w[m - t]
    half = total / 2

    best_val: Fraction | None = None
    best_part: Partition | None = None

    def consider(mask: int, t: int) -> None:
        nonlocal best_val, best_part
        ranks = frozenset(r for r in pre_ranks if mask >> r & 1) | frozenset(
            range(m - t, m)
        )
        v1 = sum((w[r] for r in ranks), Fraction(0))
        val = min(v1, total - v1)
        if best_val is None or val > best_val:
            best_val = val
            best_part = Partition((ranks, frozenset(range(m)) - ranks), m)

    import bisect

    for mask in range(1 << k):
        head = Fraction(0)
        for r in pre_ranks:
            if mask >> r & 1:
                head += w[r]
        # longest tail keeping bundle 1 at or below half, and one longer
        limit = half - head
        if limit < 0:
            t_lo = 0
        else:
            t_lo = bisect.bisect_right(tail_sum, limit) - 1
        for t in (t_lo, t_lo + 1):
            if 0 <= t <= m - k:
                consider(mask, t)

    assert best_val is not None and best_part is not None
    return best_val, best_part


def ptas2_allocate(v1: Valuation, v2: Valuation, epsilon) -> Allocation:
    """Cut-and-choose on agent 1's optimal partition from her ptas2 family.

    Agent 2 takes whichever bundle she values more (ties give her bundle 1);
    both agents end with at least their own ptas2 share.
    """
    if v1.m != v2.m:
        raise ValueError("valuations cover different item counts")
    _, rank_part = ptas2_share(v1, epsilon)
    ov1 = order(v1)
    b1 = ov1.ranks_to_items(rank_part.bundles[0])
    b2 = ov1.ranks_to_items(rank_part.bundles[1])
    if bundle_value(v2, b1) >= bundle_value(v2, b2):
        bundles = (b2, b1)  # agent 2 takes b1
    else:
        bundles = (b1, b2)
    return Allocation.from_bundles(bundles, v1.m)
