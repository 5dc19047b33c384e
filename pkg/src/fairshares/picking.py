"""Picking orders: share evaluation, allocation, and the ordered reduction.

A picking order is a length-m list saying which of n identities picks at
each step.  For additive valuations every party's minimax strategy is to
grab the most valuable remaining item, so identity k simply receives the
item ranks at which she picks; the share is the worst identity's haul.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .core import (
    Allocation,
    Instance,
    Partition,
    Rational,
    Valuation,
    order,
)

__all__ = [
    "PickingOrder",
    "round_robin_order",
    "picking_share",
    "mms_picking_order",
    "picking_allocate",
    "ordered_reduction",
]


@dataclass(frozen=True)
class PickingOrder:
    """Turn list with entries in 1..n; turns[t] picks at step t."""

    n: int
    turns: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("picking order needs n >= 1")
        for t, who in enumerate(self.turns):
            if not 1 <= who <= self.n:
                raise ValueError(f"turn {t}: identity {who} out of range 1..{self.n}")

    @property
    def m(self) -> int:
        return len(self.turns)

    def rank_partition(self) -> Partition:
        """Bundle j-1 holds the ranks at which identity j picks."""
        bundles = [set() for _ in range(self.n)]
        for t, who in enumerate(self.turns):
            bundles[who - 1].add(t)
        return Partition(tuple(frozenset(b) for b in bundles), self.m)


def round_robin_order(n: int, m: int) -> PickingOrder:
    return PickingOrder(n, tuple((t % n) + 1 for t in range(m)))


def picking_share(v: Valuation, omega: PickingOrder) -> Rational:
    """Minimum over identities of the value greedy play guarantees them.

    With all parties picking by v's descending order, step t hands over the
    rank-t item, so identity k's haul is the sum of values at her ranks.
    Identities that never pick get 0.
    """
    if omega.m != v.m:
        raise ValueError(f"order length {omega.m} != item count {v.m}")
    ov = order(v)
    hauls = [Fraction(0)] * omega.n
    for t, who in enumerate(omega.turns):
        hauls[who - 1] += ov.sorted_values[t]
    return min(hauls)


def simulate_picking_share(v: Valuation, omega: PickingOrder, tie_break: str = "id") -> Rational:
    """Same share, by simulating all identities greedily; cross-check only."""
    if omega.m != v.m:
        raise ValueError(f"order length {omega.m} != item count {v.m}")
    worst: Fraction | None = None
    for k in range(1, omega.n + 1):
        remaining = list(range(v.m))
        got = Fraction(0)
        for who in omega.turns:
            if tie_break == "id":
                pick = max(remaining, key=lambda j: (v.values[j], -j))
            else:
                pick = max(remaining, key=lambda j: (v.values[j], j))
            remaining.remove(pick)
            if who == k:
                got += v.values[pick]
        if worst is None or got < worst:
            worst = got
    return worst if worst is not None else Fraction(0)


def mms_picking_order(v: Valuation, n: int, limits=None) -> PickingOrder:
    """A picking order whose share equals the exact maximin share of v.

    Identity j picks exactly at the sorted ranks of the j-th bundle of the
    maximin witness partition.
    """
    from . import oracle

    if limits is None:
        limits = oracle.DEFAULT_LIMITS
    _, witness = oracle.mms_exact(v, n, limits)
    ov = order(v)
    rank_of_item = {item: r for r, item in enumerate(ov.perm)}
    turns = [0] * v.m
    for j, bundle in enumerate(witness.bundles):
        for item in bundle:
            turns[rank_of_item[item]] = j + 1
    return PickingOrder(n, tuple(turns))


def picking_allocate(inst: Instance, omega: PickingOrder) -> Allocation:
    """Simulate the picking sequence on a real instance.

    At step t agent omega[t] takes her most valuable remaining item
    (ties to the lowest item id).  Every agent ends up with at least her
    own picking share.
    """
    if omega.m != inst.m:
        raise ValueError(f"order length {omega.m} != item count {inst.m}")
    if omega.n != inst.n:
        raise ValueError(f"order is for {omega.n} agents, instance has {inst.n}")
    remaining = set(range(inst.m))
    bundles = [set() for _ in range(inst.n)]
    for who in omega.turns:
        v = inst.valuations[who - 1]
        pick = max(remaining, key=lambda j: (v.values[j], -j))
        remaining.remove(pick)
        bundles[who - 1].add(pick)
    return Allocation.from_bundles([frozenset(b) for b in bundles], inst.m)


def ordered_companion(inst: Instance) -> Instance:
    """The ordered twin: each agent's j-th largest value sits on rank-item j."""
    rows = []
    for v in inst.valuations:
        rows.append(order(v).to_valuation())
    return Instance(tuple(rows), inst.agent_labels)


def ordered_reduction(
    inst: Instance, base: Callable[[Instance], Allocation]
) -> Allocation:
    """Lift an allocator for ordered instances to arbitrary ones.

    Run ``base`` on the ordered companion, then replay its allocation as a
    picking sequence: ranks are processed from most to least valuable, and
    the agent owning rank r in the companion allocation picks her favorite
    real item still available.  Each agent's real value is at least her
    companion value, because at the step for rank r at most r-1 real items
    are gone, so her best remaining item is worth at least her r-th value.
    """
    companion = ordered_companion(inst)
    base_alloc = base(companion)
    owner_of_rank = [0] * inst.m
    for i in range(inst.n):
        for r in base_alloc.bundle_of_agent(i):
            owner_of_rank[r] = i
    remaining = set(range(inst.m))
    bundles = [set() for _ in range(inst.n)]
    for r in range(inst.m):
        i = owner_of_rank[r]
        v = inst.valuations[i]
        pick = max(remaining, key=lambda j: (v.values[j], -j))
        remaining.remove(pick)
        bundles[i].add(pick)
    return Allocation.from_bundles([frozenset(b) for b in bundles], inst.m)
