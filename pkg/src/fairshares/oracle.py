"""Exhaustive ground-truth computations.

These searches are complete and exact: they serve both as the MMS
implementation and as the reference oracle every faster algorithm is
tested against.  They refuse instances beyond a configurable size rather
than degrade to heuristics.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    Allocation,
    Instance,
    Partition,
    Rational,
    Valuation,
    order,
)

__all__ = [
    "OracleScaleError",
    "ScaleLimits",
    "mms_exact",
    "min_acceptable_bundle",
    "acceptable_allocation_exists",
    "family_eval_bruteforce",
    "complete_partition_family",
]


class OracleScaleError(RuntimeError):
    """Oracle scale exceeded; raise instead of silently approximating."""


@dataclass(frozen=True)
class ScaleLimits:
    max_m: int = 24
    max_n: int = 6

    def check(self, m: int, n: int) -> None:
        if m > self.max_m or n > self.max_n:
            raise OracleScaleError(
                f"oracle scale exceeded: m={m}, n={n} "
                f"(limits m<={self.max_m}, n<={self.max_n})"
            )


DEFAULT_LIMITS = ScaleLimits()


def _waterfill_bound(loads: Sequence[Fraction], remaining: Fraction) -> Fraction:
    """Largest t such that sum(max(0, t - load)) <= remaining.

    Upper bound on the best achievable minimum bundle value from a partial
    assignment; used to prune the max-min search.
    """
    srt = sorted(loads)
    n = len(srt)
    budget = remaining
    # raise the water level step by step over the sorted loads
    for i in range(n - 1):
        width = i + 1
        lift = (srt[i + 1] - srt[i]) * width
        if lift > budget:
            return srt[i] + budget / width
        budget -= lift
    return srt[n - 1] + budget / n


def _best_two_split(values: Sequence[Fraction]) -> Fraction:
    """Meet-in-the-middle for n = 2: subset sum closest to half the total."""
    import bisect

    total = sum(values, Fraction(0))
    half = total / 2
    mid = len(values) // 2
    left = [Fraction(0)]
    for x in values[:mid]:
        left += [s + x for s in left]
    right = [Fraction(0)]
    for x in values[mid:]:
        right += [s + x for s in right]
    right.sort()
    best = Fraction(0)
    for s in left:
        # closest right sums around half - s, from both sides
        idx = bisect.bisect_left(right, half - s)
        for t in (idx - 1, idx):
            if 0 <= t < len(right):
                cand = min(s + right[t], total - s - right[t])
                if cand > best:
                    best = cand
    return best


def _best_min_value(values: Sequence[Fraction], n: int) -> Fraction:
    """Max over n-partitions of the minimum bundle value (values sorted desc)."""
    m = len(values)
    if m < n:
        return Fraction(0)
    if n == 1:
        return sum(values, Fraction(0))
    if n == 2:
        return _best_two_split(values)
    total = sum(values, Fraction(0))
    suffix = [Fraction(0)] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + values[i]
    best = Fraction(0)
    loads = [Fraction(0)] * n

    def dfs(idx: int) -> None:
        nonlocal best
        if idx == m:
            cur = min(loads)
            if cur > best:
                best = cur
            return
        if _waterfill_bound(loads, suffix[idx]) <= best:
            return
        seen: set[Fraction] = set()
        for j in range(n):
            if loads[j] in seen:
                continue  # equal-load bundles are symmetric; try only the first
            seen.add(loads[j])
            loads[j] += values[idx]
            dfs(idx + 1)
            loads[j] -= values[idx]

    dfs(0)
    return best


def _lex_witness(values: Sequence[Fraction], n: int, target: Fraction) -> list[list[int]]:
    """Lexicographically least rank->bundle assignment with min bundle >= target.

    Bundle k may be opened only after bundle k-1 is nonempty, which makes
    the assignment vector canonical for unlabeled partitions.
    """
    m = len(values)
    suffix = [Fraction(0)] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + values[i]
    loads = [Fraction(0)] * n
    assign = [0] * m

    def dfs(idx: int, used: int) -> bool:
        if idx == m:
            return min(loads) >= target
        if _waterfill_bound(loads, suffix[idx]) < target:
            return False
        limit = min(n, used + 1)
        for j in range(limit):
            loads[j] += values[idx]
            assign[idx] = j
            if dfs(idx + 1, max(used, j + 1)):
                return True
            loads[j] -= values[idx]
        return False

    if m == 0:
        return [[] for _ in range(n)]
    if not dfs(0, 0):
        raise AssertionError("witness search failed below the proven optimum")
    bundles: list[list[int]] = [[] for _ in range(n)]
    for r, j in enumerate(assign):
        bundles[j].append(r)
    return bundles


def mms_exact(
    v: Valuation, n: int, limits: ScaleLimits = DEFAULT_LIMITS
) -> tuple[Rational, Partition]:
    """Exact maximin share with a deterministic witness partition.

    The witness is the lexicographically least optimal assignment under the
    ordered (descending value, stable) indexing, mapped back to item ids.
    """
    if n < 1:
        raise ValueError("agent count must be >= 1")
    limits.check(v.m, n)
    ov = order(v)
    value = _best_min_value(ov.sorted_values, n)
    rank_bundles = _lex_witness(ov.sorted_values, n, value)
    bundles = tuple(ov.ranks_to_items(b) for b in rank_bundles)
    return value, Partition(bundles, v.m)


def min_acceptable_bundle(
    v: Valuation, threshold: Rational, limits: ScaleLimits = DEFAULT_LIMITS
) -> tuple[Rational, frozenset[int]]:
    """Minimum value of a bundle worth at least ``threshold``, with a witness.

    Branch-and-bound over include/exclude decisions in descending value
    order; the witness is the lexicographically least minimizing bundle
    under the ordered indexing.
    """
    threshold = Fraction(threshold)
    if threshold <= 0:
        return Fraction(0), frozenset()
    limits.check(v.m, 1)
    total = v.total()
    if threshold > total:
        raise ValueError(
            f"threshold {threshold} exceeds the full-set value {total}: "
            "no bundle is acceptable"
        )
    ov = order(v)
    vals = ov.sorted_values
    m = len(vals)
    suffix = [Fraction(0)] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + vals[i]
    best = total  # the full set is always acceptable

    def dfs(idx: int, cur: Fraction) -> None:
        nonlocal best
        if cur >= threshold:
            if cur < best:
                best = cur
            return
        if idx == m or cur + suffix[idx] < threshold or cur >= best:
            return
        dfs(idx + 1, cur + vals[idx])
        dfs(idx + 1, cur)

    dfs(0, Fraction(0))

    # second pass: lexicographically least bundle of value exactly `best`
    chosen: list[int] = []

    def pick(idx: int, cur: Fraction) -> bool:
        if cur == best:
            return True
        if idx == m or cur > best or cur + suffix[idx] < best:
            return False
        chosen.append(idx)
        if pick(idx + 1, cur + vals[idx]):
            return True
        chosen.pop()
        return pick(idx + 1, cur)

    if not pick(0, Fraction(0)):
        raise AssertionError("witness search failed for min acceptable bundle")
    return best, ov.ranks_to_items(chosen)


def acceptable_allocation_exists(
    inst: Instance,
    thresholds: Sequence[Rational],
    limits: ScaleLimits = DEFAULT_LIMITS,
) -> Allocation | None:
    """Complete search for an allocation meeting every agent's threshold.

    Backtracking over item -> agent assignments with residual-value
    pruning: a branch dies as soon as some agent cannot reach her
    threshold even if handed every remaining item.  Returns the first
    allocation in deterministic DFS order, or None if none exists.
    """
    limits.check(inst.m, inst.n)
    n, m = inst.n, inst.m
    need = [Fraction(t) for t in thresholds]
    for i in range(n):
        if inst.valuations[i].total() < need[i]:
            return None
    # fixed processing order: descending best value over agents, tie by id
    item_order = sorted(
        range(m),
        key=lambda j: (-max(inst.valuations[i].values[j] for i in range(n)), j),
    )
    rest = [
        [Fraction(0)] * (m + 1) for _ in range(n)
    ]  # rest[i][t] = value to agent i of items item_order[t:]
    for i in range(n):
        for t in range(m - 1, -1, -1):
            rest[i][t] = rest[i][t + 1] + inst.valuations[i].values[item_order[t]]
    got = [Fraction(0)] * n
    holder = [0] * m

    def dfs(t: int) -> bool:
        if all(got[i] >= need[i] for i in range(n)):
            for u in range(t, m):
                holder[u] = 0  # leftovers are goods: dump on agent 0
            return True
        if t == m:
            return False
        for i in range(n):
            if got[i] + rest[i][t] < need[i]:
                return False  # agent i is already unsatisfiable
        j = item_order[t]
        for i in range(n):
            got[i] += inst.valuations[i].values[j]
            holder[t] = i
            if dfs(t + 1):
                return True
            got[i] -= inst.valuations[i].values[j]
        return False

    if not dfs(0):
        return None
    bundles = [set() for _ in range(n)]
    for t, j in enumerate(item_order):
        bundles[holder[t]].add(j)
    return Allocation.from_bundles([frozenset(b) for b in bundles], m)


def family_eval_bruteforce(
    v: Valuation, family: Iterable[Partition]
) -> tuple[Rational, Partition]:
    """Max over an explicit partition family of the min bundle value.

    Partitions are over sorted ranks; the valuation is ordered first, as in
    every rank-indexed share definition.  The returned partition is the
    first optimum in enumeration order.
    """
    ov = order(v)
    best: Fraction | None = None
    best_p: Partition | None = None
    count = 0
    for p in family:
        count += 1
        val = min(ov.rank_value(b) for b in p.bundles) if p.bundles else Fraction(0)
        if best is None or val > best:
            best, best_p = val, p
    if best is None or best_p is None:
        raise ValueError("empty partition family")
    return best, best_p


def complete_partition_family(m: int, n: int):
    """All partitions of ranks 0..m-1 into at most n unlabeled bundles.

    Canonical enumeration: rank 0 goes to bundle 0 and bundle k can be used
    only after bundle k-1, so each unlabeled partition appears exactly once.
    """
    assign = [0] * m

    def rec(idx: int, used: int):
        if idx == m:
            bundles = [[] for _ in range(n)]
            for r, j in enumerate(assign):
                bundles[j].append(r)
            yield Partition(tuple(frozenset(b) for b in bundles), m)
            return
        for j in range(min(n, used + 1)):
            assign[idx] = j
            yield from rec(idx + 1, max(used, j + 1))

    if m == 0:
        yield Partition(tuple(frozenset() for _ in range(n)), 0)
        return
    yield from rec(0, 0)
