"""Nested shares: DP evaluation, feasible allocators and adversarial instances.

A nested partition splits the sorted items into a consecutive prefix
partition (the first n-q parts being singletons) paired with a reversed
consecutive suffix partition: bundle j takes the j-th prefix block plus
the (n-j+1)-th suffix block.  The share value is the best worst bundle
over all such partitions, computed here by a feasibility DP plus binary
search over candidate bundle values.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    Allocation,
    Instance,
    Partition,
    Rational,
    Valuation,
    bundle_value,
    order,
)
from . import picking

__all__ = [
    "NsWitness",
    "ns_candidates",
    "ns_feasible_partition",
    "ns_share",
    "ns_family",
    "ns_allocate",
    "ns3_base_allocate",
    "fully_intersecting",
    "worstcase_instance",
    "CaseAnalysisExhausted",
    "UnsupportedShareError",
]


class CaseAnalysisExhausted(RuntimeError):
    """The three-partition assignment case analysis found no valid branch.

    Cannot happen when the input partitions come from nested-share
    optimization (no pair is fully intersecting); treated as a bug.
    """


class UnsupportedShareError(RuntimeError):
    """Requested an allocator whose feasibility is unproven or false."""


@dataclass(frozen=True)
class NsWitness:
    """An optimal nested partition, in rank space and in item-id space.

    ``prefix_cuts`` are the consecutive-partition indexes i_1 <= ... <= i_n
    over ranks (bundle j's prefix block is ranks [i_{j-1}, i_j)), and
    ``suffix_takes[j]`` is the half-open rank interval of bundle j's suffix
    block, counted from the tail.
    """

    partition: Partition
    rank_bundles: tuple[tuple[int, ...], ...]
    prefix_cuts: tuple[int, ...]
    suffix_takes: tuple[tuple[int, int], ...]
    k: int


def ns_candidates(v: Valuation, n: int) -> list[Rational]:
    """All possible nested-bundle values: sums of two disjoint rank intervals.

    Every bundle in a nested partition is a consecutive run of prefix ranks
    plus a consecutive run of suffix ranks, so its value is a sum of at most
    two disjoint interval sums.  Returned deduplicated and ascending,
    always including 0.
    """
    ov = order(v)
    m = ov.m
    pre = [Fraction(0)] * (m + 1)
    for i in range(m):
        pre[i + 1] = pre[i] + ov.sorted_values[i]
    vals: set[Fraction] = {Fraction(0)}
    # ends_by[b]: distinct sums of intervals ending at b; left_sums grows to
    # hold every interval sum ending at or before the current start point
    ends_by: list[set[Fraction]] = [set() for _ in range(m + 1)]
    for a in range(m):
        for b in range(a + 1, m + 1):
            ends_by[b].add(pre[b] - pre[a])
    left_sums: set[Fraction] = set()
    for start in range(1, m + 1):
        left_sums |= ends_by[start]
        vals |= ends_by[start]
        if start == m:
            break
        right = {pre[b] - pre[start] for b in range(start + 1, m + 1)}
        for s1 in left_sums:
            for s2 in right:
                vals.add(s1 + s2)
    return sorted(vals)


class _NsDp:
    """Feasibility DP for a candidate value c.

    T[i][j] is the least suffix length t such that bins 1..i can cover the
    first j ranks (consecutively, the first n-q bins taking exactly one
    rank each) and the last t ranks (in reversed consecutive blocks) with
    every bin worth at least c; -1 when impossible.  Minimizing t is safe
    because a shorter consumed tail only leaves more value available.
    """

    def __init__(self, values: Sequence[Fraction], n: int, q: int, c: Fraction):
        self.w = list(values)
        self.m = len(values)
        self.n = n
        self.q = q
        self.c = c
        m = self.m
        self.pre = [Fraction(0)] * (m + 1)
        for i in range(m):
            self.pre[i + 1] = self.pre[i] + values[i]
        self.tail = [Fraction(0)] * (m + 1)  # tail[t] = value of last t ranks
        for t in range(1, m + 1):
            self.tail[t] = self.tail[t - 1] + values[m - t]
        self.T: list[dict[int, int]] = [dict() for _ in range(n + 1)]
        self.back: list[dict[int, tuple[int, int]]] = [dict() for _ in range(n + 1)]

    def _min_tail(self, lo_t: int, hi_t: int, need: Fraction) -> int:
        """Least t in [lo_t, hi_t] with tail[t] >= need, or -1."""
        if lo_t > hi_t:
            return -1
        if need <= self.tail[lo_t]:
            return lo_t
        t = bisect.bisect_left(self.tail, need, lo_t, hi_t + 1)
        if t <= hi_t and self.tail[t] >= need:
            return t
        return -1

    def run(self) -> bool:
        n, q, m, c = self.n, self.q, self.m, self.c
        singles = n - q
        self.T[0][0] = 0
        for i in range(1, n + 1):
            prev = self.T[i - 1]
            cur = self.T[i]
            backrow = self.back[i]
            if i <= singles:
                cols: Iterable[int] = (i,)
            else:
                cols = range(singles, m + 1)
            for j in cols:
                best_t = -1
                best_from = -1
                for jp, tp in prev.items():
                    if jp > j:
                        continue
                    need = c - (self.pre[j] - self.pre[jp]) + self.tail[tp]
                    t = self._min_tail(tp, m - j, need)
                    if t >= 0 and (best_t < 0 or t < best_t or (t == best_t and jp < best_from)):
                        best_t, best_from = t, jp
                if best_t >= 0:
                    cur[j] = best_t
                    backrow[j] = (best_from, best_t)
        return bool(self.T[n])

    def witness(self) -> NsWitness | None:
        """Reconstruct the partition for the smallest feasible final column."""
        n, m = self.n, self.m
        if not self.T[n]:
            return None
        j = min(self.T[n])
        cuts = [0] * (n + 1)
        takes: list[tuple[int, int]] = [(0, 0)] * (n + 1)
        for i in range(n, 0, -1):
            jp, t = self.back[i][j]
            cuts[i] = j
            takes[i] = (self.T[i - 1][jp], t)  # tail lengths consumed (lo, hi)
            j = jp
        # absorb unassigned middle ranks into bin n's prefix block
        t_final = takes[n][1]
        cuts[n] = m - t_final
        rank_bundles = []
        for i in range(1, n + 1):
            lo_t, hi_t = takes[i]
            ranks = list(range(cuts[i - 1], cuts[i])) + list(
                range(m - hi_t, m - lo_t)
            )
            rank_bundles.append(tuple(sorted(ranks)))
        return NsWitness(
            partition=Partition(
                tuple(frozenset(b) for b in rank_bundles), m
            ),
            rank_bundles=tuple(rank_bundles),
            prefix_cuts=tuple(cuts[1:]),
            suffix_takes=tuple(takes[1:]),
            k=cuts[n],
        )


def ns_feasible_partition(
    v: Valuation, n: int, q: int, c: Rational
) -> NsWitness | None:
    """A nested partition with every bundle worth at least c, or None.

    Feasibility is monotone in c.  The input valuation is ordered
    internally; the witness is in rank space (its ``partition`` indexes
    ranks of the ordered valuation).
    """
    if not 1 <= q <= n:
        raise ValueError(f"q={q} out of range 1..{n}")
    ov = order(v)
    if ov.m < n:
        if Fraction(c) > 0:
            return None  # some bundle is necessarily empty
        return _degenerate_witness(ov.m, n)
    dp = _NsDp(ov.sorted_values, n, q, Fraction(c))
    if not dp.run():
        return None
    return dp.witness()


def _degenerate_witness(m: int, n: int) -> NsWitness:
    """Singleton-per-bundle cover used when m < n (share value 0)."""
    bundles = [(r,) for r in range(m)] + [()] * (n - m)
    cuts = tuple(min(j, m) for j in range(1, n + 1))
    return NsWitness(
        partition=Partition(tuple(frozenset(b) for b in bundles), m),
        rank_bundles=tuple(bundles),
        prefix_cuts=cuts,
        suffix_takes=tuple((0, 0) for _ in range(n)),
        k=m,
    )


def ns_share(v: Valuation, n: int, q: int) -> tuple[Rational, NsWitness]:
    """Exact nested-share value with a deterministic witness partition.

    m < n yields 0; m = n yields the n-th largest value via the singleton
    partition; otherwise binary search over candidate bundle values using
    the feasibility DP.
    """
    if not 1 <= q <= n:
        raise ValueError(f"q={q} out of range 1..{n}")
    ov = order(v)
    m = ov.m
    if m < n:
        return Fraction(0), _degenerate_witness(m, n)
    if m == n:
        value = ov.sorted_values[n - 1]
        w = ns_feasible_partition(v, n, q, value)
        assert w is not None
        return value, w
    cands = ns_candidates(v, n)
    lo, hi = 0, len(cands) - 1  # cands[0] == 0 is always feasible
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ns_feasible_partition(v, n, q, cands[mid]) is not None:
            lo = mid
        else:
            hi = mid - 1
    value = cands[lo]
    w = ns_feasible_partition(v, n, q, value)
    assert w is not None
    return value, w


def ns_family(m: int, n: int, q: int, size_limit: int = 2_000_000):
    """Explicit enumeration of all nested partitions (test/oracle use only).

    Yields every partition of ranks 0..m-1 formed by a prefix length k, a
    consecutive prefix partition whose first n-q parts are singletons, and
    a reversed consecutive suffix partition.  Distinct cut tuples can yield
    the same partition; duplicates are skipped.
    """
    from itertools import combinations_with_replacement

    if not 1 <= q <= n:
        raise ValueError(f"q={q} out of range 1..{n}")
    if m <= n:
        # degenerate shapes: fall back to singleton-style coverage
        bundles = [frozenset([r]) for r in range(m)]
        bundles += [frozenset()] * (n - m)
        yield Partition(tuple(bundles), m)
        return
    singles = n - q
    seen: set[tuple] = set()
    count = 0
    for k in range(singles + 1, m + 1):
        # prefix cuts: i_j = j for j <= n-q, then q-1 free cuts ending at k
        for mid in combinations_with_replacement(range(singles, k + 1), q - 1):
            cuts = tuple(range(1, singles + 1)) + mid + (k,)
            for scuts in combinations_with_replacement(range(k, m + 1), n - 1):
                s = (k,) + scuts + (m,)
                bundles = []
                for j in range(1, n + 1):
                    zpart = range(cuts[j - 2] if j >= 2 else 0, cuts[j - 1])
                    # bundle j takes suffix block n-j+1 (reversed order)
                    a, b = s[n - j], s[n - j + 1]
                    bundles.append(frozenset(zpart) | frozenset(range(a, b)))
                key = tuple(sorted(tuple(sorted(b)) for b in bundles))
                if key in seen:
                    continue
                seen.add(key)
                count += 1
                if count > size_limit:
                    raise RuntimeError(
                        f"nested family enumeration exceeds {size_limit} partitions"
                    )
                yield Partition(tuple(bundles), m)


# --- allocation --------------------------------------------------------------

def fully_intersecting(p: Partition, q: Partition) -> bool:
    """True iff every bundle of p intersects every bundle of q (3x3 grids)."""
    if p.n != 3 or q.n != 3:
        raise ValueError("fully_intersecting is defined for three-bundle partitions")
    if p.m != q.m:
        raise ValueError("partitions must cover the same item set")
    return all(b & c for b in p.bundles for c in q.bundles)


def _acceptable(v: Valuation, bundle: frozenset[int], s: Fraction) -> bool:
    return bundle_value(v, bundle) >= s


def ns3_base_allocate(
    vals: Sequence[Valuation],
    parts: Sequence[Partition],
) -> Allocation:
    """Give three agents bundles worth their own three-partition minima.

    Each agent k brings a partition P^k; her target is the least valuable
    bundle of P^k under her own valuation.  Works whenever no two of the
    partitions are fully intersecting (always true for nested-share
    partitions of a common ordering).  Every branch is verified against
    the targets before being returned; if no branch applies a
    CaseAnalysisExhausted bug-check fires.
    """
    if len(vals) != 3 or len(parts) != 3:
        raise ValueError("exactly three agents and three partitions required")
    m = parts[0].m
    full = frozenset(range(m))
    s = [min(bundle_value(vals[k], b) for b in parts[k].bundles) for k in range(3)]

    def finish(assign: dict[int, frozenset[int]]) -> Allocation | None:
        bundles = [set(assign.get(i, frozenset())) for i in range(3)]
        leftover = set(full)
        for b in bundles:
            leftover -= b
        bundles[0] |= leftover  # goods: leftovers can only help
        got = [frozenset(b) for b in bundles]
        if all(bundle_value(vals[i], got[i]) >= s[i] for i in range(3)):
            return Allocation.from_bundles(got, m)
        return None

    pairs = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]

    # case 1: two bundles of P^k acceptable to agent i -> hand out P^k whole
    for i, k in pairs:
        bundles_k = parts[k].bundles
        ok_i = [t for t, b in enumerate(bundles_k) if _acceptable(vals[i], b, s[i])]
        if len(ok_i) < 2:
            continue
        l = 3 - i - k
        for t_l, b_l in enumerate(bundles_k):
            if not _acceptable(vals[l], b_l, s[l]):
                continue
            for t_i in ok_i:
                if t_i == t_l:
                    continue
                (t_k,) = [t for t in range(3) if t not in (t_l, t_i)]
                alloc = finish({l: b_l, i: bundles_k[t_i], k: bundles_k[t_k]})
                if alloc is not None:
                    return alloc

    # case 2: a bundle of P^k unacceptable to agent i, disjoint from one of P^i
    for i, k in pairs:
        l = 3 - i - k
        for b in parts[k].bundles:
            if _acceptable(vals[i], b, s[i]):
                continue
            for bp in parts[i].bundles:
                if b & bp:
                    continue
                rest = full - b - bp
                if _acceptable(vals[l], b, s[l]):
                    # third agent takes b; cut-and-choose between i and k
                    if bundle_value(vals[k], bp) >= bundle_value(vals[k], rest):
                        cand = finish({l: b, k: bp, i: rest})
                    else:
                        cand = finish({l: b, k: rest, i: bp})
                else:
                    # owner k keeps b; third agent picks her better half
                    if bundle_value(vals[l], bp) >= bundle_value(vals[l], rest):
                        cand = finish({k: b, l: bp, i: rest})
                    else:
                        cand = finish({k: b, l: rest, i: bp})
                if cand is not None:
                    return cand

    # case 3a: two bundles of P^i acceptable to the two other agents
    for i in range(3):
        others = [o for o in range(3) if o != i]
        bundles_i = parts[i].bundles
        for t1 in range(3):
            for t2 in range(3):
                if t1 == t2:
                    continue
                if _acceptable(vals[others[0]], bundles_i[t1], s[others[0]]) and _acceptable(
                    vals[others[1]], bundles_i[t2], s[others[1]]
                ):
                    (t3,) = [t for t in range(3) if t not in (t1, t2)]
                    alloc = finish(
                        {others[0]: bundles_i[t1], others[1]: bundles_i[t2], i: bundles_i[t3]}
                    )
                    if alloc is not None:
                        return alloc

    # case 3b: each partition holds one bundle acceptable to both other
    # agents; the three such bundles are pairwise disjoint
    picks = []
    for i in range(3):
        others = [o for o in range(3) if o != i]
        both = [
            b
            for b in parts[i].bundles
            if all(_acceptable(vals[o], b, s[o]) for o in others)
        ]
        if not both:
            break
        picks.append(both[0])
    if len(picks) == 3 and not (picks[0] & picks[1] or picks[0] & picks[2] or picks[1] & picks[2]):
        alloc = finish({0: picks[0], 1: picks[1], 2: picks[2]})
        if alloc is not None:
            return alloc

    raise CaseAnalysisExhausted(
        "no assignment case applied; inputs violate the non-fully-intersecting "
        "precondition or this is a bug"
    )


def _restrict(v: Valuation, ranks: Sequence[int]) -> Valuation:
    return Valuation(tuple(v.values[r] for r in ranks))


def _ns_allocate_ordered(inst: Instance, q: int) -> Allocation:
    """Nested-share allocation for an ordered instance (all agents agree on
    the item order and each valuation is descending in the item index).

    Peels off one bin per surplus agent: bin i starts with item i and is
    topped up from the cheap end until somebody values it at least her
    original share; then the remaining q agents are settled by
    cut-and-choose (q <= 2) or the three-partition assignment (q = 3).
    """
    n, m = inst.n, inst.m
    shares = [ns_share(inst.valuations[i], n, q)[0] for i in range(n)]
    active = list(range(n))
    bundles: dict[int, set[int]] = {}
    lo, hi = 0, m  # remaining items are always the rank window [lo, hi)

    while len(active) > q:
        n_rem = len(active)
        bin_items = {lo}
        lo += 1
        taker = None
        while taker is None:
            for a in active:
                if bundle_value(inst.valuations[a], bin_items) >= shares[a]:
                    taker = a
                    break
            if taker is None:
                if hi <= lo:
                    raise AssertionError(
                        "peeling exhausted the items; share monotonicity violated"
                    )
                hi -= 1
                bin_items.add(hi)
        bundles[taker] = set(bin_items)
        active.remove(taker)
        # monotonicity self-check: every survivor's share on the leftovers
        # must still cover her original share
        window = list(range(lo, hi))
        for a in active:
            rest_share = ns_share(_restrict(inst.valuations[a], window), n_rem - 1, q)[0]
            if rest_share < shares[a]:
                raise AssertionError(
                    f"peeling lowered agent {a}'s attainable share "
                    f"({rest_share} < {shares[a]})"
                )

    window = list(range(lo, hi))
    if len(active) == 1:
        bundles[active[0]] = set(window)
    elif len(active) == 2:
        cutter, chooser = active
        _, wit = ns_share(_restrict(inst.valuations[cutter], window), 2, min(q, 2))
        halves = [
            {window[r] for r in b} for b in wit.rank_bundles
        ]
        v_ch = inst.valuations[chooser]
        if bundle_value(v_ch, halves[1]) > bundle_value(v_ch, halves[0]):
            bundles[chooser], bundles[cutter] = halves[1], halves[0]
        else:
            bundles[chooser], bundles[cutter] = halves[0], halves[1]
    elif len(active) == 3:
        sub_vals = [_restrict(inst.valuations[a], window) for a in active]
        sub_parts = []
        for sv in sub_vals:
            _, wit = ns_share(sv, 3, 3)
            sub_parts.append(wit.partition)
        sub_alloc = ns3_base_allocate(sub_vals, sub_parts)
        for idx, a in enumerate(active):
            bundles[a] = {window[r] for r in sub_alloc.bundle_of_agent(idx)}
    else:  # pragma: no cover - active never exceeds q here
        raise AssertionError("terminal stage reached with more than q agents")

    return Allocation.from_bundles(
        [frozenset(bundles.get(i, set())) for i in range(n)], m
    )


def ns_allocate(inst: Instance, q: int) -> Allocation:
    """Allocation giving every agent at least her nested share (q <= 3).

    Arbitrary instances are reduced to ordered ones by the picking-sequence
    transformation, which can only increase each agent's value for her own
    bundle.
    """
    if q < 1 or q > inst.n:
        raise ValueError(f"q={q} out of range 1..{inst.n}")
    if q > 3:
        raise UnsupportedShareError(
            f"nested-share allocation with q={q} rejected: feasibility unproven for q > 3"
        )
    return picking.ordered_reduction(inst, lambda ordered: _ns_allocate_ordered(ordered, q))


# --- adversarial generator ----------------------------------------------------

def worstcase_instance(k: int, max_m: int = 1000) -> tuple[Valuation, int, Partition]:
    """Grouped instance on which the q=1 nested share is far below the MMS.

    Group a (0 <= a <= k) holds 4^a "large" items of value 1 - a/(2k) and
    2*4^a "small" items of value a/(2k); n = (4^(k+1)-1)/3 agents and
    m = 3n items.  Also returns an explicit partition whose minimum bundle
    value is 3/2 - 1/(2k): a certified lower bound on the MMS, since the
    exact MMS of these instances is out of oracle reach.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = (4 ** (k + 1) - 1) // 3
    m = 3 * n
    if m > max_m:
        raise ValueError(f"worst-case instance needs m={m} > limit {max_m}")

    large_ids: dict[int, list[int]] = {}
    small_ids: dict[int, list[int]] = {}
    values: list[Fraction] = []
    next_id = 0
    # emit in descending value order: large items by ascending group, then
    # small items by descending group
    for a in range(k + 1):
        large_ids[a] = []
        for _ in range(4**a):
            values.append(1 - Fraction(a, 2 * k))
            large_ids[a].append(next_id)
            next_id += 1
    for a in range(k, -1, -1):
        small_ids[a] = []
        for _ in range(2 * 4**a):
            values.append(Fraction(a, 2 * k))
            small_ids[a].append(next_id)
            next_id += 1

    bundles: list[frozenset[int]] = []
    for a in range(1, k + 1):
        larges = large_ids[a]
        smalls = small_ids[a - 1]
        # 2 * 4^(a-1) bundles: two group-a large items plus one group-(a-1) small
        for t in range(2 * 4 ** (a - 1)):
            bundles.append(
                frozenset([larges[2 * t], larges[2 * t + 1], smalls[t]])
            )
    k_smalls = list(small_ids[k])
    # all but two group-k smalls go out in triples of value 3/2
    for t in range((2 * 4**k - 2) // 3):
        bundles.append(frozenset(k_smalls[3 * t : 3 * t + 3]))
    bundles.append(frozenset(k_smalls[-2:] + [large_ids[0][0]]))
    assert len(bundles) == n
    return Valuation(tuple(values)), n, Partition(tuple(bundles), m)
