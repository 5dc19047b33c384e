"""Share semantics: values, guarantees, implied guarantees, probing.

The share value says what an agent is promised; the share guarantee is the
least value of any bundle that honors the promise; the implied guarantee
measures what a misreport would actually earn under the true valuation.
A share is self-maximizing when no report beats the truth, which is probed
here over seeded report families rather than proved.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    Partition,
    Rational,
    ShareSpec,
    Valuation,
    format_rational,
    order,
    parse_rational,
)
from . import nested as _nested
from . import oracle as _oracle
from . import ordinal as _ordinal
from . import picking as _picking

__all__ = [
    "ShareEvaluation",
    "ProbeVerdict",
    "share_value",
    "share_guarantee",
    "evaluate",
    "implied_guarantee",
    "self_max_probe",
    "domination_ratio",
    "ReportPolicy",
    "parse_policy",
]


@dataclass(frozen=True)
class ShareEvaluation:
    spec: ShareSpec
    value: Rational
    guarantee: Rational
    witness: Partition | None = None
    guarantee_bundle: frozenset[int] | None = None


@dataclass(frozen=True)
class ProbeVerdict:
    improved: bool
    baseline: Rational
    best_found: Rational
    witness_report: Valuation | None = None


def _picking_order_for(spec: ShareSpec, v: Valuation, n: int) -> "_picking.PickingOrder":
    if spec.kind == "roundrobin":
        return _picking.round_robin_order(n, v.m)
    assert spec.kind == "picking" and spec.order_turns is not None
    if spec.order_n != n:
        raise ValueError(f"picking order is for {spec.order_n} agents, asked for {n}")
    return _picking.PickingOrder(n, spec.order_turns)


def share_value(
    spec: ShareSpec, v: Valuation, n: int, limits: "_oracle.ScaleLimits | None" = None
) -> Rational:
    """Dispatch to the share definition; exact rational result."""
    if n < 1:
        raise ValueError("agent count must be >= 1")
    limits = limits or _oracle.DEFAULT_LIMITS
    ov = order(v)
    if spec.kind == "ps":
        return v.total() / n
    if spec.kind == "mms":
        return _oracle.mms_exact(v, n, limits)[0]
    if spec.kind == "rho-mms":
        return spec.rho * _oracle.mms_exact(v, n, limits)[0]
    if spec.kind == "top-n":
        return ov.sorted_values[n - 1] if v.m >= n else Fraction(0)
    if spec.kind == "top-n-1":
        # min of the (n-1)-th value and the total of the m-n+1 smallest values
        small_count = v.m - n + 1
        tail = (
            sum(ov.sorted_values[v.m - small_count :], Fraction(0))
            if small_count > 0
            else Fraction(0)
        )
        if n == 1:
            return tail
        head = ov.sorted_values[n - 2] if v.m >= n - 1 else Fraction(0)
        return min(head, tail)
    if spec.kind in ("picking", "roundrobin"):
        return _picking.picking_share(v, _picking_order_for(spec, v, n))
    if spec.kind == "ns":
        if spec.q > n:
            raise ValueError(f"ns share with q={spec.q} undefined for n={n}")
        return _nested.ns_share(v, n, spec.q)[0]
    if spec.kind == "ptas2":
        if n != 2:
            raise ValueError("the ptas2 share is defined only for n = 2")
        return _ordinal.ptas2_share(v, spec.epsilon)[0]
    raise ValueError(f"unknown share kind {spec.kind!r}")  # pragma: no cover


def share_guarantee(
    spec: ShareSpec, v: Valuation, n: int, limits: "_oracle.ScaleLimits | None" = None
) -> Rational:
    """Least value of any bundle worth at least the share value."""
    limits = limits or _oracle.DEFAULT_LIMITS
    value = share_value(spec, v, n, limits)
    return _oracle.min_acceptable_bundle(v, value, limits)[0]


def evaluate(
    spec: ShareSpec, v: Valuation, n: int, limits: "_oracle.ScaleLimits | None" = None
) -> ShareEvaluation:
    """Share value, guarantee, and whatever witness the share carries."""
    limits = limits or _oracle.DEFAULT_LIMITS
    witness: Partition | None = None
    ov = order(v)
    if spec.kind == "mms":
        value, witness = _oracle.mms_exact(v, n, limits)
    elif spec.kind == "ns":
        if spec.q > n:
            raise ValueError(f"ns share with q={spec.q} undefined for n={n}")
        value, ns_wit = _nested.ns_share(v, n, spec.q)
        witness = Partition(
            tuple(ov.ranks_to_items(b) for b in ns_wit.rank_bundles), v.m
        )
    elif spec.kind == "ptas2":
        if n != 2:
            raise ValueError("the ptas2 share is defined only for n = 2")
        value, rank_part = _ordinal.ptas2_share(v, spec.epsilon)
        witness = Partition(
            tuple(ov.ranks_to_items(b) for b in rank_part.bundles), v.m
        )
    elif spec.kind in ("picking", "roundrobin"):
        omega = _picking_order_for(spec, v, n)
        value = _picking.picking_share(v, omega)
        witness = Partition(
            tuple(ov.ranks_to_items(b) for b in omega.rank_partition().bundles),
            v.m,
        )
    else:
        value = share_value(spec, v, n, limits)
    g_value, g_bundle = _oracle.min_acceptable_bundle(v, value, limits)
    return ShareEvaluation(spec, value, g_value, witness, g_bundle)


def implied_guarantee(
    spec: ShareSpec,
    true_v: Valuation,
    report_v: Valuation,
    n: int,
    limits: "_oracle.ScaleLimits | None" = None,
) -> Rational:
    """Lowest true value among bundles acceptable under the report.

    Branch-and-bound over bundles: a branch is pruned once its true value
    reaches the incumbent (values are nonnegative) or once the remaining
    report value cannot reach the report's share threshold.
    """
    if true_v.m != report_v.m:
        raise ValueError("true and reported valuations cover different items")
    limits = limits or _oracle.DEFAULT_LIMITS
    limits.check(true_v.m, n)
    threshold = share_value(spec, report_v, n, limits)
    if threshold <= 0:
        return Fraction(0)
    m = true_v.m
    # order by descending report value so feasibility is reached early
    ids = sorted(range(m), key=lambda j: (-report_v.values[j], j))
    rep = [report_v.values[j] for j in ids]
    tru = [true_v.values[j] for j in ids]
    rep_suffix = [Fraction(0)] * (m + 1)
    for i in range(m - 1, -1, -1):
        rep_suffix[i] = rep_suffix[i + 1] + rep[i]
    if rep_suffix[0] < threshold:
        raise AssertionError("share value exceeds the report's full-set value")
    best = sum(tru, Fraction(0))

    def dfs(idx: int, rep_sum: Fraction, tru_sum: Fraction) -> None:
        nonlocal best
        if rep_sum >= threshold:
            if tru_sum < best:
                best = tru_sum
            return
        if idx == m or tru_sum >= best or rep_sum + rep_suffix[idx] < threshold:
            return
        dfs(idx + 1, rep_sum + rep[idx], tru_sum + tru[idx])
        dfs(idx + 1, rep_sum, tru_sum)

    dfs(0, Fraction(0), Fraction(0))
    return best


# --- probing policies ---------------------------------------------------------

class ReportPolicy:
    """Deterministic generator of candidate misreports for a valuation."""

    def reports(self, v: Valuation) -> Iterable[Valuation]:  # pragma: no cover
        raise NotImplementedError

    def describe(self) -> str:  # pragma: no cover
        raise NotImplementedError


@dataclass(frozen=True)
class ExplicitReports(ReportPolicy):
    candidates: tuple[Valuation, ...]

    def reports(self, v: Valuation) -> Iterable[Valuation]:
        return self.candidates

    def describe(self) -> str:
        return f"explicit({len(self.candidates)})"


@dataclass(frozen=True)
class RandomPerturbations(ReportPolicy):
    """Seeded rational jitter: per-item scaling, global scaling, swaps."""

    count: int
    seed: int

    def reports(self, v: Valuation) -> Iterable[Valuation]:
        rng = random.Random(self.seed)
        m = v.m
        out = []
        for _ in range(self.count):
            mode = rng.randrange(3)
            vals = list(v.values)
            if mode == 0:
                vals = [x * Fraction(rng.randint(1, 40), 20) for x in vals]
            elif mode == 1:
                c = Fraction(rng.randint(1, 60), 12)
                vals = [x * c for x in vals]
                if m:
                    j = rng.randrange(m)
                    vals[j] += Fraction(rng.randint(0, 12), 5)
            else:
                if m >= 2:
                    a, b = rng.sample(range(m), 2)
                    vals[a], vals[b] = vals[b], vals[a]
                if m:
                    j = rng.randrange(m)
                    vals[j] = vals[j] * Fraction(rng.randint(0, 30), 10)
            out.append(Valuation(tuple(vals)))
        return out

    def describe(self) -> str:
        return f"random:{self.count}:{self.seed}"


@dataclass(frozen=True)
class PairwiseSwaps(ReportPolicy):
    def reports(self, v: Valuation) -> Iterable[Valuation]:
        m = v.m
        out = []
        for a in range(m):
            for b in range(a + 1, m):
                vals = list(v.values)
                vals[a], vals[b] = vals[b], vals[a]
                out.append(Valuation(tuple(vals)))
        return out

    def describe(self) -> str:
        return "swaps"


@dataclass(frozen=True)
class ScalingGrid(ReportPolicy):
    factors: tuple[Rational, ...] = (
        Fraction(1, 3),
        Fraction(1, 2),
        Fraction(2, 3),
        Fraction(3, 2),
        Fraction(2),
        Fraction(3),
    )

    def reports(self, v: Valuation) -> Iterable[Valuation]:
        return [v.scaled(c) for c in self.factors]

    def describe(self) -> str:
        return "scale:" + ",".join(format_rational(c) for c in self.factors)


def parse_policy(text: str) -> ReportPolicy:
    """Parse a policy string: random:<count>:<seed> | swaps | scale[:grid] | file:<path>."""
    if text == "swaps":
        return PairwiseSwaps()
    if text == "scale":
        return ScalingGrid()
    if text.startswith("scale:"):
        factors = tuple(parse_rational(t) for t in text[len("scale:") :].split(","))
        return ScalingGrid(factors)
    if text.startswith("random:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("random policy must look like random:<count>:<seed>")
        return RandomPerturbations(int(parts[1]), int(parts[2]))
    if text.startswith("file:"):
        import json

        with open(text[len("file:") :], "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        cands = tuple(
            Valuation(tuple(parse_rational(x) for x in row)) for row in doc
        )
        return ExplicitReports(cands)
    raise ValueError(f"unknown probe policy {text!r}")


def self_max_probe(
    spec: ShareSpec,
    v: Valuation,
    n: int,
    policy: ReportPolicy,
    limits: "_oracle.ScaleLimits | None" = None,
) -> ProbeVerdict:
    """Try every candidate report; flag any that beats truthful reporting."""
    limits = limits or _oracle.DEFAULT_LIMITS
    baseline = share_guarantee(spec, v, n, limits)
    best = baseline
    witness: Valuation | None = None
    for report in policy.reports(v):
        ig = implied_guarantee(spec, v, report, n, limits)
        if ig > best:
            best = ig
            witness = report
    return ProbeVerdict(
        improved=best > baseline,
        baseline=baseline,
        best_found=best,
        witness_report=witness,
    )


def domination_ratio(
    spec: ShareSpec,
    instances: Sequence[tuple[Valuation, int]],
    limits: "_oracle.ScaleLimits | None" = None,
) -> tuple[Rational, tuple[Valuation, int] | None, list[dict]]:
    """Worst share/MMS ratio over the given (valuation, n) pairs.

    Both zero counts as ratio 1.  A positive share on a zero-MMS valuation
    cannot happen for partition-defined shares; entries where it does (PS)
    are reported with ratio None and excluded from the minimum.
    """
    limits = limits or _oracle.DEFAULT_LIMITS
    worst: Fraction | None = None
    argmin: tuple[Valuation, int] | None = None
    table: list[dict] = []
    for v, n in instances:
        share = share_value(spec, v, n, limits)
        mms = _oracle.mms_exact(v, n, limits)[0]
        if mms == 0:
            ratio = Fraction(1) if share == 0 else None
        else:
            ratio = share / mms
        table.append({"share": share, "mms": mms, "ratio": ratio, "n": n})
        if ratio is not None and (worst is None or ratio < worst):
            worst = ratio
            argmin = (v, n)
    if worst is None:
        raise ValueError("no instance produced a defined ratio")
    return worst, argmin, table
