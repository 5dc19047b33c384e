"""Exact-arithmetic domain types shared by every other module.

All values are nonnegative rationals (`fractions.Fraction`); no floating
point ever enters a value computation.  Instances, partitions and
allocations are immutable value types, safe to share between threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction

__all__ = [
    "Rational",
    "ParseError",
    "parse_rational",
    "format_rational",
    "Valuation",
    "OrderedValuation",
    "Instance",
    "Partition",
    "Allocation",
    "ShareSpec",
    "ValidationRow",
    "ValidationReport",
    "parse_instance",
    "serialize_instance",
    "parse_allocation",
    "serialize_allocation",
    "order",
    "bundle_value",
    "validate_allocation",
]


class ParseError(ValueError):
    """Malformed input: bad JSON, negative value, ragged rows, n < 1."""


def parse_rational(text) -> Rational:
    """Parse "p/q", "p" or a decimal string like "0.25" as an exact rational.

    Plain ints are accepted; binary floats are rejected because they carry
    rounding noise the caller never intended.
    """
    if isinstance(text, bool):
        raise ParseError(f"not a rational value: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise ParseError(
            f"refusing float literal {text!r}: quote it as a decimal string"
        )
    if isinstance(text, Fraction):
        return text
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational value: {text!r}") from exc


def format_rational(q: Rational) -> str:
    """Render as "p/q", or "p" when the denominator is 1."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Valuation:
    """Additive item values, indexed by original item id 0..m-1."""

    values: tuple[Rational, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(Fraction(x) for x in self.values))
        for j, x in enumerate(self.values):
            if x < 0:
                raise ValueError(f"item {j} has negative value {x}")

    @property
    def m(self) -> int:
        return len(self.values)

    def total(self) -> Rational:
        return sum(self.values, Fraction(0))

    def value(self, bundle: Iterable[int]) -> Rational:
        return bundle_value(self, bundle)

    def scaled(self, c: Rational) -> "Valuation":
        c = Fraction(c)
        if c <= 0:
            raise ValueError("scale factor must be positive")
        return Valuation(tuple(x * c for x in self.values))


@dataclass(frozen=True)
class OrderedValuation:
    """A valuation sorted descending, with the permutation back to item ids.

    ``perm[j]`` is the original id of the rank-j item (0-based ranks).  Ties
    are broken by ascending original id, so the sort is stable and
    reproducible; share values never depend on the tie-break.
    """

    sorted_values: tuple[Rational, ...]
    perm: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.sorted_values)

    def total(self) -> Rational:
        return sum(self.sorted_values, Fraction(0))

    def rank_value(self, ranks: Iterable[int]) -> Rational:
        return sum((self.sorted_values[r] for r in ranks), Fraction(0))

    def ranks_to_items(self, ranks: Iterable[int]) -> frozenset[int]:
        return frozenset(self.perm[r] for r in ranks)

    def to_valuation(self) -> Valuation:
        """The rank-indexed companion valuation (already sorted)."""
        return Valuation(self.sorted_values)


def order(v: Valuation, tie_break: str = "id") -> OrderedValuation:
    """Sort items by descending value.

    ``tie_break`` is "id" (ascending original id, the default used
    everywhere) or "rev" (descending id), kept only so tests can confirm
    share values do not depend on how ties are broken.
    """
    if tie_break == "id":
        ids = sorted(range(v.m), key=lambda j: (-v.values[j], j))
    elif tie_break == "rev":
        ids = sorted(range(v.m), key=lambda j: (-v.values[j], -j))
    else:
        raise ValueError(f"unknown tie_break {tie_break!r}")
    return OrderedValuation(tuple(v.values[j] for j in ids), tuple(ids))


def bundle_value(v: Valuation, bundle: Iterable[int]) -> Rational:
    """Exact value of a bundle of original item ids; v(empty) = 0."""
    total = Fraction(0)
    for j in bundle:
        if not 0 <= j < v.m:
            raise ValueError(f"item id {j} out of range 0..{v.m - 1}")
        total += v.values[j]
    return total


@dataclass(frozen=True)
class Instance:
    """n agents' additive valuations over a common set of m items."""

    valuations: tuple[Valuation, ...]
    agent_labels: tuple[str, ...] = ()
    item_labels: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.valuations) < 1:
            raise ValueError("instance needs at least one agent")
        m = self.valuations[0].m
        for i, v in enumerate(self.valuations):
            if v.m != m:
                raise ValueError(
                    f"agent {i} has {v.m} values, expected {m} (ragged instance)"
                )
        if not self.agent_labels:
            object.__setattr__(
                self,
                "agent_labels",
                tuple(f"a{i}" for i in range(len(self.valuations))),
            )
        if len(self.agent_labels) != len(self.valuations):
            raise ValueError("agent label count does not match agent count")

    @property
    def n(self) -> int:
        return len(self.valuations)

    @property
    def m(self) -> int:
        return self.valuations[0].m

    @staticmethod
    def identical(v: Valuation, n: int) -> "Instance":
        return Instance(tuple([v] * n))


@dataclass(frozen=True)
class Partition:
    """n disjoint bundles of item ids whose union is 0..m-1 (empties allowed)."""

    bundles: tuple[frozenset[int], ...]
    m: int

    def __post_init__(self):
        object.__setattr__(
            self, "bundles", tuple(frozenset(b) for b in self.bundles)
        )
        seen: set[int] = set()
        for b in self.bundles:
            if b & seen:
                raise ValueError(f"items {sorted(b & seen)} appear in two bundles")
            seen |= b
        if seen != set(range(self.m)):
            missing = sorted(set(range(self.m)) - seen)
            extra = sorted(seen - set(range(self.m)))
            raise ValueError(f"not a partition: missing {missing}, extra {extra}")

    @property
    def n(self) -> int:
        return len(self.bundles)


@dataclass(frozen=True)
class Allocation:
    """A partition with bundle j handed to agent ``agent_of_bundle[j]``."""

    partition: Partition
    agent_of_bundle: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.agent_of_bundle) != list(range(self.partition.n)):
            raise ValueError("agent assignment must be a bijection onto bundles")

    @property
    def n(self) -> int:
        return self.partition.n

    def bundle_of_agent(self, i: int) -> frozenset[int]:
        j = self.agent_of_bundle.index(i)
        return self.partition.bundles[j]

    @staticmethod
    def from_bundles(bundles: Sequence[Iterable[int]], m: int) -> "Allocation":
        """Bundle i belongs to agent i."""
        part = Partition(tuple(frozenset(b) for b in bundles), m)
        return Allocation(part, tuple(range(len(bundles))))


# --- share descriptors ------------------------------------------------------

_SHARE_KINDS = {
    "ps",
    "rho-mms",
    "mms",
    "top-n",
    "top-n-1",
    "picking",
    "roundrobin",
    "ns",
    "ptas2",
}


@dataclass(frozen=True)
class ShareSpec:
    """Tagged descriptor of a share function and its parameters.

    kinds: ps | rho-mms(rho) | mms | top-n | top-n-1 | picking(order) |
    roundrobin | ns(q) | ptas2(epsilon).
    """

    kind: str
    rho: Rational | None = None
    q: int | None = None
    epsilon: Rational | None = None
    order_turns: tuple[int, ...] | None = None
    order_n: int | None = None

    def __post_init__(self):
        if self.kind not in _SHARE_KINDS:
            raise ValueError(f"unknown share kind {self.kind!r}")
        if self.kind == "rho-mms":
            if self.rho is None or not 0 < self.rho <= 1:
                raise ValueError("rho-mms needs rho in (0, 1]")
        if self.kind == "ns":
            if self.q is None or self.q < 1:
                raise ValueError("ns needs an integer q >= 1")
        if self.kind == "ptas2":
            if self.epsilon is None or self.epsilon <= 0:
                raise ValueError("ptas2 needs epsilon > 0")
        if self.kind == "picking" and self.order_turns is None:
            raise ValueError("picking needs an explicit order")

    @staticmethod
    def ps() -> "ShareSpec":
        return ShareSpec("ps")

    @staticmethod
    def mms() -> "ShareSpec":
        return ShareSpec("mms")

    @staticmethod
    def rho_mms(rho) -> "ShareSpec":
        return ShareSpec("rho-mms", rho=Fraction(rho))

    @staticmethod
    def top_n() -> "ShareSpec":
        return ShareSpec("top-n")

    @staticmethod
    def top_n_minus_1() -> "ShareSpec":
        return ShareSpec("top-n-1")

    @staticmethod
    def picking(turns: Sequence[int], n: int) -> "ShareSpec":
        return ShareSpec("picking", order_turns=tuple(turns), order_n=n)

    @staticmethod
    def round_robin() -> "ShareSpec":
        return ShareSpec("roundrobin")

    @staticmethod
    def ns(q: int) -> "ShareSpec":
        return ShareSpec("ns", q=q)

    @staticmethod
    def ptas2(epsilon) -> "ShareSpec":
        return ShareSpec("ptas2", epsilon=Fraction(epsilon))

    def describe(self) -> str:
        if self.kind == "rho-mms":
            return f"rho-mms({format_rational(self.rho)})"
        if self.kind == "ns":
            return f"ns(q={self.q})"
        if self.kind == "ptas2":
            return f"ptas2(eps={format_rational(self.epsilon)})"
        if self.kind == "picking":
            return f"picking({','.join(map(str, self.order_turns))})"
        return self.kind


# --- serialization ----------------------------------------------------------

def parse_instance(data: bytes | str) -> Instance:
    """Parse the canonical instance JSON; every value becomes an exact rational.

    Schema: {"n": int, "m": int, "agents": [{"id": str, "values": [str, ...]}]}.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict) or "agents" not in doc:
        raise ParseError("instance JSON must be an object with an 'agents' list")
    agents = doc["agents"]
    if not isinstance(agents, list) or len(agents) < 1:
        raise ParseError("instance needs at least one agent (n < 1)")
    n = doc.get("n", len(agents))
    if n != len(agents):
        raise ParseError(f"declared n={n} but {len(agents)} agents listed")
    labels = []
    valuations = []
    m = doc.get("m")
    for i, agent in enumerate(agents):
        if not isinstance(agent, dict) or "values" not in agent:
            raise ParseError(f"agent {i}: expected an object with 'values'")
        labels.append(str(agent.get("id", f"a{i}")))
        row = agent["values"]
        if m is None:
            m = len(row)
        if len(row) != m:
            raise ParseError(
                f"agent {i} ({labels[-1]}): {len(row)} values, expected {m}"
            )
        parsed = []
        for j, cell in enumerate(row):
            try:
                val = parse_rational(cell)
            except ParseError as exc:
                raise ParseError(f"agent {i}, item {j}: {exc}") from exc
            if val < 0:
                raise ParseError(f"agent {i}, item {j}: negative value {cell!r}")
            parsed.append(val)
        valuations.append(Valuation(tuple(parsed)))
    return Instance(tuple(valuations), tuple(labels))


def serialize_instance(inst: Instance) -> str:
    doc = {
        "n": inst.n,
        "m": inst.m,
        "agents": [
            {
                "id": inst.agent_labels[i],
                "values": [format_rational(x) for x in inst.valuations[i].values],
            }
            for i in range(inst.n)
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def serialize_allocation(inst: Instance, alloc: Allocation) -> str:
    rows = []
    for i in range(inst.n):
        rows.append(
            {
                "agent": inst.agent_labels[i],
                "items": sorted(alloc.bundle_of_agent(i)),
            }
        )
    return json.dumps({"bundles": rows}, indent=2) + "\n"


def parse_allocation(data: bytes | str, inst: Instance) -> Allocation:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    rows = doc.get("bundles")
    if not isinstance(rows, list):
        raise ParseError("allocation JSON must contain a 'bundles' list")
    by_agent: dict[int, frozenset[int]] = {}
    label_index = {lbl: i for i, lbl in enumerate(inst.agent_labels)}
    for row in rows:
        label = str(row.get("agent"))
        if label not in label_index:
            raise ParseError(f"unknown agent id {label!r}")
        i = label_index[label]
        if i in by_agent:
            raise ParseError(f"agent {label!r} listed twice")
        by_agent[i] = frozenset(int(j) for j in row.get("items", []))
    if set(by_agent) != set(range(inst.n)):
        raise ParseError("allocation must list every agent exactly once")
    bundles = tuple(by_agent[i] for i in range(inst.n))
    return Allocation.from_bundles(bundles, inst.m)


# --- allocation validation ---------------------------------------------------

@dataclass(frozen=True)
class ValidationRow:
    agent: str
    value: Rational
    threshold: Rational
    acceptable: bool


@dataclass(frozen=True)
class ValidationReport:
    rows: tuple[ValidationRow, ...]
    acceptable: bool

    def violators(self) -> list[str]:
        return [r.agent for r in self.rows if not r.acceptable]

    def to_json_dict(self) -> dict:
        return {
            "agents": [
                {
                    "agent": r.agent,
                    "value": format_rational(r.value),
                    "threshold": format_rational(r.threshold),
                    "acceptable": r.acceptable,
                }
                for r in self.rows
            ],
            "acceptable": self.acceptable,
        }


def validate_allocation(
    inst: Instance, alloc: Allocation, thresholds: Sequence[Rational]
) -> ValidationReport:
    """Check that every agent receives value at least her threshold."""
    if alloc.partition.m != inst.m:
        raise ValueError("allocation is over a different item set")
    if alloc.n != inst.n:
        raise ValueError("allocation has a different agent count")
    if len(thresholds) != inst.n:
        raise ValueError("need one threshold per agent")
    rows = []
    for i in range(inst.n):
        got = bundle_value(inst.valuations[i], alloc.bundle_of_agent(i))
        rows.append(
            ValidationRow(
                agent=inst.agent_labels[i],
                value=got,
                threshold=Fraction(thresholds[i]),
                acceptable=got >= thresholds[i],
            )
        )
    return ValidationReport(tuple(rows), all(r.acceptable for r in rows))
