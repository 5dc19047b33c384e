"""Named fixture instances with regression-locked expected values.

Every expected value carries a source note saying how it is known (which
oracle or algorithm certifies it); the test suite recomputes each one on
every run, so the catalog doubles as a regression lock.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .core import Instance, Rational, ShareSpec, Valuation

__all__ = ["CatalogEntry", "CATALOG", "get", "names"]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    instance: Instance
    expected: tuple[tuple[ShareSpec, Rational, str], ...] = ()
    note: str = ""
    report: Valuation | None = None  # paired misreport, for probe fixtures
    metadata: Mapping[str, object] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def valuation(self) -> Valuation:
        return self.instance.valuations[0]


def _identical(values, n: int) -> Instance:
    return Instance.identical(Valuation(tuple(Fraction(x) for x in values)), n)


def _v(values) -> Valuation:
    return Valuation(tuple(Fraction(x) for x in values))


_F = Fraction

CATALOG: dict[str, CatalogEntry] = {}


def _add(entry: CatalogEntry) -> None:
    CATALOG[entry.name] = entry


_add(
    CatalogEntry(
        name="example-ns",
        instance=_identical((3, 3, 2, 2, 2, 2, 2, 2, 1, 1), 4),
        expected=(
            (ShareSpec.mms(), _F(5), "exhaustive partition oracle"),
            (ShareSpec.ns(1), _F(4), "nested DP, brute-force family cross-check"),
            (ShareSpec.ns(2), _F(4), "nested DP, brute-force family cross-check"),
            (ShareSpec.ns(3), _F(4), "nested DP, brute-force family cross-check"),
            (ShareSpec.ns(4), _F(4), "nested DP, brute-force family cross-check"),
        ),
        note="four identical agents where every nested share stalls at 4 against a maximin of 5",
    )
)

_add(
    CatalogEntry(
        name="rho21",
        instance=_identical((3, 2, 2, 2, 1), 2),
        expected=(
            (ShareSpec.mms(), _F(5), "exhaustive partition oracle"),
            (ShareSpec.ns(1), _F(4), "nested DP, brute-force family cross-check"),
        ),
        note="two-agent instance pinning the q=1 nested-share ratio at 4/5",
    )
)

_add(
    CatalogEntry(
        name="rho22",
        instance=_identical((4, 3, 2, 2, 1), 2),
        expected=(
            (ShareSpec.mms(), _F(6), "exhaustive partition oracle"),
            (ShareSpec.ns(2), _F(5), "nested DP, brute-force family cross-check"),
        ),
        note="two-agent instance pinning the q=2 nested-share ratio at 5/6",
    )
)

_add(
    CatalogEntry(
        name="rho31",
        instance=_identical(
            (
                _F(6, 13),
                _F(6, 13),
                _F(5, 13),
                _F(5, 13),
                _F(5, 13),
                _F(4, 13),
                _F(4, 13),
                _F(2, 13),
                _F(2, 13),
            ),
            3,
        ),
        expected=(
            (ShareSpec.mms(), _F(1), "exhaustive partition oracle"),
            (ShareSpec.ns(1), _F(10, 13), "nested DP, brute-force family cross-check"),
        ),
        note="three-agent thirteenths instance where the q=1 nested share drops to 10/13",
        metadata={
            "decimal_form": (
                "0.4615",
                "0.4615",
                "0.3846",
                "0.3846",
                "0.3846",
                "0.3077",
                "0.3077",
                "0.1539",
                "0.1539",
            ),
            "decimal_note": "rounded decimal rendering of the exact thirteenths fixture",
        },
    )
)

_add(
    CatalogEntry(
        name="rho42",
        instance=_identical((4, 4, 3, 3, 3, 3, 3, 3, 2, 2, 2), 4),
        expected=(
            (ShareSpec.mms(), _F(8), "exhaustive partition oracle"),
            (ShareSpec.ns(2), _F(6), "nested DP, brute-force family cross-check"),
        ),
        note="four-agent instance pinning the q=2 nested-share ratio at 3/4",
    )
)

_add(
    CatalogEntry(
        name="ps-guarantee",
        instance=_identical((2, 1), 2),
        expected=(
            (ShareSpec.ps(), _F(3, 2), "definition: total over n"),
            (ShareSpec.mms(), _F(1), "exhaustive partition oracle"),
        ),
        note="proportional share 3/2 whose guarantee rounds up to the 2-item",
        metadata={"expected_ps_guarantee": "2"},
    )
)

_add(
    CatalogEntry(
        name="ps-implied",
        instance=_identical((5, 4, 4, 2), 3),
        report=_v((4, 4, 4, 3)),
        expected=(
            (ShareSpec.ps(), _F(5), "definition: total over n"),
        ),
        note="misreport that lifts the proportional implied guarantee from 5 to 6",
        metadata={"expected_implied_guarantee": "6"},
    )
)

_add(
    CatalogEntry(
        name="ps-cex",
        instance=_identical((_F(2, 3), _F(2, 3), _F(2, 3), _F(1, 2), _F(1, 2)), 3),
        report=_v((_F(5, 6), _F(5, 6), _F(5, 6), _F(1, 4), _F(1, 4))),
        expected=(
            (ShareSpec.ps(), _F(1), "definition: total over n"),
        ),
        note="three-agent proportional share beaten by a misreport (guarantee 1 -> 7/6)",
        metadata={"expected_implied_guarantee": "7/6"},
    )
)

_add(
    CatalogEntry(
        name="rhomms-cex",
        instance=_identical((1, _F(3, 4), _F(1, 4)), 2),
        report=_v((1, _F(1, 2), _F(1, 2))),
        expected=(
            (ShareSpec.mms(), _F(1), "exhaustive partition oracle"),
            (ShareSpec.rho_mms(_F(3, 4)), _F(3, 4), "3/4 of the exact maximin"),
        ),
        note="scaled-maximin share beaten by a misreport (guarantee 3/4 -> 1)",
        metadata={"rho": "3/4", "expected_implied_guarantee": "1"},
    )
)

_add(
    CatalogEntry(
        name="ptas-cex",
        instance=_identical((10, 1, 1, 1), 2),
        expected=(
            (ShareSpec.mms(), _F(3), "exhaustive partition oracle"),
            (ShareSpec.ptas2(_F(1, 10)), _F(3), "dominant-item branch equals the maximin"),
            (ShareSpec.ptas2(_F(1)), _F(3), "dominant-item branch equals the maximin"),
        ),
        note="one dominant item: the two-agent approximation collapses to item-vs-rest",
    )
)

_add(
    CatalogEntry(
        name="milp-witness",
        instance=_identical((4, 4, 2, 2, 2, 2, 1, 1, 1, 1), 4),
        expected=(
            (ShareSpec.mms(), _F(5), "exhaustive partition oracle"),
            (ShareSpec.ns(1), _F(4), "nested DP, brute-force family cross-check"),
            (ShareSpec.ns(2), _F(5), "nested DP, brute-force family cross-check"),
            (ShareSpec.ns(3), _F(5), "nested DP, brute-force family cross-check"),
        ),
        note="item values satisfying the certificate model at objective 4",
    )
)

def get(name: str) -> CatalogEntry:
    if name not in CATALOG:
        raise KeyError(f"unknown catalog entry {name!r}; try one of {sorted(CATALOG)}")
    return CATALOG[name]


def names() -> list[str]:
    return sorted(CATALOG)
