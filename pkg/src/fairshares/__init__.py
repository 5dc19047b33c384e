"""fairshares: exact share-based fairness for indivisible goods.

Share values and guarantees, misreport probing, nested shares with
feasible allocators, picking orders, a two-agent approximation scheme,
exhaustive oracles and an exact mixed-integer certificate solver; all
arithmetic is rational, never floating point.
"""

__version__ = "0.1.0"

from .core import (
    Allocation,
    Instance,
    OrderedValuation,
    ParseError,
    Partition,
    Rational,
    ShareSpec,
    Valuation,
    bundle_value,
    order,
    parse_instance,
    serialize_instance,
    validate_allocation,
)

__all__ = [
    "__version__",
    "Allocation",
    "Instance",
    "OrderedValuation",
    "ParseError",
    "Partition",
    "Rational",
    "ShareSpec",
    "Valuation",
    "bundle_value",
    "order",
    "parse_instance",
    "serialize_instance",
    "validate_allocation",
]
