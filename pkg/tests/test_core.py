import json
from fractions import Fraction as F

import pytest

from fairshares.core import (
    Allocation,
    Instance,
    ParseError,
    Partition,
    ShareSpec,
    Valuation,
    bundle_value,
    format_rational,
    order,
    parse_allocation,
    parse_instance,
    parse_rational,
    serialize_allocation,
    serialize_instance,
    validate_allocation,
)


def test_parse_rational_forms():
    assert parse_rational("6/13") == F(6, 13)
    assert parse_rational("0.25") == F(1, 4)
    assert parse_rational("3") == F(3)
    assert parse_rational(7) == F(7)
    with pytest.raises(ParseError):
        parse_rational(0.25)  # binary floats are refused
    with pytest.raises(ParseError):
        parse_rational("abc")


def test_format_rational():
    assert format_rational(F(6, 13)) == "6/13"
    assert format_rational(F(4)) == "4"
    assert format_rational(F(0)) == "0"


def _doc(rows, ids=None):
    agents = []
    for i, row in enumerate(rows):
        agents.append({"id": (ids[i] if ids else f"a{i}"), "values": row})
    return json.dumps({"n": len(rows), "m": len(rows[0]) if rows else 0, "agents": agents})


def test_parse_instance_basic():
    inst = parse_instance(_doc([["3", "2", "2", "2", "1"], ["3", "2", "2", "2", "1"]]))
    assert inst.n == 2 and inst.m == 5
    assert inst.valuations[0].values == (F(3), F(2), F(2), F(2), F(1))


def test_parse_instance_empty_items():
    inst = parse_instance(json.dumps({"n": 1, "m": 0, "agents": [{"id": "a", "values": []}]}))
    assert inst.m == 0


def test_parse_instance_exact_fraction():
    inst = parse_instance(_doc([["6/13", "0.5"]]))
    assert inst.valuations[0].values == (F(6, 13), F(1, 2))


def test_parse_instance_errors_carry_location():
    with pytest.raises(ParseError, match="agent 0, item 1"):
        parse_instance(_doc([["1", "-2"]]))
    with pytest.raises(ParseError, match="agent 1"):
        parse_instance(_doc([["1", "2"], ["1"]]) )
    with pytest.raises(ParseError):
        parse_instance("{not json")
    with pytest.raises(ParseError):
        parse_instance(json.dumps({"n": 0, "m": 0, "agents": []}))


def test_instance_roundtrip_bit_exact():
    inst = parse_instance(_doc([["6/13", "0.5", "3"], ["1", "2", "7/2"]]))
    text = serialize_instance(inst)
    again = parse_instance(text)
    assert again == inst
    assert serialize_instance(again) == text


def test_order_examples():
    ov = order(Valuation((F(1), F(3), F(2))))
    assert ov.sorted_values == (F(3), F(2), F(1))
    assert ov.perm == (1, 2, 0)
    ov2 = order(Valuation((F(4), F(4), F(4))))
    assert ov2.perm == (0, 1, 2)  # stable ties
    ov3 = order(Valuation((F(5), F(4), F(4), F(2))))
    assert ov3.sorted_values == (F(5), F(4), F(4), F(2))
    assert ov3.perm == (0, 1, 2, 3)


def test_order_recovers_original():
    v = Valuation((F(1), F(5), F(2), F(5)))
    ov = order(v)
    rebuilt = [None] * v.m
    for r, item in enumerate(ov.perm):
        rebuilt[item] = ov.sorted_values[r]
    assert tuple(rebuilt) == v.values


def test_bundle_value():
    v = Valuation((F(3), F(2), F(2), F(2), F(1)))
    assert bundle_value(v, {0, 3}) == F(5)
    assert bundle_value(v, set()) == F(0)
    assert bundle_value(Valuation((F(5), F(4), F(4), F(2))), range(4)) == F(15)
    with pytest.raises(ValueError):
        bundle_value(v, {9})


def test_bundle_value_additive_and_scaling():
    v = Valuation((F(3), F(1), F(4), F(2)))
    a, b = {0, 2}, {1, 3}
    assert bundle_value(v, a | b) == bundle_value(v, a) + bundle_value(v, b)
    scaled = v.scaled(F(3, 2))
    assert bundle_value(scaled, a) == F(3, 2) * bundle_value(v, a)


def test_partition_invariants():
    Partition((frozenset({0, 1}), frozenset({2})), 3)
    with pytest.raises(ValueError):
        Partition((frozenset({0}), frozenset({0, 1})), 2)
    with pytest.raises(ValueError):
        Partition((frozenset({0}),), 2)


def test_allocation_assignment_bijection():
    part = Partition((frozenset({0}), frozenset({1})), 2)
    Allocation(part, (1, 0))
    with pytest.raises(ValueError):
        Allocation(part, (0, 0))


def test_allocation_json_roundtrip():
    inst = parse_instance(_doc([["1", "2"], ["2", "1"]], ids=["alice", "bob"]))
    alloc = Allocation.from_bundles([frozenset({1}), frozenset({0})], 2)
    text = serialize_allocation(inst, alloc)
    again = parse_allocation(text, inst)
    assert again.bundle_of_agent(0) == {1}
    assert again.bundle_of_agent(1) == {0}


def test_validate_allocation():
    inst = parse_instance(_doc([["2", "2"], ["2", "2"]]))
    alloc = Allocation.from_bundles([{0}, {1}], 2)
    rep = validate_allocation(inst, alloc, [F(2), F(2)])
    assert rep.acceptable and not rep.violators()
    rep2 = validate_allocation(inst, alloc, [F(2), F(3)])
    assert not rep2.acceptable and rep2.violators() == ["a1"]


def test_validate_allocation_example_bins():
    # four identical agents, bins (3,1),(3,1),(2,2,2),(2,2,2) at threshold 4
    v = Valuation(tuple(map(F, (3, 3, 2, 2, 2, 2, 2, 2, 1, 1))))
    inst = Instance.identical(v, 4)
    alloc = Allocation.from_bundles([{0, 8}, {1, 9}, {2, 3, 4}, {5, 6, 7}], 10)
    rep = validate_allocation(inst, alloc, [F(4)] * 4)
    assert rep.acceptable


def test_share_spec_validation():
    assert ShareSpec.ns(2).q == 2
    assert ShareSpec.ptas2("1/10").epsilon == F(1, 10)
    with pytest.raises(ValueError):
        ShareSpec.rho_mms(0)
    with pytest.raises(ValueError):
        ShareSpec.ns(0)
    with pytest.raises(ValueError):
        ShareSpec.ptas2(0)
    with pytest.raises(ValueError):
        ShareSpec("nope")
