import random
from fractions import Fraction as F

import pytest

from fairshares.core import Instance, Partition, Valuation, bundle_value, validate_allocation
from fairshares.nested import (
    UnsupportedShareError,
    fully_intersecting,
    ns3_base_allocate,
    ns_allocate,
    ns_candidates,
    ns_family,
    ns_feasible_partition,
    ns_share,
    worstcase_instance,
)
from fairshares.oracle import acceptable_allocation_exists, family_eval_bruteforce, mms_exact


def V(*xs):
    return Valuation(tuple(F(x) for x in xs))


EX_NS = V(3, 3, 2, 2, 2, 2, 2, 2, 1, 1)


def test_candidates_small():
    assert ns_candidates(V(2, 1), 2) == [F(0), F(1), F(2), F(3)]
    cands = ns_candidates(EX_NS, 4)
    assert F(4) in cands and F(5) in cands
    assert ns_candidates(V(3, 3, 3), 2) == [F(0), F(3), F(6), F(9)]


def test_feasible_partition_example():
    wit = ns_feasible_partition(EX_NS, 4, 1, F(4))
    assert wit is not None
    values = sorted(bundle_value(EX_NS, b) for b in wit.partition.bundles)
    assert min(values) >= F(4)
    # the singleton prefix bins hold the three largest items
    assert wit.prefix_cuts[0] == 1 and wit.prefix_cuts[1] == 2 and wit.prefix_cuts[2] == 3


def test_feasible_partition_infeasible_at_five():
    assert ns_feasible_partition(EX_NS, 4, 4, F(5)) is None
    assert ns_feasible_partition(EX_NS, 4, 1, F(0)) is not None


def test_feasible_monotone_in_threshold():
    rng = random.Random(9)
    for _ in range(25):
        m = rng.randint(1, 9)
        n = rng.randint(1, 4)
        q = rng.randint(1, n)
        v = Valuation(tuple(F(rng.randint(0, 9)) for _ in range(m)))
        cands = ns_candidates(v, n)
        feas = [ns_feasible_partition(v, n, q, c) is not None for c in cands]
        # once infeasible, stays infeasible for larger thresholds
        seen_false = False
        for ok in feas:
            if not ok:
                seen_false = True
            else:
                assert not seen_false


def test_ns_share_fixtures():
    for q in (1, 2, 3, 4):
        assert ns_share(EX_NS, 4, q)[0] == F(4)
    assert ns_share(V(4, 3, 2, 2, 1), 2, 2)[0] == F(5)
    assert ns_share(V(4, 4, 3, 3, 3, 3, 3, 3, 2, 2, 2), 4, 2)[0] == F(6)
    assert ns_share(V(3, 2, 2, 2, 1), 2, 1)[0] == F(4)


def test_ns_share_small_m():
    assert ns_share(V(5, 1), 3, 1)[0] == F(0)  # m < n
    assert ns_share(V(5, 3, 1), 3, 2)[0] == F(1)  # m = n
    with pytest.raises(ValueError):
        ns_share(V(1, 2), 2, 3)


def test_ns_share_milp_witness_values():
    v = V(4, 4, 2, 2, 2, 2, 1, 1, 1, 1)
    assert ns_share(v, 4, 1)[0] == F(4)
    assert ns_share(v, 4, 2)[0] == F(5)
    assert ns_share(v, 4, 3)[0] == F(5)


def test_witness_shape_and_value():
    rng = random.Random(10)
    for _ in range(40):
        m = rng.randint(1, 10)
        n = rng.randint(1, 4)
        q = rng.randint(1, n)
        v = Valuation(tuple(F(rng.randint(0, 9)) for _ in range(m)))
        value, wit = ns_share(v, n, q)
        got = min(bundle_value(Valuation(tuple(sorted(v.values, reverse=True))),
                               b) for b in wit.partition.bundles)
        assert got == value
        if m > n:
            # structural membership: prefix cuts nondecreasing, singletons first
            cuts = (0,) + wit.prefix_cuts
            assert all(cuts[j] <= cuts[j + 1] for j in range(n))
            for j in range(1, n - q + 1):
                assert cuts[j] == j
            # bundles decompose into the prefix block plus the suffix block
            for j in range(1, n + 1):
                lo_t, hi_t = wit.suffix_takes[j - 1]
                expect = set(range(cuts[j - 1], cuts[j])) | set(
                    range(m - hi_t, m - lo_t)
                )
                assert set(wit.rank_bundles[j - 1]) == expect


def test_ns_share_monotone_in_q():
    rng = random.Random(11)
    for _ in range(30):
        m = rng.randint(1, 9)
        n = rng.randint(2, 4)
        v = Valuation(tuple(F(rng.randint(0, 9)) for _ in range(m)))
        values = [ns_share(v, n, q)[0] for q in range(1, n + 1)]
        assert all(values[i] <= values[i + 1] for i in range(len(values) - 1))


def test_dp_equals_bruteforce_sweep():
    rng = random.Random(12)
    for n in range(1, 5):
        for q in range(1, n + 1):
            for m in range(1, 10):
                for _ in range(2):
                    v = Valuation(tuple(F(rng.randint(0, 8)) for _ in range(m)))
                    dp_val = ns_share(v, n, q)[0]
                    if m > n:
                        bf_val = family_eval_bruteforce(v, ns_family(m, n, q))[0]
                    elif m == n:
                        bf_val = sorted(v.values)[0]
                    else:
                        bf_val = F(0)
                    assert dp_val == bf_val, (v.values, n, q)


def test_thirteenths_fixture_bruteforce():
    # exact reconstruction of the rounded-decimal fixture; the q=1 value
    # drops to 10/13 while the maximin is 1
    v = Valuation(tuple(F(x, 13) for x in (6, 6, 5, 5, 5, 4, 4, 2, 2)))
    assert mms_exact(v, 3)[0] == F(1)
    dp = ns_share(v, 3, 1)[0]
    bf = family_eval_bruteforce(v, ns_family(9, 3, 1))[0]
    assert dp == bf == F(10, 13)


def test_twothirds_ratio_bound_spot():
    rng = random.Random(13)
    for _ in range(50):
        n = rng.choice((2, 3, 4))
        m = rng.randint(n, 9)
        v = Valuation(tuple(F(rng.randint(0, 9)) for _ in range(m)))
        mms = mms_exact(v, n)[0]
        ns = ns_share(v, n, 1)[0]
        assert ns * (3 * n - 1) >= 2 * n * mms


def test_fully_intersecting():
    rows = Partition((frozenset({0, 1, 2}), frozenset({3, 4, 5}), frozenset({6, 7, 8})), 9)
    cols = Partition((frozenset({0, 3, 6}), frozenset({1, 4, 7}), frozenset({2, 5, 8})), 9)
    assert fully_intersecting(rows, cols)
    assert not fully_intersecting(rows, rows)


def test_ns33_partitions_never_fully_intersect():
    rng = random.Random(14)
    for _ in range(25):
        m = rng.randint(4, 10)
        v1 = Valuation(tuple(sorted((F(rng.randint(0, 9)) for _ in range(m)), reverse=True)))
        v2 = Valuation(tuple(sorted((F(rng.randint(0, 9)) for _ in range(m)), reverse=True)))
        p1 = ns_share(v1, 3, 3)[1].partition
        p2 = ns_share(v2, 3, 3)[1].partition
        assert not fully_intersecting(p1, p2)


def test_ns3_base_allocate_identical():
    v = V(5, 4, 3, 2, 1, 1)
    part = ns_share(v, 3, 3)[1].partition
    alloc = ns3_base_allocate([v, v, v], [part, part, part])
    s = min(bundle_value(v, b) for b in part.bundles)
    for i in range(3):
        assert bundle_value(v, alloc.bundle_of_agent(i)) >= s


def test_ns3_base_allocate_random_oracle_check():
    rng = random.Random(15)
    for _ in range(40):
        m = rng.randint(3, 9)
        vals = [
            Valuation(tuple(sorted((F(rng.randint(0, 9)) for _ in range(m)), reverse=True)))
            for _ in range(3)
        ]
        parts = [ns_share(v, 3, 3)[1].partition for v in vals]
        thresholds = [
            min(bundle_value(vals[k], b) for b in parts[k].bundles) for k in range(3)
        ]
        alloc = ns3_base_allocate(vals, parts)
        for k in range(3):
            assert bundle_value(vals[k], alloc.bundle_of_agent(k)) >= thresholds[k]
        inst = Instance(tuple(vals))
        assert acceptable_allocation_exists(inst, thresholds) is not None


def test_ns3_base_allocate_cut_and_choose_branch():
    # frozen from a seeded branch-coverage hill climb (tools-style search):
    # every agent accepts exactly one bundle of every other partition, so
    # the two-acceptable case never fires; the first rejected bundle with a
    # disjoint counterpart is also rejected by the third agent, forcing the
    # sub-branch where the owner keeps her bundle and the third agent
    # chooses between the two complementary bundles
    vals = [
        V(20, 12, 12, 10, 8, 6, 5),
        V(14, 6, 5, 4, 4, 4, 3),
        V(17, 12, 11, 8, 6, 3, 0),
    ]
    parts = [ns_share(v, 3, 3)[1].partition for v in vals]
    thresholds = [
        min(bundle_value(vals[k], b) for b in parts[k].bundles) for k in range(3)
    ]
    assert thresholds == [F(24), F(13), F(18)]
    for i in range(3):
        for k in range(3):
            if i == k:
                continue
            accepted = sum(
                1
                for b in parts[k].bundles
                if bundle_value(vals[i], b) >= thresholds[i]
            )
            assert accepted == 1  # the two-acceptable case cannot fire
    alloc = ns3_base_allocate(vals, parts)
    for k in range(3):
        assert bundle_value(vals[k], alloc.bundle_of_agent(k)) >= thresholds[k]


def test_ns3_base_rejects_wrong_shapes():
    p = Partition((frozenset({0}), frozenset({1})), 2)
    with pytest.raises(ValueError):
        fully_intersecting(p, p)


def test_ns_allocate_identical_agents():
    inst = Instance.identical(EX_NS, 4)
    alloc = ns_allocate(inst, 3)
    for i in range(4):
        assert bundle_value(EX_NS, alloc.bundle_of_agent(i)) >= F(4)
    inst2 = Instance.identical(V(1, 1, 1), 3)
    alloc2 = ns_allocate(inst2, 3)
    for i in range(3):
        assert bundle_value(V(1, 1, 1), alloc2.bundle_of_agent(i)) == F(1)


def test_ns_allocate_fuzz():
    rng = random.Random(16)
    for _ in range(60):
        n = rng.choice((3, 4, 5))
        m = rng.randint(n, 12)
        q = rng.randint(1, 3)
        vals = [Valuation(tuple(F(rng.randint(0, 12)) for _ in range(m))) for _ in range(n)]
        inst = Instance(tuple(vals))
        alloc = ns_allocate(inst, q)
        report = validate_allocation(
            inst, alloc, [ns_share(vals[i], n, q)[0] for i in range(n)]
        )
        assert report.acceptable, report


def test_ns_allocate_rejects_large_q():
    inst = Instance.identical(V(1, 1, 1, 1, 1), 5)
    with pytest.raises(UnsupportedShareError, match="unproven"):
        ns_allocate(inst, 4)
    with pytest.raises(ValueError):
        ns_allocate(Instance.identical(V(1, 1), 2), 3)


def test_worstcase_instance_k1():
    v, n, part = worstcase_instance(1)
    assert n == 5 and v.m == 15
    hist = sorted(v.values)
    assert hist.count(F(0)) == 2 and hist.count(F(1)) == 1 and hist.count(F(1, 2)) == 12
    assert min(bundle_value(v, b) for b in part.bundles) == F(1)
    assert ns_share(v, n, 1)[0] == F(1)


def test_worstcase_instance_k2():
    v, n, part = worstcase_instance(2)
    assert n == 21 and v.m == 63
    assert min(bundle_value(v, b) for b in part.bundles) == F(5, 4)
    assert ns_share(v, n, 1)[0] == F(1)


def test_worstcase_guards():
    with pytest.raises(ValueError):
        worstcase_instance(0)
    with pytest.raises(ValueError):
        worstcase_instance(5, max_m=100)
