import random
from fractions import Fraction as F

import pytest

from fairshares.core import ShareSpec, Valuation
from fairshares.shares import (
    ExplicitReports,
    PairwiseSwaps,
    RandomPerturbations,
    ScalingGrid,
    domination_ratio,
    evaluate,
    implied_guarantee,
    parse_policy,
    self_max_probe,
    share_guarantee,
    share_value,
)


def V(*xs):
    return Valuation(tuple(F(x) for x in xs))


def test_share_value_dispatch():
    assert share_value(ShareSpec.ps(), V(5, 4, 4, 2), 3) == F(5)
    assert share_value(ShareSpec.top_n(), V(3, 2, 2, 2, 1), 2) == F(2)
    assert share_value(ShareSpec.ns(2), V(4, 3, 2, 2, 1), 2) == F(5)
    assert share_value(ShareSpec.mms(), V(3, 2, 2, 2, 1), 2) == F(5)
    assert share_value(ShareSpec.rho_mms(F(3, 4)), V(3, 2, 2, 2, 1), 2) == F(15, 4)
    assert share_value(ShareSpec.round_robin(), V(3, 2, 2, 2, 1), 2) == F(4)
    assert share_value(ShareSpec.ptas2(F(1, 5)), V(3, 2, 2, 2, 1), 2) == F(5)


def test_share_value_small_m():
    for spec in (ShareSpec.mms(), ShareSpec.top_n(), ShareSpec.ns(1), ShareSpec.round_robin()):
        assert share_value(spec, V(7), 2) == F(0)
    assert share_value(ShareSpec.top_n_minus_1(), V(7), 2) == F(0)


def test_top_n_minus_1():
    # min of the (n-1)-th item and the lightest (m-n+1)-item bundle
    v = V(9, 5, 3, 2, 1)
    assert share_value(ShareSpec.top_n_minus_1(), v, 3) == F(5)  # min(5, 3+2+1)
    assert share_value(ShareSpec.top_n_minus_1(), V(9, 2, 1, 1), 2) == F(4)  # min(9, 2+1+1)
    assert share_value(ShareSpec.top_n_minus_1(), V(2, 2), 1) == F(4)


def test_top_n_minus_1_dominates_top_n():
    rng = random.Random(41)
    for _ in range(60):
        m = rng.randint(0, 9)
        n = rng.randint(1, 4)
        v = Valuation(tuple(F(rng.randint(0, 9)) for _ in range(m)))
        assert share_value(ShareSpec.top_n_minus_1(), v, n) >= share_value(
            ShareSpec.top_n(), v, n
        )


def test_share_value_errors():
    with pytest.raises(ValueError):
        share_value(ShareSpec.ns(3), V(1, 2), 2)
    with pytest.raises(ValueError):
        share_value(ShareSpec.ptas2(F(1, 4)), V(1, 2), 3)


def test_share_value_realizability_and_name_independence():
    rng = random.Random(42)
    specs = [
        ShareSpec.ps(),
        ShareSpec.mms(),
        ShareSpec.top_n(),
        ShareSpec.top_n_minus_1(),
        ShareSpec.round_robin(),
        ShareSpec.ns(2),
    ]
    for _ in range(25):
        m = rng.randint(0, 8)
        n = rng.randint(2, 4)
        vals = [F(rng.randint(0, 9)) for _ in range(m)]
        v = Valuation(tuple(vals))
        perm = list(range(m))
        rng.shuffle(perm)
        vp = Valuation(tuple(vals[p] for p in perm))
        for spec in specs:
            val = share_value(spec, v, n)
            assert 0 <= val <= v.total()
            assert share_value(spec, vp, n) == val


def test_share_guarantee_fixtures():
    assert share_guarantee(ShareSpec.ps(), V(2, 1), 2) == F(2)
    v = V(3, 2, 2, 2, 1)
    assert share_guarantee(ShareSpec.mms(), v, 2) == share_value(ShareSpec.mms(), v, 2)
    assert share_guarantee(ShareSpec.top_n(), V(), 3) == F(0)


def test_guarantee_equals_value_for_bundle_defined_shares():
    rng = random.Random(43)
    specs = [
        ShareSpec.mms(),
        ShareSpec.top_n(),
        ShareSpec.round_robin(),
        ShareSpec.ns(1),
        ShareSpec.ns(2),
    ]
    for _ in range(25):
        m = rng.randint(0, 8)
        n = rng.randint(2, 3)
        v = Valuation(tuple(F(rng.randint(0, 9)) for _ in range(m)))
        for spec in specs:
            assert share_guarantee(spec, v, n) == share_value(spec, v, n)
    # ptas2 is bundle-defined as well
    for _ in range(10):
        m = rng.randint(0, 10)
        v = Valuation(tuple(F(rng.randint(0, 9)) for _ in range(m)))
        assert share_guarantee(ShareSpec.ptas2(F(1, 3)), v, 2) == share_value(
            ShareSpec.ptas2(F(1, 3)), v, 2
        )


def test_implied_guarantee_fixtures():
    # a misreport can raise the proportional implied guarantee
    assert implied_guarantee(ShareSpec.ps(), V(5, 4, 4, 2), V(4, 4, 4, 3), 3) == F(6)
    # truthful reporting reproduces the share guarantee
    v = V(5, 4, 4, 2)
    assert implied_guarantee(ShareSpec.ps(), v, v, 3) == share_guarantee(
        ShareSpec.ps(), v, 3
    )
    true_v = V(F(2, 3), F(2, 3), F(2, 3), F(1, 2), F(1, 2))
    report = V(F(5, 6), F(5, 6), F(5, 6), F(1, 4), F(1, 4))
    assert implied_guarantee(ShareSpec.ps(), true_v, report, 3) == F(7, 6)


def test_implied_guarantee_rho_mms_counterexample():
    spec = ShareSpec.rho_mms(F(3, 4))
    true_v = V(1, F(3, 4), F(1, 4))
    report = V(1, F(1, 2), F(1, 2))
    assert share_guarantee(spec, true_v, 2) == F(3, 4)
    assert implied_guarantee(spec, true_v, report, 2) == F(1)


def test_self_max_probe_never_improves_sm_shares():
    v = V(3, 2, 2, 2, 1)
    policy = RandomPerturbations(count=120, seed=7)
    for spec in (
        ShareSpec.mms(),
        ShareSpec.top_n(),
        ShareSpec.round_robin(),
        ShareSpec.ns(1),
        ShareSpec.ptas2(F(1, 4)),
    ):
        verdict = self_max_probe(spec, v, 2, policy)
        assert not verdict.improved
        assert verdict.best_found <= verdict.baseline
    # proportional share for two agents is also safe
    assert not self_max_probe(ShareSpec.ps(), v, 2, policy).improved


def test_self_max_probe_counterexamples_improve():
    ps_probe = self_max_probe(
        ShareSpec.ps(),
        V(F(2, 3), F(2, 3), F(2, 3), F(1, 2), F(1, 2)),
        3,
        ExplicitReports((V(F(5, 6), F(5, 6), F(5, 6), F(1, 4), F(1, 4)),)),
    )
    assert ps_probe.improved and ps_probe.best_found == F(7, 6)
    rho_probe = self_max_probe(
        ShareSpec.rho_mms(F(3, 4)),
        V(1, F(3, 4), F(1, 4)),
        2,
        ExplicitReports((V(1, F(1, 2), F(1, 2)),)),
    )
    assert rho_probe.improved and rho_probe.best_found == F(1)
    assert rho_probe.witness_report is not None


def test_probe_policies_deterministic():
    v = V(4, 3, 1)
    a = list(RandomPerturbations(10, 5).reports(v))
    b = list(RandomPerturbations(10, 5).reports(v))
    assert a == b
    assert len(list(PairwiseSwaps().reports(v))) == 3
    assert all(r.total() != 0 for r in ScalingGrid().reports(v))


def test_parse_policy():
    assert parse_policy("random:50:9").describe() == "random:50:9"
    assert parse_policy("swaps").describe() == "swaps"
    assert parse_policy("scale:1/2,2").factors == (F(1, 2), F(2))
    with pytest.raises(ValueError):
        parse_policy("bogus")


def test_sm_guarantee_properties_on_sampled_pairs():
    # monotone, 1-Lipschitz and scale-invariant hold for the exact maximin
    rng = random.Random(44)
    spec = ShareSpec.mms()
    for _ in range(20):
        m = rng.randint(1, 7)
        n = rng.randint(2, 3)
        base = [F(rng.randint(0, 9)) for _ in range(m)]
        lower = [max(F(0), x - F(rng.randint(0, 2))) for x in base]
        v, vl = Valuation(tuple(base)), Valuation(tuple(lower))
        g_v = share_guarantee(spec, v, n)
        assert g_v >= share_guarantee(spec, vl, n)
        # bundle-wise distance <= delta via item jitter summing below delta
        delta = F(1, 2)
        jit = [F(rng.randint(0, 1), 2 * m + 2) for _ in range(m)]
        vj = Valuation(tuple(x + e for x, e in zip(base, jit)))
        assert share_guarantee(spec, vj, n) <= g_v + delta
        c = F(rng.randint(1, 5), rng.randint(1, 3))
        assert share_guarantee(spec, v.scaled(c), n) == c * g_v


def test_domination_ratio():
    worst, arg, table = domination_ratio(ShareSpec.ns(1), [(V(3, 2, 2, 2, 1), 2)])
    assert worst == F(4, 5)
    worst2, _, _ = domination_ratio(ShareSpec.mms(), [(V(5, 1, 1), 3), (V(2, 2), 2)])
    assert worst2 == F(1)
    worst3, _, table3 = domination_ratio(
        ShareSpec.ns(2), [(V(4, 4, 3, 3, 3, 3, 3, 3, 2, 2, 2), 4)]
    )
    assert worst3 == F(3, 4)


def test_domination_ratio_zero_cases():
    worst, _, table = domination_ratio(ShareSpec.mms(), [(V(5, 5), 3)])
    assert worst == F(1) and table[0]["ratio"] == F(1)
    # positive share on a zero-maximin valuation: excluded from the minimum
    worst2, _, table2 = domination_ratio(
        ShareSpec.ps(), [(V(5, 5), 3), (V(2, 2, 2), 3)]
    )
    assert table2[0]["ratio"] is None
    assert worst2 == F(1)


def test_evaluate_carries_witness():
    ev = evaluate(ShareSpec.ns(1), V(3, 2, 2, 2, 1), 2)
    assert ev.value == F(4) and ev.guarantee == F(4)
    assert ev.witness is not None and ev.witness.n == 2
    got = min(
        sum(F(x) for x in (V(3, 2, 2, 2, 1).values[j] for j in b))
        for b in ev.witness.bundles
    )
    assert got == F(4)
