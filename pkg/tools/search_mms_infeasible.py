#!/usr/bin/env python3
"""Search for a small 3-agent instance where no allocation meets every
agent's exact maximin share.

Strategy: hill-climb integer value grids on the exact max-min slack
(max over allocations of the worst agent margin), with the number of
surviving slack-0 allocations as tie-break.  Once few allocations
survive, a crossing routine enumerates single and paired value bumps,
filters them by cheap margin arithmetic on the survivors, and confirms
candidates with the full exact search.  A certified hit is re-checked
with the package oracle before freezing.

Usage: python tools/search_mms_infeasible.py --seeds 1 2 3 --iters 30000
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction
from functools import lru_cache

sys.path.insert(0, "src")

from fairshares.core import Instance, Valuation, serialize_instance
from fairshares.oracle import acceptable_allocation_exists, mms_exact

COUNT_CAP = 64
CROSS_CAP = 6  # run the crossing routine when this few allocations survive


@lru_cache(maxsize=400000)
def exact_mms(row: tuple) -> int:
    val = mms_exact(Valuation(tuple(map(Fraction, row))), 3)[0]
    assert val.denominator == 1
    return val.numerator


def slack_count_survivors(values, mms):
    """(best slack, surviving count (capped), survivor assignments)."""
    n = 3
    m = len(values[0])
    order = sorted(range(m), key=lambda j: -max(values[i][j] for i in range(n)))
    rest = [[0] * (m + 1) for _ in range(n)]
    for i in range(n):
        for t in range(m - 1, -1, -1):
            rest[i][t] = rest[i][t + 1] + values[i][order[t]]
    got = [0, 0, 0]
    assign = [0] * m
    best = [None]

    def dfs_best(t):
        if t == m:
            cur = min(got[i] - mms[i] for i in range(3))
            if best[0] is None or cur > best[0]:
                best[0] = cur
            return
        if best[0] is not None and min(got[i] + rest[i][t] - mms[i] for i in range(3)) <= best[0]:
            return
        j = order[t]
        for i in range(3):
            got[i] += values[i][j]
            dfs_best(t + 1)
            got[i] -= values[i][j]

    dfs_best(0)
    top = best[0]
    if top < 0:
        return top, 0, []

    hits = []

    def dfs_enum(t):
        if len(hits) > COUNT_CAP:
            return
        if t == m:
            if min(got[i] - mms[i] for i in range(3)) >= 0:
                hits.append(tuple(assign))
            return
        if min(got[i] + rest[i][t] - mms[i] for i in range(3)) < 0:
            return
        j = order[t]
        for i in range(3):
            got[i] += values[i][j]
            assign[t] = i
            dfs_enum(t + 1)
            got[i] -= values[i][j]

    dfs_enum(0)
    survivors = []
    for h in hits:
        bundles = [[] for _ in range(3)]
        for t, i in enumerate(h):
            bundles[i].append(order[t])
        survivors.append(tuple(tuple(sorted(b)) for b in bundles))
    return top, len(hits), survivors


def try_crossing(values, mms, survivors):
    """Enumerate bump moves that kill every survivor; confirm exactly."""
    m = len(values[0])
    singles = [
        (i, j, d)
        for i in range(3)
        for j in range(m)
        for d in (-2, -1, 1, 2)
        if values[i][j] + d >= 0
    ]

    def margins_die(moved):  # moved: {agent: new_row}
        new_mms = [
            exact_mms(tuple(moved[i])) if i in moved else mms[i] for i in range(3)
        ]
        for bundles in survivors:
            dead = False
            for i in range(3):
                row = moved.get(i, values[i])
                got = sum(row[j] for j in bundles[i])
                if got < new_mms[i]:
                    dead = True
                    break
            if not dead:
                return False
        return True

    def confirm(moved):
        new_values = [list(moved.get(i, values[i])) for i in range(3)]
        new_mms = [exact_mms(tuple(r)) for r in new_values]
        top, cnt, _ = slack_count_survivors(new_values, new_mms)
        if top < 0:
            return new_values
        return None

    for i, j, d in singles:
        row = list(values[i])
        row[j] += d
        moved = {i: row}
        if margins_die(moved):
            hit = confirm(moved)
            if hit:
                return hit
    for a in range(len(singles)):
        i1, j1, d1 = singles[a]
        for b in range(a + 1, len(singles)):
            i2, j2, d2 = singles[b]
            if i1 == i2:
                row = list(values[i1])
                row[j1] += d1
                row[j2] += d2
                if row[j1] < 0 or row[j2] < 0:
                    continue
                moved = {i1: row}
            else:
                r1 = list(values[i1])
                r1[j1] += d1
                r2 = list(values[i2])
                r2[j2] += d2
                moved = {i1: r1, i2: r2}
            if margins_die(moved):
                hit = confirm(moved)
                if hit:
                    return hit
    return None


def magic_base(rng, scale, m):
    perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    cols = m // 3
    mat = [[0] * 3 for _ in range(3)]
    for _ in range(rng.randint(2, 5)):
        p = perms[rng.randrange(6)]
        w = rng.randint(1, scale)
        for r in range(3):
            mat[r][p[r]] += w
    return [mat[r][c % 3] for r in range(3) for c in range(cols)][:m]


def search(seed, iters, report_every=2000):
    rng = random.Random(seed)
    m = rng.choice((9, 9, 12))
    kind = rng.randrange(3)
    if kind == 0:
        base = magic_base(rng, 8, m)
        values = [[10 * b + rng.randint(-3, 3) for b in base] for _ in range(3)]
    elif kind == 1:
        values = [[rng.randint(0, 40) for _ in range(m)] for _ in range(3)]
    else:
        base = [rng.randint(5, 30) for _ in range(m)]
        values = [[b + rng.randint(-4, 4) for b in base] for _ in range(3)]
    values = [[max(0, x) for x in row] for row in values]

    mms = [exact_mms(tuple(r)) for r in values]
    slack, count, survivors = slack_count_survivors(values, mms)
    scaled = False
    t0 = time.time()
    crossings = 0
    for it in range(iters):
        if slack < 0:
            return {"values": values, "seed": seed, "iterations": it}
        if not scaled and slack == 0:
            values = [[8 * x for x in row] for row in values]
            mms = [8 * x for x in mms]
            scaled = True
        if slack == 0 and count <= CROSS_CAP and crossings < 40:
            crossings += 1
            hit = try_crossing(values, mms, survivors)
            if hit is not None:
                return {"values": hit, "seed": seed, "iterations": it}
        i = rng.randrange(3)
        mc = len(values[0])
        move = rng.randrange(4)
        old_row = list(values[i])
        if move == 0:
            j = rng.randrange(mc)
            values[i][j] = max(0, values[i][j] + rng.choice((-2, -1, 1, 2)))
        elif move == 1:  # swap: her own maximin is unchanged
            j, jj = rng.randrange(mc), rng.randrange(mc)
            values[i][j], values[i][jj] = values[i][jj], values[i][j]
        elif move == 2:  # transfer: total preserved
            j, jj = rng.randrange(mc), rng.randrange(mc)
            d = rng.choice((1, 2))
            if values[i][j] >= d:
                values[i][j] -= d
                values[i][jj] += d
        else:
            j = rng.randrange(mc)
            values[i][j] = max(0, values[i][j] + rng.choice((-1, 1)))
        if values[i] == old_row:
            continue
        new_mms = list(mms)
        new_mms[i] = mms[i] if move == 1 else exact_mms(tuple(values[i]))
        ns, nc, nsurv = slack_count_survivors(values, new_mms)
        if (ns, nc) < (slack, count) or ((ns, nc) == (slack, count) and rng.random() < 0.5):
            mms, slack, count, survivors = new_mms, ns, nc, nsurv
        else:
            values[i] = old_row
        if report_every and it % report_every == 0:
            print(
                f"  seed {seed} iter {it}: slack={slack} count={count} "
                f"crossings={crossings} ({time.time()-t0:.0f}s)",
                flush=True,
            )
    return {"values": values, "seed": seed, "iterations": iters} if slack < 0 else None


def certify(values):
    inst = Instance(tuple(Valuation(tuple(map(Fraction, row))) for row in values))
    thresholds = [mms_exact(v, 3)[0] for v in inst.valuations]
    return acceptable_allocation_exists(inst, thresholds) is None


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, nargs="*", default=list(range(20)))
    ap.add_argument("--iters", type=int, default=30000)
    args = ap.parse_args()
    for seed in args.seeds:
        print(f"seed {seed} ...", flush=True)
        hit = search(seed, args.iters)
        if hit is None:
            continue
        print("candidate:", hit, flush=True)
        if certify(hit["values"]):
            inst = Instance(
                tuple(Valuation(tuple(map(Fraction, row))) for row in hit["values"])
            )
            print("CERTIFIED infeasible (oracle re-check):")
            print(serialize_instance(inst))
            print(json.dumps(hit), flush=True)
            return 0
        print("candidate failed oracle re-check (bug?)", flush=True)
    print("no hit; widen seeds/iters")
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
