#!/usr/bin/env python3
"""Hunt for a 3-agent instance with no maximin-satisfying allocation by lazy
constraint generation.

A mixed-integer model proposes integer values and thresholds together with
witness partitions that pin each agent's maximin share at her threshold;
the exact oracle then searches for an allocation meeting the thresholds,
and every allocation it finds becomes a blocking disjunction (each of its
six bundle assignments must leave someone short) before the model is
re-solved.  When the oracle certifies that no allocation survives, the
instance is maximin-infeasible a fortiori.

Two sound restrictions shrink the space: the instance can be assumed
ordered (the picking-sequence reduction preserves infeasibility) and the
witness partitions can be assumed exactly tight (lowering values inside
witness bundles preserves infeasibility).  With --grid, agents 1 and 2 are
pinned to the rows and columns of a 3x3 layout (the canonical form
whenever their witnesses intersect pairwise in singletons) and agent 3
may be pinned to a fixed third partition shape.

Relaxations are solved in floats by HiGHS; every accepted candidate is
integral and every certificate comes from the exact rational oracle.

Usage:
  python tools/lazy_milp_infeasible.py [--items 9] [--vmax 30] [--grid]
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction as F
from itertools import permutations

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

sys.path.insert(0, "src")

from fairshares.core import Instance, Valuation
from fairshares.oracle import acceptable_allocation_exists, mms_exact


class Model:
    def __init__(self):
        self.nv = 0
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.rows: list[tuple[dict, float, float]] = []

    def var(self, lo, hi) -> int:
        self.nv += 1
        self.lb.append(lo)
        self.ub.append(hi)
        return self.nv - 1

    def row(self, coefs, lo, hi) -> None:
        self.rows.append((dict(coefs), lo, hi))

    def solve(self, time_limit: float):
        A = np.zeros((len(self.rows), self.nv))
        lo = np.zeros(len(self.rows))
        hi = np.zeros(len(self.rows))
        for ri, (coefs, l, h) in enumerate(self.rows):
            for v, c in coefs.items():
                A[ri, v] = c
            lo[ri], hi[ri] = l, h
        return milp(
            c=np.zeros(self.nv),
            constraints=LinearConstraint(A, lo, hi),
            integrality=np.ones(self.nv),
            bounds=Bounds(np.array(self.lb), np.array(self.ub)),
            options={"time_limit": time_limit, "presolve": True},
        )


def enumerate_satisfying(values, thresholds, cap):
    """Up to ``cap`` distinct partitions that admit a satisfying assignment."""
    n, m = 3, len(values[0])
    rest = [[0] * (m + 1) for _ in range(n)]
    for i in range(n):
        for t in range(m - 1, -1, -1):
            rest[i][t] = rest[i][t + 1] + values[i][t]
    got = [0, 0, 0]
    holder = [0] * m
    found: list[list[tuple[int, ...]]] = []
    seen: set = set()

    def dfs(t):
        if len(found) >= cap:
            return
        for i in range(n):
            if got[i] + rest[i][t] < thresholds[i]:
                return
        if t == m:
            bundles = [[] for _ in range(n)]
            for j, h in enumerate(holder):
                bundles[h].append(j)
            key = frozenset(frozenset(b) for b in bundles)
            if key in seen:
                return
            bsets = [tuple(sorted(b)) for b in bundles]
            for perm in permutations(range(3)):
                if all(
                    sum(values[a][j] for j in bsets[perm[a]]) >= thresholds[a]
                    for a in range(3)
                ):
                    seen.add(key)
                    found.append(bsets)
                    break
            return
        for i in range(n):
            got[i] += values[i][t]
            holder[t] = i
            dfs(t + 1)
            got[i] -= values[i][t]

    dfs(0)
    return found


def build(m_items: int, vmax: int, tmin: int, grid: bool, third=None):
    md = Model()
    v = [[md.var(0, vmax) for _ in range(m_items)] for _ in range(3)]
    T = [md.var(tmin, 3 * vmax) for _ in range(3)]

    def tight_witness(agent: int) -> None:
        w = [[md.var(0, 1) for _ in range(3)] for _ in range(m_items)]
        z = [[md.var(0, vmax) for _ in range(3)] for _ in range(m_items)]
        for j in range(m_items):
            md.row({w[j][k]: 1 for k in range(3)}, 1, 1)
            for k in range(3):
                md.row({z[j][k]: 1, v[agent][j]: -1}, -np.inf, 0)
                md.row({z[j][k]: 1, w[j][k]: -vmax}, -np.inf, 0)
                md.row({z[j][k]: 1, v[agent][j]: -1, w[j][k]: -vmax}, -vmax, np.inf)
        for k in range(3):
            coefs = {z[j][k]: 1 for j in range(m_items)}
            coefs[T[agent]] = -1
            md.row(coefs, 0, 0)

    def fixed_witness(agent: int, parts) -> None:
        for part in parts:
            coefs = {v[agent][j]: 1 for j in part}
            coefs[T[agent]] = -1
            md.row(coefs, 0, 0)

    if grid:
        if m_items != 9:
            raise SystemExit("--grid needs 9 items")
        fixed_witness(0, [[3 * r + c for c in range(3)] for r in range(3)])
        fixed_witness(1, [[3 * r + c for r in range(3)] for c in range(3)])
        if third is not None:
            fixed_witness(2, third)
        else:
            tight_witness(2)
    else:
        # ordered instance: values non-increasing per agent
        for a in range(3):
            for j in range(m_items - 1):
                md.row({v[a][j]: 1, v[a][j + 1]: -1}, 0, np.inf)
        for a in range(3):
            tight_witness(a)
        md.row({T[0]: 1, T[1]: -1}, 0, np.inf)
        md.row({T[1]: 1, T[2]: -1}, 0, np.inf)
    return md, v, T


def run(m_items: int, vmax: int, tmin: int, grid: bool, third=None,
        budget_s: float = 1e9, cuts_per_round: int = 10, log=print,
        per_solve_s: float = 300.0):
    md, v, T = build(m_items, vmax, tmin, grid, third)
    big = 10 * vmax

    def add_blocking(bundles):
        for perm in permutations(range(3)):
            ds = []
            for a in range(3):
                d = md.var(0, 1)
                ds.append(d)
                coefs = {v[a][j]: 1 for j in bundles[perm[a]]}
                coefs[T[a]] = -1
                coefs[d] = big
                md.row(coefs, -np.inf, big - 1)
            md.row({d: 1 for d in ds}, 1, np.inf)

    t0 = time.time()
    iteration = 0
    while time.time() - t0 < budget_s:
        iteration += 1
        res = md.solve(time_limit=max(10.0, min(per_solve_s, budget_s - (time.time() - t0))))
        if res.status == 2:
            return "closed", iteration, None
        if res.status != 0:
            # time limit: accept an integral incumbent if one was found
            if res.x is None:
                return "stalled", iteration, None
            xr = np.round(res.x)
            if np.abs(res.x - xr).max() > 1e-6:
                return "stalled", iteration, None
        x = np.round(res.x).astype(int)
        values = [[int(x[v[a][j]]) for j in range(m_items)] for a in range(3)]
        thresholds = [int(x[T[a]]) for a in range(3)]
        inst = Instance(tuple(Valuation(tuple(map(F, row))) for row in values))
        alloc = acceptable_allocation_exists(inst, [F(t) for t in thresholds])
        if alloc is None:
            mms = [mms_exact(val, 3)[0] for val in inst.valuations]
            assert all(mms[a] >= thresholds[a] for a in range(3))
            assert acceptable_allocation_exists(inst, mms) is None
            return "found", iteration, (values, mms)
        for bundles in enumerate_satisfying(values, thresholds, cuts_per_round):
            add_blocking(bundles)
        log(f"iter {iteration}: T={thresholds} blocked ({time.time()-t0:.0f}s)")
    return "budget", iteration, None


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--items", type=int, default=9)
    ap.add_argument("--vmax", type=int, default=30)
    ap.add_argument("--tmin", type=int, default=12)
    ap.add_argument("--grid", action="store_true")
    ap.add_argument("--budget", type=float, default=3600.0)
    args = ap.parse_args()
    status, iters, payload = run(
        args.items, args.vmax, args.tmin, args.grid, budget_s=args.budget
    )
    print(status, "after", iters, "iterations")
    if status == "found":
        values, mms = payload
        print("values:", values)
        print("true maximin:", [str(m) for m in mms])
        print(json.dumps({"rows": [[str(x) for x in row] for row in values]}))
        return 0
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
