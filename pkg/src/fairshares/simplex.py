"""Dense exact-rational simplex for small linear programs.

Two-phase primal simplex over `fractions.Fraction`: every relaxation the
branch-and-bound solver sees is solved with zero rounding error.  Pivoting
uses Dantzig's rule with an automatic switch to Bland's rule after a run
of degenerate pivots, so the method cannot cycle.  Problem sizes here are
tens of rows, where a dense tableau is the simplest correct choice.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

__all__ = ["LpProblem", "LpResult", "solve_lp"]

_ZERO = Fraction(0)
_ONE = Fraction(1)
_STALL_LIMIT = 30  # degenerate pivots tolerated before switching to Bland


class _Unbounded(Exception):
    pass


@dataclass(frozen=True)
class LpProblem:
    """minimize objective . x subject to rows; all variables >= 0."""

    n_vars: int
    objective: tuple[Fraction, ...]
    rows: tuple[tuple[tuple[Fraction, ...], str, Fraction], ...]  # (coefs, sense, rhs)


@dataclass(frozen=True)
class LpResult:
    status: str  # optimal | infeasible | unbounded
    x: tuple[Fraction, ...] | None
    objective: Fraction | None


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], basis: list[int], width: int):
        self.rows = rows
        self.basis = basis
        self.width = width
        self.obj = [_ZERO] * width  # reduced costs | negated objective value

    def set_costs(self, cost: Sequence[Fraction]) -> None:
        red = list(cost) + [_ZERO]
        for r, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.rows[r]
                for j in range(self.width):
                    if row[j]:
                        red[j] -= cb * row[j]
        self.obj = red

    def pivot(self, r: int, c: int) -> None:
        prow = self.rows[r]
        inv = _ONE / prow[c]
        if inv != 1:
            for j in range(self.width):
                if prow[j]:
                    prow[j] *= inv
        nz = [j for j in range(self.width) if prow[j]]
        pvals = [prow[j] for j in nz]
        for row in self.rows:
            if row is prow:
                continue
            f = row[c]
            if f:
                for j, pv in zip(nz, pvals):
                    row[j] -= f * pv
        f = self.obj[c]
        if f:
            obj = self.obj
            for j, pv in zip(nz, pvals):
                obj[j] -= f * pv
        self.basis[r] = c

    def minimize(self, enterable) -> None:
        """Run the simplex until no enterable column improves the objective."""
        stall = 0
        bland = False
        while True:
            enter = -1
            if bland:
                for j in range(self.width - 1):
                    if self.obj[j] < 0 and enterable[j]:
                        enter = j
                        break
            else:
                best = _ZERO
                for j in range(self.width - 1):
                    if enterable[j] and self.obj[j] < best:
                        best = self.obj[j]
                        enter = j
            if enter < 0:
                return
            leave = -1
            best_ratio: Fraction | None = None
            for r, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = row[self.width - 1] / a
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (
                            ratio == best_ratio
                            and leave >= 0
                            and self.basis[r] < self.basis[leave]
                        )
                    ):
                        best_ratio = ratio
                        leave = r
            if leave < 0:
                raise _Unbounded()
            degenerate = best_ratio == 0
            self.pivot(leave, enter)
            if degenerate:
                stall += 1
                if stall > _STALL_LIMIT:
                    bland = True
            else:
                stall = 0
                bland = False


def solve_lp(problem: LpProblem) -> LpResult:
    n = problem.n_vars
    normalized = []
    for coefs, sense, rhs in problem.rows:
        coefs = [Fraction(a) for a in coefs]
        rhs = Fraction(rhs)
        if len(coefs) != n:
            raise ValueError("row width does not match variable count")
        if rhs < 0:
            coefs = [-a for a in coefs]
            rhs = -rhs
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
        normalized.append((coefs, sense, rhs))

    m = len(normalized)
    n_slack = sum(1 for _, sense, _ in normalized if sense != "=")
    n_art = sum(1 for _, sense, _ in normalized if sense != "<=")
    width = n + n_slack + n_art + 1
    rows: list[list[Fraction]] = []
    basis: list[int] = []
    slack_at = n
    art_at = n + n_slack
    art_cols: set[int] = set()
    for coefs, sense, rhs in normalized:
        row = coefs + [_ZERO] * (n_slack + n_art) + [rhs]
        if sense == "<=":
            row[slack_at] = _ONE
            basis.append(slack_at)
            slack_at += 1
        elif sense == ">=":
            row[slack_at] = -_ONE
            slack_at += 1
            row[art_at] = _ONE
            basis.append(art_at)
            art_cols.add(art_at)
            art_at += 1
        else:
            row[art_at] = _ONE
            basis.append(art_at)
            art_cols.add(art_at)
            art_at += 1
        rows.append(row)

    tab = _Tableau(rows, basis, width)

    if art_cols:
        cost1 = [_ZERO] * (width - 1)
        for j in art_cols:
            cost1[j] = _ONE
        tab.set_costs(cost1)
        enterable = [True] * (width - 1)
        tab.minimize(enterable)  # phase 1 is bounded below by 0
        infeas = _ZERO
        for r, b in enumerate(tab.basis):
            if b in art_cols:
                infeas += tab.rows[r][width - 1]
        if infeas != 0:
            return LpResult("infeasible", None, None)
        # pivot surviving artificials out; drop rows that turn out redundant
        drop: list[int] = []
        for r in range(len(tab.rows)):
            if tab.basis[r] not in art_cols:
                continue
            for j in range(n + n_slack):
                if tab.rows[r][j] != 0:
                    tab.pivot(r, j)
                    break
            else:
                drop.append(r)
        for r in reversed(drop):
            del tab.rows[r]
            del tab.basis[r]

    cost2 = [_ZERO] * (width - 1)
    for j in range(n):
        cost2[j] = Fraction(problem.objective[j])
    tab.set_costs(cost2)
    enterable = [j < n + n_slack for j in range(width - 1)]
    try:
        tab.minimize(enterable)
    except _Unbounded:
        return LpResult("unbounded", None, None)
    x = [_ZERO] * n
    obj = _ZERO
    for r, b in enumerate(tab.basis):
        val = tab.rows[r][width - 1]
        if b < n:
            x[b] = val
            obj += cost2[b] * val
    return LpResult("optimal", tuple(x), obj)
