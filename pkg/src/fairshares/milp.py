"""The 14-item mixed-integer certificate model and its exact solver.

The model minimizes a variable z that upper-bounds the worst bundle of a
battery of candidate nested partitions, over item values x1 >= ... >= x14
that carry the structure of a four-way partition into bundles of value 5.
Its exact optimum (4) certifies that the q=3 nested share keeps a 4/5
fraction of the maximin share for four agents.  Everything here is exact:
LP relaxations by rational simplex, branching on binaries, zero tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .core import Rational, Valuation, format_rational
from .simplex import LpProblem, LpResult, solve_lp

__all__ = [
    "MilpModel",
    "MilpSolution",
    "build_model",
    "export_lp",
    "parse_lp",
    "solve",
    "verify_witness",
    "fourteen_item_reduction_check",
    "ConstraintViolation",
]

BIG_M = 20

X_VARS = tuple(f"x{i}" for i in range(1, 15))
Z_VAR = "z"
Y_VARS = (
    tuple(f"y{i}" for i in range(1, 9))
    + ("y11", "y12", "y13", "y15", "y16")
    + tuple(f"y2{i}" for i in range(1, 8))
    + tuple(f"y3{i}" for i in range(1, 7))
    + tuple(f"y4{i}" for i in range(1, 6))
)


class ConstraintViolation(ValueError):
    """A labeled model constraint failed."""

    def __init__(self, label: str, message: str):
        super().__init__(f"{label}: {message}")
        self.label = label


@dataclass(frozen=True)
class Constraint:
    label: str
    coefs: tuple[tuple[str, int], ...]  # (var, coefficient), model order
    sense: str  # "<=", ">=", "="
    rhs: int

    def lhs_value(self, point: Mapping[str, Fraction]) -> Fraction:
        return sum((Fraction(c) * point[v] for v, c in self.coefs), Fraction(0))

    def holds(self, point: Mapping[str, Fraction]) -> bool:
        lhs = self.lhs_value(point)
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class MilpModel:
    continuous: tuple[str, ...]
    binaries: tuple[str, ...]
    objective: tuple[tuple[str, int], ...]
    constraints: tuple[Constraint, ...]

    def constraint(self, label: str) -> Constraint:
        for c in self.constraints:
            if c.label == label:
                return c
        raise KeyError(label)

    def with_extra(self, extra: Sequence[Constraint]) -> "MilpModel":
        return MilpModel(
            self.continuous,
            self.binaries,
            self.objective,
            self.constraints + tuple(extra),
        )


@dataclass(frozen=True)
class MilpSolution:
    status: str  # optimal | infeasible
    objective: Rational | None
    x: tuple[Rational, ...] | None
    y: tuple[int, ...] | None
    nodes: int = 0


_VAR_ORDER = {v: i for i, v in enumerate(X_VARS + (Z_VAR,) + Y_VARS + ("y14",))}


def _c(label: str, terms: Mapping[str, int], sense: str, rhs: int) -> Constraint:
    coefs = tuple(
        sorted(((v, c) for v, c in terms.items() if c != 0), key=lambda t: _VAR_ORDER[t[0]])
    )
    return Constraint(label, coefs, sense, rhs)


def _xsum(*idx: int) -> dict:
    return {f"x{i}": 1 for i in idx}


def build_model(include_extra_first_bundle_row: bool = False) -> MilpModel:
    """The certificate model; 15 continuous and 31 binary variables.

    ``include_extra_first_bundle_row`` re-enables the p14 bundle row (and
    its y14 indicator) that the certificate leaves out; off by default and
    not referenced by any partition row, so it never changes the optimum.
    """
    cons: list[Constraint] = []
    for i in range(1, 14):
        cons.append(_c(f"o{i}", {f"x{i}": 1, f"x{i+1}": -1}, ">=", 0))
    cons.append(_c("a0", _xsum(*range(1, 15)), "=", 20))
    cons.append(_c("a1", _xsum(1), "<=", 5))
    cons.append(_c("a2", _xsum(4, 5), "<=", 5))
    cons.append(_c("a3", _xsum(3, 4, 5, 6), "<=", 10))
    cons.append(_c("a4", _xsum(2, 3, 4, 5, 6, 7), "<=", 15))
    cons.append(_c("a5", _xsum(7, 8, 9), "<=", 5))
    cons.append(_c("a6", _xsum(5, 6, 7, 8, 9, 10), "<=", 10))
    cons.append(_c("a7", _xsum(3, 4, 5, 6, 7, 8, 9, 10, 11), "<=", 15))
    cons.append(_c("a8", _xsum(10, 11, 12, 13), "<=", 5))
    cons.append(_c("a9", _xsum(7, 8, 9, 10, 11, 12, 13, 14), "<=", 10))
    cons.append(_c("b1", _xsum(1), "<=", 4))
    cons.append(_c("b2", _xsum(4, 5), "<=", 4))
    cons.append(_c("b3", _xsum(6, 7, 8), ">=", 4))
    cons.append(_c("b4", _xsum(7), ">=", 1))
    cons.append(_c("b5", _xsum(3, 6), "<=", 5))
    cons.append(_c("b6", _xsum(2, 9), "<=", 5))

    def bigm(label: str, xs: Iterable[int], y: str, bound: int | None) -> None:
        terms = _xsum(*xs)
        terms[y] = -BIG_M
        if bound is None:
            terms[Z_VAR] = -1
            cons.append(_c(label, terms, "<=", 0))
        else:
            cons.append(_c(label, terms, "<=", bound))

    bigm("c1", (2, 6), "y1", 5)
    bigm("c2", (5, 6, 9), "y2", 5)
    bigm("c3", (6, 7, 8, 9), "y3", 5)
    cons.append(_c("c0", {"y1": 1, "y2": 1, "y3": 1}, "<=", 2))
    bigm("d1", (2, 7), "y4", 5)
    bigm("d2", (5, 6, 7), "y5", 5)
    cons.append(_c("d0", {"y4": 1, "y5": 1}, "<=", 1))
    bigm("f1", (2, 8), "y6", 5)
    bigm("f2", (3, 7, 8), "y7", 5)
    bigm("f3", (5, 6, 7, 8), "y8", 5)
    cons.append(_c("f0", {"y6": 1, "y7": 1, "y8": 1}, "<=", 2))

    bigm("p41", (4, 5, 6), "y41", None)
    bigm("p42", (5, 6, 7), "y42", None)
    bigm("p43", (6, 7, 8), "y43", None)
    bigm("p44", (7, 8, 9), "y44", None)
    bigm("p45", (7, 8, 9, 10, 11, 12, 13), "y45", None)
    bigm("p31", (3, 4), "y31", None)
    bigm("p32", (3, 7), "y32", None)
    bigm("p33", (3, 7, 8), "y33", None)
    bigm("p34", (4, 5, 9), "y34", None)
    bigm("p35", (4, 5, 9, 10), "y35", None)
    bigm("p36", (4, 5, 6), "y36", None)
    bigm("p21", (2, 3), "y21", None)
    bigm("p22", (2, 3, 10), "y22", None)
    bigm("p23", (2, 8), "y23", None)
    bigm("p24", (2, 8, 9), "y24", None)
    bigm("p25", (2, 9), "y25", None)
    bigm("p26", (2, 9, 10), "y26", None)
    bigm("p27", (2, 3, 11, 12), "y27", None)
    bigm("p11", (1, 9, 10, 11, 12, 13, 14), "y11", None)
    bigm("p12", (1, 10, 11, 12, 13, 14), "y12", None)
    bigm("p13", (1, 11, 12, 13, 14), "y13", None)
    binaries = Y_VARS
    if include_extra_first_bundle_row:
        binaries = Y_VARS + ("y14",)
        bigm("p14", (1, 12, 13, 14), "y14", None)
    bigm("p15", (1, 13, 14), "y15", None)
    bigm("p16", (1, 14), "y16", None)

    def nrow(label: str, ys: Iterable[str]) -> None:
        cons.append(_c(label, {y: 1 for y in ys}, "<=", 3))

    nrow("n1312", ("y11", "y23", "y31", "y42"))
    nrow("n1321", ("y11", "y23", "y32", "y41"))
    nrow("n2164", ("y12", "y21", "y36", "y44"))
    nrow("n2412", ("y12", "y24", "y31", "y42"))
    nrow("n2531", ("y12", "y25", "y33", "y41"))
    nrow("n3243", ("y13", "y22", "y34", "y43"))
    nrow("n3631", ("y13", "y26", "y33", "y41"))
    nrow("n5753", ("y15", "y27", "y35", "y43"))
    nrow("n6165", ("y16", "y21", "y36", "y45"))

    return MilpModel(X_VARS + (Z_VAR,), binaries, ((Z_VAR, 1),), tuple(cons))


# --- LP file text -------------------------------------------------------------

def _term_text(var: str, coef: int, first: bool) -> str:
    sign = "-" if coef < 0 else "+"
    mag = abs(coef)
    body = var if mag == 1 else f"{mag} {var}"
    if first:
        return body if coef > 0 else f"- {body}"
    return f"{sign} {body}"


def export_lp(model: MilpModel) -> str:
    """Standard LP-file text; labeled rows, Bounds, Binaries, End.

    Deterministic construction, so re-export is byte-identical.
    """
    out = ["Minimize"]
    obj = " ".join(
        _term_text(v, c, i == 0) for i, (v, c) in enumerate(model.objective)
    )
    out.append(f" ns: {obj}")
    out.append("Subject To")
    for c in model.constraints:
        terms = " ".join(
            _term_text(v, k, i == 0) for i, (v, k) in enumerate(c.coefs)
        )
        out.append(f" {c.label}: {terms} {c.sense} {c.rhs}")
    out.append("Bounds")
    for v in model.continuous:
        out.append(f" {v} >= 0")
    out.append("Binaries")
    out.append(" " + " ".join(model.binaries))
    out.append("End")
    return "\n".join(out) + "\n"


def parse_lp(text: str) -> MilpModel:
    """Minimal reader for the exporter's own output (round-trip self-test)."""
    lines = [ln.strip() for ln in text.splitlines()]
    section = None
    objective: tuple[tuple[str, int], ...] = ()
    constraints: list[Constraint] = []
    bounds_vars: list[str] = []
    binaries: list[str] = []
    for ln in lines:
        if not ln:
            continue
        if ln in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
            section = ln
            continue
        if section == "Minimize":
            _, expr = ln.split(":", 1)
            objective = tuple(_parse_terms(expr))
        elif section == "Subject To":
            label, expr = ln.split(":", 1)
            terms, sense, rhs = _parse_row(expr)
            constraints.append(Constraint(label.strip(), tuple(terms), sense, rhs))
        elif section == "Bounds":
            bounds_vars.append(ln.split(">=")[0].strip())
        elif section == "Binaries":
            binaries.extend(ln.split())
    return MilpModel(
        tuple(bounds_vars), tuple(binaries), objective, tuple(constraints)
    )


def _parse_terms(expr: str):
    tokens = expr.split()
    terms: list[tuple[str, int]] = []
    sign = 1
    coef: int | None = None
    for tok in tokens:
        if tok == "+":
            sign, coef = 1, None
        elif tok == "-":
            sign, coef = -1, None
        elif tok.lstrip("-").isdigit():
            coef = int(tok)
        else:
            terms.append((tok, sign * (coef if coef is not None else 1)))
            sign, coef = 1, None
    return terms


def _parse_row(expr: str):
    for sense in ("<=", ">=", "="):
        if sense in expr:
            lhs, rhs = expr.split(sense, 1)
            return _parse_terms(lhs), sense, int(rhs.strip())
    raise ValueError(f"no relation in row {expr!r}")


# --- exact branch-and-bound ----------------------------------------------------

def _binary_cap_rows(model: MilpModel) -> list[Constraint]:
    caps = []
    binset = set(model.binaries)
    for c in model.constraints:
        if c.sense == "<=" and all(v in binset and k == 1 for v, k in c.coefs):
            caps.append(c)
    return caps


def _propagate(caps: Sequence[Constraint], fixed: dict[str, int]) -> dict[str, int] | None:
    """Close cap rows: once a row's ones reach its rhs, the rest drop to 0."""
    fixed = dict(fixed)
    changed = True
    while changed:
        changed = False
        for cap in caps:
            ones = sum(fixed.get(v, 0) == 1 for v, _ in cap.coefs if v in fixed)
            if ones > cap.rhs:
                return None
            if ones == cap.rhs:
                for v, _ in cap.coefs:
                    if v not in fixed:
                        fixed[v] = 0
                        changed = True
    return fixed


@lru_cache(maxsize=16)
def _relaxable_rows(model: MilpModel) -> frozenset[str]:
    """Labels of big-M rows that turn vacuous when their indicator is 1.

    Requires the total row (a0: all items sum to BIG_M) so the item block
    of the left side can never exceed BIG_M, plus a nonnegative right side
    and at most a -z term besides the items.
    """
    try:
        a0 = model.constraint("a0")
    except KeyError:
        return frozenset()
    if a0.sense != "=" or a0.rhs != BIG_M:
        return frozenset()
    x_block = {v for v, k in a0.coefs if k == 1}
    if len(x_block) != len(a0.coefs):
        return frozenset()

    def vacuous(c: Constraint) -> bool:
        if c.sense != "<=" or c.rhs < 0:
            return False
        has_m = False
        for v, k in c.coefs:
            if v in x_block:
                if not 0 <= k <= 1:
                    return False
            elif v == Z_VAR:
                if k != -1:
                    return False
            elif k == -BIG_M:
                has_m = True
            else:
                return False
        return has_m

    return frozenset(c.label for c in model.constraints if vacuous(c))


def _node_lp(model: MilpModel, fixed: Mapping[str, int]) -> tuple[LpProblem, list[str]]:
    """LP relaxation with fixed binaries substituted out.

    A big-M row whose indicator is fixed to 1 is dropped when provably
    vacuous (see _droppable_when_relaxed); otherwise the fixed value is
    substituted into the row.  Free binaries keep 0 <= y <= 1.
    """
    free = [v for v in model.binaries if v not in fixed]
    cols = list(model.continuous) + free
    col_of = {v: i for i, v in enumerate(cols)}
    relaxable = _relaxable_rows(model)
    rows: list[tuple[tuple[Fraction, ...], str, Fraction]] = []
    for c in model.constraints:
        coefs = [Fraction(0)] * len(cols)
        rhs = Fraction(c.rhs)
        skip = False
        for v, k in c.coefs:
            if v in fixed:
                if k == -BIG_M and fixed[v] == 1 and c.label in relaxable:
                    skip = True
                    break
                rhs -= k * fixed[v]
            else:
                coefs[col_of[v]] = Fraction(k)
        if skip:
            continue
        if not any(coefs):
            if (
                (c.sense == "<=" and rhs < 0)
                or (c.sense == ">=" and rhs > 0)
                or (c.sense == "=" and rhs != 0)
            ):
                # violated constant row: encode as an unsatisfiable LP row
                rows.append((tuple(coefs), "=", Fraction(1)))
            continue
        rows.append((tuple(coefs), c.sense, rhs))
    one = Fraction(1)
    for v in free:
        coefs = [Fraction(0)] * len(cols)
        coefs[col_of[v]] = one
        rows.append((tuple(coefs), "<=", one))
    objective = [Fraction(0)] * len(cols)
    for v, k in model.objective:
        objective[col_of[v]] = Fraction(k)
    return LpProblem(len(cols), tuple(objective), tuple(rows)), free


def solve(model: MilpModel, explore_worse_child_first: bool = False) -> MilpSolution:
    """Exact global minimum by depth-first branch-and-bound.

    LP relaxations are solved by rational simplex; branching picks the
    lowest-index fractional binary; of the two children the one with the
    smaller relaxation bound is explored first; nodes whose bound cannot
    beat the incumbent are pruned.  The first incumbent attaining the
    optimum is reported, so the result is deterministic.

    ``explore_worse_child_first`` flips the sibling order; the reported
    optimum must not change (tests compare both orders).
    """
    caps = _binary_cap_rows(model)
    best: dict | None = None
    nodes = 0

    def node_solve(fixed: dict[str, int]):
        problem, free = _node_lp(model, fixed)
        return solve_lp(problem), free

    def record(fixed: Mapping[str, int], res: LpResult, free: Sequence[str]) -> None:
        nonlocal best
        n_cont = len(model.continuous)
        yvals = dict(fixed)
        for i, v in enumerate(free):
            yvals[v] = int(res.x[n_cont + i])
        best = {
            "objective": res.objective,
            "x": res.x[: len(X_VARS)],
            "y": tuple(yvals[v] for v in model.binaries),
        }

    def bnb(fixed: dict[str, int], res: LpResult, free: Sequence[str]) -> None:
        nonlocal nodes
        nodes += 1
        if res.status != "optimal":
            return
        if best is not None and res.objective >= best["objective"]:
            return
        n_cont = len(model.continuous)
        branch_var = None
        for i, v in enumerate(free):
            val = res.x[n_cont + i]
            if val != 0 and val != 1:
                branch_var = v
                break
        if branch_var is None:
            record(fixed, res, free)
            return
        children = []
        for val in (0, 1):
            child = dict(fixed)
            child[branch_var] = val
            child = _propagate(caps, child)
            if child is None:
                continue
            child_res, child_free = node_solve(child)
            if child_res.status != "optimal":
                continue
            children.append((child_res.objective, val, child, child_res, child_free))
        children.sort(key=lambda t: (t[0], t[1]), reverse=explore_worse_child_first)
        for _, _, child, child_res, child_free in children:
            bnb(child, child_res, child_free)

    root = _propagate(caps, {})
    if root is None:
        return MilpSolution("infeasible", None, None, None, 0)
    res, free = node_solve(root)
    if res.status != "optimal":
        return MilpSolution("infeasible", None, None, None, 1)
    bnb(root, res, free)
    if best is None:
        return MilpSolution("infeasible", None, None, None, nodes)
    return MilpSolution(
        "optimal", best["objective"], best["x"], best["y"], nodes
    )


# --- witness checking -----------------------------------------------------------

def verify_witness(
    x: Sequence[Rational],
    z: Rational,
    y: Sequence[int] | None = None,
    model: MilpModel | None = None,
) -> tuple[bool, list[dict]]:
    """Check a point against every labeled row.

    With y omitted, indicators are chosen for the caller: an indicator is 0
    exactly when its big-M row already holds at (x, z), which satisfies the
    most cap rows possible; the point is feasible iff that assignment works.
    """
    model = model or build_model()
    if len(x) != len(X_VARS):
        raise ValueError(f"need {len(X_VARS)} item values")
    point: dict[str, Fraction] = {v: Fraction(x[i]) for i, v in enumerate(X_VARS)}
    point[Z_VAR] = Fraction(z)
    if y is not None:
        if len(y) != len(model.binaries):
            raise ValueError(f"need {len(model.binaries)} indicator values")
        for v, val in zip(model.binaries, y):
            point[v] = Fraction(val)
    else:
        for c in model.constraints:
            yv = [v for v, k in c.coefs if k == -BIG_M]
            if not yv:
                continue
            relaxed = dict(point)
            relaxed[yv[0]] = Fraction(0)
            point[yv[0]] = Fraction(0) if c.holds(relaxed) else Fraction(1)
        for v in model.binaries:
            point.setdefault(v, Fraction(0))
    report = []
    ok = True
    for c in model.constraints:
        holds = c.holds(point)
        ok = ok and holds
        report.append(
            {
                "label": c.label,
                "satisfied": holds,
                "lhs": format_rational(c.lhs_value(point)),
                "sense": c.sense,
                "rhs": c.rhs,
            }
        )
    return ok, report


# --- many-item reduction ---------------------------------------------------------

def _extended_point(values: Sequence[Fraction]) -> dict[str, Fraction]:
    point = {f"x{i+1}": values[i] for i in range(min(len(values), 14))}
    for i in range(len(values), 14):
        point[f"x{i+1}"] = Fraction(0)
    return point


def _check_merge_preconditions(values: Sequence[Fraction]) -> None:
    m = len(values)
    for i in range(m - 1):
        if values[i] < values[i + 1]:
            raise ConstraintViolation(f"o{i+1}", "values are not sorted descending")
    total = sum(values, Fraction(0))
    if total != 20:
        raise ConstraintViolation("a0", f"values sum to {total}, expected 20")
    model = build_model()
    point = _extended_point(values)
    for c in model.constraints:
        if c.label[0] in ("a", "b") and c.label != "a0":
            if not c.holds(point):
                raise ConstraintViolation(c.label, "violated before reduction")
    for group in (("c1", "c2", "c3"), ("d1", "d2"), ("f1", "f2", "f3")):
        relaxed_ok = False
        for label in group:
            c = model.constraint(label)
            test = dict(point)
            for v, k in c.coefs:
                if k == -BIG_M:
                    test[v] = Fraction(0)
            if c.holds(test):
                relaxed_ok = True
                break
        if not relaxed_ok:
            raise ConstraintViolation(group[0][0] + "0", "no member of the OR group holds")


def fourteen_item_reduction_check(v: Valuation) -> Valuation:
    """Fold a long instance to 14 items by merging the extremes.

    While more than 14 items remain, the first and last items merge into a
    new first item; after every merge the ordering row o1, the total row
    a0 and the caps a1, b1 are re-asserted (labeled error on violation).
    """
    values = list(v.values)
    _check_merge_preconditions(values)
    model = build_model()
    while len(values) > 14:
        merged = values[0] + values[-1]
        values = [merged] + values[1:-1]
        point = _extended_point(values)
        if len(values) > 1 and values[0] < values[1]:
            raise ConstraintViolation("o1", "merge broke the descending order")
        total = sum(values, Fraction(0))
        if total != 20:
            raise ConstraintViolation("a0", f"merge changed the total to {total}")
        if not model.constraint("a1").holds(point):
            raise ConstraintViolation("a1", f"merged first item exceeds 5 ({values[0]})")
        if not model.constraint("b1").holds(point):
            raise ConstraintViolation("b1", f"merged first item exceeds 4 ({values[0]})")
    return Valuation(tuple(values))
