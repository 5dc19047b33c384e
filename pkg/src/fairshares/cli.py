"""Command-line surface: compute, allocate, verify, mms, selfmax, ratio,
milp, catalog, gen.

Output is JSON-first (``--pretty`` renders small tables); every report
embeds the seed and tool version.  Exit codes are part of the interface:
0 ok, 2 parse error, 3 oracle scale exceeded, 4 internal validation
failure, 5 unsupported share/allocator combination.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from . import __version__
from . import catalog as catalog_mod
from . import generators, milp, nested, ordinal, picking, shares
from .core import (
    Allocation,
    Instance,
    ParseError,
    ShareSpec,
    bundle_value,
    format_rational,
    parse_allocation,
    parse_instance,
    parse_rational,
    serialize_allocation,
    serialize_instance,
    validate_allocation,
)
from .oracle import OracleScaleError, ScaleLimits, mms_exact

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SCALE = 3
EXIT_INTERNAL = 4
EXIT_UNSUPPORTED = 5


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _emit(args, payload: dict) -> None:
    payload.setdefault("tool_version", __version__)
    if getattr(args, "seed", None) is not None:
        payload.setdefault("seed", args.seed)
    if getattr(args, "pretty", False):
        _pretty(payload)
    else:
        json.dump(payload, sys.stdout, indent=2, default=str)
        sys.stdout.write("\n")


def _pretty(payload: dict, indent: int = 0) -> None:
    pad = "  " * indent
    for key, val in payload.items():
        if isinstance(val, dict):
            print(f"{pad}{key}:")
            _pretty(val, indent + 1)
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            print(f"{pad}{key}:")
            for row in val:
                print(pad + "  " + "  ".join(f"{k}={v}" for k, v in row.items()))
        else:
            print(f"{pad}{key}: {val}")


def _load_instance(args) -> Instance:
    if getattr(args, "catalog", None):
        try:
            return catalog_mod.get(args.catalog).instance
        except KeyError as exc:
            raise CliError(EXIT_PARSE, str(exc)) from exc
    if getattr(args, "instance", None):
        try:
            with open(args.instance, "rb") as fh:
                return parse_instance(fh.read())
        except OSError as exc:
            raise CliError(EXIT_PARSE, f"cannot read {args.instance}: {exc}") from exc
        except ParseError as exc:
            raise CliError(EXIT_PARSE, str(exc)) from exc
    raise CliError(EXIT_PARSE, "need --instance <path> or --catalog <name>")


def _limits(args) -> ScaleLimits:
    if getattr(args, "limit_m", None):
        return ScaleLimits(max_m=args.limit_m, max_n=ScaleLimits().max_n)
    return ScaleLimits()


def _share_spec(args, inst: Instance) -> ShareSpec:
    kind = args.share
    if kind == "ps":
        return ShareSpec.ps()
    if kind == "mms":
        return ShareSpec.mms()
    if kind == "rho-mms":
        return ShareSpec.rho_mms(parse_rational(args.rho))
    if kind == "top-n":
        return ShareSpec.top_n()
    if kind == "top-n-1":
        return ShareSpec.top_n_minus_1()
    if kind == "roundrobin":
        return ShareSpec.round_robin()
    if kind == "picking":
        return ShareSpec.picking(_picking_turns(args, inst), inst.n)
    if kind == "ns":
        return ShareSpec.ns(args.q)
    if kind == "ptas2":
        return ShareSpec.ptas2(parse_rational(args.epsilon))
    raise CliError(EXIT_PARSE, f"unknown share {kind!r}")


def _picking_turns(args, inst: Instance) -> tuple[int, ...]:
    text = args.order or "roundrobin"
    if text == "roundrobin":
        return picking.round_robin_order(inst.n, inst.m).turns
    if text == "mms":
        omega = picking.mms_picking_order(inst.valuations[0], inst.n, _limits(args))
        return omega.turns
    if text.startswith("file:"):
        with open(text[len("file:") :], "r", encoding="utf-8") as fh:
            return tuple(int(x) for x in json.load(fh))
    raise CliError(EXIT_PARSE, f"unknown picking order {text!r}")


def _agent_indices(args, inst: Instance) -> list[int]:
    sel = getattr(args, "agent", None) or "all"
    if sel == "all":
        return list(range(inst.n))
    if sel in inst.agent_labels:
        return [inst.agent_labels.index(sel)]
    try:
        idx = int(sel)
    except ValueError:
        raise CliError(EXIT_PARSE, f"unknown agent {sel!r}")
    if not 0 <= idx < inst.n:
        raise CliError(EXIT_PARSE, f"agent index {idx} out of range")
    return [idx]


# --- commands ---------------------------------------------------------------

def cmd_compute(args) -> None:
    inst = _load_instance(args)
    spec = _share_spec(args, inst)
    limits = _limits(args)
    rows = []
    for i in _agent_indices(args, inst):
        ev = shares.evaluate(spec, inst.valuations[i], inst.n, limits)
        row = {
            "agent": inst.agent_labels[i],
            "share": format_rational(ev.value),
            "guarantee": format_rational(ev.guarantee),
        }
        if ev.witness is not None:
            row["witness"] = [sorted(b) for b in ev.witness.bundles]
        if spec.kind == "ns":
            _, ns_wit = nested.ns_share(inst.valuations[i], inst.n, spec.q)
            row["witness_structure"] = {
                "prefix_length": ns_wit.k,
                "prefix_cuts": list(ns_wit.prefix_cuts),
                "suffix_takes": [list(t) for t in ns_wit.suffix_takes],
            }
        if ev.guarantee_bundle is not None:
            row["guarantee_bundle"] = sorted(ev.guarantee_bundle)
        rows.append(row)
    _emit(args, {"command": "compute", "share": spec.describe(), "agents": rows})


def cmd_mms(args) -> None:
    inst = _load_instance(args)
    limits = _limits(args)
    rows = []
    for i in _agent_indices(args, inst):
        value, witness = mms_exact(inst.valuations[i], inst.n, limits)
        rows.append(
            {
                "agent": inst.agent_labels[i],
                "mms": format_rational(value),
                "witness": [sorted(b) for b in witness.bundles],
            }
        )
    _emit(args, {"command": "mms", "agents": rows})


def cmd_allocate(args) -> None:
    inst = _load_instance(args)
    spec = _share_spec(args, inst)
    limits = _limits(args)
    if spec.kind == "ns":
        if spec.q > 3:
            raise CliError(
                EXIT_UNSUPPORTED,
                f"no allocator for ns with q={spec.q}: feasibility unproven beyond q=3",
            )
        alloc = nested.ns_allocate(inst, spec.q)
    elif spec.kind == "ptas2":
        if inst.n != 2:
            raise CliError(EXIT_UNSUPPORTED, "ptas2 allocation needs exactly 2 agents")
        alloc = ordinal.ptas2_allocate(
            inst.valuations[0], inst.valuations[1], spec.epsilon
        )
    elif spec.kind in ("picking", "roundrobin"):
        omega = picking.PickingOrder(inst.n, spec.order_turns or
                                     picking.round_robin_order(inst.n, inst.m).turns)
        alloc = picking.picking_allocate(inst, omega)
    elif spec.kind == "mms" and inst.n <= 2:
        # two agents: one cuts at her exact maximin partition, the other picks
        if inst.n == 1:
            alloc = Allocation.from_bundles([frozenset(range(inst.m))], inst.m)
        else:
            _, part = mms_exact(inst.valuations[0], 2, limits)
            v2 = inst.valuations[1]
            first, second = part.bundles
            if bundle_value(v2, second) > bundle_value(v2, first):
                alloc = Allocation.from_bundles([first, second], inst.m)
            else:
                alloc = Allocation.from_bundles([second, first], inst.m)
    else:
        raise CliError(
            EXIT_UNSUPPORTED,
            f"no allocator for share {spec.describe()} with n={inst.n} "
            "(infeasible or unimplemented)",
        )
    thresholds = [
        shares.share_value(spec, inst.valuations[i], inst.n, limits)
        for i in range(inst.n)
    ]
    report = validate_allocation(inst, alloc, thresholds)
    if not report.acceptable:
        raise CliError(
            EXIT_INTERNAL,
            "internal validation failed: allocator produced an unacceptable "
            f"allocation (violators: {report.violators()})",
        )
    _emit(
        args,
        {
            "command": "allocate",
            "share": spec.describe(),
            "allocation": json.loads(serialize_allocation(inst, alloc)),
            "validation": report.to_json_dict(),
        },
    )


def cmd_verify(args) -> None:
    inst = _load_instance(args)
    limits = _limits(args)
    with open(args.allocation, "rb") as fh:
        alloc = parse_allocation(fh.read(), inst)
    if args.share:
        spec = _share_spec(args, inst)
        thresholds = [
            shares.share_value(spec, inst.valuations[i], inst.n, limits)
            for i in range(inst.n)
        ]
    else:
        thresholds = [parse_rational(t) for t in args.thresholds.split(",")]
    report = validate_allocation(inst, alloc, thresholds)
    _emit(args, {"command": "verify", "report": report.to_json_dict()})
    if not report.acceptable:
        sys.exit(EXIT_INTERNAL)


def cmd_selfmax(args) -> None:
    inst = _load_instance(args)
    spec = _share_spec(args, inst)
    limits = _limits(args)
    policy = shares.parse_policy(args.policy)
    i = _agent_indices(args, inst)[0]
    verdict = shares.self_max_probe(spec, inst.valuations[i], inst.n, policy, limits)
    payload = {
        "command": "selfmax",
        "share": spec.describe(),
        "policy": policy.describe(),
        "improved": verdict.improved,
        "baseline": format_rational(verdict.baseline),
        "best_found": format_rational(verdict.best_found),
    }
    if verdict.witness_report is not None:
        payload["witness_report"] = [
            format_rational(x) for x in verdict.witness_report.values
        ]
    _emit(args, payload)


def cmd_ratio(args) -> None:
    limits = _limits(args)
    gen_spec = generators.parse_generator(args.gen, args.seed or 0)
    trials = []
    skipped = 0
    running_min: Fraction | None = None
    witness = None
    for t in range(args.trials):
        inst = generators.generate_instance(gen_spec.derived(t))
        spec = _share_spec(args, inst)
        for i in range(inst.n):
            v = inst.valuations[i]
            try:
                worst, arg, table = shares.domination_ratio(spec, [(v, inst.n)], limits)
            except OracleScaleError:
                skipped += 1
                continue
            ratio = table[0]["ratio"]
            if ratio is None:
                continue
            trials.append(
                {
                    "trial": t,
                    "agent": i,
                    "share": format_rational(table[0]["share"]),
                    "mms": format_rational(table[0]["mms"]),
                    "ratio": format_rational(ratio),
                }
            )
            if running_min is None or ratio < running_min:
                running_min = ratio
                witness = v
    payload = {
        "command": "ratio",
        "generator": args.gen,
        "trials": len(trials),
        "skipped": skipped,
        "min_ratio": format_rational(running_min) if running_min is not None else None,
        "witness_values": [format_rational(x) for x in witness.values] if witness else None,
    }
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=["trial", "agent", "share", "mms", "ratio"])
            writer.writeheader()
            writer.writerows(trials)
        payload["csv"] = args.csv
    else:
        payload["table"] = trials
    _emit(args, payload)


def cmd_milp(args) -> None:
    model = milp.build_model(include_extra_first_bundle_row=args.extra_row)
    if args.export:
        text = milp.export_lp(model)
        with open(args.export, "w", encoding="utf-8") as fh:
            fh.write(text)
        _emit(args, {"command": "milp", "exported": args.export, "bytes": len(text)})
        return
    if args.verify:
        with open(args.verify, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        x = [parse_rational(t) for t in doc["x"]]
        z = parse_rational(doc["z"])
        y = doc.get("y")
        ok, report = milp.verify_witness(x, z, y, model)
        _emit(
            args,
            {
                "command": "milp",
                "witness_ok": ok,
                "violated": [r["label"] for r in report if not r["satisfied"]],
            },
        )
        return
    sol = milp.solve(model)
    _emit(
        args,
        {
            "command": "milp",
            "status": sol.status,
            "objective": format_rational(sol.objective),
            "x": [format_rational(v) for v in sol.x],
            "nodes": sol.nodes,
        },
    )


def cmd_catalog(args) -> None:
    if args.list:
        rows = [
            {"name": name, "note": catalog_mod.get(name).note}
            for name in catalog_mod.names()
        ]
        _emit(args, {"command": "catalog", "entries": rows})
        return
    if args.name == "worstcase":
        v, n, part = nested.worstcase_instance(args.k)
        inst = Instance.identical(v, n)
        _emit(
            args,
            {
                "command": "catalog",
                "name": f"worstcase(k={args.k})",
                "instance": json.loads(serialize_instance(inst)),
                "certified_partition": [sorted(b) for b in part.bundles],
            },
        )
        return
    try:
        entry = catalog_mod.get(args.name)
    except KeyError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc
    payload = {
        "command": "catalog",
        "name": entry.name,
        "note": entry.note,
        "instance": json.loads(serialize_instance(entry.instance)),
        "expected": [
            {"share": spec.describe(), "value": format_rational(val), "source": src}
            for spec, val, src in entry.expected
        ],
    }
    if entry.report is not None:
        payload["probe_report"] = [format_rational(x) for x in entry.report.values]
    if entry.metadata:
        payload["metadata"] = {k: v for k, v in entry.metadata.items()}
    _emit(args, payload)


def cmd_gen(args) -> None:
    spec = generators.GeneratorSpec(
        family=args.family,
        seed=args.seed or 0,
        m=args.m,
        n=args.n,
        max_value=args.maxv,
        noise=args.noise,
        k=args.k,
        name=args.name or "",
    )
    inst = generators.generate_instance(spec)
    sys.stdout.write(serialize_instance(inst))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fairshares", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", help="instance JSON path")
    common.add_argument("--catalog", help="catalog fixture name")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--json", action="store_true", default=True)
    common.add_argument("--pretty", action="store_true")
    common.add_argument("--limit-m", type=int, dest="limit_m")

    share_args = argparse.ArgumentParser(add_help=False)
    share_args.add_argument(
        "--share",
        choices=["ps", "rho-mms", "mms", "top-n", "top-n-1", "picking", "roundrobin", "ns", "ptas2"],
        required=True,
    )
    share_args.add_argument("--q", type=int, default=3)
    share_args.add_argument("--epsilon", default="1/10")
    share_args.add_argument("--rho", default="1/2")
    share_args.add_argument("--order", help="roundrobin | mms | file:<path>")

    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("compute", parents=[common, share_args])
    p.add_argument("--agent", default="all")
    p.set_defaults(func=cmd_compute)
    p = sub.add_parser("mms", parents=[common])
    p.add_argument("--agent", default="all")
    p.set_defaults(func=cmd_mms)
    p = sub.add_parser("allocate", parents=[common, share_args])
    p.set_defaults(func=cmd_allocate)
    p = sub.add_parser("verify", parents=[common, share_args])
    p.add_argument("--allocation", required=True)
    p.add_argument("--thresholds", help="comma-separated rationals")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("selfmax", parents=[common, share_args])
    p.add_argument("--policy", default="random:200:42")
    p.add_argument("--agent", default="0")
    p.set_defaults(func=cmd_selfmax)
    p = sub.add_parser("ratio", parents=[common, share_args])
    p.add_argument("--gen", default="uniform:m=8,n=3,maxv=20")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_ratio)
    p = sub.add_parser("milp", parents=[common])
    p.add_argument("--export")
    p.add_argument("--solve", action="store_true")
    p.add_argument("--verify")
    p.add_argument("--extra-row", action="store_true", dest="extra_row")
    p.set_defaults(func=cmd_milp)
    p = sub.add_parser("catalog", parents=[common])
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true")
    p.add_argument("--k", type=int, default=1)
    p.set_defaults(func=cmd_catalog)
    p = sub.add_parser("gen", parents=[common])
    p.add_argument("--family", default="uniform")
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--maxv", type=int, default=20)
    p.add_argument("--noise", type=int, default=4)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--name")
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        json.dump({"error": str(exc), "code": exc.code}, sys.stdout)
        sys.stdout.write("\n")
        return exc.code
    except ParseError as exc:
        json.dump({"error": str(exc), "code": EXIT_PARSE}, sys.stdout)
        sys.stdout.write("\n")
        return EXIT_PARSE
    except OracleScaleError as exc:
        json.dump({"error": str(exc), "code": EXIT_SCALE}, sys.stdout)
        sys.stdout.write("\n")
        return EXIT_SCALE
    except nested.UnsupportedShareError as exc:
        json.dump({"error": str(exc), "code": EXIT_UNSUPPORTED}, sys.stdout)
        sys.stdout.write("\n")
        return EXIT_UNSUPPORTED
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
