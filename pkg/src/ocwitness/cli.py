"""Command-line front end; every command reads JSON (file or stdin) and writes JSON.

Exit codes: 0 success (whatever the violation verdict), 1 computation or
input error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bounds, jsonio
from ._enumeration import DEFAULT_BUDGET, BudgetExceeded
from .cases import make_chsh, make_hidden_matching, make_rac
from .constructions import cc_to_oc, dual_cc_to_oc, pm_to_oc_protocol, relational_cc_to_oc
from .oblivious import oc_quantum_value, pnc_upper_bound, sampled_oblivious_lower_bound, verify_oblivious
from .ontology import fragment_from_states, pnc_model_exists
from .quantum import EAProtocol, chi, ea_value, pm_value
from .report import AnalysisConfig, analyze, bell_analysis
from .tasks import FunctionalCCTask, guessing_probability, optimum, strategy_value

VERSION = jsonio.VERSION


class UsageError(Exception):
    pass


def _read(path: str | None) -> dict:
    try:
        if path in (None, "-"):
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise jsonio.SchemaError("/", f"invalid JSON: {exc}") from None


def _part(doc: dict, kind: str) -> dict | None:
    """Return ``doc`` if it has ``kind``, or the matching part of a bundle."""
    found = jsonio.infer_kind(doc)
    if found == kind:
        return doc
    if found == "bundle":
        for part in doc["parts"].values():
            if isinstance(part, dict) and jsonio.infer_kind(part) == kind:
                return part
    return None


def _require(doc: dict, *kinds: str) -> dict:
    for kind in kinds:
        part = _part(doc, kind)
        if part is not None:
            return part
    raise jsonio.SchemaError("/kind", f"expected a {' or '.join(kinds)} document")


def _config(args) -> AnalysisConfig:
    return AnalysisConfig(tol=args.tol, budget=args.budget, samples=args.samples, seed=args.seed, out=args.out)


def _strategy_json(strategy) -> dict:
    return {
        "levels": strategy.levels,
        "encoding": np.asarray(strategy.encoding).tolist(),
        "decoding": np.asarray(strategy.decoding).tolist(),
    }


# -- commands ------------------------------------------------------------------

def cmd_validate(args) -> dict:
    doc = _read(args.file)
    kind = jsonio.check_schema(doc)
    loaders = {
        "task": jsonio.task_from_json,
        "pm-protocol": jsonio.pm_protocol_from_json,
        "ea-protocol": jsonio.ea_protocol_from_json,
        "octask": jsonio.octask_from_json,
        "oc-protocol": jsonio.oc_protocol_from_json,
        "bell": jsonio.bell_from_json,
        "realization": jsonio.realization_from_json,
        "fragment": jsonio.fragment_from_json,
    }
    if kind in loaders:
        loaders[kind](doc)
    return {"v": VERSION, "kind": "validation", "document": kind, "ok": True}


def cmd_analyze(args) -> dict:
    first = _read(args.task)
    task = jsonio.task_from_json(_require(first, "task"))
    proto_doc = _read(args.protocol) if args.protocol else _require(first, "pm-protocol", "ea-protocol")
    protocol = jsonio.protocol_from_json(_require(proto_doc, "pm-protocol", "ea-protocol"))
    return analyze(task, protocol, args.d, _config(args)).to_json()


def cmd_cc_classical(args) -> dict:
    task = jsonio.task_from_json(_require(_read(args.task), "task"))
    levels = args.levels or task.d
    value, strategy = optimum(task, levels, args.budget)
    return {
        "v": VERSION,
        "kind": "cc-classical",
        "levels": levels,
        "p_G": guessing_probability(task),
        "value": value,
        "replay": strategy_value(task, strategy),
        "strategy": _strategy_json(strategy),
    }


def cmd_cc_quantum(args) -> dict:
    first = _read(args.task)
    task = jsonio.task_from_json(_require(first, "task"))
    proto_doc = _read(args.protocol) if args.protocol else first
    protocol = jsonio.protocol_from_json(_require(proto_doc, "pm-protocol", "ea-protocol"))
    if isinstance(protocol, EAProtocol):
        return {"v": VERSION, "kind": "cc-quantum", "protocol": "ea", "p_Qd": ea_value(task, protocol)}
    return {
        "v": VERSION,
        "kind": "cc-quantum",
        "protocol": "pm",
        "p_Qd": pm_value(task, protocol),
        "chi": chi(task, protocol),
    }


def cmd_construct_oc(args) -> dict:
    first = _read(args.task)
    task = jsonio.task_from_json(_require(first, "task"))
    protocol = None
    if args.protocol:
        protocol = jsonio.pm_protocol_from_json(_require(_read(args.protocol), "pm-protocol"))
    elif _part(first, "pm-protocol") is not None:
        protocol = jsonio.pm_protocol_from_json(_part(first, "pm-protocol"))
    if args.dual:
        if protocol is None:
            raise UsageError("--dual needs a prepare-and-measure protocol (--protocol)")
        if not isinstance(task, FunctionalCCTask):
            raise UsageError("--dual is defined for functional tasks only")
        oc, states, povms = dual_cc_to_oc(task, protocol)
        return jsonio.bundle(
            "dual-oc", octask=jsonio.octask_to_json(oc), oc_protocol=jsonio.oc_protocol_to_json(states, povms)
        )
    d = args.d if args.d is not None else (protocol.dim if protocol is not None else task.d)
    oc = cc_to_oc(task, d) if isinstance(task, FunctionalCCTask) else relational_cc_to_oc(task, d)
    parts = {"octask": jsonio.octask_to_json(oc)}
    if protocol is not None:
        states, povms = pm_to_oc_protocol(protocol)
        parts["oc_protocol"] = jsonio.oc_protocol_to_json(states, povms)
    return jsonio.bundle("oc", **parts)


def _oc_inputs(args, need_protocol: bool):
    first = _read(args.octask)
    oc = jsonio.octask_from_json(_require(first, "octask"))
    if not need_protocol:
        return oc, None, None
    proto_doc = _read(args.protocol) if args.protocol else first
    states, povms = jsonio.oc_protocol_from_json(_require(proto_doc, "oc-protocol"))
    return oc, states, povms


def cmd_oc_pnc_bound(args) -> dict:
    oc, _, _ = _oc_inputs(args, False)
    bound = pnc_upper_bound(oc, args.budget)
    return {
        "v": VERSION,
        "kind": "pnc-bound",
        "upper": bound.value,
        "sampled_lower": sampled_oblivious_lower_bound(oc, args.samples, args.seed),
        "encoding": list(bound.encoding),
        "decoding": bound.decoding.tolist(),
    }


def cmd_oc_quantum(args) -> dict:
    oc, states, povms = _oc_inputs(args, True)
    return {"v": VERSION, "kind": "oc-quantum", "value": oc_quantum_value(oc, states, povms)}


def cmd_oc_verify(args) -> dict:
    oc, states, _ = _oc_inputs(args, True)
    check = verify_oblivious(states, oc.cond_a2, args.tol)
    return {"v": VERSION, "kind": "oblivious-check", "ok": check.ok, "deviation": check.deviation}


def cmd_bell_analyze(args) -> dict:
    first = _read(args.scenario)
    scenario = jsonio.bell_from_json(_require(first, "bell"))
    real_doc = _read(args.realization) if args.realization else first
    realization = jsonio.realization_from_json(_require(real_doc, "realization"))
    return bell_analysis(scenario, realization, _config(args))


def cmd_ontology_check(args) -> dict:
    fragment = jsonio.fragment_from_json(_require(_read(args.fragment), "fragment"))
    result = pnc_model_exists(fragment, tol=args.tol, budget=args.budget)
    doc = {
        "v": VERSION,
        "kind": "ontology-check",
        "pnc_model_exists": result.feasible,
        "status": result.status,
        "atoms": [list(a) for a in result.atoms],
        "equivalences": result.equivalences.tolist(),
        "residual": result.residual,
        "messages": result.messages,
    }
    if result.model is not None:
        doc["model"] = result.model.tolist()
    return doc


def cmd_bounds(args) -> dict:
    name = args.bound
    doc: dict = {"v": VERSION, "kind": "bound", "name": name}
    if name == "pump":
        doc["value"] = bounds.pumping_lower_bound(args.p, args.d)
        if args.r is not None:
            doc["exact"] = bounds.pumping_exact(args.p, args.r, allow_even=args.allow_even)
    elif name == "lemma4":
        doc["value"] = bounds.two_level_upper_bound(args.ps, args.c)
    elif name == "beta":
        doc["value"] = bounds.beta_lower_bound(args.pq, args.d, args.pg, args.c, args.ps)
    elif name == "c12":
        if args.dprime is not None:
            doc["name"] = "c1"
            doc["value"] = bounds.condition_c1(args.pcd, args.dprime, args.chi, args.pc2)
        else:
            doc["value"] = bounds.condition_c12(args.pcd, args.d, args.chi, args.pc2)
    elif name == "combined":
        doc["lhs"] = bounds.combined_lhs(args.pc2, args.pg, args.d)
        doc["value"] = bounds.combined_condition(args.pc2, args.pg, args.d)
    return doc


def cmd_casestudy(args) -> dict:
    if args.case == "rac":
        rac = make_rac()
        doc = jsonio.bundle(
            "rac",
            task=jsonio.task_to_json(rac.task),
            optimal=jsonio.pm_protocol_to_json(rac.optimal),
            toy=jsonio.pm_protocol_to_json(rac.toy),
            # the toy protocol has three distinct preparations (x = 10 and 11 coincide)
            toy_fragment=jsonio.fragment_to_json(
                fragment_from_states(rac.toy.states[:3], rac.toy.measurements)
            ),
        )
    elif args.case == "chsh":
        chsh = make_chsh()
        doc = jsonio.bundle(
            "chsh",
            scenario=jsonio.bell_to_json(chsh.scenario),
            realization=jsonio.realization_to_json(chsh.realization),
        )
    else:
        hm = make_hidden_matching(args.n)
        doc = jsonio.bundle(
            f"hidden-matching-{args.n}",
            task=jsonio.task_to_json(hm.task),
            protocol=jsonio.pm_protocol_to_json(hm.protocol),
        )
    if args.part:
        parts = doc["parts"]
        if args.part not in parts:
            raise UsageError(f"case {args.case!r} has parts {sorted(parts)}")
        return parts[args.part]
    return doc


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed for sampled bounds")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="enumeration budget")
    common.add_argument("--tol", type=float, default=1e-9, help="numerical tolerance")
    common.add_argument("--samples", type=int, default=1000, help="random oblivious encodings to sample")
    common.add_argument("--out", help="write JSON here instead of stdout")

    parser = argparse.ArgumentParser(prog="ocwitness", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="validate a JSON document")
    p.add_argument("file", nargs="?")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", parents=[common], help="full violation report")
    p.add_argument("task", nargs="?")
    p.add_argument("protocol", nargs="?")
    p.add_argument("d", nargs="?", type=int)
    p.set_defaults(func=cmd_analyze)

    cc = sub.add_parser("cc", help="communication-complexity values").add_subparsers(dest="cc_cmd", required=True)
    p = cc.add_parser("classical", parents=[common])
    p.add_argument("task", nargs="?")
    p.add_argument("--levels", type=int)
    p.set_defaults(func=cmd_cc_classical)
    p = cc.add_parser("quantum", parents=[common])
    p.add_argument("task", nargs="?")
    p.add_argument("protocol", nargs="?")
    p.set_defaults(func=cmd_cc_quantum)

    con = sub.add_parser("construct", help="build oblivious tasks").add_subparsers(dest="construct_cmd", required=True)
    p = con.add_parser("oc", parents=[common])
    p.add_argument("task", nargs="?")
    p.add_argument("--protocol")
    p.add_argument("--d", type=int)
    p.add_argument("--dual", action="store_true")
    p.set_defaults(func=cmd_construct_oc)

    oc = sub.add_parser("oc", help="oblivious-task evaluation").add_subparsers(dest="oc_cmd", required=True)
    for name, func, needs in (
        ("pnc-bound", cmd_oc_pnc_bound, False),
        ("quantum", cmd_oc_quantum, True),
        ("verify-oblivious", cmd_oc_verify, True),
    ):
        p = oc.add_parser(name, parents=[common])
        p.add_argument("octask", nargs="?")
        if needs:
            p.add_argument("protocol", nargs="?")
        p.set_defaults(func=func)

    bell = sub.add_parser("bell", help="Bell scenarios").add_subparsers(dest="bell_cmd", required=True)
    p = bell.add_parser("analyze", parents=[common])
    p.add_argument("scenario", nargs="?")
    p.add_argument("realization", nargs="?")
    p.set_defaults(func=cmd_bell_analyze)

    onto = sub.add_parser("ontology", help="noncontextual model search").add_subparsers(dest="onto_cmd", required=True)
    p = onto.add_parser("check", parents=[common])
    p.add_argument("fragment", nargs="?")
    p.set_defaults(func=cmd_ontology_check)

    bnd = sub.add_parser("bounds", help="closed-form bounds").add_subparsers(dest="bound", required=True)
    p = bnd.add_parser("pump", parents=[common])
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--r", type=int)
    p.add_argument("--allow-even", action="store_true")
    p = bnd.add_parser("lemma4", parents=[common], help="two-level upper bound min(1, 1/2 + sqrt(2 p_S / C))")
    p.add_argument("--ps", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p = bnd.add_parser("beta", parents=[common])
    p.add_argument("--pq", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--pg", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--ps", type=float, required=True)
    p = bnd.add_parser("c12", parents=[common])
    p.add_argument("--pcd", type=float, required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--dprime", type=int)
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--pc2", type=float, required=True)
    p = bnd.add_parser("combined", parents=[common])
    p.add_argument("--pc2", type=float, required=True)
    p.add_argument("--pg", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    for p in bnd.choices.values():
        p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("casestudy", parents=[common], help="emit built-in instances")
    p.add_argument("case", choices=["rac", "chsh", "hidden-matching"])
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--part", help="emit only this part of the bundle")
    p.set_defaults(func=cmd_casestudy)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bounds" and args.bound == "c12" and args.d is None and args.dprime is None:
        parser.error("bounds c12 needs --d or --dprime")
    try:
        doc = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except jsonio.SchemaError as exc:
        print(json.dumps({"error": str(exc), "pointer": exc.pointer}), file=sys.stderr)
        return 1
    except (BudgetExceeded, ValueError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1
    text = jsonio.dumps(doc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
