"""Command-line front end.

Exit status: 0 affirmative verdict, 1 negative verdict, 2 usage/parse/input
error, 3 resource limit. Verdicts go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import kripke, scenarios
from .formula import BudgetError, Formula, FragmentSpec, Scenario, Shape, SignatureError, expand_ck
from .kripke import PointedModel, StructureError
from .parser import ParseError, parse_formula, parse_scenario_file, render, render_scenario
from .prover import (
    DEFAULT_MAX_NODES,
    InconsistentScenarioError,
    Prover,
    ResourceLimitError,
    completeness_check,
    default_ck_depth,
    derives_scenario,
    necessitation_check,
)

OK, NEGATIVE, USAGE, LIMIT = 0, 1, 2, 3


class _Usage(Exception):
    pass


def _read(path: str) -> str:
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def _load_scenario(path: str) -> tuple[Scenario, Formula | None]:
    try:
        return parse_scenario_file(_read(path))
    except ParseError as exc:
        raise _Usage(f"{path}:{exc}") from exc


def _load_model(path: str) -> tuple[kripke.KripkeStructure, str | None]:
    try:
        return kripke.load_model(path)
    except json.JSONDecodeError as exc:
        raise _Usage(f"{path}: invalid JSON: {exc}") from exc
    except StructureError as exc:
        raise _Usage(f"{path}: {exc}") from exc


def _formula(text: str, agents: int) -> Formula:
    try:
        return parse_formula(text, agents)
    except ParseError as exc:
        raise _Usage(f"formula:{exc}") from exc


def _pointed(m: kripke.KripkeStructure, world: str | None, designated: str | None) -> PointedModel:
    w = world if world is not None else designated
    if w is None:
        raise _Usage("--world is required (model has no designated world)")
    if w not in m.worlds:
        raise _Usage(f"unknown world {w!r}")
    return PointedModel(m, w)


def _atoms(text: str) -> tuple[str, ...]:
    return tuple(a.strip() for a in text.split(",") if a.strip())


def _depth_phrase(s: Scenario, k: int) -> str:
    return f" at depth {k}" if s.common else ""


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _self_validate(pm: PointedModel, hypotheses, refuted: Formula) -> None:
    bad = [h for h in hypotheses if not kripke.check(pm, h)]
    if bad or kripke.check(pm, refuted):
        raise RuntimeError("countermodel failed self-validation")


# -- subcommands -------------------------------------------------------------


def cmd_prove(args) -> int:
    s, file_goal = _load_scenario(args.scenario)
    if args.goal is not None:
        goal = _formula(args.goal, s.agent_count)
    elif file_goal is not None:
        goal = file_goal
    else:
        raise _Usage("no --goal given and the scenario file has no 'goal:' line")
    k = args.ck_depth if args.ck_depth is not None else default_ck_depth(s, goal)
    res = derives_scenario(s, goal, k, max_nodes=args.max_nodes)
    payload = {"command": "prove", "goal": render(goal), "ck_depth": k, "derivable": res.derivable}
    if res.derivable:
        _emit(args, payload, f"derivable (ck depth {k})")
        return OK
    pm = res.countermodel
    _self_validate(pm, expand_ck(s, k), goal)
    payload["countermodel"] = kripke.to_json(pm.structure, pm.designated)
    if args.out_model:
        kripke.dump_model(args.out_model, pm.structure, pm.designated)
    text = f"not derivable{_depth_phrase(s, k)}\ncountermodel: {len(pm.structure.worlds)} worlds, " \
           f"designated {pm.designated}"
    if args.out_model:
        text += f" (written to {args.out_model})"
    _emit(args, payload, text)
    return NEGATIVE


def cmd_valid(args) -> int:
    f = _formula(args.formula, args.agents)
    res = Prover(args.agents, max_nodes=args.max_nodes).valid(f)
    payload = {"command": "valid", "formula": render(f), "valid": res.valid}
    if res.valid:
        _emit(args, payload, "valid")
        return OK
    pm = res.countermodel
    _self_validate(pm, [], f)
    payload["countermodel"] = kripke.to_json(pm.structure, pm.designated)
    if args.out_model:
        kripke.dump_model(args.out_model, pm.structure, pm.designated)
    _emit(args, payload, f"not valid\ncountermodel: {len(pm.structure.worlds)} worlds, designated {pm.designated}")
    return NEGATIVE


def cmd_check_model(args) -> int:
    m, designated = _load_model(args.model)
    pm = _pointed(m, args.world, designated)
    f = _formula(args.formula, m.agents)
    truth = kripke.check(pm, f)
    _emit(args, {"command": "check-model", "world": pm.designated, "formula": render(f), "true": truth},
          "true" if truth else "false")
    return OK if truth else NEGATIVE


def cmd_is_model(args) -> int:
    m, designated = _load_model(args.model)
    pm = _pointed(m, args.world, designated)
    s, _ = _load_scenario(args.scenario)
    verdict = kripke.is_model(pm, s)
    _emit(args, {"command": "is-model", "world": pm.designated, "model": verdict},
          "model" if verdict else "not a model")
    return OK if verdict else NEGATIVE


def cmd_announce(args) -> int:
    m, designated = _load_model(args.model)
    f = _formula(args.formula, m.agents)
    try:
        out = kripke.restrict(m, f)
    except kripke.EmptyAnnouncementError:
        _emit(args, {"command": "announce", "worlds": []}, "no world survives the announcement")
        return NEGATIVE
    keep = designated if designated in out.worlds else None
    kripke.dump_model(args.out, out, keep)
    _emit(args, {"command": "announce", "worlds": list(out.worlds), "out": args.out},
          f"{len(out.worlds)} {'world remains' if len(out.worlds) == 1 else 'worlds remain'}: "
          f"{' '.join(out.worlds)}")
    return OK


def _fragment(args, s: Scenario) -> FragmentSpec:
    atoms = _atoms(args.atoms)
    unknown = [a for a in atoms if a not in s.atoms]
    if not atoms or unknown:
        raise _Usage(f"--atoms must name scenario atoms (unknown: {', '.join(unknown) or 'none given'})")
    return FragmentSpec(atoms, s.agent_count, args.depth, Shape(args.shape), args.budget)


def cmd_complete(args) -> int:
    s, _ = _load_scenario(args.scenario)
    frag = _fragment(args, s)
    k = args.ck_depth if args.ck_depth is not None else args.depth + s.max_assumption_depth() + 1
    try:
        rep = completeness_check(s, frag, k, max_nodes=args.max_nodes)
    except InconsistentScenarioError:
        _emit(args, {"command": "complete", "consistent": False, "ck_depth": k},
              f"inconsistent scenario (derives FALSE{_depth_phrase(s, k)})")
        return NEGATIVE
    payload = {
        "command": "complete", "consistent": True, "complete": rep.complete, "ck_depth": k,
        "derivable": rep.derivable, "refutable": rep.refutable,
        "undetermined": [render(f) for f in rep.undetermined],
        "witness": render(rep.witness) if rep.witness is not None else None,
        "truncated": rep.truncated,
    }
    total = rep.derivable + rep.refutable + len(rep.undetermined)
    if rep.complete:
        _emit(args, payload, f"complete on {total} formulas (ck depth {k})")
        return OK
    _emit(args, payload,
          f"incomplete{_depth_phrase(s, k)}: neither {render(rep.witness)} nor its negation is derivable\n"
          f"{rep.derivable} derivable, {rep.refutable} refutable, {len(rep.undetermined)} undetermined")
    return NEGATIVE


def cmd_exact(args) -> int:
    s, _ = _load_scenario(args.scenario)
    m, designated = _load_model(args.model)
    pm = _pointed(m, args.world, designated)
    frag = _fragment(args, s)
    k = args.ck_depth if args.ck_depth is not None else args.depth + s.max_assumption_depth() + 1
    rep = kripke.exact_check(s, pm, frag, k, max_nodes=args.max_nodes)
    payload = {
        "command": "exact", "exact": rep.exact, "is_model": rep.is_model, "ck_depth": k,
        "checked": rep.checked, "truncated": rep.truncated,
        "witnesses": [{"formula": render(f), "kind": kind} for f, kind in rep.witnesses],
    }
    if rep.exact:
        _emit(args, payload, f"exact on {rep.checked} formulas (ck depth {k})")
        return OK
    lines = [f"not exact{_depth_phrase(s, k)}: {len(rep.witnesses)} disagreements"
             + ("" if rep.is_model else " (not a model of the scenario)")]
    lines += [f"  {kind}: {render(f)}" for f, kind in rep.witnesses]
    _emit(args, payload, "\n".join(lines))
    return NEGATIVE


def cmd_necessitation(args) -> int:
    s, _ = _load_scenario(args.scenario)
    k = args.ck_depth if args.ck_depth is not None else 1
    res = necessitation_check(s, k, max_nodes=args.max_nodes)
    if res.passed:
        _emit(args, {"command": "necessitation", "pass": True, "ck_depth": k}, f"pass (ck depth {k})")
        return OK
    _emit(args, {"command": "necessitation", "pass": False, "ck_depth": k,
                 "witness": render(res.witness), "agent": res.agent},
          f"fail: K{res.agent} ({render(res.witness)}) not derivable at depth {k + 1}")
    return NEGATIVE


def cmd_scenario(args) -> int:
    model = None
    if args.kind == "muddy":
        s = scenarios.muddy_children(args.n)
        model = (scenarios.cube_model(args.n), None)
    elif args.kind == "muddy-explicit":
        s = scenarios.muddy_explicit(args.n, args.k)
    elif args.kind == "coin":
        s, pm = scenarios.coin_scenario()
        model = (pm.structure, pm.designated)
    elif args.kind == "centipede":
        s = scenarios.centipede_lite()
    else:
        s = scenarios.trio()[args.which - 1]
    text = render_scenario(s)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.out_model:
        if model is None:
            raise _Usage(f"scenario {args.kind!r} has no companion model")
        kripke.dump_model(args.out_model, *model)
    payload = {"command": "scenario", "kind": args.kind, "scenario": text, "out": args.out,
               "out_model": args.out_model}
    _emit(args, payload, text.rstrip("\n") if not args.out else f"wrote {args.out}")
    return OK


def cmd_export(args) -> int:
    m, designated = _load_model(args.model)
    with open(args.dot, "w", encoding="utf-8") as fh:
        fh.write(kripke.to_dot(m, designated))
    _emit(args, {"command": "export", "dot": args.dot}, f"wrote {args.dot}")
    return OK


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit one JSON object")
    common.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES, help="tableau node budget")

    parser = argparse.ArgumentParser(prog="selkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", parents=[common], help="decide derivability from a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--goal")
    p.add_argument("--ck-depth", type=int)
    p.add_argument("--out-model")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("valid", parents=[common], help="decide S5n validity")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--out-model")
    p.set_defaults(func=cmd_valid)

    p = sub.add_parser("check-model", parents=[common], help="evaluate a formula at a world")
    p.add_argument("--model", required=True)
    p.add_argument("--world")
    p.add_argument("--formula", required=True)
    p.set_defaults(func=cmd_check_model)

    p = sub.add_parser("is-model", parents=[common], help="is (model, world) a model of a scenario")
    p.add_argument("--model", required=True)
    p.add_argument("--world")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_is_model)

    p = sub.add_parser("announce", parents=[common], help="public announcement (world elimination)")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_announce)

    for name, func in (("complete", cmd_complete), ("exact", cmd_exact)):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--scenario", required=True)
        if name == "exact":
            p.add_argument("--model", required=True)
            p.add_argument("--world")
        p.add_argument("--atoms", required=True, help="comma-separated fragment atoms")
        p.add_argument("--depth", type=int, required=True)
        p.add_argument("--ck-depth", type=int)
        p.add_argument("--shape", choices=[s.value for s in Shape], default=Shape.KBOOL.value)
        p.add_argument("--budget", type=int, default=2000, help="max fragment size")
        p.set_defaults(func=func)

    p = sub.add_parser("necessitation", parents=[common], help="necessitation admissibility check")
    p.add_argument("--scenario", required=True)
    p.add_argument("--ck-depth", type=int)
    p.set_defaults(func=cmd_necessitation)

    p = sub.add_parser("scenario", help="emit a built-in scenario")
    kinds = p.add_subparsers(dest="kind", required=True)
    out = argparse.ArgumentParser(add_help=False, parents=[common])
    out.add_argument("--out")
    out.add_argument("--out-model")
    k = kinds.add_parser("muddy", parents=[out])
    k.add_argument("--n", type=int, required=True)
    k = kinds.add_parser("muddy-explicit", parents=[out])
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--k", type=int, required=True)
    kinds.add_parser("coin", parents=[out])
    kinds.add_parser("centipede", parents=[out])
    k = kinds.add_parser("trio", parents=[out])
    k.add_argument("--which", type=int, choices=[1, 2, 3], required=True)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("export", parents=[common], help="write a model as Graphviz DOT")
    p.add_argument("--model", required=True)
    p.add_argument("--dot", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.func(args)
    except _Usage as exc:
        print(f"selkit: {exc}", file=sys.stderr)
        return USAGE
    except (ResourceLimitError, BudgetError) as exc:
        print(f"selkit: resource limit: {exc}", file=sys.stderr)
        return LIMIT
    except (OSError, StructureError, SignatureError, ValueError) as exc:
        print(f"selkit: {exc}", file=sys.stderr)
        return USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
