"""Command-line front end.

Every subcommand is a thin adapter: read files, call the module operation,
print its result.  Machine output is JSON by default; ``--format dsl``
prints canonical program text and ``--format pretty`` indents the JSON.
Exit codes: 0 on success, 1 on a domain error (bad input file, no proof,
failed gate), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import core, ebg, factorize, operationalize
from .core import SpaceError
from .specialize import specialize as specialize_program, specializes_to


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _emit(data: object, fmt: str) -> None:
    if fmt == "pretty":
        print(json.dumps(data, indent=2))
    else:
        print(json.dumps(data))


def _emit_program(program: core.Program, fmt: str) -> None:
    if fmt == "dsl":
        sys.stdout.write(core.serialize(program))
    else:
        _emit(core.program_to_json(program), fmt)


def _load_program(path: str) -> core.Program:
    text = _read(path)
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        if "label" in data and "root" not in data:
            return core.ingest_sitemap(data)
        return core.program_from_json(data)
    return core.parse(text)


def _set_pairs(raw: list[str]) -> list[tuple[str, object]]:
    pairs: list[tuple[str, object]] = []
    for item in raw:
        if "!=" in item:
            key, value = item.split("!=", 1)
            pairs.append((key.strip(), "!" + value.strip()))
        elif "=" in item:
            key, value = item.split("=", 1)
            pairs.append((key.strip(), value.strip()))
        else:
            pairs.append((item.strip(), True))
    return pairs


def _load_bindings(path: str | None) -> operationalize.ContentBinding:
    if path is None:
        return operationalize.EMPTY_BINDING
    return operationalize.ContentBinding.from_json(json.loads(_read(path)))


def _load_ops(paths: list[str]) -> list[operationalize.OperationalizedExplanation]:
    ops = []
    for path in paths:
        data = json.loads(_read(path))
        items = data if isinstance(data, list) else [data]
        ops.extend(operationalize.OperationalizedExplanation.from_json(i) for i in items)
    return ops


# ---------------------------------------------------------------------------
# subcommands

def cmd_parse(args) -> int:
    program = _load_program(args.file)
    _emit_program(program, args.format)
    return 0


def cmd_specialize(args) -> int:
    program = _load_program(args.file)
    assignment = core.resolve_given(program, _set_pairs(args.set))
    result = specialize_program(program, assignment)
    _emit_program(result.residual, args.format)
    return 0


def cmd_classify(args) -> int:
    program = _load_program(args.file)
    activities = factorize.load_activities(_read(args.activities))
    verdicts = [factorize.classify(program, a).to_json() for a in activities]
    _emit(verdicts, args.format)
    return 0


def cmd_coverage(args) -> int:
    program = _load_program(args.file)
    activities = factorize.load_activities(_read(args.activities))
    report = factorize.evaluate_coverage(program, activities)
    _emit(report.to_json(), args.format)
    if args.max_complete_ratio is not None and report.complete_ratio > args.max_complete_ratio:
        print(
            f"complete-only ratio {report.complete_ratio:.3f} exceeds "
            f"--max-complete-ratio {args.max_complete_ratio:.3f}",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_explain(args) -> int:
    theory = ebg.parse_theory(_read(args.theory))
    facts = ebg.parse_facts(_read(args.facts))
    goal = ebg.parse_goal(args.goal)
    if args.all:
        result = ebg.explain_all(
            theory, facts, goal, max_depth=args.depth, max_solutions=args.solutions
        )
        _emit(result.to_json(), args.format)
        return 0
    tree = ebg.explain(theory, facts, goal, max_depth=args.depth)
    if tree is None:
        print(f"no proof of {goal}", file=sys.stderr)
        return 1
    _emit(ebg.tree_to_json(tree), args.format)
    return 0


def cmd_generalize(args) -> int:
    theory = ebg.parse_theory(_read(args.theory))
    tree = ebg.tree_from_json(json.loads(_read(args.tree)))
    generalized = operationalize.generalize(tree, theory)
    _emit(ebg.tree_to_json(generalized), args.format)
    return 0


def cmd_cut(args) -> int:
    tree = ebg.tree_from_json(json.loads(_read(args.tree)))
    op = operationalize.cut(tree, args.frontier, op_id=args.id)
    _emit(op.to_json(), args.format)
    return 0


def cmd_generate(args) -> int:
    theory = ebg.parse_theory(_read(args.theory))
    ops = _load_ops(args.ops)
    bindings = _load_bindings(args.bindings)
    model = operationalize.generate_model(
        theory, ops, bindings, strict=args.strict, max_depth=args.depth
    )
    _emit_program(model, args.format)
    return 0


def cmd_assess(args) -> int:
    theory = ebg.parse_theory(_read(args.theory))
    tree = ebg.tree_from_json(json.loads(_read(args.tree)))
    probes = factorize.load_activities(_read(args.probes))
    bindings = _load_bindings(args.bindings)
    report = operationalize.assess_operationality(
        theory, tree, args.frontiers, probes, bindings
    )
    _emit(report.to_json(), args.format)
    return 0


def cmd_order(args) -> int:
    general = _load_program(args.general)
    specific = _load_program(args.specific)
    witness = specializes_to(general, specific, budget=args.budget)
    _emit({"assignment": witness.to_json() if witness is not None else None}, args.format)
    return 0


def serve_port(default: int) -> int:
    """Listen port for the service: PIPE_PORT wins over the --port flag."""
    return int(os.environ.get("PIPE_PORT", default))


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(models_dir=args.models_dir, snapshot=args.snapshot)
    uvicorn.run(app, host=args.host, port=serve_port(args.port), log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# argument wiring

def _frontier(text: str) -> operationalize.FrontierSpec:
    try:
        return operationalize.FrontierSpec.parse(text)
    except SpaceError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _frontier_list(text: str) -> list[operationalize.FrontierSpec]:
    try:
        return [operationalize.FrontierSpec.parse(p) for p in text.split(";") if p.strip()]
    except SpaceError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _add_format(parser: argparse.ArgumentParser, dsl: bool = False) -> None:
    choices = ["json", "pretty"] + (["dsl"] if dsl else [])
    parser.add_argument("--format", choices=choices, default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ispace",
        description="Work with information-space programs: parse, specialize, "
        "classify, explain, operationalize, generate, and serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="validate a program and echo its canonical form")
    p.add_argument("file")
    _add_format(p, dsl=True)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("specialize", help="partially evaluate a program")
    p.add_argument("file")
    p.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="settle a test: K=V chooses, K alone chooses the flag, K!=V denies",
    )
    _add_format(p, dsl=True)
    p.set_defaults(func=cmd_specialize)

    p = sub.add_parser("classify", help="classify activities against a program")
    p.add_argument("file")
    p.add_argument("--activities", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("coverage", help="aggregate activity verdicts")
    p.add_argument("file")
    p.add_argument("--activities", required=True)
    p.add_argument("--max-complete-ratio", type=float, default=None)
    _add_format(p)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("explain", help="prove a goal and print the explanation tree")
    p.add_argument("--theory", required=True)
    p.add_argument("--facts", required=True)
    p.add_argument("--goal", required=True)
    p.add_argument("--all", action="store_true")
    p.add_argument("--depth", type=int, default=64)
    p.add_argument("--solutions", type=int, default=256)
    _add_format(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("generalize", help="regress an explanation to its general form")
    p.add_argument("--theory", required=True)
    p.add_argument("--tree", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_generalize)

    p = sub.add_parser("cut", help="split a generalized explanation at a frontier")
    p.add_argument("--tree", required=True)
    p.add_argument("--frontier", required=True, type=_frontier,
                   metavar="root|leaves|preds:P1,P2|depth:K")
    p.add_argument("--id", default="e1")
    _add_format(p)
    p.set_defaults(func=cmd_cut)

    p = sub.add_parser("generate", help="compile operationalized explanations into a model")
    p.add_argument("ops", nargs="+", metavar="OP_FILE")
    p.add_argument("--theory", required=True)
    p.add_argument("--bindings", default=None)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--depth", type=int, default=64)
    _add_format(p, dsl=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("assess", help="score candidate frontiers against probe activities")
    p.add_argument("--theory", required=True)
    p.add_argument("--tree", required=True)
    p.add_argument("--frontiers", required=True, type=_frontier_list,
                   metavar="SPEC[;SPEC...]")
    p.add_argument("--probes", required=True)
    p.add_argument("--bindings", default=None)
    _add_format(p)
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("order", help="search for an assignment between two programs")
    p.add_argument("--general", required=True)
    p.add_argument("--specific", required=True)
    p.add_argument("--budget", type=int, default=20000)
    _add_format(p)
    p.set_defaults(func=cmd_order)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--port", type=int, default=8000,
                   help="listen port (the PIPE_PORT environment variable wins)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--models-dir", default=None)
    p.add_argument("--snapshot", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON input: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
