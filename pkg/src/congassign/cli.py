"""Command-line interface.

Exit codes: 0 when the queried object exists or the checked property holds,
1 for a certified no or a violated property, 2 for unusable input, 3 when a
resource guard tripped.
"""

from __future__ import annotations

import argparse
import sys

from .cp import KAttempt, solve_cp
from .errors import ResourceGuardError
from .generator import RandomSpec, gen_random
from .model import CP, EF, NS, Instance, validate_instance
from .model import check as check_assignment
from .ns import ns_solve
from .oracle import solve_exact
from .textio import (
    ParseError,
    parse_assignment,
    parse_instance,
    parse_x3c,
    write_assignment,
    write_instance,
)
from .x3c import exact_cover_exists, reduce_x3c_to_ef, validate_x3c

_CONCEPTS = {"ns": NS, "ef": EF, "cp": CP}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="congassign",
        description="Solvers and checkers for congested assignment instances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check instance well-formedness")
    p.add_argument("file")

    p = sub.add_parser("solve", help="decide existence and print a witness")
    p.add_argument("file")
    p.add_argument(
        "--concept",
        required=True,
        choices=["ns", "cp", "ef-exact", "cp-exact", "ns-exact"],
        help="ns: constructive Nash-stable; cp: competitive solver; "
        "*-exact: profile-enumeration oracle",
    )
    p.add_argument(
        "--trace",
        action="store_true",
        help="print one line per solver round (cp only)",
    )

    p = sub.add_parser("check", help="check an assignment against an instance")
    p.add_argument("file")
    p.add_argument("--assignment", required=True)
    p.add_argument("--concept", required=True, choices=sorted(_CONCEPTS))

    p = sub.add_parser("gen", help="generate a seeded random instance")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--posts", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tie-prob", type=float, default=0.3)

    p = sub.add_parser(
        "reduce-x3c",
        help="emit the envy-freeness instance encoding an exact-cover question",
    )
    p.add_argument("file")
    p.add_argument(
        "--strict",
        action="store_true",
        help="report strictness violations as primary validation output",
    )

    p = sub.add_parser("cover", help="brute-force exact cover search")
    p.add_argument("file")

    return parser


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _load_instance(path: str) -> Instance:
    instance = parse_instance(_read(path))
    verdict = validate_instance(instance)
    if not verdict.holds:
        for witness in verdict.witnesses:
            print(witness.describe(), file=sys.stderr)
        raise ParseError("instance is not well-formed", 1, 1)
    return instance


def _print_trace(instance: Instance, attempts: tuple[KAttempt, ...]) -> None:
    for attempt in attempts:
        print(f"# k={attempt.empty_posts}")
        inner = attempt.extension.inner
        for record in attempt.solve.trace:
            table = ",".join(f"{a}={record.table_before[a]}" for a in inner.posts)
            if record.obstruction is None:
                obstruction = "A'={} V'={}"
                invalidated = "-"
            else:
                obstruction = (
                    "A'={" + ",".join(record.obstruction.posts) + "} "
                    "V'={" + ",".join(record.obstruction.agents) + "}"
                )
                invalidated = ",".join(f"{a}@{d}" for a, d in record.invalidated)
            print(
                f"iter {record.index} | T: {table} | flow={record.flow_value}"
                f" | obstruction: {obstruction} | invalidated: {invalidated}"
            )


def _cmd_validate(args) -> int:
    instance = parse_instance(_read(args.file))
    verdict = validate_instance(instance)
    if verdict.holds:
        print("valid")
        return 0
    for witness in verdict.witnesses:
        print(witness.describe())
    return 1


def _cmd_solve(args) -> int:
    if args.trace and args.concept != "cp":
        print("--trace is only available with --concept cp", file=sys.stderr)
        return 2
    instance = _load_instance(args.file)
    if args.concept == "ns":
        assignment = ns_solve(instance)
    elif args.concept == "cp":
        result = solve_cp(instance, keep_trace=args.trace)
        if args.trace:
            _print_trace(instance, result.attempts)
        assignment = result.assignment
    else:
        concept = _CONCEPTS[args.concept.split("-")[0]]
        assignment = solve_exact(instance, concept)
    if assignment is None:
        print("no")
        return 1
    sys.stdout.write(write_assignment(instance, assignment))
    return 0


def _cmd_check(args) -> int:
    instance = _load_instance(args.file)
    assignment = parse_assignment(_read(args.assignment), instance)
    verdict = check_assignment(instance, assignment, _CONCEPTS[args.concept])
    if verdict.holds:
        print("holds")
        return 0
    for witness in verdict.witnesses:
        print(witness.describe())
    return 1


def _cmd_gen(args) -> int:
    spec = RandomSpec(
        agents=args.agents, posts=args.posts, seed=args.seed, tie_prob=args.tie_prob
    )
    sys.stdout.write(write_instance(gen_random(spec)))
    return 0


def _cmd_reduce(args) -> int:
    x = parse_x3c(_read(args.file))
    verdict = validate_x3c(x, strict=args.strict)
    if not verdict.holds:
        for witness in verdict.witnesses:
            print(witness.describe(), file=sys.stderr)
        return 2
    strict = validate_x3c(x, strict=True)
    if not strict.holds:
        for witness in strict.witnesses:
            print(witness.describe(), file=sys.stderr)
        return 2
    sys.stdout.write(write_instance(reduce_x3c_to_ef(x)))
    return 0


def _cmd_cover(args) -> int:
    x = parse_x3c(_read(args.file))
    cover = exact_cover_exists(x)
    if cover is None:
        print("no")
        return 1
    print("cover:" + "".join(f" {set_id}" for set_id in cover.ids))
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "solve": _cmd_solve,
    "check": _cmd_check,
    "gen": _cmd_gen,
    "reduce-x3c": _cmd_reduce,
    "cover": _cmd_cover,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ResourceGuardError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return 3
    except (ParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    raise SystemExit(main())
