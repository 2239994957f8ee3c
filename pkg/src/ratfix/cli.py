"""Command-line surface: ``ratfix SUBCOMMAND ...``.

Exit codes: 0 for success (and positive answers), 1 for valid negative
answers (a spec that is not bipointed, systems that are not bisimilar, a
failing demo), 2 for input errors, 3 for an exceeded resource budget.
Diagnostics go to standard error; data goes to standard output.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import behaviors, bisim, demos, langops, sosdsl, streams, synthesis
from .errors import BudgetError, InputError, RatfixError
from .sosdsl import SpecParseError


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_system(path: str) -> behaviors.PointedCoalgebra:
    try:
        doc = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None
    system, root = behaviors.system_from_json(doc)
    if root is None:
        raise InputError(f"{path}: system document has no root")
    return behaviors.PointedCoalgebra(system, root)


def _write_system(p: behaviors.PointedCoalgebra, out_path: str | None):
    doc = behaviors.system_to_json(p.system, p.root)
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_bindings(pairs, load) -> dict:
    env = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise InputError(f"binding {pair!r} must have the form name=VALUE")
        name, value = pair.split("=", 1)
        env[name.strip()] = load(value.strip())
    return env


def _load_spec(path: str) -> sosdsl.SpecDoc:
    doc = sosdsl.parse_spec(_read_text(path))
    violations = sosdsl.validate_spec(doc)
    errors = [v for v in violations if v.severity == "error"]
    for v in violations:
        print(f"{path}:{v}", file=sys.stderr)
    if errors:
        raise InputError(f"{path}: specification is not bipointed")
    return doc


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_validate(args) -> int:
    try:
        doc = sosdsl.parse_spec(_read_text(args.spec))
    except SpecParseError as exc:
        for d in exc.diagnostics:
            print(f"{args.spec}:{d}", file=sys.stderr)
        return 2
    violations = sosdsl.validate_spec(doc)
    for v in violations:
        print(f"{args.spec}:{v}", file=sys.stderr)
    if sosdsl.is_bipointed(violations):
        print("bipointed")
        return 0
    print("not bipointed")
    return 1


def _cmd_apply(args) -> int:
    spec = _load_spec(args.spec)
    env = _parse_bindings(args.bind, _load_system)
    result = synthesis.eval_term(spec, env, args.term, minimize_levels=args.minimize_levels)
    _write_system(result, args.output)
    return 0


def _cmd_minimize(args) -> int:
    p = _load_system(args.system)
    _write_system(bisim.minimize(p), args.output)
    return 0


def _cmd_bisim(args) -> int:
    a = _load_system(args.left)
    b = _load_system(args.right)
    if bisim.bisimilar(a, b):
        print("bisimilar")
        return 0
    print("not bisimilar")
    return 1


def _cmd_lasso(args) -> int:
    p = _load_system(args.system)
    print(streams.lasso_of(p))
    return 0


def _cmd_unfold(args) -> int:
    spec = streams.parse_gsos_spec(_read_text(args.spec))
    env = _parse_bindings(args.bind, streams.parse_lasso)
    values = streams.gsos_unfold(spec, env, args.term, args.count, budget=args.budget)
    print(" ".join(str(v) for v in values))
    return 0


def _cmd_words(args) -> int:
    p = _load_system(args.system)
    if p.system.kind.functor == behaviors.NDA:
        p = langops.nda_to_dfa(p)
    words = langops.enumerate_words(p, args.max_len)
    print(json.dumps(words))
    return 0


def _cmd_dot(args) -> int:
    p = _load_system(args.system)
    print(behaviors.to_dot(p.system, p.root))
    return 0


def _cmd_demo(args) -> int:
    lines, ok = demos.run_demo(args.name)
    for line in lines:
        print(line)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratfix",
        description="Validate bipointed SOS specifications and apply them to finite systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check that a specification is bipointed")
    p.add_argument("spec")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("apply", help="apply a specified operation to finite systems")
    p.add_argument("spec")
    p.add_argument("--term", required=True, help='term over the signature, e.g. "zip(s, t)"')
    p.add_argument("--bind", action="append", metavar="NAME=SYS.json", help="bind a term variable to a system file")
    p.add_argument("--minimize-levels", action="store_true", help="minimize between nesting levels")
    p.add_argument("-o", "--output", help="write the result system here instead of stdout")
    p.set_defaults(fn=_cmd_apply)

    p = sub.add_parser("minimize", help="reachable restriction + bisimilarity quotient")
    p.add_argument("system")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_minimize)

    p = sub.add_parser("bisim", help="decide bisimilarity of two pointed systems")
    p.add_argument("left")
    p.add_argument("right")
    p.set_defaults(fn=_cmd_bisim)

    p = sub.add_parser("lasso", help="print the canonical lasso of a stream system")
    p.add_argument("system")
    p.set_defaults(fn=_cmd_lasso)

    p = sub.add_parser("unfold", help="run a GSOS stream spec by term rewriting")
    p.add_argument("spec")
    p.add_argument("--term", required=True)
    p.add_argument("--bind", action="append", metavar='NAME="pre | cyc"', help="bind a term variable to a lasso")
    p.add_argument("-n", "--count", type=int, required=True, help="number of output values")
    p.add_argument("--budget", type=int, default=streams.DEFAULT_BUDGET, help="configuration node budget")
    p.set_defaults(fn=_cmd_unfold)

    p = sub.add_parser("words", help="accepted words up to a length (nda is determinized first)")
    p.add_argument("system")
    p.add_argument("--max-len", type=int, required=True)
    p.set_defaults(fn=_cmd_words)

    p = sub.add_parser("dot", help="print a system in DOT format")
    p.add_argument("system")
    p.set_defaults(fn=_cmd_dot)

    p = sub.add_parser("demo", help="run a shipped self-verifying scenario")
    p.add_argument("name", choices=sorted(demos.DEMOS))
    p.set_defaults(fn=_cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SpecParseError as exc:
        for d in exc.diagnostics:
            print(str(d), file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InputError, RatfixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
