"""``fusecalc`` command-line interface.

Exit codes: 0 when at least one model exists (or a check passed), 1 when
every branch closed (or a DL knowledge base is unsatisfiable), 2 on static
errors, 3 on evaluation errors such as an exhausted step budget.
"""
from __future__ import annotations

import argparse
import sys

from . import dl
from .bridge import induced_abox, monotonicity_lint
from .engine import DEFAULT_MAX_STEPS, Evaluator
from .errors import FusecalcError, StaticError, StratificationError
from .eventcalc import assemble, render_prelude
from .kernel import Interpretation
from .parser import parse_files
from .render import render_model, write_machine
from .rules import check_program
from .strat import check_sbtp, compute_strata

EXIT_MODELS, EXIT_NO_MODELS, EXIT_STATIC, EXIT_EVAL = 0, 1, 2, 3


def load(paths, prelude=True):
    """Parse, assemble and statically check a program; returns (program, strata, warnings)."""
    program = assemble(parse_files(paths), prelude_rules=prelude)
    check_program(program)
    strata = compute_strata(program)
    violations = check_sbtp(program, strata)
    if violations:
        raise StratificationError(violations)
    return program, strata, monotonicity_lint(program)


def _format_beta(beta):
    if beta is None:
        return "{}"
    return "{" + ", ".join(f"{k}={v}" for k, v in sorted(beta.items())) + "}"


def _tracer(out):
    def trace(index, rule, beta, layer, new):
        name = rule.name or f"rule {index + 1}"
        t, s = layer
        where = "untimed" if t is None else f"time {t}"
        stage = "fail" if rule.head is None else ("delayed" if s == float("inf") else f"stratum {s}")
        added = ", ".join(str(a) for a in new)
        verb = "closes branch" if rule.head is None else f"adds {added}"
        print(f"fire {name} {_format_beta(beta)} at {where}, {stage}: {verb}", file=out)
    return trace


def _render_text(models):
    if not models:
        return "no models\n"
    chunks = []
    for k, m in enumerate(models, 1):
        body = render_model(m)
        chunks.append(f"% model {k} of {len(models)}\n" + (body + "\n" if body else ""))
    return "\n".join(chunks)


def cmd_run(args, out, err):
    program, strata, warnings = load(args.files, prelude=not args.no_prelude)
    for w in warnings:
        print(w, file=err)
    if args.explain_strata:
        print(strata.explain(program), file=err)
    ev = Evaluator(program, strata, args.max_steps,
                   trace=_tracer(err) if args.trace else None, use_una=not args.no_una)
    models = ev.run(first_only=args.first_model)
    if args.format == "machine":
        out.write(write_machine(models))
    else:
        out.write(_render_text(models))
    return EXIT_MODELS if models else EXIT_NO_MODELS


def cmd_check(args, out, err):
    program, strata, warnings = load(args.files, prelude=not args.no_prelude)
    for w in warnings:
        print(w, file=err)
    if args.explain_strata:
        print(strata.explain(program), file=out)
    print(f"ok: {len(program.rules)} rules, {len(warnings)} warnings", file=out)
    return EXIT_MODELS


def cmd_dl_check(args, out, err):
    program = parse_files([args.kbfile])
    if not program.tboxes:
        raise StaticError(f"{args.kbfile}: no tbox block")
    facts = Interpretation(a for r in program.rules if r.is_fact for a in r.head_atoms())
    times = facts.times() or [None]
    status = EXIT_MODELS
    for name in sorted(program.tboxes):
        tbox = program.tboxes[name]
        for t in times:
            abox = dl.ABox() if t is None else induced_abox(facts, t)
            sat = (dl.is_satisfiable(abox, tbox) if args.no_una
                   else dl.is_satisfiable_una(abox, tbox))
            where = name if t is None else f"{name} @ {t}"
            print(f"{where}: {'SAT' if sat else 'UNSAT'}", file=out)
            if not sat:
                status = EXIT_NO_MODELS
    return status


def build_parser():
    p = argparse.ArgumentParser(
        prog="fusecalc",
        description="Possible models of stratified disjunctive logic programs with time, "
                    "description-logic calls and an event-calculus prelude.")
    p.add_argument("--dump-prelude", action="store_true",
                   help="print the event-calculus prelude and exit")
    sub = p.add_subparsers(dest="command")

    run = sub.add_parser("run", help="compute possible models")
    run.add_argument("files", nargs="+")
    mode = run.add_mutually_exclusive_group()
    mode.add_argument("--all-models", action="store_true", help="all models (default)")
    mode.add_argument("--first-model", action="store_true", help="stop after the first model")
    run.add_argument("--trace", action="store_true", help="log every fired closure to stderr")
    run.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    run.add_argument("--format", choices=("text", "machine"), default="text")
    run.add_argument("--no-prelude", action="store_true")
    run.add_argument("--no-una", action="store_true",
                     help="do not add unique-name assertions to DL-calls")
    run.add_argument("--explain-strata", action="store_true")

    check = sub.add_parser("check", help="static checks only")
    check.add_argument("files", nargs="+")
    check.add_argument("--no-prelude", action="store_true")
    check.add_argument("--explain-strata", action="store_true")

    dlc = sub.add_parser("dl-check", help="satisfiability of a KB file per tbox and time")
    dlc.add_argument("kbfile")
    dlc.add_argument("--no-una", action="store_true")
    return p


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.dump_prelude:
        out.write(render_prelude())
        return EXIT_MODELS
    if args.command is None:
        parser.print_usage(err)
        return EXIT_STATIC
    if getattr(args, "max_steps", 1) <= 0:
        print("error: --max-steps must be positive", file=err)
        return EXIT_STATIC
    handler = {"run": cmd_run, "check": cmd_check, "dl-check": cmd_dl_check}[args.command]
    try:
        return handler(args, out, err)
    except OSError as e:
        print(f"error: {e}", file=err)
        return EXIT_STATIC
    except StaticError as e:
        print(f"error: {e}", file=err)
        return EXIT_STATIC
    except FusecalcError as e:
        print(f"error: {e}", file=err)
        return EXIT_EVAL


if __name__ == "__main__":
    sys.exit(main())
